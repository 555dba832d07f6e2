#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wifisense/core.hpp"

namespace wifisense::io {

enum class Format { Csv, Ndjson };

inline constexpr const char* kCsvHeader = "timestamp_s,detector_id,rssi_dbm";

Format parse_format(const std::string& name);
/// `.ndjson` / `.jsonl` map to NDJSON, everything else to CSV.
Format format_for_path(const std::filesystem::path& path);

/// Parse errors carry the 1-based line number. Records may interleave across
/// detectors, but timestamps must not decrease within one detector.
std::vector<RssiRecord> read_records(std::istream& in, Format format);

Session ingest(std::istream& in, Format format, Label label = Label::noise(), Real duration = 0);
Session ingest_file(const std::filesystem::path& path, std::optional<Format> format = std::nullopt,
                    Label label = Label::noise(), Real duration = 0);

/// Records ordered by time, then detector id.
void write_session(const Session& session, std::ostream& out, Format format);
void write_session_file(const Session& session, const std::filesystem::path& path,
                        std::optional<Format> format = std::nullopt);

/// Shortest decimal text that parses back to the same double.
std::string format_real(Real value);

/// Accepts one TCP connection at a time; each connection carries one session
/// as newline-terminated NDJSON records and ends when the peer closes.
class TcpListener {
 public:
  /// Port 0 picks an ephemeral port (see port()).
  explicit TcpListener(std::uint16_t port, const std::string& bind_address = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  Session accept_session(Label label = Label::noise(), Real duration = 0);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace wifisense::io
