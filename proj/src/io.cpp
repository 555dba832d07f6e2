#include "wifisense/io.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "wifisense/error.hpp"

namespace wifisense::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, const char* field, std::size_t line) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(Errc::MalformedRecord, "line " + std::to_string(line) + ": bad " + field + " '" + std::string(text) + "'",
                line);
  }
  return value;
}

void check_record(const RssiRecord& r, std::size_t line) {
  if (!std::isfinite(r.timestamp_s) || !std::isfinite(r.rssi_dbm) || r.timestamp_s < 0) {
    throw Error(Errc::MalformedRecord, "line " + std::to_string(line) + ": non-finite or negative value", line);
  }
}

RssiRecord parse_csv_line(std::string_view s, std::size_t line) {
  const auto c1 = s.find(',');
  const auto c2 = c1 == std::string_view::npos ? c1 : s.find(',', c1 + 1);
  if (c2 == std::string_view::npos || s.find(',', c2 + 1) != std::string_view::npos) {
    throw Error(Errc::MalformedRecord, "line " + std::to_string(line) + ": expected three fields", line);
  }
  RssiRecord r;
  r.timestamp_s = parse_number<Real>(s.substr(0, c1), "timestamp_s", line);
  r.detector_id = parse_number<DetectorId>(s.substr(c1 + 1, c2 - c1 - 1), "detector_id", line);
  r.rssi_dbm = parse_number<Real>(s.substr(c2 + 1), "rssi_dbm", line);
  return r;
}

RssiRecord parse_ndjson_line(std::string_view s, std::size_t line) {
  const auto j = nlohmann::json::parse(s.begin(), s.end(), nullptr, false);
  auto fail = [line](const std::string& why) {
    return Error(Errc::MalformedRecord, "line " + std::to_string(line) + ": " + why, line);
  };
  if (j.is_discarded() || !j.is_object()) throw fail("not a JSON object");
  for (const char* key : {"timestamp_s", "detector_id", "rssi_dbm"}) {
    if (!j.contains(key) || !j[key].is_number()) throw fail(std::string("missing or non-numeric ") + key);
  }
  if (!j["detector_id"].is_number_integer()) throw fail("detector_id must be an integer");
  return {j["timestamp_s"].get<Real>(), j["detector_id"].get<DetectorId>(), j["rssi_dbm"].get<Real>()};
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "ndjson" || name == "jsonl") return Format::Ndjson;
  throw Error(Errc::InvalidArgument, "unknown session format '" + name + "'");
}

Format format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".ndjson" || ext == ".jsonl" ? Format::Ndjson : Format::Csv;
}

std::vector<RssiRecord> read_records(std::istream& in, Format format) {
  std::vector<RssiRecord> records;
  std::map<DetectorId, Real> last_time;
  std::string raw;
  std::size_t line = 0;
  bool header_seen = format != Format::Csv;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty()) continue;
    if (!header_seen) {
      if (s != kCsvHeader) {
        throw Error(Errc::MalformedRecord, "line " + std::to_string(line) + ": expected header '" + kCsvHeader + "'",
                    line);
      }
      header_seen = true;
      continue;
    }
    const RssiRecord r = format == Format::Csv ? parse_csv_line(s, line) : parse_ndjson_line(s, line);
    check_record(r, line);
    auto [it, fresh] = last_time.try_emplace(r.detector_id, r.timestamp_s);
    if (!fresh) {
      if (r.timestamp_s < it->second) {
        throw Error(Errc::MalformedRecord,
                    "line " + std::to_string(line) + ": timestamp goes backwards for detector " +
                        std::to_string(r.detector_id),
                    line);
      }
      it->second = r.timestamp_s;
    }
    records.push_back(r);
  }
  return records;
}

Session ingest(std::istream& in, Format format, Label label, Real duration) {
  const auto records = read_records(in, format);
  if (records.empty()) throw Error(Errc::EmptySession, "input holds no records");
  return assemble_session(records, duration, label);
}

Session ingest_file(const std::filesystem::path& path, std::optional<Format> format, Label label, Real duration) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  Session s = ingest(in, format.value_or(format_for_path(path)), label, duration);
  s.metadata = path.filename().string();
  return s;
}

std::string format_real(Real value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_session(const Session& session, std::ostream& out, Format format) {
  std::vector<std::tuple<Real, DetectorId, Real>> rows;
  for (const auto& s : session.series) {
    for (Eigen::Index i = 0; i < s.size(); ++i) rows.emplace_back(s.times[i], s.detector_id, s.rssi[i]);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  if (format == Format::Csv) out << kCsvHeader << '\n';
  for (const auto& [t, id, v] : rows) {
    if (format == Format::Csv) {
      out << format_real(t) << ',' << id << ',' << format_real(v) << '\n';
    } else {
      out << "{\"timestamp_s\":" << format_real(t) << ",\"detector_id\":" << id << ",\"rssi_dbm\":" << format_real(v)
          << "}\n";
    }
  }
}

void write_session_file(const Session& session, const std::filesystem::path& path, std::optional<Format> format) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  write_session(session, out, format.value_or(format_for_path(path)));
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_address) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(Errc::Io, "cannot create socket");
  const int yes = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw Error(Errc::InvalidArgument, "bad bind address '" + bind_address + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 1) != 0) {
    ::close(fd_);
    throw Error(Errc::Io, "cannot listen on port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

Session TcpListener::accept_session(Label label, Real duration) {
  const int conn = ::accept(fd_, nullptr, nullptr);
  if (conn < 0) throw Error(Errc::Io, "accept failed");
  std::string data;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::recv(conn, buf, sizeof buf, 0);
    if (n <= 0) break;
    data.append(buf, static_cast<std::size_t>(n));
  }
  ::close(conn);
  std::istringstream in(data);
  Session s = ingest(in, Format::Ndjson, label, duration);
  s.metadata = "tcp:" + std::to_string(port_);
  return s;
}

}  // namespace wifisense::io
