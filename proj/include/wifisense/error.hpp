#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wifisense {

enum class Errc {
  EmptySession,
  MalformedRecord,
  NoCompleteWindow,
  RateTooHigh,
  UnderfilledWindow,
  WindowTooShort,
  InsufficientCalibration,
  DetectorMismatch,
  AlignmentRequired,
  MalformedFeature,
  LayoutMismatch,
  EmptyDataset,
  DegenerateGeometry,
  LabelMismatch,
  ModelMismatch,
  InvalidArgument,
  Io,  // a file or socket could not be opened, read or written
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for every data/contract failure in the library.
// `line` is set by the ingestion layer for row-level errors (1-based).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), line_(line) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace wifisense
