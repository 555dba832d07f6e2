#include "wifisense/error.hpp"

namespace wifisense {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptySession: return "EmptySession";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::NoCompleteWindow: return "NoCompleteWindow";
    case Errc::RateTooHigh: return "RateTooHigh";
    case Errc::UnderfilledWindow: return "UnderfilledWindow";
    case Errc::WindowTooShort: return "WindowTooShort";
    case Errc::InsufficientCalibration: return "InsufficientCalibration";
    case Errc::DetectorMismatch: return "DetectorMismatch";
    case Errc::AlignmentRequired: return "AlignmentRequired";
    case Errc::MalformedFeature: return "MalformedFeature";
    case Errc::LayoutMismatch: return "LayoutMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::ModelMismatch: return "ModelMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace wifisense
