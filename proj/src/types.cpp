#include "chris/types.hpp"

#include <algorithm>
#include <cmath>

namespace chris {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidHr: return "InvalidHr";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::TraceTooShort: return "TraceTooShort";
    case ErrorKind::NoPeaks: return "NoPeaks";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UncalibratedQuantization: return "UncalibratedQuantization";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyWindowSet: return "EmptyWindowSet";
    case ErrorKind::MissingLabels: return "MissingLabels";
    case ErrorKind::NoFeasibleConfig: return "NoFeasibleConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::AT: return "AT";
    case ModelKind::TimePPGSmall: return "TimePPG-Small";
    case ModelKind::TimePPGBig: return "TimePPG-Big";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (ModelKind kind : kAllModels) {
    if (text == to_string(kind)) return kind;
  }
  if (text == "small" || text == "TimePPGSmall") return ModelKind::TimePPGSmall;
  if (text == "big" || text == "TimePPGBig") return ModelKind::TimePPGBig;
  if (text == "at") return ModelKind::AT;
  throw Error(ErrorKind::InvalidArgument, "unknown model kind '" + std::string(text) + "'");
}

std::string_view to_string(Device device) { return device == Device::Watch ? "Watch" : "Phone"; }

std::string_view to_string(Execution execution) {
  return execution == Execution::Local ? "Local" : "Hybrid";
}

Execution parse_execution(std::string_view text) {
  if (text == "Local") return Execution::Local;
  if (text == "Hybrid") return Execution::Hybrid;
  throw Error(ErrorKind::InvalidArgument, "unknown execution '" + std::string(text) + "'");
}

std::string_view to_string(ConnectionStatus status) {
  return status == ConnectionStatus::Connected ? "Connected" : "Disconnected";
}

ConnectionStatus parse_connection_status(std::string_view text) {
  if (text == "Connected") return ConnectionStatus::Connected;
  if (text == "Disconnected") return ConnectionStatus::Disconnected;
  throw Error(ErrorKind::InvalidArgument, "unknown connection status '" + std::string(text) + "'");
}

double clamp_bpm(double bpm) {
  static const double lo = std::nextafter(kMinBpm, kMaxBpm);
  static const double hi = std::nextafter(kMaxBpm, kMinBpm);
  if (std::isnan(bpm)) return lo;
  return std::clamp(bpm, lo, hi);
}

}  // namespace chris
