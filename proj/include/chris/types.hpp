#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "chris/error.hpp"

namespace chris {

/// Activity label doubling as difficulty rank: 1 has the fewest motion
/// artifacts, 9 the most.
class ActivityId {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 9;
  static constexpr int kCount = kMax - kMin + 1;

  constexpr ActivityId() = default;
  explicit ActivityId(int id) : id_(id) {
    if (id < kMin || id > kMax) {
      throw Error(ErrorKind::InvalidArgument, "activity id " + std::to_string(id) + " outside 1..9");
    }
  }

  constexpr int value() const noexcept { return id_; }
  constexpr auto operator<=>(const ActivityId&) const = default;

 private:
  int id_ = kMin;
};

enum class ModelKind { AT, TimePPGSmall, TimePPGBig };

inline constexpr ModelKind kAllModels[] = {ModelKind::AT, ModelKind::TimePPGSmall, ModelKind::TimePPGBig};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

enum class Device { Watch, Phone };
std::string_view to_string(Device device);

enum class Execution { Local, Hybrid };
std::string_view to_string(Execution execution);
Execution parse_execution(std::string_view text);

enum class ConnectionStatus { Connected, Disconnected };
std::string_view to_string(ConnectionStatus status);
ConnectionStatus parse_connection_status(std::string_view text);

// Heart-rate estimates are clamped to this open interval.
inline constexpr double kMinBpm = 20.0;
inline constexpr double kMaxBpm = 300.0;

double clamp_bpm(double bpm);

}  // namespace chris
