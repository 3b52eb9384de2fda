#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chris/types.hpp"
#include "chris/zoo.hpp"

namespace chris::engine {

struct MaxMae {
  double bpm = 0.0;
};

struct MaxEnergy {
  double mj = 0.0;
};

using Constraint = std::variant<MaxMae, MaxEnergy>;

/// "max-mae=5.6" or "max-energy=0.3". The value must be > 0 (inf allowed).
Constraint parse_constraint(std::string_view text);
std::string to_string(const Constraint& c);
double threshold_of(const Constraint& c);

/// Connected keeps every row; Disconnected drops the Hybrid ones. Throws
/// NoFeasibleConfig when nothing is left.
zoo::ConfigTable feasible(const zoo::ConfigTable& table, ConnectionStatus status);

struct Selection {
  zoo::Configuration config;
  // No row met the constraint; config is the closest one instead
  // (min MAE under MaxMae, min energy under MaxEnergy).
  bool soft_violation = false;
};

/// One pass over `rows`. MaxMae: least energy with avg_mae <= th. MaxEnergy:
/// least MAE with avg_watch_mj <= th. Ties go to the other axis, then to
/// identity order. Throws NoFeasibleConfig on an empty table.
Selection select(std::span<const zoo::Configuration> rows, const Constraint& c);

struct Dispatch {
  ModelKind model = ModelKind::AT;
  Device device = Device::Watch;

  bool operator==(const Dispatch&) const = default;
};

/// activity <= threshold -> (simple, Watch); otherwise complex, on the phone
/// for Hybrid configurations.
Dispatch dispatch(const zoo::Configuration& config, ActivityId predicted);

/// Holds the current configuration; re-selects only when the connection
/// status or the constraint changes.
class DecisionEngine {
 public:
  struct Event {
    ConnectionStatus status;
    Constraint constraint;
    Selection selection;
  };

  DecisionEngine(zoo::ConfigTable table, Constraint constraint,
                 ConnectionStatus status = ConnectionStatus::Connected);

  /// Returns true when a new selection was made. Throws NoFeasibleConfig,
  /// leaving the previous selection in place.
  bool set_status(ConnectionStatus status);
  bool set_constraint(Constraint constraint);

  const Selection& current() const noexcept { return current_; }
  ConnectionStatus status() const noexcept { return status_; }
  const Constraint& constraint() const noexcept { return constraint_; }
  const std::vector<Event>& events() const noexcept { return events_; }

  Dispatch route(ActivityId predicted) const { return dispatch(current_.config, predicted); }

 private:
  void reselect(ConnectionStatus status, Constraint constraint);

  zoo::ConfigTable table_;
  Constraint constraint_;
  ConnectionStatus status_;
  Selection current_;
  std::vector<Event> events_;
};

/// {"constraint": "max-mae=5.6", "status": "Connected"}; status optional.
struct Control {
  Constraint constraint;
  ConnectionStatus status = ConnectionStatus::Connected;
};

Control parse_control(const std::string& json);
Control load_control(const std::filesystem::path& path);

}  // namespace chris::engine
