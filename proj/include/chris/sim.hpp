#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chris/bank.hpp"
#include "chris/difficulty.hpp"
#include "chris/energy.hpp"
#include "chris/engine.hpp"
#include "chris/signal.hpp"
#include "chris/zoo.hpp"

namespace chris::sim {

struct LinkInterval {
  std::size_t start = 0;  // window index, inclusive
  std::size_t end = 0;    // exclusive
  ConnectionStatus status = ConnectionStatus::Connected;
};

/// Link availability per window: sorted, disjoint intervals covering
/// [0, n_windows).
class LinkSchedule {
 public:
  LinkSchedule() = default;
  explicit LinkSchedule(std::vector<LinkInterval> intervals);

  static LinkSchedule all(std::size_t n_windows, ConnectionStatus status = ConnectionStatus::Connected);

  const std::vector<LinkInterval>& intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.empty() ? 0 : intervals_.back().end; }

  /// Throws InvalidArgument unless the intervals cover exactly [0, n_windows).
  void validate(std::size_t n_windows) const;

 private:
  std::vector<LinkInterval> intervals_;
};

// CSV `start,end,status` with optional `#` comment lines.
LinkSchedule parse_schedule(const std::string& csv);
LinkSchedule load_schedule(const std::filesystem::path& path);
std::string schedule_to_csv(const LinkSchedule& schedule);

struct WindowRecord {
  std::size_t idx = 0;
  ActivityId activity_true;
  ActivityId activity_pred;
  std::optional<ModelKind> model;  // empty for fault windows
  std::optional<Device> device;
  std::optional<double> hr_pred;
  std::optional<double> hr_ref;
  double watch_mj = 0.0;
  double phone_mj = 0.0;
  bool held = false;  // predictor gave no estimate; previous value reused
};

struct ActivityStats {
  std::size_t count = 0;
  std::size_t scored = 0;  // windows contributing to mae_bpm
  double mae_bpm = 0.0;
  double watch_mj = 0.0;  // total
};

struct ConfigSwitch {
  std::size_t window = 0;
  ConnectionStatus status = ConnectionStatus::Connected;
  zoo::Configuration config;
  bool soft_violation = false;
};

/// A schedule interval during which no configuration was available.
struct Fault {
  std::size_t start = 0;
  std::size_t end = 0;
  ErrorKind kind = ErrorKind::NoFeasibleConfig;
  std::string message;
};

struct SimReport {
  std::size_t n_windows = 0;
  std::size_t scored_windows = 0;
  double mae_bpm = 0.0;
  double watch_mj_total = 0.0;
  double watch_mj_mean = 0.0;
  double phone_mj_total = 0.0;
  double offload_fraction = 0.0;
  double watch_busy_ms = 0.0;  // board inference plus BLE transfer
  double phone_busy_ms = 0.0;
  std::size_t held_estimates = 0;
  bool soft_violation = false;  // any selection fell back
  std::array<ActivityStats, ActivityId::kCount> per_activity{};
  std::vector<ConfigSwitch> config_switches;
  std::vector<Fault> faults;
  std::vector<WindowRecord> windows;
};

// Estimate reported before any predictor has produced one.
inline constexpr double kInitialHoldBpm = 75.0;

/// Streams `windows` through classification, the decision engine and the
/// predictors. Re-selects only where the schedule status changes. Windows in
/// an interval with no feasible configuration become faults.
SimReport run(std::span<const signal::SampleWindow> windows, const zoo::ConfigTable& table,
              const difficulty::ActivityClassifier& classifier, const predictors::PredictorBank& bank,
              const energy::ProfileSet& profiles, const engine::Constraint& constraint,
              const LinkSchedule& schedule);

/// As run, reusing cached predictions and precomputed classifications.
SimReport run(std::span<const ActivityId> predicted, predictors::PredictionCache& cache,
              const zoo::ConfigTable& table, const energy::ProfileSet& profiles,
              const engine::Constraint& constraint, const LinkSchedule& schedule);

/// One configuration for the whole trace, link always up.
SimReport run_forced(std::span<const ActivityId> predicted, predictors::PredictionCache& cache,
                     const zoo::Configuration& config, const energy::ProfileSet& profiles);

struct SweepRow {
  zoo::Configuration config;  // averages replaced by the measured ones
  SimReport report;
};

/// run_forced over every configuration from zoo::enumerate(models).
std::vector<SweepRow> sweep(std::span<const signal::SampleWindow> windows, std::span<const ModelKind> models,
                            const difficulty::ActivityClassifier& classifier, const predictors::PredictorBank& bank,
                            const energy::ProfileSet& profiles);

std::string report_to_json(const SimReport& report, std::span<const std::string> metadata = {});
std::string windows_to_csv(const SimReport& report);
std::string summary_to_csv(const SimReport& report);
/// Configuration table columns followed by n_windows,scored_windows,
/// phone_mj_total,watch_busy_ms,held_estimates.
std::string sweep_to_csv(std::span<const SweepRow> rows, std::span<const std::string> metadata = {});

}  // namespace chris::sim
