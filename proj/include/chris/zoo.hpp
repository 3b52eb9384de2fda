#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chris/bank.hpp"
#include "chris/difficulty.hpp"
#include "chris/energy.hpp"
#include "chris/signal.hpp"
#include "chris/types.hpp"

namespace chris::zoo {

inline constexpr int kMaxThreshold = ActivityId::kMax;  // thresholds run 0..9

/// Two predictors, a difficulty threshold and where the complex one runs.
/// Activities with id <= threshold use `simple`; the rest use `complex`
/// (on the phone when Hybrid).
struct Configuration {
  ModelKind simple = ModelKind::AT;
  ModelKind complex = ModelKind::TimePPGBig;
  int threshold = 0;
  Execution execution = Execution::Local;
  double avg_mae_bpm = 0.0;
  double avg_watch_mj = 0.0;
  double offload_fraction = 0.0;

  std::string label() const;  // e.g. "AT+TimePPG-Big/t6/Hybrid"
  bool same_identity(const Configuration& other) const;
};

/// Lexicographic identity order: simple name, complex name, threshold, execution.
bool identity_less(const Configuration& a, const Configuration& b);

/// True when `a` is no worse on both axes and strictly better on one.
bool dominates(const Configuration& a, const Configuration& b);

struct ConfigTable {
  std::vector<Configuration> rows;  // ascending energy, strictly descending MAE
  std::string dataset_id;
  std::string profile_set;
};

/// Sorted ascending by energy with strictly descending MAE.
bool is_pareto_sorted(std::span<const Configuration> rows);

/// Every unordered pair of `models` (roles by board energy), thresholds 0..9,
/// Local and optionally Hybrid. Throws InvalidArgument on duplicates or equal
/// board energies.
std::vector<Configuration> enumerate(std::span<const ModelKind> models, const energy::ProfileSet& profiles,
                                     bool include_hybrid = true);

// Estimate scored when a predictor yields nothing (AT without peaks).
inline constexpr double kFallbackBpm = 75.0;

/// Fills the averages of `config` over `windows`: routes each window by its
/// predicted activity, scores |hr_pred - hr_ref| and the wearable energy.
/// Invariant to window order. Throws EmptyWindowSet or MissingLabels.
Configuration profile(const Configuration& config, std::span<const ActivityId> predicted,
                      predictors::PredictionCache& predictions, const energy::ProfileSet& profiles);

/// Classifies the windows once and profiles every configuration.
std::vector<Configuration> profile_all(std::span<const Configuration> configs,
                                       std::span<const signal::SampleWindow> windows,
                                       const difficulty::ActivityClassifier& classifier,
                                       const predictors::PredictorBank& bank, const energy::ProfileSet& profiles);

std::vector<ActivityId> classify_all(std::span<const signal::SampleWindow> windows,
                                     const difficulty::ActivityClassifier& classifier);

/// Non-dominated subset; exact duplicates keep the identity-smallest row.
ConfigTable pareto_filter(std::span<const Configuration> configs, std::string dataset_id = {},
                          std::string profile_set = {});

// CSV: simple,complex,threshold,execution,avg_mae_bpm,avg_watch_mj,offload_fraction
// preceded by optional `# key=value` metadata lines. Extra trailing columns are
// ignored on read.
std::string configs_to_csv(std::span<const Configuration> rows, std::span<const std::string> metadata = {});
std::vector<Configuration> parse_configs(const std::string& csv, std::vector<std::string>* metadata = nullptr);
std::vector<Configuration> load_configs(const std::filesystem::path& path,
                                        std::vector<std::string>* metadata = nullptr);

std::string table_to_csv(const ConfigTable& table);
/// Throws InvalidArgument when the rows violate the table ordering.
ConfigTable load_table(const std::filesystem::path& path);
void save_table(const ConfigTable& table, const std::filesystem::path& path);

}  // namespace chris::zoo
