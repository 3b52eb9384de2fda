#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chris/signal.hpp"
#include "chris/tcn.hpp"
#include "chris/types.hpp"

namespace chris::predictors {

/// Heart-rate predictor: std::nullopt when no estimate is possible (AT NoPeaks).
using PredictFn = std::function<std::optional<double>(const signal::SampleWindow&)>;

/// The predictors available to a run, keyed by ModelKind.
class PredictorBank {
 public:
  PredictorBank();  // AT only

  void set(ModelKind kind, PredictFn fn);
  void set_tcn(ModelKind kind, QuantizedTcn model);
  bool has(ModelKind kind) const;

  /// Throws InvalidArgument when `kind` has no predictor.
  std::optional<double> predict(ModelKind kind, const signal::SampleWindow& window) const;

 private:
  std::array<PredictFn, 3> fns_;
};

/// AT plus both networks built by build_tcn with `options`.
PredictorBank default_bank(const BuildOptions& options = {});

/// Memoizes each (model, window) prediction for a fixed window sequence.
/// Not thread-safe.
class PredictionCache {
 public:
  PredictionCache(const PredictorBank& bank, std::span<const signal::SampleWindow> windows);

  std::span<const signal::SampleWindow> windows() const noexcept { return windows_; }
  const PredictorBank& bank() const noexcept { return bank_; }
  std::optional<double> get(ModelKind kind, std::size_t index);

 private:
  const PredictorBank& bank_;
  std::span<const signal::SampleWindow> windows_;
  std::array<std::vector<std::optional<double>>, 3> values_;
  std::array<std::vector<bool>, 3> ready_;
};

}  // namespace chris::predictors
