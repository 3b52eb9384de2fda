#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace chris::predictors {

struct HrEstimate {
  double bpm = 0.0;
};

inline constexpr std::size_t kRollingMeanWidth = 24;

/// Centered rolling mean over [n - 12, n + 12), truncated at the edges.
std::vector<double> rolling_mean(std::span<const double> x, std::size_t width = kRollingMeanWidth);

/// Sub-sample peak positions, one per maximal run where the signal exceeds its
/// rolling mean. Each peak is the run's maximum (first on ties), refined by a
/// 3-point parabola when both neighbours exist.
std::vector<double> at_peaks(std::span<const double> ppg);

/// Adaptive Threshold heart-rate estimate from a 256-sample window at 32 Hz:
/// 60 * fs / median inter-peak gap, clamped to (20, 300) BPM. Empty when
/// fewer than two peaks exist.
std::optional<HrEstimate> at_try_predict(std::span<const double> ppg);

/// Same as at_try_predict but throws NoPeaks.
HrEstimate at_predict(std::span<const double> ppg);

}  // namespace chris::predictors
