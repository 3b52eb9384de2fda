#include "chris/at.hpp"

#include <algorithm>

#include "chris/error.hpp"
#include "chris/signal.hpp"
#include "chris/types.hpp"

namespace chris::predictors {
namespace {

void check_length(std::span<const double> ppg) {
  if (ppg.size() != signal::kWindowLength) {
    throw Error(ErrorKind::ShapeMismatch, "AT expects 256 samples, got " + std::to_string(ppg.size()));
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

std::vector<double> rolling_mean(std::span<const double> x, std::size_t width) {
  const std::size_t n = x.size();
  const std::size_t before = width / 2;
  const std::size_t after = width - before;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n, i + after);
    double sum = 0.0;
    for (std::size_t m = lo; m < hi; ++m) sum += x[m];
    out[i] = sum / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<double> at_peaks(std::span<const double> ppg) {
  const std::size_t n = ppg.size();
  const std::size_t before = kRollingMeanWidth / 2;
  const std::size_t after = kRollingMeanWidth - before;

  // x[i] minus its rolling mean, accumulated as differences so a flat signal
  // gives exactly zero.
  std::vector<double> excess(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n, i + after);
    double sum = 0.0;
    for (std::size_t m = lo; m < hi; ++m) sum += ppg[i] - ppg[m];
    excess[i] = sum / static_cast<double>(hi - lo);
  }

  std::vector<double> peaks;
  std::size_t i = 0;
  while (i < n) {
    if (!(excess[i] > 0.0)) {
      ++i;
      continue;
    }
    std::size_t best = i;
    while (i < n && excess[i] > 0.0) {
      if (ppg[i] > ppg[best]) best = i;
      ++i;
    }
    double pos = static_cast<double>(best);
    if (best > 0 && best + 1 < n) {
      const double l = ppg[best - 1], c = ppg[best], r = ppg[best + 1];
      const double denom = l - 2.0 * c + r;
      if (denom < 0.0) pos += std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
    }
    peaks.push_back(pos);
  }
  return peaks;
}

std::optional<HrEstimate> at_try_predict(std::span<const double> ppg) {
  check_length(ppg);
  const auto peaks = at_peaks(ppg);
  if (peaks.size() < 2) return std::nullopt;
  std::vector<double> gaps;
  gaps.reserve(peaks.size() - 1);
  for (std::size_t k = 1; k < peaks.size(); ++k) gaps.push_back(peaks[k] - peaks[k - 1]);
  const double gap = median(std::move(gaps));
  return HrEstimate{clamp_bpm(60.0 * signal::kSampleRateHz / gap)};
}

HrEstimate at_predict(std::span<const double> ppg) {
  if (auto est = at_try_predict(ppg)) return *est;
  throw Error(ErrorKind::NoPeaks, "fewer than two regions above the rolling mean");
}

}  // namespace chris::predictors
