#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "chris/at.hpp"
#include "chris/signal.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chris;
using namespace chris::predictors;

namespace {

std::vector<double> sinusoid(double hz, double phase = 0.0) {
  std::vector<double> x(256);
  for (int n = 0; n < 256; ++n) x[n] = std::sin(2.0 * M_PI * hz * n / 32.0 + phase);
  return x;
}

// 60 * fs / median gap between exhaustively scanned local maxima.
double oracle_bpm(const std::vector<double>& x) {
  const auto peaks = oracle::local_maxima(x);
  std::vector<double> gaps;
  for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i] - peaks[i - 1]);
  std::sort(gaps.begin(), gaps.end());
  const std::size_t m = gaps.size();
  const double med = m % 2 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
  return 60.0 * 32.0 / med;
}

}  // namespace

TEST_CASE("AT on clean sinusoids") {
  CHECK(std::abs(at_predict(sinusoid(2.0)).bpm - 120.0) <= 1.0);
  CHECK(std::abs(at_predict(sinusoid(1.0)).bpm - 60.0) <= 1.0);
  CHECK(std::abs(at_predict(sinusoid(2.0)).bpm - oracle_bpm(sinusoid(2.0))) <= 1.0);
  CHECK(std::abs(at_predict(sinusoid(1.0)).bpm - oracle_bpm(sinusoid(1.0))) <= 1.0);
}

TEST_CASE("AT error stays within 2 BPM from 40 to 200 BPM at any phase") {
  for (int bpm = 40; bpm <= 200; bpm += 5) {
    for (double phase : {0.0, 0.7, 2.1, 4.4}) {
      CHECK(std::abs(at_predict(sinusoid(bpm / 60.0, phase)).bpm - bpm) <= 2.0);
    }
  }
}

TEST_CASE("AT: constant signal has no peaks") {
  const std::vector<double> flat(256, 3.5);
  CHECK_FALSE(at_try_predict(flat).has_value());
  try {
    at_predict(flat);
    FAIL("expected NoPeaks");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoPeaks);
  }
}

TEST_CASE("AT rejects windows that are not 256 samples") {
  const std::vector<double> short_window(255, 0.0);
  try {
    at_predict(short_window);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
  }
}

TEST_CASE("AT is invariant to positive scaling and offsets") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> hr(45.0, 190.0), offset(-100.0, 100.0);
  for (int i = 0; i < 40; ++i) {
    const auto w = chris::signal::synth_window(hr(rng), ActivityId(1 + i % 9), rng());
    const std::vector<double> x(w.ppg.begin(), w.ppg.end());
    // Powers of two keep the affine map exact in floating point.
    const double a = std::ldexp(1.0, int(i % 7) - 3);
    const double c = std::floor(offset(rng));
    std::vector<double> y(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) y[n] = a * x[n] + c;
    const auto px = at_try_predict(x);
    const auto py = at_try_predict(y);
    REQUIRE(px.has_value() == py.has_value());
    if (px) CHECK(px->bpm == doctest::Approx(py->bpm).epsilon(1e-9));
  }
}

TEST_CASE("rolling mean edges are truncated") {
  std::vector<double> x(30);
  for (int i = 0; i < 30; ++i) x[i] = i;
  const auto m = rolling_mean(x);
  // n = 0 averages rows [0, 12); n = 15 averages [3, 27); n = 29 averages [17, 30).
  CHECK(m[0] == doctest::Approx(5.5));
  CHECK(m[15] == doctest::Approx(14.5));
  CHECK(m[29] == doctest::Approx(23.0));
}

TEST_CASE("AT estimates are clamped to (20, 300)") {
  // Two narrow spikes far apart: a 190-sample gap is about 10 BPM.
  std::vector<double> x(256, 0.0);
  x[20] = 1.0;
  x[210] = 1.0;
  const auto bpm = at_predict(x).bpm;
  CHECK(bpm > 20.0);
  CHECK(bpm < 21.0);
}

TEST_CASE("AT accuracy degrades with motion noise") {
  double mae1 = 0.0, mae9 = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double hr = 50.0 + 2.0 * i;
    mae1 += std::abs(at_predict(chris::signal::synth_window(hr, ActivityId(1), i).ppg).bpm - hr);
    mae9 += std::abs(at_predict(chris::signal::synth_window(hr, ActivityId(9), i).ppg).bpm - hr);
  }
  CHECK(mae9 > mae1);
}
