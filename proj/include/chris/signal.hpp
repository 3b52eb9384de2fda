#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chris/types.hpp"

namespace chris::signal {

inline constexpr std::size_t kWindowLength = 256;  // 8 s at 32 Hz
inline constexpr std::size_t kWindowStride = 64;   // 2 s
inline constexpr double kSampleRateHz = 32.0;

using Channel = std::array<double, kWindowLength>;

/// One 8 s slice of single-channel PPG and 3-axis acceleration.
///
/// Lengths and the sampling rate are fixed by the type. `hr_ref` is absent for
/// unlabeled traces; when present it lies in (20, 300) BPM.
struct SampleWindow {
  static constexpr double fs = kSampleRateHz;

  Channel ppg{};
  std::array<Channel, 3> accel{};
  ActivityId activity;
  std::optional<double> hr_ref;
};

struct TraceRow {
  double t = 0.0;
  double ppg = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
  ActivityId activity;
  std::optional<double> hr_ref;
};

/// Time-ordered rows at 32 Hz. `metadata` holds free-form `key=value` lines
/// (written as leading `#` comments in CSV), e.g. the generator seed schedule.
struct Trace {
  std::vector<TraceRow> rows;
  std::vector<std::string> metadata;
};

// Standard deviations of the synthetic noise terms.
double ppg_noise_sigma(ActivityId activity);    // 0.05 * (a - 1)
double accel_noise_sigma(ActivityId activity);  // 0.1 * a

/// Unit sinusoid at hr_bpm / 60 Hz plus Gaussian motion-artifact noise; accel
/// axes are zero-mean Gaussian noise. PRNG: std::mt19937_64 seeded with
/// `seed`; draws 256 PPG noise samples, then 256 per axis (x, y, z).
/// Throws InvalidHr unless 20 < hr_bpm < 300.
SampleWindow synth_window(double hr_bpm, ActivityId activity, std::uint64_t seed);

struct SynthTraceOptions {
  std::vector<ActivityId> activities;
  std::size_t windows_per_activity = 50;
  // One entry per activity segment, or a single entry applied to all.
  std::vector<double> hr_bpm{80.0};
  std::uint64_t seed = 0;
};

/// Concatenates one constant-activity segment per entry of `activities`.
/// Segment j spans 64*w rows (the first gets +128, the last +64) so that
/// windows() yields w windows labeled with each activity when activities
/// ascend. Segment j draws from std::mt19937_64(std::seed_seq{seed, j}).
Trace synth_trace(const SynthTraceOptions& options);

/// CSV with header `t,ppg,ax,ay,az,activity,hr_ref` (any column order);
/// leading lines starting with `#` are metadata. Throws MissingColumn,
/// ParseError or Io.
Trace load_trace(const std::filesystem::path& path);
Trace parse_trace(const std::string& csv);

void save_trace(const Trace& trace, const std::filesystem::path& path);
std::string format_trace(const Trace& trace);

std::size_t window_count(std::size_t rows);

/// Window k covers rows [64k, 64k + 256). Activity is the majority label
/// (ties go to the higher id); hr_ref is the mean over rows that carry one.
/// Throws TraceTooShort below 256 rows.
std::vector<SampleWindow> windows(const Trace& trace);

}  // namespace chris::signal
