#include "chris/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "chris/text.hpp"

namespace chris::signal {
namespace {

void check_hr(double hr_bpm) {
  if (!(hr_bpm > kMinBpm && hr_bpm < kMaxBpm)) {
    throw Error(ErrorKind::InvalidHr, "heart rate " + text::format_double(hr_bpm) + " BPM outside (20, 300)");
  }
}

constexpr const char* kColumns[] = {"t", "ppg", "ax", "ay", "az", "activity", "hr_ref"};
constexpr double kTimeStepTolerance = 1e-6;

}  // namespace

double ppg_noise_sigma(ActivityId activity) { return 0.05 * (activity.value() - 1); }

double accel_noise_sigma(ActivityId activity) { return 0.1 * activity.value(); }

SampleWindow synth_window(double hr_bpm, ActivityId activity, std::uint64_t seed) {
  check_hr(hr_bpm);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SampleWindow w;
  w.activity = activity;
  w.hr_ref = hr_bpm;

  const double f = hr_bpm / 60.0;
  const double alpha = ppg_noise_sigma(activity);
  for (std::size_t n = 0; n < kWindowLength; ++n) {
    const double phase = 2.0 * std::numbers::pi * f * static_cast<double>(n) / kSampleRateHz;
    w.ppg[n] = std::sin(phase) + alpha * gauss(rng);
  }
  const double beta = accel_noise_sigma(activity);
  for (auto& axis : w.accel) {
    for (double& v : axis) v = beta * gauss(rng);
  }
  return w;
}

Trace synth_trace(const SynthTraceOptions& options) {
  if (options.activities.empty()) throw Error(ErrorKind::InvalidArgument, "no activities requested");
  if (options.windows_per_activity == 0) throw Error(ErrorKind::InvalidArgument, "windows_per_activity must be >= 1");
  const std::size_t n_seg = options.activities.size();
  if (options.hr_bpm.size() != 1 && options.hr_bpm.size() != n_seg) {
    throw Error(ErrorKind::InvalidArgument, "hr_bpm needs 1 or " + std::to_string(n_seg) + " entries");
  }
  for (double hr : options.hr_bpm) check_hr(hr);

  Trace trace;
  trace.metadata.push_back("generator=chris-synth-v1");
  trace.metadata.push_back("seed=" + std::to_string(options.seed));
  trace.metadata.push_back("seed_schedule=mt19937_64(seed_seq{seed,segment_index})");
  trace.metadata.push_back("windows_per_activity=" + std::to_string(options.windows_per_activity));

  std::size_t row_index = 0;
  for (std::size_t j = 0; j < n_seg; ++j) {
    std::size_t rows = kWindowStride * options.windows_per_activity;
    if (j == 0) rows += 128;
    if (j + 1 == n_seg) rows += 64;

    const ActivityId activity = options.activities[j];
    const double hr = options.hr_bpm.size() == 1 ? options.hr_bpm.front() : options.hr_bpm[j];
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(options.seed >> 32), static_cast<std::uint32_t>(j)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double alpha = ppg_noise_sigma(activity);
    const double beta = accel_noise_sigma(activity);
    const double f = hr / 60.0;

    for (std::size_t r = 0; r < rows; ++r, ++row_index) {
      TraceRow row;
      row.t = static_cast<double>(row_index) / kSampleRateHz;
      row.ppg = std::sin(2.0 * std::numbers::pi * f * row.t) + alpha * gauss(rng);
      row.ax = beta * gauss(rng);
      row.ay = beta * gauss(rng);
      row.az = beta * gauss(rng);
      row.activity = activity;
      row.hr_ref = hr;
      trace.rows.push_back(row);
    }
  }
  return trace;
}

Trace parse_trace(const std::string& csv) {
  std::istringstream in(csv);
  Trace trace;
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '#') {
      trace.metadata.emplace_back(text::trim(trimmed.substr(1)));
      continue;
    }
    for (auto field : text::split(trimmed)) header.emplace_back(text::trim(field));
    break;
  }
  if (header.empty()) throw Error(ErrorKind::MissingColumn, "trace has no header row");

  std::array<std::size_t, 7> col{};
  for (std::size_t c = 0; c < 7; ++c) {
    const auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) throw Error(ErrorKind::MissingColumn, std::string("column '") + kColumns[c] + "' not found");
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = text::split(trimmed);
    if (fields.size() != header.size()) {
      throw ParseError(row_no, line_no, "*",
                       "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    auto real = [&](std::size_t c) {
      const auto v = text::parse_double(fields[col[c]]);
      if (!v) throw ParseError(row_no, line_no, kColumns[c], "not a number");
      return *v;
    };

    TraceRow row;
    row.t = real(0);
    row.ppg = real(1);
    row.ax = real(2);
    row.ay = real(3);
    row.az = real(4);
    const auto act = text::parse_int(fields[col[5]]);
    if (!act || *act < ActivityId::kMin || *act > ActivityId::kMax) {
      throw ParseError(row_no, line_no, "activity", "expected an integer in 1..9");
    }
    row.activity = ActivityId(static_cast<int>(*act));
    if (!text::trim(fields[col[6]]).empty()) {
      const double hr = real(6);
      if (!(hr > kMinBpm && hr < kMaxBpm)) throw ParseError(row_no, line_no, "hr_ref", "outside (20, 300) BPM");
      row.hr_ref = hr;
    }
    if (!trace.rows.empty()) {
      const double dt = row.t - trace.rows.back().t;
      if (std::abs(dt - 1.0 / kSampleRateHz) > kTimeStepTolerance) {
        throw ParseError(row_no, line_no, "t", "time step must be 1/32 s");
      }
    }
    trace.rows.push_back(row);
    ++row_no;
  }
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

std::string format_trace(const Trace& trace) {
  std::string out;
  out.reserve(trace.rows.size() * 80);
  for (const auto& m : trace.metadata) out += "# " + m + "\n";
  out += "t,ppg,ax,ay,az,activity,hr_ref\n";
  for (const auto& r : trace.rows) {
    out += text::format_double(r.t);
    out += ',';
    out += text::format_double(r.ppg);
    out += ',';
    out += text::format_double(r.ax);
    out += ',';
    out += text::format_double(r.ay);
    out += ',';
    out += text::format_double(r.az);
    out += ',';
    out += std::to_string(r.activity.value());
    out += ',';
    if (r.hr_ref) out += text::format_double(*r.hr_ref);
    out += '\n';
  }
  return out;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << format_trace(trace);
}

std::size_t window_count(std::size_t rows) {
  if (rows < kWindowLength) return 0;
  return (rows - kWindowLength) / kWindowStride + 1;
}

std::vector<SampleWindow> windows(const Trace& trace) {
  const std::size_t n = trace.rows.size();
  if (n < kWindowLength) {
    throw Error(ErrorKind::TraceTooShort, std::to_string(n) + " rows, need at least 256");
  }
  const std::size_t count = window_count(n);
  std::vector<SampleWindow> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    SampleWindow& w = out[k];
    std::array<int, ActivityId::kMax + 1> votes{};
    double hr_sum = 0.0;
    std::size_t hr_n = 0;
    const std::size_t base = k * kWindowStride;
    for (std::size_t i = 0; i < kWindowLength; ++i) {
      const TraceRow& r = trace.rows[base + i];
      w.ppg[i] = r.ppg;
      w.accel[0][i] = r.ax;
      w.accel[1][i] = r.ay;
      w.accel[2][i] = r.az;
      ++votes[r.activity.value()];
      if (r.hr_ref) {
        hr_sum += *r.hr_ref;
        ++hr_n;
      }
    }
    int best = ActivityId::kMin;
    for (int a = ActivityId::kMin; a <= ActivityId::kMax; ++a) {
      if (votes[a] >= votes[best]) best = a;
    }
    w.activity = ActivityId(best);
    if (hr_n > 0) w.hr_ref = hr_sum / static_cast<double>(hr_n);
  }
  return out;
}

}  // namespace chris::signal
