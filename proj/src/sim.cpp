#include "chris/sim.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "chris/text.hpp"
#include "json.hpp"

namespace chris::sim {
namespace {

using ordered_json = nlohmann::ordered_json;

// Returns the configuration for an interval starting at `window` with the
// given status; throws NoFeasibleConfig when there is none.
using Selector = std::function<engine::Selection(ConnectionStatus)>;

SimReport simulate(std::span<const ActivityId> predicted, predictors::PredictionCache& cache,
                   const energy::ProfileSet& profiles, const LinkSchedule& schedule, const Selector& select) {
  const auto windows = cache.windows();
  if (windows.empty()) throw Error(ErrorKind::EmptyWindowSet, "simulation needs at least one window");
  if (predicted.size() != windows.size()) {
    throw Error(ErrorKind::InvalidArgument, "one predicted activity per window required");
  }
  schedule.validate(windows.size());

  SimReport report;
  report.n_windows = windows.size();
  report.windows.reserve(windows.size());
  double last_hr = kInitialHoldBpm;
  double error_sum = 0.0;
  std::size_t offloaded = 0;
  std::optional<ConnectionStatus> previous;
  std::optional<engine::Selection> active;

  for (const auto& interval : schedule.intervals()) {
    if (!previous || *previous != interval.status) {
      previous = interval.status;
      try {
        active = select(interval.status);
        report.config_switches.push_back({interval.start, interval.status, active->config, active->soft_violation});
        report.soft_violation = report.soft_violation || active->soft_violation;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoFeasibleConfig) throw;
        active.reset();
        report.faults.push_back({interval.start, interval.end, e.kind(), e.what()});
      }
    } else if (!active) {
      // Same status as a faulted interval: extend the fault.
      report.faults.back().end = interval.end;
    }

    for (std::size_t i = interval.start; i < interval.end; ++i) {
      const auto& w = windows[i];
      WindowRecord rec;
      rec.idx = i;
      rec.activity_true = w.activity;
      rec.activity_pred = predicted[i];
      rec.hr_ref = w.hr_ref;
      auto& stats = report.per_activity[static_cast<std::size_t>(w.activity.value() - ActivityId::kMin)];
      ++stats.count;
      if (active) {
        const auto d = engine::dispatch(active->config, predicted[i]);
        const auto& model = profiles.model(d.model);
        const auto outcome = energy::window_energy(model, profiles.link, d.device);
        rec.model = d.model;
        rec.device = d.device;
        rec.watch_mj = outcome.watch_mj;
        rec.phone_mj = outcome.phone_mj;
        if (d.device == Device::Phone) {
          ++offloaded;
          report.watch_busy_ms += profiles.link.time_ms;
          report.phone_busy_ms += model.time_phone_ms;
        } else {
          report.watch_busy_ms += model.time_board_ms;
        }
        if (const auto hr = cache.get(d.model, i)) {
          last_hr = *hr;
        } else {
          rec.held = true;
          ++report.held_estimates;
        }
        rec.hr_pred = last_hr;
        if (rec.hr_ref) {
          const double err = std::abs(last_hr - *rec.hr_ref);
          error_sum += err;
          ++report.scored_windows;
          ++stats.scored;
          stats.mae_bpm += err;  // divided below
        }
      }
      report.watch_mj_total += rec.watch_mj;
      report.phone_mj_total += rec.phone_mj;
      stats.watch_mj += rec.watch_mj;
      report.windows.push_back(rec);
    }
  }

  const auto n = static_cast<double>(report.n_windows);
  report.watch_mj_mean = report.watch_mj_total / n;
  report.offload_fraction = static_cast<double>(offloaded) / n;
  if (report.scored_windows > 0) report.mae_bpm = error_sum / static_cast<double>(report.scored_windows);
  for (auto& s : report.per_activity) {
    if (s.scored > 0) s.mae_bpm /= static_cast<double>(s.scored);
  }
  return report;
}

std::string opt_double(const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); }

ordered_json config_json(const zoo::Configuration& c) {
  return {{"simple", to_string(c.simple)},
          {"complex", to_string(c.complex)},
          {"threshold", c.threshold},
          {"execution", to_string(c.execution)},
          {"avg_mae_bpm", c.avg_mae_bpm},
          {"avg_watch_mj", c.avg_watch_mj},
          {"offload_fraction", c.offload_fraction}};
}

}  // namespace

LinkSchedule::LinkSchedule(std::vector<LinkInterval> intervals) : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (iv.start >= iv.end) throw Error(ErrorKind::InvalidArgument, "schedule interval must have start < end");
    if (i == 0 && iv.start != 0) throw Error(ErrorKind::InvalidArgument, "schedule must start at window 0");
    if (i > 0 && iv.start != intervals_[i - 1].end) {
      throw Error(ErrorKind::InvalidArgument, "schedule intervals must be sorted, disjoint and contiguous");
    }
  }
}

LinkSchedule LinkSchedule::all(std::size_t n_windows, ConnectionStatus status) {
  if (n_windows == 0) return LinkSchedule();
  return LinkSchedule({{0, n_windows, status}});
}

void LinkSchedule::validate(std::size_t n_windows) const {
  if (size() != n_windows) {
    throw Error(ErrorKind::InvalidArgument, "schedule covers " + std::to_string(size()) + " windows, trace has " +
                                                std::to_string(n_windows));
  }
}

LinkSchedule parse_schedule(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0, row = 0;
  bool header_seen = false;
  std::vector<LinkInterval> intervals;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = text::split(t);
    if (!header_seen) {
      if (f.size() != 3 || text::trim(f[0]) != "start" || text::trim(f[1]) != "end" || text::trim(f[2]) != "status") {
        throw Error(ErrorKind::MissingColumn, "schedule CSV header must be start,end,status");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 3) throw ParseError(row, line_no, "*", "expected 3 fields");
    const auto start = text::parse_int(text::trim(f[0]));
    const auto end = text::parse_int(text::trim(f[1]));
    if (!start || *start < 0) throw ParseError(row, line_no, "start", "expected a window index");
    if (!end || *end < 0) throw ParseError(row, line_no, "end", "expected a window index");
    LinkInterval iv{static_cast<std::size_t>(*start), static_cast<std::size_t>(*end)};
    try {
      iv.status = parse_connection_status(text::trim(f[2]));
    } catch (const Error& e) {
      throw ParseError(row, line_no, "status", e.what());
    }
    intervals.push_back(iv);
    ++row;
  }
  if (!header_seen) throw Error(ErrorKind::MissingColumn, "schedule CSV has no header");
  return LinkSchedule(std::move(intervals));
}

LinkSchedule load_schedule(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schedule(buf.str());
}

std::string schedule_to_csv(const LinkSchedule& schedule) {
  std::string out = "start,end,status\n";
  for (const auto& iv : schedule.intervals()) {
    out += std::to_string(iv.start) + ',' + std::to_string(iv.end) + ',' + std::string(to_string(iv.status)) + '\n';
  }
  return out;
}

SimReport run(std::span<const signal::SampleWindow> windows, const zoo::ConfigTable& table,
              const difficulty::ActivityClassifier& classifier, const predictors::PredictorBank& bank,
              const energy::ProfileSet& profiles, const engine::Constraint& constraint,
              const LinkSchedule& schedule) {
  const auto predicted = zoo::classify_all(windows, classifier);
  predictors::PredictionCache cache(bank, windows);
  return run(predicted, cache, table, profiles, constraint, schedule);
}

SimReport run(std::span<const ActivityId> predicted, predictors::PredictionCache& cache,
              const zoo::ConfigTable& table, const energy::ProfileSet& profiles,
              const engine::Constraint& constraint, const LinkSchedule& schedule) {
  return simulate(predicted, cache, profiles, schedule, [&](ConnectionStatus status) {
    return engine::select(engine::feasible(table, status).rows, constraint);
  });
}

SimReport run_forced(std::span<const ActivityId> predicted, predictors::PredictionCache& cache,
                     const zoo::Configuration& config, const energy::ProfileSet& profiles) {
  return simulate(predicted, cache, profiles, LinkSchedule::all(cache.windows().size()),
                  [&](ConnectionStatus) { return engine::Selection{config, false}; });
}

std::vector<SweepRow> sweep(std::span<const signal::SampleWindow> windows, std::span<const ModelKind> models,
                            const difficulty::ActivityClassifier& classifier, const predictors::PredictorBank& bank,
                            const energy::ProfileSet& profiles) {
  if (windows.empty()) throw Error(ErrorKind::EmptyWindowSet, "sweep needs at least one window");
  const auto predicted = zoo::classify_all(windows, classifier);
  predictors::PredictionCache cache(bank, windows);
  std::vector<SweepRow> out;
  for (const auto& config : zoo::enumerate(models, profiles)) {
    SweepRow row{config, run_forced(predicted, cache, config, profiles)};
    row.config.avg_mae_bpm = row.report.mae_bpm;
    row.config.avg_watch_mj = row.report.watch_mj_mean;
    row.config.offload_fraction = row.report.offload_fraction;
    out.push_back(std::move(row));
  }
  return out;
}

std::string report_to_json(const SimReport& report, std::span<const std::string> metadata) {
  ordered_json meta = ordered_json::object();
  for (const auto& m : metadata) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) {
      meta[m] = "";
    } else {
      meta[m.substr(0, eq)] = m.substr(eq + 1);
    }
  }
  ordered_json per_activity = ordered_json::array();
  for (std::size_t a = 0; a < report.per_activity.size(); ++a) {
    const auto& s = report.per_activity[a];
    per_activity.push_back({{"activity", static_cast<int>(a) + ActivityId::kMin},
                            {"count", s.count},
                            {"scored", s.scored},
                            {"mae_bpm", s.mae_bpm},
                            {"watch_mj", s.watch_mj}});
  }
  ordered_json switches = ordered_json::array();
  for (const auto& s : report.config_switches) {
    switches.push_back({{"window", s.window},
                        {"status", to_string(s.status)},
                        {"config", config_json(s.config)},
                        {"soft_violation", s.soft_violation}});
  }
  ordered_json faults = ordered_json::array();
  for (const auto& f : report.faults) {
    faults.push_back({{"start", f.start}, {"end", f.end}, {"kind", to_string(f.kind)}, {"message", f.message}});
  }
  ordered_json j = {{"metadata", meta},
                    {"n_windows", report.n_windows},
                    {"scored_windows", report.scored_windows},
                    {"mae_bpm", report.mae_bpm},
                    {"watch_mj_total", report.watch_mj_total},
                    {"watch_mj_mean", report.watch_mj_mean},
                    {"phone_mj_total", report.phone_mj_total},
                    {"offload_fraction", report.offload_fraction},
                    {"watch_busy_ms", report.watch_busy_ms},
                    {"phone_busy_ms", report.phone_busy_ms},
                    {"held_estimates", report.held_estimates},
                    {"soft_violation", report.soft_violation},
                    {"per_activity", per_activity},
                    {"config_switches", switches},
                    {"faults", faults}};
  return j.dump(2) + "\n";
}

std::string windows_to_csv(const SimReport& report) {
  std::string out = "idx,activity_true,activity_pred,model,device,hr_pred,hr_ref,watch_mj,phone_mj\n";
  for (const auto& r : report.windows) {
    out += std::to_string(r.idx) + ',' + std::to_string(r.activity_true.value()) + ',' +
           std::to_string(r.activity_pred.value()) + ',' + (r.model ? std::string(to_string(*r.model)) : "") + ',' +
           (r.device ? std::string(to_string(*r.device)) : "") + ',' + opt_double(r.hr_pred) + ',' +
           opt_double(r.hr_ref) + ',' + text::format_double(r.watch_mj) + ',' + text::format_double(r.phone_mj) +
           '\n';
  }
  return out;
}

std::string summary_to_csv(const SimReport& report) {
  std::string out = "metric,value\n";
  auto add = [&](const std::string& k, const std::string& v) { out += k + ',' + v + '\n'; };
  add("n_windows", std::to_string(report.n_windows));
  add("scored_windows", std::to_string(report.scored_windows));
  add("mae_bpm", text::format_double(report.mae_bpm));
  add("watch_mj_total", text::format_double(report.watch_mj_total));
  add("watch_mj_mean", text::format_double(report.watch_mj_mean));
  add("phone_mj_total", text::format_double(report.phone_mj_total));
  add("offload_fraction", text::format_double(report.offload_fraction));
  add("watch_busy_ms", text::format_double(report.watch_busy_ms));
  add("phone_busy_ms", text::format_double(report.phone_busy_ms));
  add("held_estimates", std::to_string(report.held_estimates));
  add("config_switches", std::to_string(report.config_switches.size()));
  add("faults", std::to_string(report.faults.size()));
  add("soft_violation", report.soft_violation ? "1" : "0");
  return out;
}

std::string sweep_to_csv(std::span<const SweepRow> rows, std::span<const std::string> metadata) {
  std::vector<zoo::Configuration> configs;
  configs.reserve(rows.size());
  for (const auto& r : rows) configs.push_back(r.config);
  // Reuse the table writer and append the measured columns line by line.
  std::istringstream base(zoo::configs_to_csv(configs, metadata));
  std::string out, line;
  std::size_t i = 0;
  bool header_done = false;
  while (std::getline(base, line)) {
    if (!header_done && line.rfind('#', 0) == 0) {
      out += line + '\n';
      continue;
    }
    if (!header_done) {
      out += line + ",n_windows,scored_windows,phone_mj_total,watch_busy_ms,held_estimates\n";
      header_done = true;
      continue;
    }
    const auto& rep = rows[i++].report;
    out += line + ',' + std::to_string(rep.n_windows) + ',' + std::to_string(rep.scored_windows) + ',' +
           text::format_double(rep.phone_mj_total) + ',' + text::format_double(rep.watch_busy_ms) + ',' +
           std::to_string(rep.held_estimates) + '\n';
  }
  return out;
}

}  // namespace chris::sim
