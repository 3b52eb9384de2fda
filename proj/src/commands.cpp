#include "chris/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "chris/bank.hpp"
#include "chris/difficulty.hpp"
#include "chris/energy.hpp"
#include "chris/engine.hpp"
#include "chris/signal.hpp"
#include "chris/sim.hpp"
#include "chris/tcn.hpp"
#include "chris/text.hpp"
#include "chris/zoo.hpp"
#include "json.hpp"

namespace chris::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
  std::string out = ".";
  std::uint64_t seed = 1;
  std::string manifest;

  // inputs
  std::string trace, forest, table, input, schedule, control;
  std::string profiles = "deployment";
  std::string constraint;
  std::string small_model, big_model;
  bool oracle_classifier = false;
  bool no_hybrid = false;
  std::string models = "AT,TimePPG-Small,TimePPG-Big";
  int fit_windows = 10;

  // synth
  std::string activities = "1..9";
  std::size_t windows_per_activity = 50;
  std::vector<double> hr{80.0};

  // build-model
  std::string model = "big";

  // train-rf
  std::size_t rf_windows_per_activity = 200;
};

// One flag that is also a manifest entry.
struct Field {
  std::string name;
  std::function<ordered_json()> get;
  std::function<void(const nlohmann::json&)> set;
  bool is_file = false;
  std::function<bool()> present;  // non-empty path
};

class Command {
 public:
  Command(CLI::App& parent, std::string name, std::string help)
      : name_(std::move(name)), app_(parent.add_subcommand(name_, std::move(help))) {}

  CLI::App* app() { return app_; }
  const std::string& name() const { return name_; }
  const std::vector<Field>& fields() const { return fields_; }

  void file(const std::string& flag, std::string& value, const std::string& help) {
    app_->add_option("--" + flag, value, help);
    fields_.push_back({flag, [&value] { return ordered_json(value); },
                       [&value](const nlohmann::json& j) { value = j.get<std::string>(); }, true,
                       [&value] { return !value.empty(); }});
  }

  template <class T>
  void value(const std::string& flag, T& v, const std::string& help) {
    auto* opt = app_->add_option("--" + flag, v, help);
    if constexpr (!std::is_same_v<T, std::string>) opt->capture_default_str();
    fields_.push_back({flag, [&v] { return ordered_json(v); }, [&v](const nlohmann::json& j) { v = j.get<T>(); },
                       false, nullptr});
  }

  void flag(const std::string& flag, bool& v, const std::string& help) {
    app_->add_flag("--" + flag, v, help);
    fields_.push_back({flag, [&v] { return ordered_json(v); }, [&v](const nlohmann::json& j) { v = j.get<bool>(); },
                       false, nullptr});
  }

  void list(const std::string& flag, std::vector<double>& v, const std::string& help) {
    app_->add_option("--" + flag, v, help)->delimiter(',')->capture_default_str();
    fields_.push_back({flag, [&v] { return ordered_json(v); },
                       [&v](const nlohmann::json& j) { v = j.get<std::vector<double>>(); }, false, nullptr});
  }

 private:
  std::string name_;
  CLI::App* app_;
  std::vector<Field> fields_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << content;
}

// Applies manifest inputs that were not given on the command line.
void apply_manifest(const Command& cmd, const std::string& path, const std::vector<std::string>& args) {
  const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::InvalidArgument, path + ": not a JSON manifest");
  if (j.contains("command") && j.at("command") != cmd.name()) {
    throw Error(ErrorKind::InvalidArgument,
                path + ": manifest is for '" + j.at("command").get<std::string>() + "', not '" + cmd.name() + "'");
  }
  if (!j.contains("inputs")) return;
  for (const auto& [key, value] : j.at("inputs").items()) {
    const Field* field = nullptr;
    for (const auto& f : cmd.fields()) {
      if (f.name == key) field = &f;
    }
    if (!field) throw Error(ErrorKind::InvalidArgument, path + ": unknown manifest input '" + key + "'");
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    try {
      field->set(value);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::InvalidArgument, path + ": bad value for '" + key + "': " + e.what());
    }
  }
}

void check_inputs_exist(const Command& cmd) {
  for (const auto& f : cmd.fields()) {
    if (!f.is_file || !f.present()) continue;
    const auto value = f.get().get<std::string>();
    if (f.name == "profiles" && (value == "deployment" || value == "summary")) continue;
    if (!fs::exists(value)) throw Error(ErrorKind::Io, "--" + f.name + ": no such file: " + value);
  }
}

void write_manifest(const Command& cmd, const Options& o, const std::vector<std::string>& outputs) {
  ordered_json inputs = ordered_json::object();
  for (const auto& f : cmd.fields()) inputs[f.name] = f.get();
  ordered_json j = {{"command", cmd.name()}, {"inputs", inputs}, {"outputs", outputs}};
  write_file(fs::path(o.out) / "manifest.json", j.dump(2) + "\n");
}

std::vector<ActivityId> parse_activities(const std::string& spec) {
  std::vector<ActivityId> out;
  for (auto part : text::split(spec)) {
    part = text::trim(part);
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      const auto v = text::parse_int(part);
      if (!v) throw Error(ErrorKind::InvalidArgument, "bad activity '" + std::string(part) + "'");
      out.emplace_back(static_cast<int>(*v));
      continue;
    }
    const auto lo = text::parse_int(part.substr(0, dots));
    const auto hi = text::parse_int(part.substr(dots + 2));
    if (!lo || !hi || *lo > *hi) throw Error(ErrorKind::InvalidArgument, "bad activity range '" + std::string(part) + "'");
    for (auto a = *lo; a <= *hi; ++a) out.emplace_back(static_cast<int>(a));
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no activities given");
  return out;
}

std::vector<ModelKind> parse_models(const std::string& spec) {
  std::vector<ModelKind> out;
  for (auto part : text::split(spec)) out.push_back(parse_model_kind(text::trim(part)));
  return out;
}

energy::ProfileSet load_profile_set(const std::string& arg) {
  if (arg == "deployment" || arg == "summary") return energy::profiles_by_name(arg);
  return energy::load_profiles(arg);
}

std::string require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(ErrorKind::InvalidArgument, "--" + flag + " is required");
  return value;
}

std::unique_ptr<difficulty::ActivityClassifier> make_classifier(const Options& o) {
  if (o.oracle_classifier) {
    if (!o.forest.empty()) throw Error(ErrorKind::InvalidArgument, "--forest and --oracle-classifier are exclusive");
    return std::make_unique<difficulty::OracleClassifier>();
  }
  return std::make_unique<difficulty::ForestClassifier>(difficulty::load_forest(require(o.forest, "forest")));
}

predictors::PredictorBank make_bank(const Options& o, std::span<const ModelKind> needed) {
  predictors::PredictorBank bank;
  predictors::BuildOptions build{o.seed, o.fit_windows};
  for (ModelKind kind : needed) {
    if (kind == ModelKind::AT || bank.has(kind)) continue;
    const std::string& path = kind == ModelKind::TimePPGSmall ? o.small_model : o.big_model;
    bank.set_tcn(kind, path.empty() ? predictors::build_tcn(kind, build) : predictors::load_tcn(path));
  }
  return bank;
}

std::string dataset_id(const std::string& trace) { return fs::path(trace).filename().string(); }

std::vector<std::string> run_metadata(const Options& o) {
  return {"dataset=" + dataset_id(o.trace), "profiles=" + o.profiles, "seed=" + std::to_string(o.seed)};
}

std::vector<signal::SampleWindow> load_windows(const Options& o) {
  return signal::windows(signal::load_trace(require(o.trace, "trace")));
}

// ---------------------------------------------------------------------------

int cmd_synth(const Options& o, std::ostream& out) {
  signal::SynthTraceOptions s;
  s.activities = parse_activities(o.activities);
  s.windows_per_activity = o.windows_per_activity;
  s.hr_bpm = o.hr;
  s.seed = o.seed;
  if (s.windows_per_activity == 0) throw Error(ErrorKind::InvalidArgument, "--windows-per-activity must be > 0");
  for (double hr : s.hr_bpm) {
    if (!(hr > kMinBpm && hr < kMaxBpm)) {
      throw Error(ErrorKind::InvalidHr, "--hr " + text::format_double(hr) + " outside (20, 300)");
    }
  }
  const auto trace = signal::synth_trace(s);
  signal::save_trace(trace, fs::path(o.out) / "trace.csv");
  out << "wrote " << trace.rows.size() << " rows (" << signal::window_count(trace.rows.size()) << " windows)\n";
  return kExitOk;
}

int cmd_train_rf(const Options& o, std::ostream& out) {
  std::vector<signal::SampleWindow> data;
  if (!o.trace.empty()) {
    data = load_windows(o);
  } else {
    signal::SynthTraceOptions s;
    for (int a = ActivityId::kMin; a <= ActivityId::kMax; ++a) s.activities.emplace_back(a);
    s.windows_per_activity = o.rf_windows_per_activity;
    s.hr_bpm = o.hr;
    s.seed = o.seed;
    data = signal::windows(signal::synth_trace(s));
  }
  difficulty::TrainOptions train;
  train.seed = o.seed;
  const auto forest = difficulty::rf_train(difficulty::labeled_features(data), train);
  auto j = ordered_json::parse(difficulty::forest_to_json(forest));
  j["seed"] = o.seed;
  write_file(fs::path(o.out) / "forest.json", j.dump(2) + "\n");
  int depth = 0;
  for (const auto& t : forest.trees) depth = std::max(depth, t.depth());
  out << "trained " << forest.trees.size() << " trees (max depth " << depth << ") on " << data.size()
      << " windows\n";
  return kExitOk;
}

int cmd_build_model(const Options& o, std::ostream& out) {
  const ModelKind kind = parse_model_kind(o.model);
  if (kind == ModelKind::AT) throw Error(ErrorKind::InvalidArgument, "AT has no weights to build");
  const auto model = predictors::build_tcn(kind, {o.seed, o.fit_windows});
  const std::string stem = kind == ModelKind::TimePPGSmall ? "timeppg-small" : "timeppg-big";
  predictors::save_tcn(model, fs::path(o.out) / (stem + ".tcn"));
  auto spec = ordered_json::parse(predictors::tcn_spec_to_json(model.spec));
  spec["seed"] = o.seed;
  write_file(fs::path(o.out) / (stem + ".spec.json"), spec.dump(2) + "\n");
  const auto ops = predictors::count_ops(model.spec);
  out << model.spec.name << ": " << ops.params << " params, " << ops.macs << " MACs\n";
  return kExitOk;
}

int cmd_profile(const Options& o, std::ostream& out) {
  const auto windows = load_windows(o);
  const auto profiles = load_profile_set(o.profiles);
  const auto models = parse_models(o.models);
  const auto classifier = make_classifier(o);
  const auto bank = make_bank(o, models);
  const auto configs = zoo::enumerate(models, profiles, !o.no_hybrid);
  const auto profiled = zoo::profile_all(configs, windows, *classifier, bank, profiles);
  const auto meta = run_metadata(o);
  write_file(fs::path(o.out) / "profiled.csv", zoo::configs_to_csv(profiled, meta));
  out << "profiled " << profiled.size() << " configurations on " << windows.size() << " windows\n";
  return kExitOk;
}

int cmd_pareto(const Options& o, std::ostream& out) {
  std::vector<std::string> meta;
  const auto rows = zoo::load_configs(require(o.input, "input"), &meta);
  std::string dataset, profile_set;
  for (const auto& m : meta) {
    if (m.rfind("dataset=", 0) == 0) dataset = m.substr(8);
    if (m.rfind("profiles=", 0) == 0) profile_set = m.substr(9);
  }
  const auto table = zoo::pareto_filter(rows, dataset, profile_set);
  zoo::save_table(table, fs::path(o.out) / "table.csv");

  // Every input point, energy-sorted, with its front membership.
  std::vector<zoo::Configuration> cloud(rows.begin(), rows.end());
  std::stable_sort(cloud.begin(), cloud.end(), [](const auto& a, const auto& b) {
    if (a.avg_watch_mj != b.avg_watch_mj) return a.avg_watch_mj < b.avg_watch_mj;
    if (a.avg_mae_bpm != b.avg_mae_bpm) return a.avg_mae_bpm < b.avg_mae_bpm;
    return zoo::identity_less(a, b);
  });
  std::string plot = "avg_watch_mj,avg_mae_bpm,label,pareto\n";
  for (const auto& c : cloud) {
    bool on_front = false;
    for (const auto& r : table.rows) on_front = on_front || r.same_identity(c);
    plot += text::format_double(c.avg_watch_mj) + ',' + text::format_double(c.avg_mae_bpm) + ',' + c.label() + ',' +
            (on_front ? "1" : "0") + '\n';
  }
  write_file(fs::path(o.out) / "pareto_plot.csv", plot);
  out << table.rows.size() << " of " << rows.size() << " configurations are Pareto-optimal\n";
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto windows = load_windows(o);
  const auto table = zoo::load_table(require(o.table, "table"));
  const auto profiles = load_profile_set(o.profiles);

  std::optional<engine::Constraint> constraint;
  if (!o.control.empty()) constraint = engine::load_control(o.control).constraint;
  if (!o.constraint.empty()) constraint = engine::parse_constraint(o.constraint);
  if (!constraint) throw Error(ErrorKind::InvalidArgument, "--constraint or --control is required");

  sim::LinkSchedule schedule;
  if (!o.schedule.empty()) {
    schedule = sim::load_schedule(o.schedule);
  } else {
    auto status = ConnectionStatus::Connected;
    if (!o.control.empty()) status = engine::load_control(o.control).status;
    schedule = sim::LinkSchedule::all(windows.size(), status);
  }

  std::vector<ModelKind> needed;
  for (const auto& r : table.rows) needed.insert(needed.end(), {r.simple, r.complex});
  const auto classifier = make_classifier(o);
  const auto bank = make_bank(o, needed);
  const auto report = sim::run(windows, table, *classifier, bank, profiles, *constraint, schedule);

  auto meta = run_metadata(o);
  meta.push_back("table=" + fs::path(o.table).filename().string());
  meta.push_back("constraint=" + engine::to_string(*constraint));
  write_file(fs::path(o.out) / "report.json", sim::report_to_json(report, meta));
  write_file(fs::path(o.out) / "windows.csv", sim::windows_to_csv(report));
  write_file(fs::path(o.out) / "summary.csv", sim::summary_to_csv(report));

  for (const auto& s : report.config_switches) {
    out << "window " << s.window << " [" << to_string(s.status) << "] -> " << s.config.label()
        << " (profiled " << text::format_double(s.config.avg_mae_bpm) << " BPM, "
        << text::format_double(s.config.avg_watch_mj) << " mJ)" << (s.soft_violation ? " soft-violation" : "")
        << '\n';
  }
  for (const auto& f : report.faults) {
    out << "windows " << f.start << ".." << f.end << ": " << to_string(f.kind) << '\n';
  }
  out << "mae " << text::format_double(report.mae_bpm) << " BPM, watch " << text::format_double(report.watch_mj_mean)
      << " mJ/window, offload " << text::format_double(report.offload_fraction) << '\n';
  return report.soft_violation ? kExitSoftViolation : kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto windows = load_windows(o);
  const auto profiles = load_profile_set(o.profiles);
  const auto models = parse_models(o.models);
  const auto classifier = make_classifier(o);
  const auto bank = make_bank(o, models);
  const auto rows = sim::sweep(windows, models, *classifier, bank, profiles);
  write_file(fs::path(o.out) / "sweep.csv", sim::sweep_to_csv(rows, run_metadata(o)));
  out << "swept " << rows.size() << " configurations on " << windows.size() << " windows\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"chris: wearable/phone heart-rate inference simulator"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  struct Entry {
    std::unique_ptr<Command> cmd;
    std::function<int(const Options&, std::ostream&)> fn;
    std::vector<std::string> outputs;
  };
  std::vector<Entry> entries;
  auto add = [&](std::string name, std::string help, auto fn, std::vector<std::string> outputs) -> Command& {
    entries.push_back({std::make_unique<Command>(app, std::move(name), std::move(help)), fn, std::move(outputs)});
    Command& c = *entries.back().cmd;
    c.app()->add_option("--manifest", o.manifest, "JSON manifest supplying defaults for the flags");
    c.value("out", o.out, "Output directory");
    c.value("seed", o.seed, "Random seed");
    return c;
  };
  auto classifier_flags = [&](Command& c) {
    c.file("forest", o.forest, "Random-forest JSON used to classify activities");
    c.flag("oracle-classifier", o.oracle_classifier, "Use the trace's true activity labels instead of a forest");
  };
  auto model_flags = [&](Command& c) {
    c.file("small-model", o.small_model, "TimePPG-Small weights (.tcn); built from --seed when omitted");
    c.file("big-model", o.big_model, "TimePPG-Big weights (.tcn); built from --seed when omitted");
    c.value("fit-windows", o.fit_windows, "Windows per activity for the head fit of built models");
    c.file("profiles", o.profiles, "Profile set: deployment, summary or a JSON file");
  };

  auto& synth = add("synth", "Generate a synthetic labeled trace", cmd_synth, {"trace.csv"});
  synth.value("activities", o.activities, "Activity segments, e.g. 1..9 or 1,4,9");
  synth.value("windows-per-activity", o.windows_per_activity, "Windows per activity segment");
  synth.list("hr", o.hr, "Heart rate in BPM, one value or one per segment");

  auto& train = add("train-rf", "Train the activity random forest", cmd_train_rf, {"forest.json"});
  train.file("trace", o.trace, "Labeled trace CSV; a synthetic one is generated when omitted");
  train.value("windows-per-activity", o.rf_windows_per_activity, "Synthetic windows per activity");
  train.list("hr", o.hr, "Heart rate for synthetic training data");

  auto& build = add("build-model", "Build and quantize a TimePPG network", cmd_build_model,
                    {"<model>.tcn", "<model>.spec.json"});
  build.value("model", o.model, "small or big");
  build.value("fit-windows", o.fit_windows, "Windows per activity for the head fit (0 keeps a random head)");

  auto& profile = add("profile", "Profile every configuration on a labeled trace", cmd_profile, {"profiled.csv"});
  profile.file("trace", o.trace, "Labeled trace CSV");
  classifier_flags(profile);
  model_flags(profile);
  profile.value("models", o.models, "Comma-separated models to pair");
  profile.flag("no-hybrid", o.no_hybrid, "Only enumerate Local configurations");

  auto& pareto = add("pareto", "Keep the Pareto-optimal configurations", cmd_pareto,
                     {"table.csv", "pareto_plot.csv"});
  pareto.file("input", o.input, "Profiled or sweep CSV");

  auto& simulate = add("simulate", "Run the decision engine over a trace", cmd_simulate,
                       {"report.json", "windows.csv", "summary.csv"});
  simulate.file("trace", o.trace, "Trace CSV");
  simulate.file("table", o.table, "Configuration table CSV (output of pareto)");
  simulate.value("constraint", o.constraint, "max-mae=<bpm> or max-energy=<mJ>");
  simulate.file("control", o.control, "JSON control file with constraint and status");
  simulate.file("schedule", o.schedule, "Link schedule CSV start,end,status");
  classifier_flags(simulate);
  model_flags(simulate);

  auto& sweep = add("sweep", "Simulate every configuration with the link up", cmd_sweep, {"sweep.csv"});
  sweep.file("trace", o.trace, "Labeled trace CSV");
  classifier_flags(sweep);
  model_flags(sweep);
  sweep.value("models", o.models, "Comma-separated models to pair");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream sink_out, sink_err;
    const int code = app.exit(e, sink_out, sink_err);
    out << sink_out.str();
    err << sink_err.str();
    return code == 0 ? kExitOk : kExitError;
  }

  for (auto& e : entries) {
    if (!e.cmd->app()->parsed()) continue;
    try {
      if (!o.manifest.empty()) apply_manifest(*e.cmd, o.manifest, args);
      check_inputs_exist(*e.cmd);
      fs::create_directories(o.out);
      const int code = e.fn(o, out);
      write_manifest(*e.cmd, o, e.outputs);
      return code;
    } catch (const Error& ex) {
      err << "error [" << to_string(ex.kind()) << "]: " << ex.what() << '\n';
      return kExitError;
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << '\n';
      return kExitError;
    }
  }
  return kExitError;
}

}  // namespace chris::cli
