#include "chris/zoo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "chris/text.hpp"

namespace chris::zoo {
namespace {

constexpr const char* kHeader = "simple,complex,threshold,execution,avg_mae_bpm,avg_watch_mj,offload_fraction";

auto identity_key(const Configuration& c) {
  return std::make_tuple(to_string(c.simple), to_string(c.complex), c.threshold, static_cast<int>(c.execution));
}

std::string meta_value(const std::vector<std::string>& metadata, const std::string& key) {
  for (const auto& m : metadata) {
    if (m.rfind(key + "=", 0) == 0) return m.substr(key.size() + 1);
  }
  return {};
}

}  // namespace

std::string Configuration::label() const {
  return std::string(to_string(simple)) + "+" + std::string(to_string(complex)) + "/t" + std::to_string(threshold) +
         "/" + std::string(to_string(execution));
}

bool Configuration::same_identity(const Configuration& other) const {
  return identity_key(*this) == identity_key(other);
}

bool identity_less(const Configuration& a, const Configuration& b) { return identity_key(a) < identity_key(b); }

bool dominates(const Configuration& a, const Configuration& b) {
  return a.avg_watch_mj <= b.avg_watch_mj && a.avg_mae_bpm <= b.avg_mae_bpm &&
         (a.avg_watch_mj < b.avg_watch_mj || a.avg_mae_bpm < b.avg_mae_bpm);
}

bool is_pareto_sorted(std::span<const Configuration> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i - 1].avg_watch_mj <= rows[i].avg_watch_mj)) return false;
    if (!(rows[i - 1].avg_mae_bpm > rows[i].avg_mae_bpm)) return false;
  }
  return true;
}

std::vector<Configuration> enumerate(std::span<const ModelKind> models, const energy::ProfileSet& profiles,
                                     bool include_hybrid) {
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = i + 1; j < models.size(); ++j) {
      if (models[i] == models[j]) throw Error(ErrorKind::InvalidArgument, "duplicate model in enumeration");
    }
  }
  std::vector<Configuration> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = i + 1; j < models.size(); ++j) {
      ModelKind simple = models[i], complex = models[j];
      const double e_simple = profiles.model(simple).e_board_mj;
      const double e_complex = profiles.model(complex).e_board_mj;
      if (e_simple == e_complex) {
        throw Error(ErrorKind::InvalidArgument, "models of a pair need distinct board energies");
      }
      if (e_simple > e_complex) std::swap(simple, complex);
      for (int t = 0; t <= kMaxThreshold; ++t) {
        out.push_back(Configuration{simple, complex, t, Execution::Local});
        if (include_hybrid) out.push_back(Configuration{simple, complex, t, Execution::Hybrid});
      }
    }
  }
  return out;
}

std::vector<ActivityId> classify_all(std::span<const signal::SampleWindow> windows,
                                     const difficulty::ActivityClassifier& classifier) {
  std::vector<ActivityId> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(classifier.classify(w));
  return out;
}

Configuration profile(const Configuration& config, std::span<const ActivityId> predicted,
                      predictors::PredictionCache& predictions, const energy::ProfileSet& profiles) {
  const auto windows = predictions.windows();
  if (windows.empty()) throw Error(ErrorKind::EmptyWindowSet, "profiling needs at least one window");
  if (predicted.size() != windows.size()) {
    throw Error(ErrorKind::InvalidArgument, "one predicted activity per window required");
  }

  // Counts per (model, device) keep the energy average independent of order.
  std::array<std::array<std::size_t, 2>, 3> routed{};
  std::vector<double> errors;
  errors.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (!w.hr_ref) throw Error(ErrorKind::MissingLabels, "window " + std::to_string(i) + " has no hr_ref");
    const bool easy = predicted[i].value() <= config.threshold;
    const ModelKind model = easy ? config.simple : config.complex;
    const Device device = !easy && config.execution == Execution::Hybrid ? Device::Phone : Device::Watch;
    ++routed[static_cast<std::size_t>(model)][static_cast<std::size_t>(device)];
    const double hr = predictions.get(model, i).value_or(kFallbackBpm);
    errors.push_back(std::abs(hr - *w.hr_ref));
  }
  std::sort(errors.begin(), errors.end());
  double error_sum = 0.0;
  for (double e : errors) error_sum += e;

  double watch = 0.0;
  std::size_t offloaded = 0;
  for (ModelKind kind : kAllModels) {
    const auto k = static_cast<std::size_t>(kind);
    for (Device device : {Device::Watch, Device::Phone}) {
      const std::size_t count = routed[k][static_cast<std::size_t>(device)];
      if (count == 0) continue;
      watch += static_cast<double>(count) * energy::window_energy(profiles.model(kind), profiles.link, device).watch_mj;
      if (device == Device::Phone) offloaded += count;
    }
  }

  const auto n = static_cast<double>(windows.size());
  Configuration out = config;
  out.avg_mae_bpm = error_sum / n;
  out.avg_watch_mj = watch / n;
  out.offload_fraction = static_cast<double>(offloaded) / n;
  return out;
}

std::vector<Configuration> profile_all(std::span<const Configuration> configs,
                                       std::span<const signal::SampleWindow> windows,
                                       const difficulty::ActivityClassifier& classifier,
                                       const predictors::PredictorBank& bank, const energy::ProfileSet& profiles) {
  if (windows.empty()) throw Error(ErrorKind::EmptyWindowSet, "profiling needs at least one window");
  const auto predicted = classify_all(windows, classifier);
  predictors::PredictionCache cache(bank, windows);
  std::vector<Configuration> out;
  out.reserve(configs.size());
  for (const auto& c : configs) out.push_back(profile(c, predicted, cache, profiles));
  return out;
}

ConfigTable pareto_filter(std::span<const Configuration> configs, std::string dataset_id, std::string profile_set) {
  std::vector<Configuration> sorted(configs.begin(), configs.end());
  std::sort(sorted.begin(), sorted.end(), [](const Configuration& a, const Configuration& b) {
    if (a.avg_watch_mj != b.avg_watch_mj) return a.avg_watch_mj < b.avg_watch_mj;
    if (a.avg_mae_bpm != b.avg_mae_bpm) return a.avg_mae_bpm < b.avg_mae_bpm;
    return identity_less(a, b);
  });
  ConfigTable table;
  table.dataset_id = std::move(dataset_id);
  table.profile_set = std::move(profile_set);
  for (const auto& c : sorted) {
    if (table.rows.empty() || c.avg_mae_bpm < table.rows.back().avg_mae_bpm) table.rows.push_back(c);
  }
  return table;
}

std::string configs_to_csv(std::span<const Configuration> rows, std::span<const std::string> metadata) {
  std::string out;
  for (const auto& m : metadata) out += "# " + m + "\n";
  out += kHeader;
  out += '\n';
  for (const auto& c : rows) {
    out += std::string(to_string(c.simple)) + ',' + std::string(to_string(c.complex)) + ',' +
           std::to_string(c.threshold) + ',' + std::string(to_string(c.execution)) + ',' +
           text::format_double(c.avg_mae_bpm) + ',' + text::format_double(c.avg_watch_mj) + ',' +
           text::format_double(c.offload_fraction) + '\n';
  }
  return out;
}

std::vector<Configuration> parse_configs(const std::string& csv, std::vector<std::string>* metadata) {
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0, row = 0;
  bool header_seen = false;
  std::vector<Configuration> out;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    if (!header_seen) {
      if (trimmed.front() == '#') {
        if (metadata) metadata->emplace_back(text::trim(trimmed.substr(1)));
        continue;
      }
      if (trimmed.substr(0, std::string_view(kHeader).size()) != kHeader) {
        throw Error(ErrorKind::MissingColumn, "configuration CSV must start with: " + std::string(kHeader));
      }
      header_seen = true;
      continue;
    }
    const auto f = text::split(trimmed);
    if (f.size() < 7) throw ParseError(row, line_no, "*", "expected at least 7 fields");
    Configuration c;
    try {
      c.simple = parse_model_kind(text::trim(f[0]));
      c.complex = parse_model_kind(text::trim(f[1]));
      c.execution = parse_execution(text::trim(f[3]));
    } catch (const Error& e) {
      throw ParseError(row, line_no, "simple/complex/execution", e.what());
    }
    const auto t = text::parse_int(f[2]);
    if (!t || *t < 0 || *t > kMaxThreshold) throw ParseError(row, line_no, "threshold", "expected 0..9");
    c.threshold = static_cast<int>(*t);
    const auto mae = text::parse_double(f[4]);
    const auto mj = text::parse_double(f[5]);
    const auto off = text::parse_double(f[6]);
    if (!mae) throw ParseError(row, line_no, "avg_mae_bpm", "not a number");
    if (!mj) throw ParseError(row, line_no, "avg_watch_mj", "not a number");
    if (!off || *off < 0.0 || *off > 1.0) throw ParseError(row, line_no, "offload_fraction", "expected 0..1");
    c.avg_mae_bpm = *mae;
    c.avg_watch_mj = *mj;
    c.offload_fraction = *off;
    if (c.simple == c.complex) throw ParseError(row, line_no, "complex", "simple and complex must differ");
    out.push_back(c);
    ++row;
  }
  if (!header_seen) throw Error(ErrorKind::MissingColumn, "configuration CSV has no header");
  return out;
}

std::vector<Configuration> load_configs(const std::filesystem::path& path, std::vector<std::string>* metadata) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_configs(buf.str(), metadata);
}

std::string table_to_csv(const ConfigTable& table) {
  std::vector<std::string> meta;
  if (!table.dataset_id.empty()) meta.push_back("dataset=" + table.dataset_id);
  if (!table.profile_set.empty()) meta.push_back("profiles=" + table.profile_set);
  return configs_to_csv(table.rows, meta);
}

ConfigTable load_table(const std::filesystem::path& path) {
  std::vector<std::string> meta;
  ConfigTable table;
  table.rows = load_configs(path, &meta);
  table.dataset_id = meta_value(meta, "dataset");
  table.profile_set = meta_value(meta, "profiles");
  if (!is_pareto_sorted(table.rows)) {
    throw Error(ErrorKind::InvalidArgument, path.string() + ": rows are not an energy-sorted Pareto front");
  }
  return table;
}

void save_table(const ConfigTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << table_to_csv(table);
}

}  // namespace chris::zoo
