#include "chris/engine.hpp"

#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>

#include "chris/text.hpp"
#include "json.hpp"

namespace chris::engine {
namespace {

// Orders rows by (primary axis, secondary axis, identity).
bool ranks_before(const zoo::Configuration& a, const zoo::Configuration& b, bool energy_first) {
  const double pa = energy_first ? a.avg_watch_mj : a.avg_mae_bpm;
  const double pb = energy_first ? b.avg_watch_mj : b.avg_mae_bpm;
  if (pa != pb) return pa < pb;
  const double sa = energy_first ? a.avg_mae_bpm : a.avg_watch_mj;
  const double sb = energy_first ? b.avg_mae_bpm : b.avg_watch_mj;
  if (sa != sb) return sa < sb;
  return zoo::identity_less(a, b);
}

}  // namespace

Constraint parse_constraint(std::string_view text) {
  const auto t = text::trim(text);
  const auto eq = t.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorKind::InvalidArgument, "constraint must look like max-mae=<bpm> or max-energy=<mJ>");
  }
  const auto key = text::trim(t.substr(0, eq));
  const auto raw = text::trim(t.substr(eq + 1));
  const auto value = raw == "inf" ? std::optional<double>(std::numeric_limits<double>::infinity()) : text::parse_double(raw);
  if (!value || std::isnan(*value) || *value <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "constraint threshold must be a number > 0");
  }
  if (key == "max-mae") return MaxMae{*value};
  if (key == "max-energy") return MaxEnergy{*value};
  throw Error(ErrorKind::InvalidArgument, "unknown constraint '" + std::string(key) + "'");
}

std::string to_string(const Constraint& c) {
  if (const auto* m = std::get_if<MaxMae>(&c)) return "max-mae=" + text::format_double(m->bpm);
  return "max-energy=" + text::format_double(std::get<MaxEnergy>(c).mj);
}

double threshold_of(const Constraint& c) {
  return std::visit([](const auto& v) -> double {
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, MaxMae>) {
      return v.bpm;
    } else {
      return v.mj;
    }
  }, c);
}

zoo::ConfigTable feasible(const zoo::ConfigTable& table, ConnectionStatus status) {
  zoo::ConfigTable out{{}, table.dataset_id, table.profile_set};
  if (status == ConnectionStatus::Connected) {
    out.rows = table.rows;
  } else {
    // A subset of a sorted antichain is still one, so no re-sort is needed.
    for (const auto& row : table.rows) {
      if (row.execution == Execution::Local) out.rows.push_back(row);
    }
  }
  if (out.rows.empty()) {
    throw Error(ErrorKind::NoFeasibleConfig,
                "no configuration available while " + std::string(chris::to_string(status)));
  }
  return out;
}

Selection select(std::span<const zoo::Configuration> rows, const Constraint& c) {
  if (rows.empty()) throw Error(ErrorKind::NoFeasibleConfig, "empty configuration table");
  const bool by_mae = std::holds_alternative<MaxMae>(c);
  const double th = threshold_of(c);

  const zoo::Configuration* best = nullptr;      // meets the constraint
  const zoo::Configuration* fallback = nullptr;  // closest on the constrained axis
  for (const auto& row : rows) {
    const double constrained = by_mae ? row.avg_mae_bpm : row.avg_watch_mj;
    if (constrained <= th && (!best || ranks_before(row, *best, by_mae))) best = &row;
    if (!fallback || ranks_before(row, *fallback, !by_mae)) fallback = &row;
  }
  if (best) return {*best, false};
  return {*fallback, true};
}

Dispatch dispatch(const zoo::Configuration& config, ActivityId predicted) {
  if (predicted.value() <= config.threshold) return {config.simple, Device::Watch};
  return {config.complex, config.execution == Execution::Hybrid ? Device::Phone : Device::Watch};
}

DecisionEngine::DecisionEngine(zoo::ConfigTable table, Constraint constraint, ConnectionStatus status)
    : table_(std::move(table)), constraint_(constraint), status_(status) {
  reselect(status, constraint);
}

bool DecisionEngine::set_status(ConnectionStatus status) {
  if (status == status_) return false;
  reselect(status, constraint_);
  return true;
}

bool DecisionEngine::set_constraint(Constraint constraint) {
  if (constraint.index() == constraint_.index() && threshold_of(constraint) == threshold_of(constraint_)) {
    return false;
  }
  reselect(status_, constraint);
  return true;
}

void DecisionEngine::reselect(ConnectionStatus status, Constraint constraint) {
  const auto rows = feasible(table_, status);
  current_ = select(rows.rows, constraint);
  status_ = status;
  constraint_ = constraint;
  events_.push_back({status_, constraint_, current_});
}

Control parse_control(const std::string& json) {
  try {
    const auto j = nlohmann::json::parse(json);
    Control c{parse_constraint(j.at("constraint").get<std::string>())};
    if (j.contains("status")) c.status = parse_connection_status(j.at("status").get<std::string>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("control JSON: ") + e.what());
  }
}

Control load_control(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_control(buf.str());
}

}  // namespace chris::engine
