#include "chris/energy.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace chris::energy {
namespace {

using nlohmann::json;

LinkProfile ble_link() { return LinkProfile{0.52, 10.240}; }

}  // namespace

EnergyOutcome window_energy(const ModelProfile& model, const LinkProfile& link, Device where) {
  if (where == Device::Watch) return EnergyOutcome{model.e_board_mj, 0.0, Device::Watch};
  return EnergyOutcome{link.e_ble_mj, model.e_phone_mj, Device::Phone};
}

ProfileSet default_profiles() {
  ProfileSet set;
  set.name = "deployment";
  set.models[0] = {ModelKind::AT, 10.99, 0.234, 1.60, 100'000, 1.563, 1.00};
  set.models[1] = {ModelKind::TimePPGSmall, 5.60, 0.735, 5.54, 1'365'000, 21.326, 3.45};
  set.models[2] = {ModelKind::TimePPGBig, 4.87, 41.11, 25.60, 103'160'000, 1611.88, 15.96};
  set.link = ble_link();
  return set;
}

ProfileSet alternate_profiles() {
  ProfileSet set = default_profiles();
  set.name = "summary";
  set.models[0].mae_bpm = 10.84;
  set.models[0].e_board_mj = 0.23;
  set.models[0].e_phone_mj = 1.61;
  set.models[1].mae_bpm = 5.63;
  set.models[1].e_board_mj = 0.543;
  set.models[2].mae_bpm = 4.88;
  return set;
}

ProfileSet profiles_by_name(const std::string& name) {
  if (name == "deployment" || name == "default") return default_profiles();
  if (name == "summary" || name == "alternate") return alternate_profiles();
  throw Error(ErrorKind::InvalidArgument, "unknown profile set '" + name + "'");
}

bool offload_saves_watch_energy(const ModelProfile& model, const LinkProfile& link) {
  return model.e_board_mj > link.e_ble_mj;
}

void validate(const ProfileSet& profiles) {
  for (std::size_t i = 0; i < profiles.models.size(); ++i) {
    const ModelProfile& m = profiles.models[i];
    if (static_cast<std::size_t>(m.kind) != i) throw Error(ErrorKind::InvalidArgument, "profile models out of order");
    if (!(m.e_board_mj > 0.0) || !(m.e_phone_mj > 0.0) || !(m.mae_bpm > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, std::string(to_string(m.kind)) + ": energies and MAE must be > 0");
    }
  }
  if (!(profiles.link.e_ble_mj > 0.0)) throw Error(ErrorKind::InvalidArgument, "e_ble_mj must be > 0");
}

std::string profiles_to_json(const ProfileSet& profiles) {
  json models = json::array();
  for (const auto& m : profiles.models) {
    models.push_back({{"kind", std::string(to_string(m.kind))},
                      {"mae_bpm", m.mae_bpm},
                      {"e_board_mj", m.e_board_mj},
                      {"e_phone_mj", m.e_phone_mj},
                      {"cycles_board", m.cycles_board},
                      {"time_board_ms", m.time_board_ms},
                      {"time_phone_ms", m.time_phone_ms}});
  }
  json j = {{"name", profiles.name},
            {"models", models},
            {"link", {{"e_ble_mj", profiles.link.e_ble_mj}, {"time_ms", profiles.link.time_ms}}}};
  return j.dump(2);
}

ProfileSet profiles_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ProfileSet set;
    set.name = j.value("name", "custom");
    std::array<bool, 3> seen{};
    for (const auto& mj : j.at("models")) {
      ModelProfile m;
      m.kind = parse_model_kind(mj.at("kind").get<std::string>());
      m.mae_bpm = mj.at("mae_bpm").get<double>();
      m.e_board_mj = mj.at("e_board_mj").get<double>();
      m.e_phone_mj = mj.at("e_phone_mj").get<double>();
      m.cycles_board = mj.value("cycles_board", std::int64_t{0});
      m.time_board_ms = mj.value("time_board_ms", 0.0);
      m.time_phone_ms = mj.value("time_phone_ms", 0.0);
      const auto i = static_cast<std::size_t>(m.kind);
      if (seen[i]) throw Error(ErrorKind::InvalidArgument, "duplicate profile for " + std::string(to_string(m.kind)));
      seen[i] = true;
      set.models[i] = m;
    }
    if (!(seen[0] && seen[1] && seen[2])) throw Error(ErrorKind::InvalidArgument, "profiles must cover all three models");
    set.link.e_ble_mj = j.at("link").at("e_ble_mj").get<double>();
    set.link.time_ms = j.at("link").value("time_ms", 0.0);
    validate(set);
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("profiles JSON: ") + e.what());
  }
}

ProfileSet load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return profiles_from_json(buf.str());
}

void save_profiles(const ProfileSet& profiles, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << profiles_to_json(profiles) << '\n';
}

}  // namespace chris::energy
