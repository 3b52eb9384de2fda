#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "chris/types.hpp"

namespace chris::energy {

/// Cost and error of one predictor on the wearable and on the phone.
struct ModelProfile {
  ModelKind kind = ModelKind::AT;
  double mae_bpm = 0.0;
  double e_board_mj = 0.0;
  double e_phone_mj = 0.0;
  std::int64_t cycles_board = 0;
  double time_board_ms = 0.0;
  double time_phone_ms = 0.0;
};

/// Wearable-side cost of sending one input window over BLE. Independent of
/// the model that will consume it.
struct LinkProfile {
  double e_ble_mj = 0.0;
  double time_ms = 0.0;
};

// The BLE energy is also quoted as 0.519 mJ in the running text.
inline constexpr double kBleEnergyAliasMj = 0.519;

struct ProfileSet {
  std::string name;
  std::array<ModelProfile, 3> models;  // indexed by ModelKind
  LinkProfile link;

  const ModelProfile& model(ModelKind kind) const { return models[static_cast<std::size_t>(kind)]; }
};

struct EnergyOutcome {
  double watch_mj = 0.0;
  double phone_mj = 0.0;
  Device where = Device::Watch;
};

/// Watch: the board pays the inference. Phone: the board pays the BLE
/// transfer and the phone pays the inference.
EnergyOutcome window_energy(const ModelProfile& model, const LinkProfile& link, Device where);

/// Measured deployment figures (STM32WB55 @ 64 MHz, Raspberry Pi3 @ 600 MHz).
ProfileSet default_profiles();
/// The per-model summary table variant (Small board 0.543 mJ, AT MAE 10.84).
ProfileSet alternate_profiles();
ProfileSet profiles_by_name(const std::string& name);

/// True when offloading lowers the wearable's energy for this model.
bool offload_saves_watch_energy(const ModelProfile& model, const LinkProfile& link);

/// Throws InvalidArgument on non-positive energies/MAE or misplaced kinds.
void validate(const ProfileSet& profiles);

/// JSON with the field names of ModelProfile/LinkProfile:
/// {"name":..., "models":[{"kind":"AT","mae_bpm":...,...}], "link":{"e_ble_mj":...,"time_ms":...}}
std::string profiles_to_json(const ProfileSet& profiles);
ProfileSet profiles_from_json(const std::string& json);
ProfileSet load_profiles(const std::filesystem::path& path);
void save_profiles(const ProfileSet& profiles, const std::filesystem::path& path);

}  // namespace chris::energy
