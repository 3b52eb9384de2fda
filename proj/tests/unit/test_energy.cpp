#include <filesystem>

#include "chris/energy.hpp"
#include "doctest.h"

using namespace chris;
using namespace chris::energy;

TEST_CASE("window energy by device") {
  const auto p = default_profiles();
  const auto at = window_energy(p.model(ModelKind::AT), p.link, Device::Watch);
  CHECK(at.watch_mj == 0.234);
  CHECK(at.phone_mj == 0.0);
  CHECK(at.where == Device::Watch);

  const auto big = window_energy(p.model(ModelKind::TimePPGBig), p.link, Device::Phone);
  CHECK(big.watch_mj == 0.52);
  CHECK(big.phone_mj == 25.60);
  CHECK(big.where == Device::Phone);

  CHECK(window_energy(p.model(ModelKind::TimePPGSmall), p.link, Device::Watch).watch_mj == 0.735);
}

TEST_CASE("deployment fixture values") {
  const auto p = default_profiles();
  const auto& at = p.model(ModelKind::AT);
  const auto& small = p.model(ModelKind::TimePPGSmall);
  const auto& big = p.model(ModelKind::TimePPGBig);
  CHECK(at.mae_bpm == 10.99);
  CHECK(at.e_board_mj == 0.234);
  CHECK(at.e_phone_mj == 1.60);
  CHECK(at.cycles_board == 100000);
  CHECK(small.mae_bpm == 5.60);
  CHECK(small.e_board_mj == 0.735);
  CHECK(small.e_phone_mj == 5.54);
  CHECK(small.cycles_board == 1365000);
  CHECK(big.mae_bpm == 4.87);
  CHECK(big.e_board_mj == 41.11);
  CHECK(big.e_phone_mj == 25.60);
  CHECK(big.cycles_board == 103160000);
  CHECK(p.link.e_ble_mj == 0.52);
  CHECK(p.link.time_ms == 10.240);
  CHECK(kBleEnergyAliasMj == 0.519);
  for (ModelKind k : kAllModels) CHECK(p.model(k).kind == k);
}

TEST_CASE("alternate fixture values") {
  const auto p = alternate_profiles();
  CHECK(p.model(ModelKind::TimePPGSmall).e_board_mj == 0.543);
  CHECK(p.model(ModelKind::AT).mae_bpm == 10.84);
  CHECK(p.link.e_ble_mj == 0.52);
  CHECK(profiles_by_name("summary").name == p.name);
  CHECK(profiles_by_name("deployment").name == default_profiles().name);
  CHECK_THROWS_AS(profiles_by_name("nope"), Error);
}

TEST_CASE("offloading helps the watch only for the networks") {
  const auto p = default_profiles();
  CHECK_FALSE(offload_saves_watch_energy(p.model(ModelKind::AT), p.link));
  CHECK(offload_saves_watch_energy(p.model(ModelKind::TimePPGSmall), p.link));
  CHECK(offload_saves_watch_energy(p.model(ModelKind::TimePPGBig), p.link));
}

TEST_CASE("profiles JSON round trip and validation") {
  const auto p = default_profiles();
  const auto back = profiles_from_json(profiles_to_json(p));
  CHECK(profiles_to_json(back) == profiles_to_json(p));
  CHECK(back.model(ModelKind::TimePPGBig).time_board_ms == p.model(ModelKind::TimePPGBig).time_board_ms);

  auto bad = p;
  bad.models[1].e_board_mj = 0.0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = p;
  bad.link.e_ble_mj = -1.0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = p;
  bad.models[0].kind = ModelKind::TimePPGBig;
  CHECK_THROWS_AS(validate(bad), Error);

  CHECK_THROWS_AS(profiles_from_json(R"({"models":[],"link":{"e_ble_mj":1}})"), Error);

  const auto dir = std::filesystem::path(CHRIS_TEST_TMP);
  std::filesystem::create_directories(dir);
  save_profiles(p, dir / "profiles.json");
  CHECK(profiles_to_json(load_profiles(dir / "profiles.json")) == profiles_to_json(p));
}
