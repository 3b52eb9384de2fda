#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "chris/zoo.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chris;
using namespace chris::zoo;

namespace {

std::vector<signal::SampleWindow> uniform_windows(int per_activity, std::uint64_t seed = 1) {
  std::vector<signal::SampleWindow> out;
  for (int a = 1; a <= 9; ++a) {
    for (int i = 0; i < per_activity; ++i) {
      out.push_back(signal::synth_window(60.0 + 7.0 * i + a, ActivityId(a), seed * 1000 + a * 50 + i));
    }
  }
  return out;
}

// AT for real; both networks replaced by exact predictors.
predictors::PredictorBank oracle_bank() {
  predictors::PredictorBank bank;
  auto exact = [](const signal::SampleWindow& w) -> std::optional<double> { return *w.hr_ref; };
  bank.set(ModelKind::TimePPGSmall, exact);
  bank.set(ModelKind::TimePPGBig, exact);
  return bank;
}

Configuration find(const std::vector<Configuration>& rows, ModelKind s, ModelKind c, int t, Execution e) {
  for (const auto& r : rows) {
    if (r.simple == s && r.complex == c && r.threshold == t && r.execution == e) return r;
  }
  FAIL("configuration not found");
  return {};
}

Configuration point(double mj, double mae, int t = 0) {
  Configuration c;
  c.avg_watch_mj = mj;
  c.avg_mae_bpm = mae;
  c.threshold = t;
  return c;
}

}  // namespace

TEST_CASE("enumeration counts and roles") {
  const auto p = energy::default_profiles();
  CHECK(enumerate(kAllModels, p).size() == 60);
  CHECK(enumerate(kAllModels, p, false).size() == 30);
  const ModelKind two[] = {ModelKind::TimePPGBig, ModelKind::AT};
  const auto pair = enumerate(two, p);
  CHECK(pair.size() == 20);
  for (const auto& c : pair) {
    CHECK(c.simple == ModelKind::AT);
    CHECK(c.complex == ModelKind::TimePPGBig);
  }
  for (const auto& c : enumerate(kAllModels, p)) {
    CHECK(p.model(c.simple).e_board_mj < p.model(c.complex).e_board_mj);
  }
  // Identities are unique.
  auto all = enumerate(kAllModels, p);
  std::sort(all.begin(), all.end(), identity_less);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK_FALSE(all[i].same_identity(all[i - 1]));

  const ModelKind dup[] = {ModelKind::AT, ModelKind::AT};
  CHECK_THROWS_AS(enumerate(dup, p), Error);
}

TEST_CASE("profile closed forms for Hybrid(AT, Big)") {
  const auto p = energy::default_profiles();
  const auto windows = uniform_windows(5);
  const auto bank = oracle_bank();
  const difficulty::OracleClassifier perfect;
  const ModelKind pair[] = {ModelKind::AT, ModelKind::TimePPGBig};
  const auto rows = profile_all(enumerate(pair, p), windows, perfect, bank, p);

  const auto t9 = find(rows, ModelKind::AT, ModelKind::TimePPGBig, 9, Execution::Hybrid);
  CHECK(t9.offload_fraction == 0.0);
  CHECK(t9.avg_watch_mj == doctest::Approx(0.234).epsilon(1e-12));

  const auto t0 = find(rows, ModelKind::AT, ModelKind::TimePPGBig, 0, Execution::Hybrid);
  CHECK(t0.offload_fraction == 1.0);
  CHECK(t0.avg_watch_mj == doctest::Approx(0.52).epsilon(1e-12));

  const auto t6 = find(rows, ModelKind::AT, ModelKind::TimePPGBig, 6, Execution::Hybrid);
  CHECK(std::abs(t6.avg_watch_mj - (6.0 / 9 * 0.234 + 3.0 / 9 * 0.52)) < 1e-12);
  CHECK(t6.avg_watch_mj == doctest::Approx(0.329).epsilon(1e-3));

  double prev_mj = 1e9, prev_mae = -1.0;
  for (int t = 0; t <= 9; ++t) {
    const auto r = find(rows, ModelKind::AT, ModelKind::TimePPGBig, t, Execution::Hybrid);
    CHECK(std::abs(r.avg_watch_mj - (t / 9.0 * 0.234 + (9 - t) / 9.0 * 0.52)) < 1e-12);
    CHECK(r.offload_fraction == doctest::Approx((9 - t) / 9.0));
    CHECK(r.avg_watch_mj < prev_mj);
    CHECK(r.avg_mae_bpm >= prev_mae);
    prev_mj = r.avg_watch_mj;
    prev_mae = r.avg_mae_bpm;
  }
  // Local at t=9 routes exactly like Hybrid at t=9.
  const auto l9 = find(rows, ModelKind::AT, ModelKind::TimePPGBig, 9, Execution::Local);
  CHECK(l9.avg_mae_bpm == t9.avg_mae_bpm);
  CHECK(l9.avg_watch_mj == t9.avg_watch_mj);
}

TEST_CASE("profile uses the predicted activity") {
  const auto p = energy::default_profiles();
  const auto windows = uniform_windows(2);
  const auto bank = oracle_bank();
  predictors::PredictionCache cache(bank, windows);
  Configuration c{ModelKind::AT, ModelKind::TimePPGBig, 4, Execution::Hybrid};
  // Everything predicted as activity 9: all offloaded despite true labels.
  const std::vector<ActivityId> all_hard(windows.size(), ActivityId(9));
  const auto r = profile(c, all_hard, cache, p);
  CHECK(r.offload_fraction == 1.0);
  CHECK(r.avg_mae_bpm == 0.0);
}

TEST_CASE("profile is invariant to window order") {
  const auto p = energy::default_profiles();
  auto windows = uniform_windows(4, 3);
  const auto bank = oracle_bank();
  const difficulty::OracleClassifier perfect;
  const auto configs = enumerate(kAllModels, p);
  const auto a = profile_all(configs, windows, perfect, bank, p);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 3; ++k) {
    std::shuffle(windows.begin(), windows.end(), rng);
    const auto b = profile_all(configs, windows, perfect, bank, p);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].avg_mae_bpm == b[i].avg_mae_bpm);
      CHECK(a[i].avg_watch_mj == b[i].avg_watch_mj);
      CHECK(a[i].offload_fraction == b[i].offload_fraction);
    }
  }
}

TEST_CASE("profile errors") {
  const auto p = energy::default_profiles();
  const auto bank = oracle_bank();
  const difficulty::OracleClassifier perfect;
  const auto configs = enumerate(kAllModels, p);
  try {
    profile_all(configs, {}, perfect, bank, p);
    FAIL("expected EmptyWindowSet");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyWindowSet);
  }
  auto windows = uniform_windows(1);
  windows[4].hr_ref.reset();
  try {
    profile_all(configs, windows, perfect, bank, p);
    FAIL("expected MissingLabels");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingLabels);
  }
}

TEST_CASE("pareto_filter examples") {
  const std::vector<Configuration> two{point(1, 5), point(2, 6)};
  const auto f2 = pareto_filter(two);
  REQUIRE(f2.rows.size() == 1);
  CHECK(f2.rows[0].avg_watch_mj == 1);

  const std::vector<Configuration> chain{point(3, 3), point(1, 5), point(2, 4)};
  const auto f3 = pareto_filter(chain);
  REQUIRE(f3.rows.size() == 3);
  CHECK(f3.rows[0].avg_watch_mj == 1);
  CHECK(f3.rows[2].avg_watch_mj == 3);
  CHECK(is_pareto_sorted(f3.rows));

  // Exact duplicates keep the identity-smallest row.
  const std::vector<Configuration> dup{point(1, 5, 7), point(1, 5, 2), point(1, 5, 4)};
  const auto f4 = pareto_filter(dup);
  REQUIRE(f4.rows.size() == 1);
  CHECK(f4.rows[0].threshold == 2);

  // Equal energy: only the lower MAE survives.
  const std::vector<Configuration> eq{point(1, 6), point(1, 5)};
  REQUIRE(pareto_filter(eq).rows.size() == 1);
  CHECK(pareto_filter(eq).rows[0].avg_mae_bpm == 5);
  CHECK(pareto_filter(std::vector<Configuration>{}).rows.empty());
}

TEST_CASE("pareto_filter matches the brute-force oracle") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> n(0, 60);
  for (int trial = 0; trial < 300; ++trial) {
    const auto configs = oracle::random_configs(rng, n(rng));
    const auto table = pareto_filter(configs);
    CHECK(is_pareto_sorted(table.rows));
    auto got = table.rows;
    std::sort(got.begin(), got.end(), [](const auto& a, const auto& b) { return oracle::key(a) < oracle::key(b); });
    const auto want = oracle::pareto(configs);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(oracle::key(got[i]) == oracle::key(want[i]));

    // Antichain, and the extremes are present.
    for (const auto& a : table.rows) {
      for (const auto& b : table.rows) CHECK_FALSE(dominates(a, b));
    }
    if (!configs.empty()) {
      double min_mj = 1e9, min_mae = 1e9;
      for (const auto& c : configs) {
        min_mj = std::min(min_mj, c.avg_watch_mj);
        min_mae = std::min(min_mae, c.avg_mae_bpm);
      }
      CHECK(table.rows.front().avg_watch_mj == min_mj);
      CHECK(table.rows.back().avg_mae_bpm == min_mae);
    }
  }
}

TEST_CASE("configuration CSV") {
  std::mt19937_64 rng(5);
  const auto configs = oracle::random_configs(rng, 25);
  const std::vector<std::string> meta{"dataset=unit", "profiles=deployment"};
  const auto text = configs_to_csv(configs, meta);
  CHECK(text.rfind("# dataset=unit\n# profiles=deployment\nsimple,complex,threshold,execution,", 0) == 0);
  std::vector<std::string> meta_back;
  const auto back = parse_configs(text, &meta_back);
  CHECK(meta_back == meta);
  REQUIRE(back.size() == configs.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(oracle::key(back[i]) == oracle::key(configs[i]));
  CHECK(configs_to_csv(back, meta) == text);

  const auto table = pareto_filter(configs, "unit", "deployment");
  const auto dir = std::filesystem::path(CHRIS_TEST_TMP);
  std::filesystem::create_directories(dir);
  save_table(table, dir / "table.csv");
  const auto loaded = load_table(dir / "table.csv");
  CHECK(loaded.dataset_id == "unit");
  CHECK(loaded.profile_set == "deployment");
  CHECK(table_to_csv(loaded) == table_to_csv(table));

  // An unsorted file is not a table.
  std::ofstream(dir / "unsorted.csv") << configs_to_csv(std::vector<Configuration>{point(2, 4), point(1, 5)});
  CHECK_THROWS_AS(load_table(dir / "unsorted.csv"), Error);

  CHECK_THROWS_AS(parse_configs("simple,complex\n"), Error);
  CHECK_THROWS_AS(parse_configs(configs_to_csv({}) + "AT,AT,1,Local,1,1,0\n"), ParseError);
  CHECK_THROWS_AS(parse_configs(configs_to_csv({}) + "AT,TimePPG-Big,10,Local,1,1,0\n"), ParseError);
  CHECK_THROWS_AS(parse_configs(configs_to_csv({}) + "AT,TimePPG-Big,1,Remote,1,1,0\n"), ParseError);
  CHECK(parse_configs(configs_to_csv({}) + "AT,TimePPG-Big,1,Hybrid,1,1,0,extra,cols\n").size() == 1);
}

TEST_CASE("labels") {
  Configuration c{ModelKind::AT, ModelKind::TimePPGBig, 6, Execution::Hybrid};
  CHECK(c.label() == "AT+TimePPG-Big/t6/Hybrid");
}
