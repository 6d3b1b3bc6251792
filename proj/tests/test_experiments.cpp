#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "peerbalance/csv.hpp"
#include "peerbalance/error.hpp"
#include "peerbalance/experiments.hpp"
#include "peerbalance/random.hpp"

using namespace peerbalance;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "peerbalance_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ExperimentSpec tiny_spec() {
  ExperimentSpec spec;
  spec.m = 5;
  spec.budget = 10;
  spec.replications = 4;
  spec.betas = {0.2, 0.6};
  spec.max_draws = 100'000;
  return spec;
}

Trajectory constant_trajectory(double energy, double tvd, std::size_t n) {
  Trajectory t;
  t.initial_total_energy = energy;
  t.initial_tvd = tvd;
  for (std::size_t k = 1; k <= n; ++k) t.rows.push_back({k, k, energy, tvd, 0.0});
  return t;
}

}  // namespace

TEST_CASE("doubles survive the CSV round trip bit for bit") {
  Rng rng(1);
  Trajectory t;
  std::vector<double> special{0.1, 1.0 / 3.0, 1e-300, 5e-324, 1.7976931348623157e308, 0.0,
                              123456789.123456789};
  for (std::size_t k = 1; k <= 500; ++k) {
    const double x = k <= special.size() ? special[k - 1] : rng.uniform01() * 1e4;
    t.rows.push_back({k, 3 * k, x, rng.uniform01(), std::bit_cast<double>(rng.next_u64() >> 2)});
  }
  const auto path = scratch("roundtrip") / "t.csv";
  emit_csv(t, path);
  const auto table = csv::read(path);
  REQUIRE(table.rows.size() == t.rows.size());
  const auto ce = table.column("total_energy"), ct = table.column("tvd"),
             cl = table.column("cumulative_loss"), cd = table.column("draws");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = table.rows[i];
    CHECK(std::bit_cast<std::uint64_t>(csv::parse_double(row[ce])) ==
          std::bit_cast<std::uint64_t>(t.rows[i].total_energy));
    CHECK(csv::parse_double(row[ct]) == t.rows[i].tvd);
    CHECK(csv::parse_double(row[cl]) == t.rows[i].cumulative_loss);
    CHECK(csv::parse_u64(row[cd]) == t.rows[i].draws);
  }
}

TEST_CASE("CSV layout") {
  const auto dir = scratch("layout");
  emit_csv(Trajectory{}, dir / "empty.csv");
  CHECK(line_count(dir / "empty.csv") == 1);
  CHECK(slurp(dir / "empty.csv") == "k,draws,total_energy,tvd,cumulative_loss\n");

  emit_csv(AggregateSeries{}, dir / "agg.csv");
  CHECK(slurp(dir / "agg.csv") ==
        "k,mean_total_energy,mean_tvd,median_tvd,q1_tvd,q3_tvd,mean_cumulative_loss\n");

  emit_csv(std::vector<EfficiencyPoint>{}, dir / "eff.csv");
  CHECK(slurp(dir / "eff.csv") == "remaining_energy,tvd\n");

  emit_csv(constant_trajectory(5.0, 0.1, 1000), dir / "long.csv");
  CHECK(line_count(dir / "long.csv") == 1001);

  CHECK(csv::format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(csv::parse_double("1.5x"), Error);
  CHECK_THROWS_AS(csv::read(dir / "missing.csv"), Error);
}

TEST_CASE("type-7 quantiles") {
  CHECK(quantile({1, 2, 3, 4}, 0.25) == Approx(1.75));
  CHECK(quantile({4, 1, 3, 2}, 0.5) == Approx(2.5));
  CHECK(quantile({1, 2, 3, 4}, 0.75) == Approx(3.25));
  CHECK(quantile({7}, 0.3) == 7.0);
  CHECK(quantile({1, 9}, 0.0) == 1.0);
  CHECK(quantile({1, 9}, 1.0) == 9.0);
  CHECK_THROWS_AS(quantile({}, 0.5), Error);
}

TEST_CASE("aggregating constant trajectories gives the constant") {
  const auto agg = aggregate({constant_trajectory(5.0, 0.25, 8), constant_trajectory(5.0, 0.25, 8),
                              constant_trajectory(5.0, 0.25, 8)});
  REQUIRE(agg.rows.size() == 8);
  for (const auto& r : agg.rows) {
    CHECK(r.mean_total_energy == 5.0);
    CHECK(r.mean_tvd == 0.25);
    CHECK(r.median_tvd == 0.25);
    CHECK(r.q1_tvd == 0.25);
    CHECK(r.q3_tvd == 0.25);
    CHECK(r.outliers == 0);
    CHECK(r.replications == 3);
  }
  CHECK(agg.initial_mean_tvd == 0.25);
}

TEST_CASE("a truncated run holds its last state in the aggregate") {
  auto short_run = constant_trajectory(4.0, 0.5, 2);
  short_run.truncated = true;
  const auto agg = aggregate({constant_trajectory(6.0, 0.1, 5), short_run});
  REQUIRE(agg.rows.size() == 5);
  CHECK(agg.rows[1].replications == 2);
  CHECK(agg.rows[4].replications == 1);
  CHECK(agg.rows[4].mean_total_energy == 5.0);
  CHECK(agg.rows[4].mean_tvd == Approx(0.3));
}

TEST_CASE("Tukey fences flag far-out replications") {
  std::vector<Trajectory> runs;
  for (double t : {0.10, 0.11, 0.12, 0.13, 0.14, 0.9}) runs.push_back(constant_trajectory(1, t, 1));
  const auto row = aggregate(runs).rows.at(0);
  CHECK(row.q1_tvd <= row.median_tvd);
  CHECK(row.median_tvd <= row.q3_tvd);
  CHECK(row.outliers == 1);
  CHECK(row.upper_fence == Approx(row.q3_tvd + 1.5 * (row.q3_tvd - row.q1_tvd)));
}

TEST_CASE("small experiment: shape, one replication, seed prefixes") {
  auto spec = tiny_spec();
  const auto result = run_experiment(spec);
  REQUIRE(result.cells.size() == 6);
  for (const auto& cell : result.cells) {
    CHECK(cell.runs.size() == 4);
    CHECK(cell.aggregate.rows.size() == 10);
    for (const auto& r : cell.aggregate.rows) {
      CHECK(r.q1_tvd <= r.median_tvd);
      CHECK(r.median_tvd <= r.q3_tvd);
    }
  }
  CHECK(result.cells[0].protocol == ProtocolKind::Ows);
  CHECK(result.cells[1].beta == 0.6);

  spec.replications = 1;
  const auto one = run_experiment(spec);
  for (std::size_t c = 0; c < one.cells.size(); ++c) {
    const auto& run = one.cells[c].runs.at(0);
    const auto& agg = one.cells[c].aggregate;
    REQUIRE(agg.rows.size() == run.rows.size());
    for (std::size_t i = 0; i < run.rows.size(); ++i) {
      CHECK(agg.rows[i].mean_tvd == run.rows[i].tvd);
      CHECK(agg.rows[i].median_tvd == run.rows[i].tvd);
      CHECK(agg.rows[i].mean_total_energy == run.rows[i].total_energy);
      CHECK(agg.rows[i].mean_cumulative_loss == run.rows[i].cumulative_loss);
    }
    // Replication 0 does not depend on how many replications were asked for.
    const auto& first = result.cells[c].runs[0];
    REQUIRE(first.rows.size() == run.rows.size());
    for (std::size_t i = 0; i < run.rows.size(); ++i) {
      CHECK(first.rows[i].tvd == run.rows[i].tvd);
      CHECK(first.rows[i].draws == run.rows[i].draws);
    }
  }
}

TEST_CASE("thread count does not change results") {
  auto spec = tiny_spec();
  spec.replications = 7;
  const auto a = run_experiment(spec);
  spec.threads = 3;
  const auto b = run_experiment(spec);
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    for (std::size_t r = 0; r < 7; ++r) {
      const auto& ra = a.cells[c].runs[r].rows;
      const auto& rb = b.cells[c].runs[r].rows;
      REQUIRE(ra.size() == rb.size());
      for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].tvd == rb[i].tvd);
    }
  }
}

TEST_CASE("replication r starts from the same population in every cell") {
  const auto spec = paper_default_spec();
  const auto a = replication_config(spec, ProtocolKind::Ows, 0.2, 3);
  const auto b = replication_config(spec, ProtocolKind::Owa, 0.8, 3);
  const auto c = replication_config(spec, ProtocolKind::Owa, 0.8, 4);
  CHECK(a.population.seed == b.population.seed);
  CHECK(initialize_population(a.population).energies() ==
        initialize_population(b.population).energies());
  CHECK(a.seed != b.seed);
  CHECK(b.population.seed != c.population.seed);
  CHECK(cell_id(ProtocolKind::Ows, 0.2) != cell_id(ProtocolKind::Swt, 0.2));
  CHECK(cell_id(ProtocolKind::Ows, 0.2) != cell_id(ProtocolKind::Ows, 0.4));
}

TEST_CASE("efficiency series") {
  auto spec = tiny_spec();
  spec.betas = {0.0};
  spec.protocols = {ProtocolKind::Ows};
  const auto run0 = run(replication_config(spec, ProtocolKind::Ows, 0.0, 0));
  const auto eff = efficiency_series(run0);
  REQUIRE(eff.size() == run0.rows.size());
  for (const auto& [x, y] : eff) CHECK(x == Approx(eff.front().first).epsilon(1e-12));

  const auto swt = run(replication_config(spec, ProtocolKind::Swt, 0.3, 0));
  const auto swt_eff = efficiency_series(swt);
  for (std::size_t i = 1; i < swt_eff.size(); ++i) CHECK(swt_eff[i].first < swt_eff[i - 1].first);

  CHECK(efficiency_series(constant_trajectory(2, 0.5, 1)).size() == 1);
}

TEST_CASE("spec JSON round trip and validation") {
  auto spec = tiny_spec();
  spec.protocols = {ProtocolKind::SwtFlat, ProtocolKind::Owa};
  spec.weights.kind = WeightSpec::Kind::Uniform;
  spec.params.d_epsilon = 0.05;
  const auto back = spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  CHECK(back.protocols == spec.protocols);
  CHECK(back.params.d_epsilon == 0.05);

  auto bad = to_json(spec);
  bad["budgett"] = 3;
  CHECK_THROWS_AS(spec_from_json(bad), Error);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"protocols": ["zzz"]})")), Error);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"m": "ten"})")), Error);

  const auto dflt = paper_default_spec();
  CHECK(dflt.m == 100);
  CHECK(dflt.budget == 1000);
  CHECK(dflt.replications == 100);
  CHECK(dflt.betas == std::vector<double>{0.2, 0.4, 0.6, 0.8});

  spec.betas = {0.2, 0.2};
  CHECK_THROWS_AS(validate(spec), Error);
  spec = tiny_spec();
  spec.replications = 0;
  CHECK_THROWS_AS(validate(spec), Error);

  const auto path = scratch("json") / "spec.json";
  std::ofstream(path) << R"({"m": 7, "betas": [0.5], "weights": {"kind": "equal"}})";
  const auto loaded = load_spec(path);
  CHECK(loaded.m == 7);
  CHECK(loaded.betas == std::vector<double>{0.5});
  CHECK(loaded.weights.kind == WeightSpec::Kind::Equal);
  CHECK(loaded.budget == 1000);
}

TEST_CASE("experiment output directory") {
  const auto dir = scratch("out");
  auto spec = tiny_spec();
  spec.replications = 2;
  const auto result = run_experiment(spec);
  write_experiment(result, dir, true);
  CHECK(cell_stem(ProtocolKind::Swt, 0.4) == "swt_beta0.4");
  for (const char* stem : {"ows_beta0.2", "swt_beta0.6", "owa_beta0.2"}) {
    CHECK(fs::exists(dir / (std::string(stem) + "_aggregate.csv")));
    CHECK(fs::exists(dir / (std::string(stem) + "_efficiency.csv")));
    CHECK(fs::exists(dir / (std::string(stem) + "_outliers.csv")));
    CHECK(fs::exists(dir / "raw" / (std::string(stem) + "_rep1_trajectory.csv")));
  }
  CHECK(line_count(dir / "ows_beta0.2_aggregate.csv") == 11);
  const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
  CHECK(meta["spec"]["seed"] == spec.master_seed);
  CHECK(meta["cells"].size() == 6);
  CHECK(meta["spec"]["weights"]["kind"] == "two_tier");

  const std::string before = slurp(dir / "owa_beta0.6_aggregate.csv");
  write_experiment(run_experiment(spec), dir, false);
  CHECK(slurp(dir / "owa_beta0.6_aggregate.csv") == before);
}
