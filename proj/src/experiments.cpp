#include "peerbalance/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "peerbalance/csv.hpp"
#include "peerbalance/error.hpp"
#include "peerbalance/random.hpp"

namespace peerbalance {

namespace {

constexpr std::uint64_t kPopulationStream = 0x706f70;  // "pop"
constexpr std::uint64_t kScheduleStream = 0x736368;    // "sch"

using nlohmann::json;

std::string_view energy_kind_name(EnergySpec::Kind k) {
  return k == EnergySpec::Kind::Uniform ? "uniform" : "explicit";
}

std::string_view weight_kind_name(WeightSpec::Kind k) {
  switch (k) {
    case WeightSpec::Kind::Equal: return "equal";
    case WeightSpec::Kind::TwoTier: return "two_tier";
    case WeightSpec::Kind::Uniform: return "uniform";
    case WeightSpec::Kind::Explicit: return "explicit";
  }
  return "unknown";
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known,
                         std::string_view where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::Config, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

EnergySpec energy_from_json(const json& j) {
  reject_unknown_keys(j, {"kind", "lo", "hi", "values"}, "energies");
  EnergySpec e;
  const auto kind = j.value("kind", std::string("uniform"));
  if (kind == "uniform") {
    e.kind = EnergySpec::Kind::Uniform;
  } else if (kind == "explicit") {
    e.kind = EnergySpec::Kind::Explicit;
  } else {
    throw Error(ErrorCode::Config, "unknown energies kind '" + kind + "'");
  }
  read_if(j, "lo", e.lo);
  read_if(j, "hi", e.hi);
  read_if(j, "values", e.values);
  return e;
}

WeightSpec weight_from_json(const json& j) {
  reject_unknown_keys(j, {"kind", "critical_fraction", "high", "low", "lo", "hi", "values"},
                      "weights");
  WeightSpec w;
  const auto kind = j.value("kind", std::string("two_tier"));
  if (kind == "equal") {
    w.kind = WeightSpec::Kind::Equal;
  } else if (kind == "two_tier") {
    w.kind = WeightSpec::Kind::TwoTier;
  } else if (kind == "uniform") {
    w.kind = WeightSpec::Kind::Uniform;
  } else if (kind == "explicit") {
    w.kind = WeightSpec::Kind::Explicit;
  } else {
    throw Error(ErrorCode::Config, "unknown weights kind '" + kind + "'");
  }
  read_if(j, "critical_fraction", w.critical_fraction);
  read_if(j, "high", w.high);
  read_if(j, "low", w.low);
  read_if(j, "lo", w.lo);
  read_if(j, "hi", w.hi);
  read_if(j, "values", w.values);
  return w;
}

// Mean in a fixed order, so results do not depend on thread interleaving.
double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

ExperimentSpec paper_default_spec() { return ExperimentSpec{}; }

void validate(const ExperimentSpec& spec) {
  if (spec.m < 2) throw Error(ErrorCode::Config, "m must be at least 2");
  if (spec.budget < 1) throw Error(ErrorCode::Config, "budget must be at least 1");
  if (spec.replications < 1) throw Error(ErrorCode::Config, "replications must be at least 1");
  if (spec.protocols.empty()) throw Error(ErrorCode::Config, "no protocols selected");
  if (spec.betas.empty()) throw Error(ErrorCode::Config, "no beta values selected");
  for (double b : spec.betas) {
    if (!(b >= 0.0 && b < 1.0)) throw Error(ErrorCode::Config, "every beta must lie in [0, 1)");
  }
  if (std::set<double>(spec.betas.begin(), spec.betas.end()).size() != spec.betas.size()) {
    throw Error(ErrorCode::Config, "beta values must be distinct");
  }
  if (spec.max_draws != 0 && spec.max_draws < spec.budget) {
    throw Error(ErrorCode::Config, "max_draws must be at least the budget");
  }
  if (!(spec.params.d_epsilon > 0.0)) throw Error(ErrorCode::Config, "d_epsilon must be positive");
  if (!(spec.params.ows_min_gap >= 0.0)) {
    throw Error(ErrorCode::Config, "ows_min_gap must be non-negative");
  }
}

json to_json(const ExperimentSpec& spec) {
  json protocols = json::array();
  for (auto p : spec.protocols) protocols.push_back(std::string(to_string(p)));
  json energies{{"kind", energy_kind_name(spec.energies.kind)}};
  if (spec.energies.kind == EnergySpec::Kind::Uniform) {
    energies["lo"] = spec.energies.lo;
    energies["hi"] = spec.energies.hi;
  } else {
    energies["values"] = spec.energies.values;
  }
  json weights{{"kind", weight_kind_name(spec.weights.kind)}};
  switch (spec.weights.kind) {
    case WeightSpec::Kind::Equal: break;
    case WeightSpec::Kind::TwoTier:
      weights["critical_fraction"] = spec.weights.critical_fraction;
      weights["high"] = spec.weights.high;
      weights["low"] = spec.weights.low;
      break;
    case WeightSpec::Kind::Uniform:
      weights["lo"] = spec.weights.lo;
      weights["hi"] = spec.weights.hi;
      break;
    case WeightSpec::Kind::Explicit:
      weights["values"] = spec.weights.values;
      break;
  }
  return json{{"m", spec.m},
              {"budget", spec.budget},
              {"max_draws", spec.max_draws},
              {"protocols", protocols},
              {"betas", spec.betas},
              {"replications", spec.replications},
              {"seed", spec.master_seed},
              {"d_epsilon", spec.params.d_epsilon},
              {"ows_min_gap", spec.params.ows_min_gap},
              {"energies", energies},
              {"weights", weights},
              {"threads", spec.threads}};
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Config, "experiment spec must be a JSON object");
  reject_unknown_keys(j,
                      {"m", "budget", "max_draws", "protocols", "betas", "replications", "seed",
                       "d_epsilon", "ows_min_gap", "energies", "weights", "threads"},
                      "experiment spec");
  ExperimentSpec spec = paper_default_spec();
  try {
    read_if(j, "m", spec.m);
    read_if(j, "budget", spec.budget);
    read_if(j, "max_draws", spec.max_draws);
    read_if(j, "betas", spec.betas);
    read_if(j, "replications", spec.replications);
    read_if(j, "seed", spec.master_seed);
    read_if(j, "d_epsilon", spec.params.d_epsilon);
    read_if(j, "ows_min_gap", spec.params.ows_min_gap);
    read_if(j, "threads", spec.threads);
    if (j.contains("protocols")) {
      spec.protocols.clear();
      for (const auto& name : j.at("protocols")) {
        const auto kind = parse_protocol(name.get<std::string>());
        if (!kind) throw Error(ErrorCode::Config, "unknown protocol " + name.dump());
        spec.protocols.push_back(*kind);
      }
    }
    if (j.contains("energies")) spec.energies = energy_from_json(j.at("energies"));
    if (j.contains("weights")) spec.weights = weight_from_json(j.at("weights"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

std::uint64_t cell_id(ProtocolKind protocol, double beta) noexcept {
  return derive_seed(static_cast<std::uint64_t>(protocol) + 1, {std::bit_cast<std::uint64_t>(beta)});
}

std::uint64_t population_seed(std::uint64_t master_seed, std::size_t replication) noexcept {
  return derive_seed(master_seed, {kPopulationStream, replication});
}

std::uint64_t schedule_seed(std::uint64_t master_seed, std::uint64_t cell,
                            std::size_t replication) noexcept {
  return derive_seed(master_seed, {kScheduleStream, cell, replication});
}

RunConfig replication_config(const ExperimentSpec& spec, ProtocolKind protocol, double beta,
                             std::size_t replication) {
  RunConfig cfg;
  cfg.population.m = spec.m;
  cfg.population.beta = beta;
  cfg.population.energies = spec.energies;
  cfg.population.weights = spec.weights;
  cfg.population.seed = population_seed(spec.master_seed, replication);
  cfg.protocol = protocol;
  cfg.params = spec.params;
  cfg.budget = spec.budget;
  cfg.max_draws = spec.max_draws;
  cfg.seed = schedule_seed(spec.master_seed, cell_id(protocol, beta), replication);
  return cfg;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InputDomain, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

AggregateSeries aggregate(const std::vector<Trajectory>& runs) {
  AggregateSeries series;
  if (runs.empty()) return series;

  std::vector<double> energy, tvd, loss;
  for (const auto& r : runs) {
    energy.push_back(r.initial_total_energy);
    tvd.push_back(r.initial_tvd);
  }
  series.initial_mean_total_energy = mean_of(energy);
  series.initial_mean_tvd = mean_of(tvd);

  std::size_t longest = 0;
  for (const auto& r : runs) longest = std::max(longest, r.rows.size());
  series.rows.reserve(longest);

  for (std::size_t idx = 0; idx < longest; ++idx) {
    energy.clear();
    tvd.clear();
    loss.clear();
    std::size_t reached = 0;
    for (const auto& r : runs) {
      // A truncated run is frozen; its last state stands for the remaining k.
      if (idx < r.rows.size()) {
        ++reached;
        energy.push_back(r.rows[idx].total_energy);
        tvd.push_back(r.rows[idx].tvd);
        loss.push_back(r.rows[idx].cumulative_loss);
      } else if (!r.rows.empty()) {
        energy.push_back(r.rows.back().total_energy);
        tvd.push_back(r.rows.back().tvd);
        loss.push_back(r.rows.back().cumulative_loss);
      } else {
        energy.push_back(r.initial_total_energy);
        tvd.push_back(r.initial_tvd);
        loss.push_back(0.0);
      }
    }
    AggregateRow row;
    row.k = idx + 1;
    row.replications = reached;
    row.mean_total_energy = mean_of(energy);
    row.mean_tvd = mean_of(tvd);
    row.mean_cumulative_loss = mean_of(loss);
    row.q1_tvd = quantile(tvd, 0.25);
    row.median_tvd = quantile(tvd, 0.5);
    row.q3_tvd = quantile(tvd, 0.75);
    const double iqr = row.q3_tvd - row.q1_tvd;
    row.lower_fence = row.q1_tvd - 1.5 * iqr;
    row.upper_fence = row.q3_tvd + 1.5 * iqr;
    row.outliers = static_cast<std::size_t>(std::count_if(tvd.begin(), tvd.end(), [&](double x) {
      return x < row.lower_fence || x > row.upper_fence;
    }));
    series.rows.push_back(row);
  }
  return series;
}

bool ExperimentResult::any_truncated() const noexcept {
  return std::any_of(cells.begin(), cells.end(),
                     [](const CellResult& c) { return c.truncated_runs > 0; });
}

const CellResult& ExperimentResult::cell(ProtocolKind protocol, double beta) const {
  for (const auto& c : cells) {
    if (c.protocol == protocol && c.beta == beta) return c;
  }
  throw Error(ErrorCode::InputDomain, "no such cell");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  ExperimentResult result;
  result.spec = spec;
  for (auto p : spec.protocols) {
    for (double b : spec.betas) {
      CellResult cell;
      cell.protocol = p;
      cell.beta = b;
      cell.id = cell_id(p, b);
      cell.runs.resize(spec.replications);
      result.cells.push_back(std::move(cell));
    }
  }

  const std::size_t jobs = result.cells.size() * spec.replications;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      CellResult& cell = result.cells[job / spec.replications];
      const std::size_t r = job % spec.replications;
      try {
        cell.runs[r] = run(replication_config(spec, cell.protocol, cell.beta, r));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(jobs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& cell : result.cells) {
    cell.truncated_runs = static_cast<std::size_t>(std::count_if(
        cell.runs.begin(), cell.runs.end(), [](const Trajectory& t) { return t.truncated; }));
    cell.aggregate = aggregate(cell.runs);
  }
  return result;
}

std::vector<EfficiencyPoint> efficiency_series(const Trajectory& trajectory) {
  std::vector<EfficiencyPoint> out;
  out.reserve(trajectory.rows.size());
  for (const auto& row : trajectory.rows) out.emplace_back(row.total_energy, row.tvd);
  return out;
}

std::vector<EfficiencyPoint> efficiency_series(const AggregateSeries& series) {
  std::vector<EfficiencyPoint> out;
  out.reserve(series.rows.size());
  for (const auto& row : series.rows) out.emplace_back(row.mean_total_energy, row.mean_tvd);
  return out;
}

void emit_csv(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trajectory.rows.size());
  for (const auto& r : trajectory.rows) {
    rows.push_back({std::to_string(r.k), std::to_string(r.draws), csv::format_double(r.total_energy),
                    csv::format_double(r.tvd), csv::format_double(r.cumulative_loss)});
  }
  csv::write(path, {"k", "draws", "total_energy", "tvd", "cumulative_loss"}, rows);
}

void emit_csv(const AggregateSeries& series, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(series.rows.size());
  for (const auto& r : series.rows) {
    rows.push_back({std::to_string(r.k), csv::format_double(r.mean_total_energy),
                    csv::format_double(r.mean_tvd), csv::format_double(r.median_tvd),
                    csv::format_double(r.q1_tvd), csv::format_double(r.q3_tvd),
                    csv::format_double(r.mean_cumulative_loss)});
  }
  csv::write(path,
             {"k", "mean_total_energy", "mean_tvd", "median_tvd", "q1_tvd", "q3_tvd",
              "mean_cumulative_loss"},
             rows);
}

void emit_csv(const std::vector<EfficiencyPoint>& series, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(series.size());
  for (const auto& [energy, tvd] : series) {
    rows.push_back({csv::format_double(energy), csv::format_double(tvd)});
  }
  csv::write(path, {"remaining_energy", "tvd"}, rows);
}

void emit_outliers_csv(const AggregateSeries& series, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(series.rows.size());
  for (const auto& r : series.rows) {
    rows.push_back({std::to_string(r.k), std::to_string(r.replications),
                    csv::format_double(r.lower_fence), csv::format_double(r.upper_fence),
                    std::to_string(r.outliers)});
  }
  csv::write(path, {"k", "replications", "lower_fence_tvd", "upper_fence_tvd", "outliers_tvd"},
             rows);
}

std::string cell_stem(ProtocolKind protocol, double beta) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, beta);  // shortest round-trip
  return std::string(to_string(protocol)) + "_beta" + std::string(buf, res.ptr);
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir,
                      bool write_raw) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  if (write_raw) {
    std::filesystem::create_directories(dir / "raw", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + (dir / "raw").string());
  }

  json cells = json::array();
  for (const auto& cell : result.cells) {
    const std::string stem = cell_stem(cell.protocol, cell.beta);
    emit_csv(cell.aggregate, dir / (stem + "_aggregate.csv"));
    emit_csv(efficiency_series(cell.aggregate), dir / (stem + "_efficiency.csv"));
    emit_outliers_csv(cell.aggregate, dir / (stem + "_outliers.csv"));
    if (write_raw) {
      for (std::size_t r = 0; r < cell.runs.size(); ++r) {
        const std::string rep = stem + "_rep" + std::to_string(r);
        emit_csv(cell.runs[r], dir / "raw" / (rep + "_trajectory.csv"));
        emit_csv(efficiency_series(cell.runs[r]), dir / "raw" / (rep + "_efficiency.csv"));
      }
    }
    cells.push_back({{"protocol", to_string(cell.protocol)},
                     {"beta", cell.beta},
                     {"cell_id", cell.id},
                     {"files", stem},
                     {"replications", cell.runs.size()},
                     {"truncated_runs", cell.truncated_runs}});
  }

  json meta{{"software", "peerbalance"},
            {"version", kSoftwareVersion},
            {"spec", to_json(result.spec)},
            {"seeding",
             {{"population", "derive_seed(seed, [0x706f70, replication])"},
              {"schedule", "derive_seed(seed, [0x736368, cell_id, replication])"}}},
            {"time_axis", "k counts useful interactions; draws counts scheduler steps"},
            {"cells", cells}};
  std::ofstream out(dir / "metadata.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write metadata.json");
  out << meta.dump(2) << '\n';
}

}  // namespace peerbalance
