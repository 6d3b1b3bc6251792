#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "peerbalance/engine.hpp"
#include "peerbalance/protocols.hpp"

namespace peerbalance {

inline constexpr std::string_view kSoftwareVersion = "1.0.0";

/// Grid of (protocol x beta) cells, each replicated `replications` times.
struct ExperimentSpec {
  std::size_t m = 100;
  std::uint64_t budget = 1000;
  std::uint64_t max_draws = 0;  ///< 0: RunConfig default
  std::vector<ProtocolKind> protocols{ProtocolKind::Ows, ProtocolKind::Swt, ProtocolKind::Owa};
  std::vector<double> betas{0.2, 0.4, 0.6, 0.8};
  std::size_t replications = 100;
  std::uint64_t master_seed = 1;
  ProtocolParams params;
  EnergySpec energies;
  WeightSpec weights;
  unsigned threads = 1;
};

/// m = 100, 1000 useful interactions, beta in {0.2, 0.4, 0.6, 0.8},
/// 100 replications, all three protocols, energies U[1,100], 10% of the
/// agents at weight 10 and the rest at weight 1.
ExperimentSpec paper_default_spec();

void validate(const ExperimentSpec& spec);

nlohmann::json to_json(const ExperimentSpec& spec);
/// Missing keys keep their defaults; unknown keys are a config error.
ExperimentSpec spec_from_json(const nlohmann::json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Stable identifier of a (protocol, beta) cell.
std::uint64_t cell_id(ProtocolKind protocol, double beta) noexcept;

/// Replication r starts every cell from the same initial population (seed
/// from master and r only); the scheduler stream also depends on the cell.
std::uint64_t population_seed(std::uint64_t master_seed, std::size_t replication) noexcept;
std::uint64_t schedule_seed(std::uint64_t master_seed, std::uint64_t cell,
                            std::size_t replication) noexcept;

RunConfig replication_config(const ExperimentSpec& spec, ProtocolKind protocol, double beta,
                             std::size_t replication);

struct AggregateRow {
  std::uint64_t k = 0;
  std::size_t replications = 0;  ///< runs that reached k
  double mean_total_energy = 0.0;
  double mean_tvd = 0.0;
  double median_tvd = 0.0;
  double q1_tvd = 0.0;
  double q3_tvd = 0.0;
  double mean_cumulative_loss = 0.0;
  double lower_fence = 0.0;  ///< Q1 - 1.5 IQR
  double upper_fence = 0.0;  ///< Q3 + 1.5 IQR
  std::size_t outliers = 0;
};

struct AggregateSeries {
  double initial_mean_total_energy = 0.0;
  double initial_mean_tvd = 0.0;
  std::vector<AggregateRow> rows;
};

/// Linear-interpolated quantile (the usual "type 7" definition).
double quantile(std::vector<double> values, double p);

/// Aligns runs on the useful-interaction index k.
AggregateSeries aggregate(const std::vector<Trajectory>& runs);

struct CellResult {
  ProtocolKind protocol = ProtocolKind::Ows;
  double beta = 0.0;
  std::uint64_t id = 0;
  std::vector<Trajectory> runs;  ///< in replication order
  AggregateSeries aggregate;
  std::size_t truncated_runs = 0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<CellResult> cells;  ///< protocol-major, then beta

  bool any_truncated() const noexcept;
  const CellResult& cell(ProtocolKind protocol, double beta) const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

using EfficiencyPoint = std::pair<double, double>;  ///< (remaining energy, tvd)

std::vector<EfficiencyPoint> efficiency_series(const Trajectory& trajectory);
std::vector<EfficiencyPoint> efficiency_series(const AggregateSeries& series);

void emit_csv(const Trajectory& trajectory, const std::filesystem::path& path);
void emit_csv(const AggregateSeries& series, const std::filesystem::path& path);
void emit_csv(const std::vector<EfficiencyPoint>& series, const std::filesystem::path& path);
void emit_outliers_csv(const AggregateSeries& series, const std::filesystem::path& path);

/// File stem of a cell, e.g. "swt_beta0.4".
std::string cell_stem(ProtocolKind protocol, double beta);

/// Writes per-cell aggregate, efficiency and outlier CSVs plus metadata.json
/// into `dir`; with `write_raw`, also every replication under dir/raw.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir,
                      bool write_raw);

}  // namespace peerbalance
