#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "peerbalance/model.hpp"
#include "peerbalance/protocols.hpp"
#include "peerbalance/scheduler.hpp"

namespace peerbalance {

struct EnergySpec {
  enum class Kind { Uniform, Explicit };
  Kind kind = Kind::Uniform;
  double lo = 1.0;  // continuous uniform on [lo, hi]
  double hi = 100.0;
  std::vector<double> values;
};

struct WeightSpec {
  enum class Kind { Equal, TwoTier, Uniform, Explicit };
  Kind kind = Kind::TwoTier;
  // TwoTier: round(fraction * m) critical agents (the lowest indices) get
  // `high`, the rest `low`.
  double critical_fraction = 0.1;
  double high = 10.0;
  double low = 1.0;
  // Uniform: i.i.d. on [lo, hi].
  double lo = 1.0;
  double hi = 10.0;
  std::vector<double> values;
};

struct PopulationSpec {
  std::size_t m = 100;
  double beta = 0.0;
  EnergySpec energies;
  WeightSpec weights;
  std::uint64_t seed = 0;
};

Population initialize_population(const PopulationSpec& spec);

/// m - 1 agents at energy m and one empty agent (the last), equal weights.
Population adversarial_population(std::size_t m, double beta);

struct ProtocolParams {
  double d_epsilon = 0.01;
  /// OWS only: skip pairs whose relative energies differ by no more than this.
  double ows_min_gap = 0.0;
};

/// Applies one interaction of `kind` to the pair in place. `registers` is
/// required for Owa and ignored otherwise.
ProtocolOutcome interact_pair(Population& pop, AgentPair pair, ProtocolKind kind,
                              const ProtocolParams& params,
                              std::vector<OwaRegisters>* registers = nullptr);

std::vector<OwaRegisters> initial_registers(const Population& pop);

struct StepResult {
  AgentPair pair;
  ProtocolOutcome outcome;
};

/// A single sequential interaction process. Each `step` draws one pair and
/// applies the protocol; both clocks (draws and useful interactions) are kept.
class Simulation {
 public:
  Simulation(Population initial, ProtocolKind kind, ProtocolParams params,
             std::unique_ptr<PairSchedule> schedule);

  StepResult step();

  const Population& population() const noexcept { return pop_; }
  std::uint64_t draws() const noexcept { return draws_; }
  std::uint64_t useful_interactions() const noexcept { return useful_; }
  double cumulative_loss() const noexcept { return cumulative_loss_; }
  double initial_total_energy() const noexcept { return initial_total_; }
  const std::vector<OwaRegisters>& registers() const noexcept { return registers_; }

 private:
  Population pop_;
  ProtocolKind kind_;
  ProtocolParams params_;
  std::unique_ptr<PairSchedule> schedule_;
  std::vector<OwaRegisters> registers_;
  std::uint64_t draws_ = 0;
  std::uint64_t useful_ = 0;
  double cumulative_loss_ = 0.0;
  double initial_total_;
};

struct TrajectoryRow {
  std::uint64_t k = 0;
  std::uint64_t draws = 0;
  double total_energy = 0.0;
  double tvd = 0.0;
  double cumulative_loss = 0.0;
};

/// One row per useful interaction, k = 1, 2, ...; the starting state is
/// kept in the initial_* fields.
struct Trajectory {
  double initial_total_energy = 0.0;
  double initial_tvd = 0.0;
  std::vector<TrajectoryRow> rows;
  std::optional<Population> final_population;
  std::uint64_t total_draws = 0;
  /// Budget not reached: draw cap hit or the schedule ran out.
  bool truncated = false;
};

struct RunConfig {
  PopulationSpec population;
  ProtocolKind protocol = ProtocolKind::Ows;
  ProtocolParams params;
  std::uint64_t budget = 1000;
  /// Zero selects kDefaultDrawFactor * budget.
  std::uint64_t max_draws = 0;
  std::uint64_t seed = 0;

  static constexpr std::uint64_t kDefaultDrawFactor = 10000;
  std::uint64_t effective_max_draws() const noexcept {
    return max_draws != 0 ? max_draws : kDefaultDrawFactor * budget;
  }
};

void validate(const RunConfig& config);

Trajectory run(const RunConfig& config);

/// Runs from an explicit population and schedule until `budget` useful
/// interactions or `max_draws` scheduler draws, whichever comes first.
Trajectory run(Population initial, ProtocolKind kind, const ProtocolParams& params,
               std::unique_ptr<PairSchedule> schedule, std::uint64_t budget,
               std::uint64_t max_draws);

}  // namespace peerbalance
