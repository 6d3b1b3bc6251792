#include "peerbalance/engine.hpp"

#include <cmath>
#include <string>

#include "peerbalance/error.hpp"
#include "peerbalance/metrics.hpp"
#include "peerbalance/random.hpp"

namespace peerbalance {

namespace {

constexpr std::uint64_t kEnergyStream = 1;
constexpr std::uint64_t kWeightStream = 2;

std::vector<double> make_energies(const PopulationSpec& spec) {
  const EnergySpec& e = spec.energies;
  switch (e.kind) {
    case EnergySpec::Kind::Explicit:
      if (e.values.size() != spec.m) {
        throw Error(ErrorCode::Config, "explicit energies: expected " + std::to_string(spec.m) +
                                           " values, got " + std::to_string(e.values.size()));
      }
      return e.values;
    case EnergySpec::Kind::Uniform: {
      if (!(e.lo >= 0.0 && e.hi >= e.lo)) {
        throw Error(ErrorCode::Config, "uniform energies need 0 <= lo <= hi");
      }
      Rng rng(derive_seed(spec.seed, {kEnergyStream}));
      std::vector<double> out(spec.m);
      for (double& x : out) x = rng.uniform(e.lo, e.hi);
      return out;
    }
  }
  throw Error(ErrorCode::Config, "unknown energy spec");
}

std::vector<double> make_weights(const PopulationSpec& spec) {
  const WeightSpec& w = spec.weights;
  switch (w.kind) {
    case WeightSpec::Kind::Equal:
      return std::vector<double>(spec.m, 1.0);
    case WeightSpec::Kind::TwoTier: {
      if (!(w.critical_fraction >= 0.0 && w.critical_fraction <= 1.0)) {
        throw Error(ErrorCode::Config, "critical fraction must lie in [0, 1]");
      }
      const auto critical =
          static_cast<std::size_t>(std::lround(w.critical_fraction * static_cast<double>(spec.m)));
      std::vector<double> out(spec.m, w.low);
      for (std::size_t i = 0; i < critical; ++i) out[i] = w.high;
      return out;
    }
    case WeightSpec::Kind::Uniform: {
      if (!(w.lo > 0.0 && w.hi >= w.lo)) {
        throw Error(ErrorCode::Config, "uniform weights need 0 < lo <= hi");
      }
      Rng rng(derive_seed(spec.seed, {kWeightStream}));
      std::vector<double> out(spec.m);
      for (double& x : out) x = rng.uniform(w.lo, w.hi);
      return out;
    }
    case WeightSpec::Kind::Explicit:
      if (w.values.size() != spec.m) {
        throw Error(ErrorCode::Config, "explicit weights: expected " + std::to_string(spec.m) +
                                           " values, got " + std::to_string(w.values.size()));
      }
      return w.values;
  }
  throw Error(ErrorCode::Config, "unknown weight spec");
}

}  // namespace

Population initialize_population(const PopulationSpec& spec) {
  if (spec.m < 2) throw Error(ErrorCode::Config, "population size must be at least 2");
  const auto energies = make_energies(spec);
  const auto weights = make_weights(spec);
  try {
    return Population(energies, weights, spec.beta);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

Population adversarial_population(std::size_t m, double beta) {
  std::vector<double> energies(m, static_cast<double>(m));
  if (m > 0) energies.back() = 0.0;
  const std::vector<double> weights(m, 1.0);
  return Population(energies, weights, beta);
}

std::vector<OwaRegisters> initial_registers(const Population& pop) {
  std::vector<OwaRegisters> regs(pop.size());
  for (std::size_t i = 0; i < regs.size(); ++i) {
    regs[i] = OwaRegisters::initial(pop.energy(i), pop.weight(i));
  }
  return regs;
}

ProtocolOutcome interact_pair(Population& pop, AgentPair pair, ProtocolKind kind,
                              const ProtocolParams& params, std::vector<OwaRegisters>* registers) {
  const AgentIndex u = pair.first;
  const AgentIndex v = pair.second;
  const double eu = pop.energy(u), wu = pop.weight(u);
  const double ev = pop.energy(v), wv = pop.weight(v);
  const double beta = pop.beta();
  const SwtConfig swt{params.d_epsilon};

  ProtocolOutcome out;
  switch (kind) {
    case ProtocolKind::Ows:
      out = ows_interact(eu, wu, ev, wv, beta, params.ows_min_gap);
      break;
    case ProtocolKind::Swt:
      out = swt_interact(eu, wu, ev, wv, beta, swt);
      break;
    case ProtocolKind::SwtFlat:
      out = swt_flat_interact(eu, wu, ev, wv, beta, swt);
      break;
    case ProtocolKind::Owa: {
      if (registers == nullptr || registers->size() != pop.size()) {
        throw Error(ErrorCode::InputDomain, "online-average protocol needs one register per agent");
      }
      auto res = owa_interact(eu, wu, (*registers)[u], ev, wv, (*registers)[v], beta);
      (*registers)[u] = res.reg_u;
      (*registers)[v] = res.reg_v;
      out = res.outcome;
      break;
    }
  }
  if (out.useful) {
    pop.set_energy(u, out.new_energy_u);
    pop.set_energy(v, out.new_energy_v);
  }
  return out;
}

Simulation::Simulation(Population initial, ProtocolKind kind, ProtocolParams params,
                       std::unique_ptr<PairSchedule> schedule)
    : pop_(std::move(initial)),
      kind_(kind),
      params_(params),
      schedule_(std::move(schedule)),
      initial_total_(total_energy(pop_)) {
  if (!schedule_) throw Error(ErrorCode::InputDomain, "simulation needs a schedule");
  if (schedule_->population_size() != pop_.size()) {
    throw Error(ErrorCode::LengthMismatch, "schedule and population sizes differ");
  }
  if (kind_ == ProtocolKind::Swt || kind_ == ProtocolKind::SwtFlat) {
    if (!(params_.d_epsilon > 0.0)) {
      throw Error(ErrorCode::Config, "d_epsilon must be positive");
    }
  }
  if (kind_ == ProtocolKind::Owa) registers_ = initial_registers(pop_);
}

StepResult Simulation::step() {
  const AgentPair pair = schedule_->next();
  ++draws_;
  const ProtocolOutcome out =
      interact_pair(pop_, pair, kind_, params_, kind_ == ProtocolKind::Owa ? &registers_ : nullptr);
  if (out.useful) {
    ++useful_;
    cumulative_loss_ += out.lost;
  }
  return {pair, out};
}

void validate(const RunConfig& config) {
  if (config.population.m < 2) throw Error(ErrorCode::Config, "m must be at least 2");
  if (!(config.population.beta >= 0.0 && config.population.beta < 1.0)) {
    throw Error(ErrorCode::Config, "beta must lie in [0, 1)");
  }
  if (config.budget < 1) throw Error(ErrorCode::Config, "budget must be at least 1");
  if (config.effective_max_draws() < config.budget) {
    throw Error(ErrorCode::Config, "max_draws must be at least the budget");
  }
  if (!(config.params.d_epsilon > 0.0)) throw Error(ErrorCode::Config, "d_epsilon must be positive");
  if (!(config.params.ows_min_gap >= 0.0)) {
    throw Error(ErrorCode::Config, "OWS gap threshold must be non-negative");
  }
}

Trajectory run(const RunConfig& config) {
  validate(config);
  Population initial = initialize_population(config.population);
  auto schedule = std::make_unique<ProbabilisticSchedule>(initial.size(), config.seed);
  return run(std::move(initial), config.protocol, config.params, std::move(schedule),
             config.budget, config.effective_max_draws());
}

Trajectory run(Population initial, ProtocolKind kind, const ProtocolParams& params,
               std::unique_ptr<PairSchedule> schedule, std::uint64_t budget,
               std::uint64_t max_draws) {
  Trajectory traj;
  traj.initial_tvd = balance_tvd(initial);
  Simulation sim(std::move(initial), kind, params, std::move(schedule));
  traj.initial_total_energy = sim.initial_total_energy();
  traj.rows.reserve(static_cast<std::size_t>(budget));

  while (sim.useful_interactions() < budget && sim.draws() < max_draws) {
    StepResult res;
    try {
      res = sim.step();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ScheduleExhausted) throw;
      break;
    }
    if (!res.outcome.useful) continue;
    const Population& pop = sim.population();
    traj.rows.push_back({sim.useful_interactions(), sim.draws(), total_energy(pop),
                         balance_tvd(pop), sim.cumulative_loss()});
  }
  traj.truncated = sim.useful_interactions() < budget;
  traj.total_draws = sim.draws();
  traj.final_population = sim.population();
  return traj;
}

}  // namespace peerbalance
