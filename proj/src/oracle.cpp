#include "peerbalance/oracle.hpp"

#include <cmath>
#include <string>

#include "peerbalance/error.hpp"
#include "peerbalance/metrics.hpp"

namespace peerbalance {

namespace {

// Pairwise summation over a fixed index range; reproducible and accurate
// enough for C(m,2) terms of similar magnitude.
double pairwise_sum(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += xs[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(xs, lo, mid) + pairwise_sum(xs, mid, hi);
}

std::uint64_t checked_pair_count(std::size_t m) {
  const std::uint64_t n = pair_count(m);
  if (n > kMaxEnumeratedPairs) {
    throw Error(ErrorCode::EnumerationLimit,
                std::to_string(n) + " pairs exceed the enumeration limit of " +
                    std::to_string(kMaxEnumeratedPairs));
  }
  return n;
}

}  // namespace

OneStepReport exact_one_step(const Population& pop, ProtocolKind kind,
                             const ProtocolParams& params,
                             std::optional<std::vector<OwaRegisters>> registers) {
  const std::size_t m = pop.size();
  const std::uint64_t n = checked_pair_count(m);
  if (kind == ProtocolKind::Owa && !registers) registers = initial_registers(pop);

  OneStepReport report;
  report.tvd_before = balance_tvd(pop);
  report.pairs.reserve(static_cast<std::size_t>(n));
  std::vector<double> after(static_cast<std::size_t>(n));
  std::vector<OwaRegisters> regs_scratch;

  for (std::uint64_t r = 0; r < n; ++r) {
    const AgentPair pair = unrank_pair(r, m);
    Population copy = pop;
    std::vector<OwaRegisters>* regs = nullptr;
    if (kind == ProtocolKind::Owa) {
      regs_scratch = *registers;
      regs = &regs_scratch;
    }
    const ProtocolOutcome out = interact_pair(copy, pair, kind, params, regs);
    const double t = balance_tvd(copy);
    after[r] = t;
    report.pairs.push_back({pair, t, out.useful});
  }

  report.expected_tvd_after = pairwise_sum(after, 0, after.size()) / static_cast<double>(n);
  report.expected_delta = report.expected_tvd_after - report.tvd_before;
  return report;
}

BoundCheck lemma1_bound_check(const Population& pop) {
  if (pop.beta() != 0.0) {
    throw Error(ErrorCode::WrongRegime, "the loss-free contraction bound needs beta == 0");
  }
  const OneStepReport rep = exact_one_step(pop, ProtocolKind::Ows);
  const double pairs = static_cast<double>(pair_count(pop.size()));
  BoundCheck check;
  check.lhs = rep.expected_tvd_after;
  check.rhs = (1.0 - 1.0 / pairs) * rep.tvd_before;
  check.holds = check.lhs <= check.rhs + kBoundTolerance;
  return check;
}

double theorem1_bound(std::uint64_t m, double tvd0, double c) {
  if (m < 2) throw Error(ErrorCode::InvalidPopulation, "m must be at least 2");
  if (!(tvd0 > 0.0 && tvd0 <= 1.0)) {
    throw Error(ErrorCode::InputDomain, "initial distance must lie in (0, 1]");
  }
  if (!(c > 0.0)) throw Error(ErrorCode::InputDomain, "target distance must be positive");
  if (c >= tvd0) {
    throw Error(ErrorCode::InputDomain, "target distance must be below the initial distance");
  }
  return static_cast<double>(pair_count(m)) * std::log(tvd0 / c);
}

AdversarialInstance adversarial_instance(std::size_t m, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::InputDomain, "the adversarial construction needs 0 < beta < 1");
  }
  const double md = static_cast<double>(m);
  if (!(md > (2.0 + beta) / beta)) {
    throw Error(ErrorCode::InputDomain,
                "m = " + std::to_string(m) + " is too small; need m > (2 + beta) / beta");
  }
  Population pop = adversarial_population(m, beta);
  const double initial = balance_tvd(pop);
  const double predicted = 2.0 / md - (2.0 - beta) / (2.0 * md - 2.0 - beta);
  return {std::move(pop), initial, predicted};
}

Lemma2Check lemma2_bound_check(const Population& pop, double d_epsilon) {
  const double w0 = pop.weight(0);
  for (const auto& a : pop.agents()) {
    if (a.weight != w0) {
      throw Error(ErrorCode::WrongRegime, "the lossy contraction bound needs equal weights");
    }
  }
  if (!(d_epsilon > 0.0)) throw Error(ErrorCode::InputDomain, "d_epsilon must be positive");

  ProtocolParams params;
  params.d_epsilon = d_epsilon;
  const OneStepReport rep = exact_one_step(pop, ProtocolKind::SwtFlat, params);
  const DeviationVector dev = energy_deviation(pop);

  const double m = static_cast<double>(pop.size());
  const double beta = pop.beta();
  Lemma2Check check;
  check.above = dev.above.size();
  check.below = dev.below.size();
  check.total_after = total_energy(pop) - beta * d_epsilon;
  const double mixing =
      static_cast<double>(check.above) * static_cast<double>(check.below) / (m * (m - 1.0));
  check.lhs = rep.expected_delta;
  check.rhs = 4.0 / check.total_after * (beta - mixing);
  check.holds = check.lhs <= check.rhs + kBoundTolerance;
  check.rhs_derived = 2.0 * d_epsilon / check.total_after * (beta - mixing);
  check.holds_derived = check.lhs <= check.rhs_derived + kBoundTolerance;
  return check;
}

Population single_deviator_population(std::span<const double> weights, double total,
                                      std::size_t deviator, double offset, double beta) {
  const std::size_t m = weights.size();
  if (m < 2 || deviator >= m) throw Error(ErrorCode::InputDomain, "bad deviator index");
  if (!(total > 0.0)) throw Error(ErrorCode::InputDomain, "total energy must be positive");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  const double share = weights[deviator] * total / wsum;
  const double dev_energy = share + offset;
  if (!(dev_energy >= 0.0 && dev_energy <= total)) {
    throw Error(ErrorCode::InputDomain, "offset pushes the deviator outside [0, total]");
  }
  const double rest = total - dev_energy;
  const double rest_weight = wsum - weights[deviator];
  std::vector<double> energies(m);
  for (std::size_t i = 0; i < m; ++i) {
    energies[i] = i == deviator ? dev_energy : weights[i] * rest / rest_weight;
  }
  return Population(energies, std::vector<double>(weights.begin(), weights.end()), beta);
}

}  // namespace peerbalance
