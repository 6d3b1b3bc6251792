#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "peerbalance/engine.hpp"
#include "peerbalance/model.hpp"
#include "peerbalance/protocols.hpp"
#include "peerbalance/scheduler.hpp"

namespace peerbalance {

/// Largest C(m,2) the enumerating oracles will accept.
inline constexpr std::uint64_t kMaxEnumeratedPairs = 1'000'000;

/// Absolute slack on every bound comparison.
inline constexpr double kBoundTolerance = 1e-9;

struct PairOutcome {
  AgentPair pair;
  double tvd_after = 0.0;
  bool useful = false;
};

struct OneStepReport {
  double tvd_before = 0.0;
  double expected_tvd_after = 0.0;
  /// E[tvd_after - tvd_before | current state].
  double expected_delta = 0.0;
  std::vector<PairOutcome> pairs;  ///< in rank order
};

/// Exact one-step expectation under the probabilistic scheduler: every pair
/// is applied to a copy of `pop` and the results are averaged uniformly.
/// For Owa, `registers` defaults to fresh registers.
OneStepReport exact_one_step(const Population& pop, ProtocolKind kind,
                             const ProtocolParams& params = {},
                             std::optional<std::vector<OwaRegisters>> registers = std::nullopt);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Expected next-step tvd under OWS vs (1 - 1/C(m,2)) * current tvd.
/// Requires a loss-free population.
BoundCheck lemma1_bound_check(const Population& pop);

/// C(m,2) * ln(tvd0 / c).
double theorem1_bound(std::uint64_t m, double tvd0, double c);

struct AdversarialInstance {
  Population population;
  double initial_tvd = 0.0;
  double predicted_tvd_after = 0.0;  ///< 2/m - (2 - beta)/(2m - 2 - beta)
};

/// The lossy worst case: m - 1 agents at energy m, one at 0, equal weights.
/// Needs 0 < beta < 1 and m > (2 + beta)/beta.
AdversarialInstance adversarial_instance(std::size_t m, double beta);

struct Lemma2Check {
  double lhs = 0.0;  ///< exact E[delta tvd] under the flat d_epsilon exchange
  double rhs = 0.0;  ///< (4 / E_t) (beta - a+ a- / (m (m-1)))
  bool holds = false;
  std::size_t above = 0;  ///< a+
  std::size_t below = 0;  ///< a-
  double total_after = 0.0;  ///< E_t = E_{t-1} - beta * d_epsilon
  /// (2 d_epsilon / E_t) (beta - a+ a- / (m (m-1))); diagnostic only.
  double rhs_derived = 0.0;
  bool holds_derived = false;
};

/// Equal weights only. Uses the population's own beta.
Lemma2Check lemma2_bound_check(const Population& pop, double d_epsilon);

/// One agent (`deviator`) off its weighted share by `offset` energy units,
/// everyone else sharing the remainder in exact proportion to weight.
/// Total energy is `total`.
Population single_deviator_population(std::span<const double> weights, double total,
                                      std::size_t deviator, double offset, double beta = 0.0);

}  // namespace peerbalance
