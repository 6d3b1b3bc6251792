#include "peerbalance/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "peerbalance/engine.hpp"
#include "peerbalance/experiments.hpp"
#include "peerbalance/metrics.hpp"
#include "peerbalance/oracle.hpp"
#include "peerbalance/random.hpp"

namespace peerbalance::verify {

namespace {

Population random_population(Rng& rng, std::size_t m, double w_lo, double w_hi, double beta) {
  std::vector<double> energies(m), weights(m);
  for (auto& e : energies) e = rng.uniform(1.0, 100.0);
  for (auto& w : weights) w = w_lo == w_hi ? w_lo : rng.uniform(w_lo, w_hi);
  return Population(energies, weights, beta);
}

std::string format(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

}  // namespace

Report lemma1_random(std::size_t instances, std::uint64_t seed) {
  constexpr std::array<std::size_t, 5> sizes{3, 5, 10, 20, 50};
  Rng rng(seed);
  Report rep{"lemma1", true, 0, 0, -1e300, {}};
  for (std::size_t i = 0; i < instances; ++i) {
    const Population pop = random_population(rng, sizes[i % sizes.size()], 1.0, 10.0, 0.0);
    const BoundCheck c = lemma1_bound_check(pop);
    ++rep.checked;
    if (!c.holds) ++rep.failed;
    rep.worst = std::max(rep.worst, c.lhs - c.rhs);
  }
  rep.passed = rep.failed == 0;
  rep.detail = std::to_string(rep.checked - rep.failed) + "/" + std::to_string(rep.checked) +
               " instances within bound; max(lhs - rhs) = " + format(rep.worst);
  return rep;
}

Report lemma1_tightness(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  Rng rng(seed);
  Report rep{"lemma1-tightness", true, 0, 0, 0.0, {}};
  for (std::size_t m : sizes) {
    std::vector<double> weights(m);
    for (auto& w : weights) w = rng.uniform(1.0, 10.0);
    const double total = 50.0 * static_cast<double>(m);
    const std::size_t deviator = static_cast<std::size_t>(rng.uniform_index(m));
    // Both directions: one agent above its share, and one below.
    for (double sign : {1.0, -1.0}) {
      double wsum = 0.0;
      for (double w : weights) wsum += w;
      const double share = weights[deviator] * total / wsum;
      const double offset = sign > 0 ? 0.5 * (total - share) : -0.5 * share;
      const Population pop = single_deviator_population(weights, total, deviator, offset);
      const BoundCheck c = lemma1_bound_check(pop);
      const double gap = std::abs(c.lhs - c.rhs);
      ++rep.checked;
      if (gap > kBoundTolerance) ++rep.failed;
      rep.worst = std::max(rep.worst, gap);
    }
  }
  rep.passed = rep.failed == 0;
  rep.detail = "max |lhs - rhs| = " + format(rep.worst) + " over " + std::to_string(rep.checked) +
               " instances";
  return rep;
}

Report lemma2_random(std::size_t instances, double d_epsilon, std::uint64_t seed) {
  constexpr std::array<std::size_t, 3> sizes{5, 10, 20};
  constexpr std::array<double, 2> betas{0.1, 0.5};
  Rng rng(seed);
  Report rep{"lemma2", true, 0, 0, -1e300, {}};
  std::array<std::size_t, 2> failed_by_beta{0, 0};
  std::size_t derived_failed = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t bi = (i / sizes.size()) % betas.size();
    const Population pop = random_population(rng, sizes[i % sizes.size()], 1.0, 1.0, betas[bi]);
    const Lemma2Check c = lemma2_bound_check(pop, d_epsilon);
    ++rep.checked;
    if (!c.holds) {
      ++rep.failed;
      ++failed_by_beta[bi];
    }
    if (!c.holds_derived) ++derived_failed;
    rep.worst = std::max(rep.worst, c.lhs - c.rhs);
  }
  rep.passed = rep.failed == 0;
  rep.detail = std::to_string(rep.checked - rep.failed) + "/" + std::to_string(rep.checked) +
               " within stated bound (violations: beta=0.1 -> " +
               std::to_string(failed_by_beta[0]) + ", beta=0.5 -> " +
               std::to_string(failed_by_beta[1]) + "); max(lhs - rhs) = " + format(rep.worst) +
               "; derived 2*d_eps bound violations: " + std::to_string(derived_failed);
  return rep;
}

Report theorem1_convergence(std::size_t m, std::size_t replications, double c,
                            std::uint64_t seed) {
  ExperimentSpec spec = paper_default_spec();
  spec.m = m;
  spec.master_seed = seed;
  Report rep{"theorem1", true, 0, 0, 0.0, {}};
  double sum = 0.0;
  double max_draws = 0.0;
  for (std::size_t r = 0; r < replications; ++r) {
    const RunConfig cfg = replication_config(spec, ProtocolKind::Ows, 0.0, r);
    Population pop = initialize_population(cfg.population);
    const double tvd0 = balance_tvd(pop);
    const auto horizon = static_cast<std::uint64_t>(std::ceil(theorem1_bound(m, tvd0, c)));
    Simulation sim(std::move(pop), ProtocolKind::Ows, cfg.params,
                   std::make_unique<ProbabilisticSchedule>(m, cfg.seed));
    while (sim.draws() < horizon) sim.step();
    const double final_tvd = balance_tvd(sim.population());
    sum += final_tvd;
    rep.worst = std::max(rep.worst, final_tvd);
    max_draws = std::max(max_draws, static_cast<double>(horizon));
    ++rep.checked;
  }
  const double mean = sum / static_cast<double>(replications);
  rep.passed = mean <= c;
  rep.failed = rep.passed ? 0 : 1;
  rep.detail = "mean tvd at the bound horizon = " + format(mean) + " (target <= " + format(c) +
               "), worst run " + format(rep.worst) + ", longest horizon " + format(max_draws) +
               " draws";
  return rep;
}

Report adversarial_increase(std::size_t m, double beta) {
  const AdversarialInstance inst = adversarial_instance(m, beta);
  Population pop = inst.population;
  // OWS with loss sends half the gap when weights are equal.
  interact_pair(pop, make_pair_checked(0, m - 1, m), ProtocolKind::Ows, ProtocolParams{});
  const double simulated = balance_tvd(pop);
  const double err = std::abs(simulated - inst.predicted_tvd_after);
  Report rep{"adversarial", false, 1, 0, err, {}};
  rep.passed = err <= 1e-12 && simulated > 1.0 / static_cast<double>(m);
  rep.failed = rep.passed ? 0 : 1;
  rep.detail = "simulated " + format(simulated) + ", closed form " +
               format(inst.predicted_tvd_after) + ", initial " + format(inst.initial_tvd) +
               ", |error| = " + format(err);
  return rep;
}

}  // namespace peerbalance::verify
