#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "peerbalance/engine.hpp"
#include "peerbalance/error.hpp"
#include "peerbalance/metrics.hpp"
#include "peerbalance/oracle.hpp"
#include "peerbalance/random.hpp"

using namespace peerbalance;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

Population random_population(Rng& rng, std::size_t m, bool equal_weights, double beta) {
  std::vector<double> e(m), w(m, 1.0);
  for (auto& x : e) x = rng.uniform(1.0, 100.0);
  if (!equal_weights) {
    for (auto& x : w) x = rng.uniform(1.0, 10.0);
  }
  return Population(e, w, beta);
}

// Plain tvd against the uniform distribution, written out independently.
double uniform_tvd(const std::vector<double>& e) {
  double total = 0;
  for (double x : e) total += x;
  double s = 0;
  for (double x : e) s += std::abs(x / total - 1.0 / static_cast<double>(e.size()));
  return s / 2;
}

// Flat d_epsilon exchange, enumerated by hand over all pairs.
double flat_expected_delta(const std::vector<double>& e, double beta, double de) {
  const std::size_t m = e.size();
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b, ++pairs) {
      auto next = e;
      const std::size_t hi = e[a] > e[b] ? a : b;
      const std::size_t lo = hi == a ? b : a;
      if (e[hi] - e[lo] > de && e[hi] >= de) {
        next[hi] -= de;
        next[lo] += (1 - beta) * de;
      }
      sum += uniform_tvd(next);
    }
  }
  return sum / static_cast<double>(pairs) - uniform_tvd(e);
}

}  // namespace

TEST_CASE("fixed points and two-agent balance") {
  const std::vector<double> e{1, 3, 2}, w{1, 3, 2};
  const auto rep = exact_one_step(Population(e, w, 0.0), ProtocolKind::Ows);
  CHECK(rep.expected_delta == 0.0);
  CHECK(rep.pairs.size() == 3);

  const std::vector<double> e2{10, 0}, w2{1, 1};
  const auto two = exact_one_step(Population(e2, w2, 0.0), ProtocolKind::Ows);
  CHECK(two.expected_tvd_after == 0.0);
  CHECK(two.tvd_before == 0.5);
  CHECK(two.pairs[0].useful);
}

TEST_CASE("expectation is the plain mean over pairs") {
  Rng rng(3);
  const auto pop = random_population(rng, 9, false, 0.3);
  for (auto kind : {ProtocolKind::Ows, ProtocolKind::Swt, ProtocolKind::Owa}) {
    const auto rep = exact_one_step(pop, kind);
    REQUIRE(rep.pairs.size() == 36);
    double s = 0;
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
      CHECK(rank_pair(rep.pairs[i].pair, 9) == i);
      s += rep.pairs[i].tvd_after;
    }
    CHECK(rep.expected_tvd_after == Approx(s / 36).epsilon(1e-14));
    CHECK(rep.expected_delta == Approx(rep.expected_tvd_after - rep.tvd_before));
  }
}

TEST_CASE("enumeration guard") {
  std::vector<double> e(1500, 1.0), w(1500, 1.0);
  e[0] = 2.0;
  CHECK(code_of([&] { exact_one_step(Population(e, w, 0.0), ProtocolKind::Ows); }) ==
        ErrorCode::EnumerationLimit);
}

TEST_CASE("Monte Carlo agrees with the exact one-step expectation within 3 standard errors") {
  constexpr std::uint64_t kDraws = 1'000'000;
  Rng pop_rng(21);
  const auto pop = random_population(pop_rng, 10, false, 0.3);
  for (auto kind : {ProtocolKind::Ows, ProtocolKind::Swt, ProtocolKind::Owa}) {
    CAPTURE(to_string(kind));
    const auto exact = exact_one_step(pop, kind);
    const auto regs = initial_registers(pop);
    Rng rng(99);
    double sum = 0, sum_sq = 0;
    for (std::uint64_t i = 0; i < kDraws; ++i) {
      Population copy = pop;
      auto r = regs;
      interact_pair(copy, sample_pair(10, rng), kind, {}, &r);
      const double d = balance_tvd(copy) - exact.tvd_before;
      sum += d;
      sum_sq += d * d;
    }
    const double n = static_cast<double>(kDraws);
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - exact.expected_delta) <= 3 * se);
  }
}

TEST_CASE("one-step contraction bound holds on random loss-free populations") {
  Rng rng(8);
  for (std::size_t i = 0; i < 200; ++i) {
    const std::size_t m = std::vector<std::size_t>{3, 5, 10, 20, 50}[i % 5];
    const auto check = lemma1_bound_check(random_population(rng, m, i % 2 == 0, 0.0));
    REQUIRE(check.holds);
    CHECK(check.lhs <= check.rhs + kBoundTolerance);
  }
}

TEST_CASE("contraction bound is tight with a single deviator") {
  Rng rng(2);
  for (std::size_t m : {5u, 20u, 100u}) {
    std::vector<double> w(m);
    for (auto& x : w) x = rng.uniform(1.0, 10.0);
    for (double offset : {30.0, -10.0}) {
      const auto pop = single_deviator_population(w, 50.0 * m, m / 2, offset);
      const auto dev = energy_deviation(pop);
      CHECK(dev.above.size() + dev.below.size() >= 1);
      const auto check = lemma1_bound_check(pop);
      CHECK(std::abs(check.lhs - check.rhs) <= 1e-9);
    }
  }
}

TEST_CASE("contraction bound on a balanced population is zero on both sides") {
  const std::vector<double> e{1, 3, 2}, w{1, 3, 2};
  const auto check = lemma1_bound_check(Population(e, w, 0.0));
  CHECK(check.lhs == Approx(0.0));
  CHECK(check.rhs == Approx(0.0));
  CHECK(check.holds);
}

TEST_CASE("contraction bound refuses lossy populations") {
  const std::vector<double> e{1, 2}, w{1, 1};
  CHECK(code_of([&] { lemma1_bound_check(Population(e, w, 0.1)); }) == ErrorCode::WrongRegime);
}

TEST_CASE("convergence horizon") {
  CHECK(theorem1_bound(100, 1.0, 0.01) == Approx(4950 * std::log(100.0)));
  CHECK(theorem1_bound(100, 1.0, 0.01) == Approx(22795.59).epsilon(1e-6));
  CHECK(theorem1_bound(37, 0.5, 0.5 / std::numbers::e) == Approx(666.0));
  CHECK(theorem1_bound(2, 0.8, 0.1) == Approx(std::log(8.0)));
  CHECK(code_of([] { theorem1_bound(10, 0.3, 0.3); }) == ErrorCode::InputDomain);
  CHECK(code_of([] { theorem1_bound(10, 0.3, 0.0); }) == ErrorCode::InputDomain);
}

TEST_CASE("worst-case lossy instance") {
  const auto inst = adversarial_instance(20, 0.2);
  CHECK(inst.initial_tvd == Approx(0.05).epsilon(1e-14));
  CHECK(inst.predicted_tvd_after == Approx(0.1 - 1.8 / 37.8).epsilon(1e-14));
  CHECK(inst.predicted_tvd_after == Approx(0.052381).epsilon(1e-5));

  Population pop = inst.population;
  interact_pair(pop, make_pair_checked(3, 19, 20), ProtocolKind::Ows, {});
  CHECK(std::abs(balance_tvd(pop) - inst.predicted_tvd_after) <= 1e-12);

  Population other = inst.population;
  const auto out = interact_pair(other, make_pair_checked(3, 7, 20), ProtocolKind::Ows, {});
  CHECK_FALSE(out.useful);
  CHECK(balance_tvd(other) == inst.initial_tvd);

  // Needs m > (2 + beta) / beta = 11.
  CHECK(code_of([] { adversarial_instance(11, 0.2); }) == ErrorCode::InputDomain);
  CHECK_NOTHROW(adversarial_instance(12, 0.2));
  CHECK(code_of([] { adversarial_instance(20, 0.0); }) == ErrorCode::InputDomain);
}

TEST_CASE("lossy bound: left side is the exact flat-exchange expectation") {
  Rng rng(17);
  for (int i = 0; i < 60; ++i) {
    const std::size_t m = std::vector<std::size_t>{5, 10, 20}[i % 3];
    const double beta = i % 2 ? 0.1 : 0.5;
    const auto pop = random_population(rng, m, true, beta);
    const auto check = lemma2_bound_check(pop, 0.01);
    CHECK(check.lhs == Approx(flat_expected_delta(pop.energies(), beta, 0.01)).epsilon(1e-9));

    const auto dev = energy_deviation(pop);
    const double et = total_energy(pop) - beta * 0.01;
    const double x = static_cast<double>(dev.above.size() * dev.below.size()) /
                     static_cast<double>(m * (m - 1));
    CHECK(check.above == dev.above.size());
    CHECK(check.below == dev.below.size());
    CHECK(check.total_after == Approx(et));
    CHECK(check.rhs == Approx(4.0 / et * (beta - x)));
    CHECK(check.rhs_derived == Approx(2 * 0.01 / et * (beta - x)));
    CHECK(check.holds_derived);
  }
}

TEST_CASE("lossy bound on a balanced population") {
  const std::vector<double> e(6, 5.0), w(6, 2.0);
  const auto check = lemma2_bound_check(Population(e, w, 0.3), 0.01);
  CHECK(check.lhs == 0.0);
  CHECK(check.rhs == Approx(4 * 0.3 / (30.0 - 0.003)));
  CHECK(check.holds);
}

TEST_CASE("lossy bound with half the agents above and half below") {
  // Small beta makes the right side negative. The exact change is of order
  // -d_eps / E, while the stated right side is of order -1 / E.
  std::vector<double> e, w(10, 1.0);
  for (int i = 0; i < 5; ++i) e.push_back(60.0 + i);
  for (int i = 0; i < 5; ++i) e.push_back(20.0 + i);
  const auto check = lemma2_bound_check(Population(e, w, 0.05), 0.01);
  CHECK(check.above == 5);
  CHECK(check.below == 5);
  CHECK(check.rhs < 0.0);
  CHECK(check.lhs < 0.0);
  CHECK(check.rhs < check.lhs);
  CHECK_FALSE(check.holds);
  CHECK(check.holds_derived);
}

TEST_CASE("lossy bound refuses unequal weights") {
  const std::vector<double> e{1, 2}, w{1, 2};
  CHECK(code_of([&] { lemma2_bound_check(Population(e, w, 0.1), 0.01); }) ==
        ErrorCode::WrongRegime);
}

TEST_CASE("single-deviator construction") {
  const std::vector<double> w{1, 2, 3, 4};
  const auto pop = single_deviator_population(w, 100.0, 2, 6.0);
  CHECK(total_energy(pop) == Approx(100.0));
  CHECK(pop.energy(2) == Approx(36.0));
  // The others share 64 in proportion 1:2:4.
  CHECK(pop.energy(0) == Approx(64.0 / 7));
  CHECK(pop.energy(3) == Approx(4 * 64.0 / 7));
}
