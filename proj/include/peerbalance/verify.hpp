#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace peerbalance::verify {

struct Report {
  std::string name;
  bool passed = false;
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst = 0.0;  ///< largest lhs - rhs seen (or criterion-specific)
  std::string detail;
};

/// Random populations cycling m over {3, 5, 10, 20, 50}; weights U[1,10],
/// energies U[1,100], beta = 0.
Report lemma1_random(std::size_t instances, std::uint64_t seed);

/// Single-deviator populations for each m; |lhs - rhs| <= 1e-9.
Report lemma1_tightness(const std::vector<std::size_t>& sizes, std::uint64_t seed);

/// Equal-weight populations cycling m over {5, 10, 20} and beta over
/// {0.1, 0.5}; energies U[1,100].
Report lemma2_random(std::size_t instances, double d_epsilon, std::uint64_t seed);

/// Loss-free OWS from the default initialisation. Each replication runs
/// ceil(C(m,2) ln(tvd0/c)) scheduler draws; passes if the mean final tvd is
/// at most c.
Report theorem1_convergence(std::size_t m, std::size_t replications, double c,
                            std::uint64_t seed);

/// Replays one interaction of the empty agent on the worst-case instance
/// and compares against the closed form (1e-12) and the initial 1/m.
Report adversarial_increase(std::size_t m, double beta);

}  // namespace peerbalance::verify
