#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "peerbalance/model.hpp"

namespace peerbalance {

/// Non-negative vector over agents summing to one (within 1e-12).
class DiscreteDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit DiscreteDistribution(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
};

/// z(x) = P(x) - Q(x), partitioned by sign.
struct DeviationVector {
  /// |z| at or below this counts as zero.
  static constexpr double kZeroTolerance = 1e-12;

  std::vector<double> z;
  std::vector<std::size_t> above;  ///< z > 0
  std::vector<std::size_t> below;  ///< z < 0
  std::vector<std::size_t> level;  ///< z == 0 within tolerance

  double positive_mass() const;
  double negative_mass() const;
};

/// Energy shares E(u) / sum E. Throws DegenerateDistribution on zero total.
DiscreteDistribution energy_distribution(const Population& pop);
DiscreteDistribution weight_distribution(const Population& pop);

/// Half the L1 distance.
double tvd(const DiscreteDistribution& p, const DiscreteDistribution& q);
/// Sum of P(x) - Q(x) over x with P(x) > Q(x).
double tvd_excess(const DiscreteDistribution& p, const DiscreteDistribution& q);
/// Sum of Q(x) - P(x) over x with P(x) < Q(x).
double tvd_deficit(const DiscreteDistribution& p, const DiscreteDistribution& q);

DeviationVector deviation(const DiscreteDistribution& p, const DiscreteDistribution& q);
DeviationVector energy_deviation(const Population& pop);

/// tvd(energy distribution, weight distribution), without allocating.
double balance_tvd(const Population& pop);

bool is_weighted_balanced(const Population& pop, double alpha);

}  // namespace peerbalance
