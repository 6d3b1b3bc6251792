#include "peerbalance/metrics.hpp"

#include <cmath>
#include <string>

#include "peerbalance/error.hpp"

namespace peerbalance {

namespace {

void check_lengths(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::LengthMismatch, "distributions over " + std::to_string(p.size()) +
                                               " and " + std::to_string(q.size()) + " agents");
  }
}

double checked_total(const Population& pop) {
  const double total = total_energy(pop);
  if (!(total > 0.0)) {
    throw Error(ErrorCode::DegenerateDistribution, "total energy is zero");
  }
  return total;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw Error(ErrorCode::InputDomain, "probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::InputDomain, "probabilities sum to " + std::to_string(sum));
  }
}

double DeviationVector::positive_mass() const {
  double s = 0.0;
  for (std::size_t i : above) s += z[i];
  return s;
}

double DeviationVector::negative_mass() const {
  double s = 0.0;
  for (std::size_t i : below) s -= z[i];
  return s;
}

DiscreteDistribution energy_distribution(const Population& pop) {
  const double total = checked_total(pop);
  std::vector<double> probs(pop.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = pop.energy(i) / total;
  return DiscreteDistribution(std::move(probs));
}

DiscreteDistribution weight_distribution(const Population& pop) {
  const double total = pop.total_weight();
  std::vector<double> probs(pop.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = pop.weight(i) / total;
  return DiscreteDistribution(std::move(probs));
}

double tvd(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  check_lengths(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double tvd_excess(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  check_lengths(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > q[i]) s += p[i] - q[i];
  }
  return s;
}

double tvd_deficit(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  check_lengths(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < q[i]) s += q[i] - p[i];
  }
  return s;
}

DeviationVector deviation(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  check_lengths(p, q);
  DeviationVector d;
  d.z.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = p[i] - q[i];
    d.z[i] = z;
    if (std::abs(z) <= DeviationVector::kZeroTolerance) {
      d.level.push_back(i);
    } else if (z > 0.0) {
      d.above.push_back(i);
    } else {
      d.below.push_back(i);
    }
  }
  return d;
}

DeviationVector energy_deviation(const Population& pop) {
  return deviation(energy_distribution(pop), weight_distribution(pop));
}

double balance_tvd(const Population& pop) {
  const double total = checked_total(pop);
  const double wtotal = pop.total_weight();
  double s = 0.0;
  for (const auto& a : pop.agents()) s += std::abs(a.energy / total - a.weight / wtotal);
  return 0.5 * s;
}

bool is_weighted_balanced(const Population& pop, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InputDomain, "alpha must be non-negative");
  return balance_tvd(pop) <= alpha;
}

}  // namespace peerbalance
