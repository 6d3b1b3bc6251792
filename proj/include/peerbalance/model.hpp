#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace peerbalance {

using AgentIndex = std::size_t;

struct AgentState {
  double energy = 0.0;
  double weight = 1.0;
};

struct TransferRecord {
  AgentIndex sender = 0;
  AgentIndex receiver = 0;
  double sent = 0.0;
  double lost = 0.0;
};

/// Energy lost in transit when `epsilon` units are sent: beta * epsilon.
double loss(double epsilon, double beta);

/// Full system state: per-agent energy and weight plus the loss constant.
///
/// Weights are fixed at construction. Energies change only through
/// `set_energy` or `apply_transfer`, both of which keep them non-negative.
class Population {
 public:
  Population(std::vector<AgentState> agents, double beta);
  Population(std::span<const double> energies, std::span<const double> weights, double beta);

  std::size_t size() const noexcept { return agents_.size(); }
  double beta() const noexcept { return beta_; }

  double energy(AgentIndex i) const { return agents_.at(i).energy; }
  double weight(AgentIndex i) const { return agents_.at(i).weight; }
  const AgentState& agent(AgentIndex i) const { return agents_.at(i); }
  const std::vector<AgentState>& agents() const noexcept { return agents_; }

  std::vector<double> energies() const;
  std::vector<double> weights() const;
  double total_weight() const noexcept { return total_weight_; }

  void set_energy(AgentIndex i, double energy);

  /// Same agents, different loss constant.
  Population with_beta(double beta) const;

  friend bool operator==(const Population& a, const Population& b) noexcept;

 private:
  std::vector<AgentState> agents_;
  double beta_;
  double total_weight_ = 0.0;
};

bool operator==(const Population& a, const Population& b) noexcept;

double total_energy(const Population& pop) noexcept;

/// Moves `epsilon` from `sender` to `receiver`; the receiver gets
/// epsilon * (1 - beta). Throws before mutating if a precondition fails.
TransferRecord apply_transfer(Population& pop, AgentIndex sender, AgentIndex receiver,
                              double epsilon);

}  // namespace peerbalance
