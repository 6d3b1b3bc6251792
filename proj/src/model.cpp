#include "peerbalance/model.hpp"

#include <cmath>
#include <string>

#include "peerbalance/error.hpp"

namespace peerbalance {

namespace {

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::InputDomain, "beta must lie in [0, 1), got " + std::to_string(beta));
  }
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InputDomain: return "input-domain";
    case ErrorCode::InsufficientEnergy: return "insufficient-energy";
    case ErrorCode::InvalidPair: return "invalid-pair";
    case ErrorCode::InvalidPopulation: return "invalid-population";
    case ErrorCode::DegenerateDistribution: return "degenerate-distribution";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::EnumerationLimit: return "enumeration-limit";
    case ErrorCode::WrongRegime: return "wrong-regime";
    case ErrorCode::ScheduleExhausted: return "schedule-exhausted";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

double loss(double epsilon, double beta) {
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::InputDomain, "transfer amount must be non-negative");
  }
  check_beta(beta);
  return beta * epsilon;
}

Population::Population(std::vector<AgentState> agents, double beta)
    : agents_(std::move(agents)), beta_(beta) {
  if (agents_.size() < 2) {
    throw Error(ErrorCode::InvalidPopulation, "a population needs at least two agents");
  }
  check_beta(beta_);
  for (const auto& a : agents_) {
    if (!(a.energy >= 0.0) || !std::isfinite(a.energy)) {
      throw Error(ErrorCode::InvalidPopulation, "agent energy must be finite and non-negative");
    }
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw Error(ErrorCode::InvalidPopulation, "agent weight must be finite and positive");
    }
    total_weight_ += a.weight;
  }
}

Population::Population(std::span<const double> energies, std::span<const double> weights,
                       double beta)
    : Population(
          [&] {
            if (energies.size() != weights.size()) {
              throw Error(ErrorCode::LengthMismatch, "energies and weights differ in length");
            }
            std::vector<AgentState> agents(energies.size());
            for (std::size_t i = 0; i < agents.size(); ++i) agents[i] = {energies[i], weights[i]};
            return agents;
          }(),
          beta) {}

std::vector<double> Population::energies() const {
  std::vector<double> out(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) out[i] = agents_[i].energy;
  return out;
}

std::vector<double> Population::weights() const {
  std::vector<double> out(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) out[i] = agents_[i].weight;
  return out;
}

void Population::set_energy(AgentIndex i, double energy) {
  if (!(energy >= 0.0) || !std::isfinite(energy)) {
    throw Error(ErrorCode::InputDomain, "agent energy must be finite and non-negative");
  }
  agents_.at(i).energy = energy;
}

Population Population::with_beta(double beta) const {
  check_beta(beta);
  Population copy = *this;
  copy.beta_ = beta;
  return copy;
}

bool operator==(const Population& a, const Population& b) noexcept {
  if (a.beta_ != b.beta_ || a.agents_.size() != b.agents_.size()) return false;
  for (std::size_t i = 0; i < a.agents_.size(); ++i) {
    if (a.agents_[i].energy != b.agents_[i].energy || a.agents_[i].weight != b.agents_[i].weight) {
      return false;
    }
  }
  return true;
}

double total_energy(const Population& pop) noexcept {
  double sum = 0.0;
  for (const auto& a : pop.agents()) sum += a.energy;
  return sum;
}

TransferRecord apply_transfer(Population& pop, AgentIndex sender, AgentIndex receiver,
                              double epsilon) {
  if (sender >= pop.size() || receiver >= pop.size()) {
    throw Error(ErrorCode::InvalidPair, "agent index out of range");
  }
  if (sender == receiver) {
    throw Error(ErrorCode::InvalidPair, "an agent cannot transfer to itself");
  }
  const double lost = loss(epsilon, pop.beta());
  const double available = pop.energy(sender);
  if (epsilon > available) {
    throw Error(ErrorCode::InsufficientEnergy,
                "sender holds " + std::to_string(available) + " but was asked for " +
                    std::to_string(epsilon));
  }
  pop.set_energy(sender, available - epsilon);
  pop.set_energy(receiver, pop.energy(receiver) + (epsilon - lost));
  return {sender, receiver, epsilon, lost};
}

}  // namespace peerbalance
