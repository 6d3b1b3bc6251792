#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "peerbalance/model.hpp"
#include "peerbalance/random.hpp"

namespace peerbalance {

/// Unordered agent pair, stored with first < second.
struct AgentPair {
  AgentIndex first = 0;
  AgentIndex second = 1;

  friend bool operator==(const AgentPair&, const AgentPair&) = default;
};

AgentPair make_pair_checked(AgentIndex a, AgentIndex b, std::size_t m);

/// Number of unordered pairs among m agents.
constexpr std::uint64_t pair_count(std::uint64_t m) noexcept { return m * (m - 1) / 2; }

/// Maps rank r in [0, C(m,2)) to its pair in lexicographic order:
/// 0 -> (0,1), 1 -> (0,2), ..., C(m,2)-1 -> (m-2,m-1).
AgentPair unrank_pair(std::uint64_t rank, std::size_t m);
std::uint64_t rank_pair(AgentPair pair, std::size_t m);

class PairSchedule {
 public:
  virtual ~PairSchedule() = default;
  virtual AgentPair next() = 0;
  virtual std::size_t population_size() const noexcept = 0;
};

/// Each step picks one of the C(m,2) pairs uniformly, independently of the past.
class ProbabilisticSchedule final : public PairSchedule {
 public:
  ProbabilisticSchedule(std::size_t m, std::uint64_t seed);

  AgentPair next() override;
  std::size_t population_size() const noexcept override { return m_; }

 private:
  std::size_t m_;
  std::uint64_t pairs_;
  Rng rng_;
};

/// Replays a fixed list of pairs; throws ScheduleExhausted afterwards.
class ScriptedSchedule final : public PairSchedule {
 public:
  ScriptedSchedule(std::size_t m, const std::vector<std::pair<AgentIndex, AgentIndex>>& script);

  AgentPair next() override;
  std::size_t population_size() const noexcept override { return m_; }
  std::size_t remaining() const noexcept { return script_.size() - cursor_; }

 private:
  std::size_t m_;
  std::vector<AgentPair> script_;
  std::size_t cursor_ = 0;
};

/// One uniformly random pair, for callers that manage their own Rng.
AgentPair sample_pair(std::size_t m, Rng& rng);

}  // namespace peerbalance
