#include "peerbalance/scheduler.hpp"

#include <cmath>
#include <string>

#include "peerbalance/error.hpp"

namespace peerbalance {

namespace {

// Rank of (i, i+1): pairs in rows 0..i-1 come first.
std::uint64_t row_offset(std::uint64_t i, std::uint64_t m) { return i * (2 * m - i - 1) / 2; }

void check_population_size(std::size_t m) {
  if (m < 2) throw Error(ErrorCode::InvalidPopulation, "pair sampling needs m >= 2");
}

}  // namespace

AgentPair make_pair_checked(AgentIndex a, AgentIndex b, std::size_t m) {
  if (a >= m || b >= m) {
    throw Error(ErrorCode::InvalidPair, "pair (" + std::to_string(a) + ", " + std::to_string(b) +
                                            ") out of range for m = " + std::to_string(m));
  }
  if (a == b) throw Error(ErrorCode::InvalidPair, "pair members must differ");
  return a < b ? AgentPair{a, b} : AgentPair{b, a};
}

AgentPair unrank_pair(std::uint64_t rank, std::size_t m) {
  check_population_size(m);
  const std::uint64_t mm = m;
  if (rank >= pair_count(mm)) throw Error(ErrorCode::InputDomain, "pair rank out of range");
  // Closed form for the row, then nudge to absorb sqrt rounding.
  const double b = 2.0 * static_cast<double>(mm) - 1.0;
  const double disc = b * b - 8.0 * static_cast<double>(rank);
  auto i = static_cast<std::uint64_t>(std::floor((b - std::sqrt(std::max(disc, 0.0))) / 2.0));
  if (i > mm - 2) i = mm - 2;
  while (i > 0 && row_offset(i, mm) > rank) --i;
  while (i + 1 <= mm - 2 && row_offset(i + 1, mm) <= rank) ++i;
  const std::uint64_t j = rank - row_offset(i, mm) + i + 1;
  return {static_cast<AgentIndex>(i), static_cast<AgentIndex>(j)};
}

std::uint64_t rank_pair(AgentPair pair, std::size_t m) {
  const AgentPair p = make_pair_checked(pair.first, pair.second, m);
  return row_offset(p.first, m) + (p.second - p.first - 1);
}

AgentPair sample_pair(std::size_t m, Rng& rng) {
  check_population_size(m);
  return unrank_pair(rng.uniform_index(pair_count(m)), m);
}

ProbabilisticSchedule::ProbabilisticSchedule(std::size_t m, std::uint64_t seed)
    : m_(m), pairs_(0), rng_(seed) {
  check_population_size(m);
  pairs_ = pair_count(m);
}

AgentPair ProbabilisticSchedule::next() { return unrank_pair(rng_.uniform_index(pairs_), m_); }

ScriptedSchedule::ScriptedSchedule(std::size_t m,
                                   const std::vector<std::pair<AgentIndex, AgentIndex>>& script)
    : m_(m) {
  check_population_size(m);
  script_.reserve(script.size());
  for (const auto& [a, b] : script) script_.push_back(make_pair_checked(a, b, m));
}

AgentPair ScriptedSchedule::next() {
  if (cursor_ >= script_.size()) {
    throw Error(ErrorCode::ScheduleExhausted,
                "script of " + std::to_string(script_.size()) + " pairs exhausted");
  }
  return script_[cursor_++];
}

}  // namespace peerbalance
