#pragma once

#include <optional>
#include <string_view>

namespace peerbalance {

/// Result of one pairwise interaction. `transferred` is what the sending
/// side gave up, `lost` the part that never reached the receiver.
struct ProtocolOutcome {
  double new_energy_u = 0.0;
  double new_energy_v = 0.0;
  double transferred = 0.0;
  double lost = 0.0;
  bool useful = false;
  /// True when u was the sender. Meaningless if !useful.
  bool u_sends = false;
};

struct SwtConfig {
  double d_epsilon = 0.01;
};

/// Per-agent cumulative registers of the online-average protocol.
struct OwaRegisters {
  double nrg = 0.0;
  double wt = 1.0;

  /// Fresh registers for an agent holding `energy` with `weight`.
  static OwaRegisters initial(double energy, double weight) { return {energy, weight}; }
  /// This agent's current estimate of its target energy.
  double target(double own_weight) const { return own_weight / wt * nrg; }
};

struct OwaOutcome {
  ProtocolOutcome outcome;
  OwaRegisters reg_u;
  OwaRegisters reg_v;
};

enum class ProtocolKind {
  Ows,      ///< oblivious weighted share
  Swt,      ///< small weighted transfer, amount phi * d_epsilon
  Owa,      ///< online weighted average
  SwtFlat,  ///< fixed d_epsilon exchange; the semantics the lossy contraction bound is derived for
};

std::string_view to_string(ProtocolKind kind) noexcept;
std::optional<ProtocolKind> parse_protocol(std::string_view name) noexcept;

/// Oblivious-Weighted-Share.
///
/// With beta == 0 the pair ends at (w_u S / (w_u + w_v), w_v S / (w_u + w_v))
/// where S = eps_u + eps_v. With beta > 0 the relatively richer agent sends
/// the amount that would balance the pair without loss, and the receiver
/// keeps (1 - beta) of it.
///
/// `min_relative_gap` enables the "significant difference" variant: no
/// transfer unless |eps_u/w_u - eps_v/w_v| exceeds it. Zero disables it.
ProtocolOutcome ows_interact(double eps_u, double w_u, double eps_v, double w_v, double beta,
                             double min_relative_gap = 0.0);

/// Small-Weighted-Transfer. Branch guards are evaluated literally, so an
/// exact tie on the first guard transfers while the mirrored tie does not.
ProtocolOutcome swt_interact(double eps_u, double w_u, double eps_v, double w_v, double beta,
                             const SwtConfig& cfg);

/// Flat-quantum exchange: the relatively richer agent sends exactly
/// d_epsilon when the relative gap exceeds d_epsilon and it can afford it.
ProtocolOutcome swt_flat_interact(double eps_u, double w_u, double eps_v, double w_v,
                                  double beta, const SwtConfig& cfg);

/// Online-Weighted-Average. Registers are always updated from the
/// pre-interaction energies; a transfer then happens only when exactly one
/// agent sits strictly above its own estimate.
OwaOutcome owa_interact(double eps_u, double w_u, OwaRegisters reg_u, double eps_v, double w_v,
                        OwaRegisters reg_v, double beta);

}  // namespace peerbalance
