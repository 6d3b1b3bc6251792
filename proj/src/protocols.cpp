#include "peerbalance/protocols.hpp"

#include <cmath>

namespace peerbalance {

namespace {

ProtocolOutcome no_transfer(double eps_u, double eps_v) {
  return {eps_u, eps_v, 0.0, 0.0, false, false};
}

// Sender gives `amount`, receiver gets amount * (1 - beta).
ProtocolOutcome directed(double eps_u, double eps_v, double amount, bool u_sends, double beta) {
  if (!(amount > 0.0)) return no_transfer(eps_u, eps_v);
  const double lost = beta * amount;
  const double received = amount - lost;
  ProtocolOutcome out{eps_u, eps_v, amount, lost, true, u_sends};
  if (u_sends) {
    out.new_energy_u = eps_u - amount;
    out.new_energy_v = eps_v + received;
  } else {
    out.new_energy_u = eps_u + received;
    out.new_energy_v = eps_v - amount;
  }
  return out;
}

// Signed amount that equalises eps/w across the pair without loss; positive
// means u is the relatively richer side.
double balancing_amount(double eps_u, double w_u, double eps_v, double w_v) {
  return (w_v * eps_u - w_u * eps_v) / (w_u + w_v);
}

}  // namespace

std::string_view to_string(ProtocolKind kind) noexcept {
  switch (kind) {
    case ProtocolKind::Ows: return "ows";
    case ProtocolKind::Swt: return "swt";
    case ProtocolKind::Owa: return "owa";
    case ProtocolKind::SwtFlat: return "swt-flat";
  }
  return "unknown";
}

std::optional<ProtocolKind> parse_protocol(std::string_view name) noexcept {
  if (name == "ows" || name == "OWS") return ProtocolKind::Ows;
  if (name == "swt" || name == "SWT") return ProtocolKind::Swt;
  if (name == "owa" || name == "OWA") return ProtocolKind::Owa;
  if (name == "swt-flat" || name == "SWT-FLAT") return ProtocolKind::SwtFlat;
  return std::nullopt;
}

ProtocolOutcome ows_interact(double eps_u, double w_u, double eps_v, double w_v, double beta,
                             double min_relative_gap) {
  if (min_relative_gap > 0.0 && !(std::abs(eps_u / w_u - eps_v / w_v) > min_relative_gap)) {
    return no_transfer(eps_u, eps_v);
  }
  const double signed_delta = balancing_amount(eps_u, w_u, eps_v, w_v);
  const double delta = std::abs(signed_delta);
  if (!(delta > 0.0)) return no_transfer(eps_u, eps_v);
  const bool u_sends = signed_delta > 0.0;

  if (beta == 0.0) {
    const double sum = eps_u + eps_v;
    const double wsum = w_u + w_v;
    return {w_u * sum / wsum, w_v * sum / wsum, delta, 0.0, true, u_sends};
  }
  return directed(eps_u, eps_v, delta, u_sends, beta);
}

ProtocolOutcome swt_interact(double eps_u, double w_u, double eps_v, double w_v, double beta,
                             const SwtConfig& cfg) {
  const double phi = std::abs(eps_u / w_u - eps_v / w_v);
  const double amount = phi * cfg.d_epsilon;
  if ((eps_u - amount) / w_u >= (eps_v + amount) / w_v) {
    return directed(eps_u, eps_v, amount, true, beta);
  }
  if ((eps_u + amount) / w_u < (eps_v - amount) / w_v) {
    return directed(eps_u, eps_v, amount, false, beta);
  }
  return no_transfer(eps_u, eps_v);
}

ProtocolOutcome swt_flat_interact(double eps_u, double w_u, double eps_v, double w_v,
                                  double beta, const SwtConfig& cfg) {
  const double gap = eps_u / w_u - eps_v / w_v;
  if (!(std::abs(gap) > cfg.d_epsilon)) return no_transfer(eps_u, eps_v);
  const bool u_sends = gap > 0.0;
  if ((u_sends ? eps_u : eps_v) < cfg.d_epsilon) return no_transfer(eps_u, eps_v);
  return directed(eps_u, eps_v, cfg.d_epsilon, u_sends, beta);
}

OwaOutcome owa_interact(double eps_u, double w_u, OwaRegisters reg_u, double eps_v, double w_v,
                        OwaRegisters reg_v, double beta) {
  reg_u.nrg += eps_v;
  reg_v.nrg += eps_u;
  reg_u.wt += w_v;
  reg_v.wt += w_u;

  const bool u_above = eps_u > reg_u.target(w_u);
  const bool v_above = eps_v > reg_v.target(w_v);
  if (u_above == v_above) return {no_transfer(eps_u, eps_v), reg_u, reg_v};

  const double delta = std::abs(balancing_amount(eps_u, w_u, eps_v, w_v));
  const bool u_sends = eps_u / w_u > eps_v / w_v;
  return {directed(eps_u, eps_v, delta, u_sends, beta), reg_u, reg_v};
}

}  // namespace peerbalance
