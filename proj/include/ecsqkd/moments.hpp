#pragma once
// Normally-ordered moments of the two-mode entangled coherent state, their
// behaviour under fibre loss and under the asymmetric Gaussian cloner, and
// the 3x3 moment-determinant entanglement witness S (entangled => S may go
// negative; S >= 0 is necessary for separability within this moment family).

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "ecsqkd/model.hpp"

namespace ecsqkd {

// Closed-form source moments.  All are real for this state family.  The
// last four collapse to loss-free coherent-product values because the
// normalization 1/(1 + E cos psi) cancels the same bracket appearing in the
// raw matrix element; we code the collapsed identities directly (the
// brute-force oracles check them independently).
struct SourceMoments {
  double mean1 = 0, mean2 = 0;   // <a1>, <a2>
  double sq1 = 0, sq2 = 0;       // <a1^2>, <a2^2>
  double num1 = 0, num2 = 0;     // <a1† a1>, <a2† a2>
  double cross_ad = 0;           // <a1 a2†>
  double cross_aa = 0;           // <a1 a2>      = alpha*beta exactly
  double triple = 0;             // <a1 a2† a2>  = alpha*beta*mean2 exactly
  double quad = 0;               // <a1† a1 a2† a2> = alpha^2 beta^2 exactly
};

inline SourceMoments source_moments_core(double a, double b, double phi,
                                         double E, double psi) {
  const double denom = 1.0 + E * std::cos(psi);
  if (denom <= 1e-300)
    throw std::domain_error("source_moments: vanishing normalization");
  const double n2 = 1.0 / denom;
  const double cp = std::cos(phi), c2p = std::cos(2 * phi);
  SourceMoments m;
  m.mean1 = n2 * a * (cp + E * std::cos(psi - phi));
  m.mean2 = n2 * b * (cp + E * std::cos(psi + phi));
  m.sq1 = n2 * a * a * (c2p + E * std::cos(psi - 2 * phi));
  m.sq2 = n2 * b * b * (c2p + E * std::cos(psi + 2 * phi));
  m.num1 = n2 * a * a * (1.0 + E * std::cos(psi - 2 * phi));
  m.num2 = n2 * b * b * (1.0 + E * std::cos(psi + 2 * phi));
  m.cross_ad = n2 * a * b * (c2p + E * std::cos(psi));
  m.cross_aa = a * b;
  m.triple = a * b * m.mean2;
  m.quad = a * a * b * b;
  return m;
}

inline SourceMoments source_moments(const SourceParams& s) {
  return source_moments_core(s.alpha, s.beta, s.phi, s.branch_overlap(),
                             s.interference_phase());
}

// How the interference factor behaves under loss.
//  physical       : exact single-photon-loss channel.  Normally-ordered
//                   moments scale by amplitude transmittances only; E and
//                   psi stay frozen at their source values.  (The channel's
//                   decoherence of the branch superposition exactly cancels
//                   the overlap gain of the shrunken kets.)
//  decayed_overlap: comparison variant in which E and psi are re-evaluated
//                   at the transmitted amplitudes, E -> E^T with
//                   T = exp(-(K1 d1 + K2 d2)/2).  Kept only for adjudication
//                   against the oracles; it is not a quantum channel.
enum class MomentModel { physical, decayed_overlap };

// The five externally-reported moments plus the two Alice-side ones the
// cloner update needs (for an entangled input <a1† a1> != |<a1>|^2, so the
// shift in the fourth moment cannot be reconstructed from <a1> alone).
struct MomentSet {
  std::complex<double> m_a1{};      // <a1>
  std::complex<double> m_a2{};      // <a2>
  std::complex<double> m_a1a2d{};   // <a1 a2†>
  std::complex<double> m_n1{};      // <a1† a1>
  std::complex<double> m_n2{};      // <a2† a2>
  std::complex<double> m_a1n2{};    // <a1 a2† a2>
  std::complex<double> m_n1n2{};    // <a1† a1 a2† a2>
};

inline MomentSet moment_set(const SourceParams& s, const LinkParams& link,
                            MomentModel model = MomentModel::physical) {
  SourceMoments sm;
  if (model == MomentModel::physical) {
    sm = source_moments(s);
  } else {
    const double T = link.joint_decay();
    const double E = std::exp(T * s.log_branch_overlap());
    const double psi =
        s.theta - (s.alpha * s.alpha - s.beta * s.beta) * T * std::sin(2 * s.phi);
    sm = source_moments_core(s.alpha, s.beta, s.phi, E, psi);
  }
  const double t1 = link.t1(), t2 = link.t2();
  MomentSet out;
  out.m_a1 = t1 * sm.mean1;
  out.m_a2 = t2 * sm.mean2;
  out.m_a1a2d = t1 * t2 * sm.cross_ad;
  out.m_n1 = t1 * t1 * sm.num1;
  out.m_n2 = t2 * t2 * sm.num2;
  out.m_a1n2 = t1 * t2 * t2 * sm.triple;
  out.m_n1n2 = t1 * t1 * t2 * t2 * sm.quad;
  return out;
}

// Bob-side cloner output a2 - kappa (c + b†), vacuum ancillas.  Mixed terms
// vanish in vacuum; <(c + b†)(c† + b)> = 1 gives the only surviving shifts:
//   <a2† a2>       += kappa^2
//   <a1 a2† a2>    += kappa^2 <a1>
//   <a1† a1 a2† a2>+= kappa^2 <a1† a1>
// <a2>, <a1 a2†> and <a2^2> are untouched.
inline MomentSet apply_cloner_to_moments(MomentSet m, const ClonerParams& c) {
  const double k2 = c.kappa_sq();
  m.m_n2 += k2;
  m.m_a1n2 += k2 * m.m_a1;
  m.m_n1n2 += k2 * m.m_n1;
  return m;
}

// Witness determinant
//        | 1         <a2†>       <a1 a2†>      |
//   S  = | <a2>      <a2† a2>    <a1 a2† a2>   |
//        | <a1† a2>  <a1† a2† a2>  <a1† a1 a2† a2> |
// of a Hermitian matrix of expectation values; S < 0 certifies entanglement.
inline double witness_s(const MomentSet& m) {
  using C = std::complex<double>;
  const C one{1.0, 0.0};
  const C h2 = m.m_a2, g = m.m_a1a2d, n2 = m.m_n2, d = m.m_a1n2,
          q = m.m_n1n2;
  const C det = one * (n2 * q - d * std::conj(d)) -
                std::conj(h2) * (h2 * q - d * std::conj(g)) +
                g * (h2 * std::conj(d) - n2 * std::conj(g));
  return det.real();
}

// Cancellation-free evaluation.  Expanding the determinant for this state
// gives the factored source value
//   S0 = -4 alpha^2 beta^4 N^6 sin^4(phi) E (cos(psi + 2 phi) + E),
// scaling under loss as S(d) = t1^2 t2^4 S0, and the cloner adds
//   kappa^2 t1^2 t2^2 J + kappa^4 t1^2 (num1 - mean1^2)
// with J = quad + num1*num2 - 2*mean1*triple - num1*mean2^2
//        + 2*mean1*mean2*cross_ad - cross_ad^2   (source values).
// The raw 3x3 determinant loses ~alpha^6 digits to cancellation; this form
// does not.
inline double witness_s_stable(const SourceParams& s, const LinkParams& link,
                               std::optional<ClonerParams> cloner = {}) {
  const SourceMoments sm = source_moments(s);
  const double E = s.branch_overlap();
  const double psi = s.interference_phase();
  const double n2 = s.norm_sq();
  const double sp = std::sin(s.phi);
  const double t1 = link.t1(), t2 = link.t2();
  const double a = s.alpha, b = s.beta;
  const double s0 = -4.0 * a * a * std::pow(b, 4) * std::pow(n2, 3) *
                    std::pow(sp, 4) * E * (std::cos(psi + 2 * s.phi) + E);
  double out = t1 * t1 * std::pow(t2, 4) * s0;
  if (cloner) {
    const double k2 = cloner->kappa_sq();
    const double J = sm.quad + sm.num1 * sm.num2 - 2 * sm.mean1 * sm.triple -
                     sm.num1 * sm.mean2 * sm.mean2 +
                     2 * sm.mean1 * sm.mean2 * sm.cross_ad -
                     sm.cross_ad * sm.cross_ad;
    out += k2 * t1 * t1 * t2 * t2 * J +
           k2 * k2 * t1 * t1 * (sm.num1 - sm.mean1 * sm.mean1);
  }
  return out;
}

// Sign and log-magnitude of the loss-only witness, safe at extreme alpha
// where S itself over/underflows.  sign = 0 marks an exact zero (phi = 0 or
// a sign change of the bracket).
struct SignedLog {
  int sign = 0;
  double log_abs = -std::numeric_limits<double>::infinity();
};

inline SignedLog witness_s_log(const SourceParams& s, const LinkParams& link) {
  const double sp = std::sin(s.phi);
  if (sp == 0.0) return {};
  const double logE = s.log_branch_overlap();
  const double psi = s.interference_phase();
  const double bracket = std::cos(psi + 2 * s.phi) + std::exp(logE);
  if (bracket == 0.0) return {};
  SignedLog r;
  r.sign = bracket > 0 ? -1 : 1;
  r.log_abs = std::log(4.0) + 2 * std::log(s.alpha) + 4 * std::log(s.beta) -
              3 * std::log1p(std::exp(logE) * std::cos(psi)) +
              4 * std::log(sp) + logE + std::log(std::abs(bracket)) -
              link.K1 * link.d1 - 2 * link.K2 * link.d2;
  return r;
}

}  // namespace ecsqkd
