#pragma once
// 4x4 quadrature covariance matrices (order q1, p1, q2, p2; vacuum = 1/4)
// for the entangled coherent-state link, plus the Gaussian separability
// witness W built from the block determinants.  Three constructions are
// provided:
//
//   physical        exact covariance of the lossy state.  Note the state is
//                   *not* q/p-symmetric: at theta = pi, Var q = 1/4 while
//                   Var p = 1/4 + alpha^2 sin^2 phi (1 - E)/(1 - E) terms.
//   witness_layout  the equal-variance layout used by the W-crossing
//                   analysis: both quadratures of mode j carry the q_j
//                   variance, and the interference factor is frozen at its
//                   source value (physical loss scaling).  This is the
//                   construction whose long-distance asymptote is
//                   (15/16)(1 - a2^2 ...) and whose crossing distances the
//                   closed forms describe.
//   decayed_overlap witness_layout with the interference factor re-evaluated
//                   at the transmitted amplitudes.  Comparison variant only.
//
// W = 1 + det V + 2 det C - det A1 - det A2 with A1, A2, C the 2x2 blocks;
// W < 0 certifies entanglement for states reported through this layout.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "ecsqkd/model.hpp"
#include "ecsqkd/moments.hpp"

namespace ecsqkd {

struct CovarianceMatrix {
  std::array<double, 16> v{};

  double& at(int i, int j) { return v[4 * i + j]; }
  double at(int i, int j) const { return v[4 * i + j]; }

  double det_a1() const { return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0); }
  double det_a2() const { return at(2, 2) * at(3, 3) - at(2, 3) * at(3, 2); }
  double det_c() const { return at(0, 2) * at(1, 3) - at(0, 3) * at(1, 2); }

  double det4() const {
    // Expansion by complementary 2x2 minors of rows (0,1) and (2,3).
    auto m2 = [&](int r0, int r1, int c0, int c1) {
      return at(r0, c0) * at(r1, c1) - at(r0, c1) * at(r1, c0);
    };
    return m2(0, 1, 0, 1) * m2(2, 3, 2, 3) - m2(0, 1, 0, 2) * m2(2, 3, 1, 3) +
           m2(0, 1, 0, 3) * m2(2, 3, 1, 2) + m2(0, 1, 1, 2) * m2(2, 3, 0, 3) -
           m2(0, 1, 1, 3) * m2(2, 3, 0, 2) + m2(0, 1, 2, 3) * m2(2, 3, 0, 1);
  }
};

// General construction from complex normally-ordered moments of one state
// (used by both the analytic path and the brute-force oracles).
inline CovarianceMatrix covariance_from_moments(
    std::complex<double> h1, std::complex<double> h2, std::complex<double> s1,
    std::complex<double> s2, double n1, double n2, std::complex<double> g,
    std::complex<double> p) {
  CovarianceMatrix V;
  auto var_q = [](std::complex<double> h, std::complex<double> s, double n) {
    return 0.25 + n / 2 + s.real() / 2 - h.real() * h.real();
  };
  auto var_p = [](std::complex<double> h, std::complex<double> s, double n) {
    return 0.25 + n / 2 - s.real() / 2 - h.imag() * h.imag();
  };
  auto cov_qp = [](std::complex<double> h, std::complex<double> s) {
    return s.imag() / 2 - h.real() * h.imag();
  };
  V.at(0, 0) = var_q(h1, s1, n1);
  V.at(1, 1) = var_p(h1, s1, n1);
  V.at(0, 1) = V.at(1, 0) = cov_qp(h1, s1);
  V.at(2, 2) = var_q(h2, s2, n2);
  V.at(3, 3) = var_p(h2, s2, n2);
  V.at(2, 3) = V.at(3, 2) = cov_qp(h2, s2);
  // Cross-mode block from <a1 a2> = p and <a1 a2†> = g.
  const double qq = (p.real() + g.real()) / 2 - h1.real() * h2.real();
  const double pp = (g.real() - p.real()) / 2 - h1.imag() * h2.imag();
  const double qp = (p.imag() - g.imag()) / 2 - h1.real() * h2.imag();
  const double pq = (p.imag() + g.imag()) / 2 - h1.imag() * h2.real();
  V.at(0, 2) = V.at(2, 0) = qq;
  V.at(1, 3) = V.at(3, 1) = pp;
  V.at(0, 3) = V.at(3, 0) = qp;
  V.at(1, 2) = V.at(2, 1) = pq;
  return V;
}

enum class CovarianceModel { physical, witness_layout, decayed_overlap };

inline CovarianceMatrix covariance_matrix(
    const SourceParams& s, const LinkParams& link,
    CovarianceModel model = CovarianceModel::physical) {
  const double t1 = link.t1(), t2 = link.t2();

  if (model == CovarianceModel::decayed_overlap) {
    // Equal-variance layout with every interference exponential evaluated at
    // the transmitted intensity.  Degenerates (divergent normalization) are
    // possible; this is a comparison construction, not a channel.
    const double sp2 = std::sin(s.phi) * std::sin(s.phi);
    const double c2p = std::cos(2 * s.phi), ct = std::cos(s.theta);
    const double a2 = s.alpha * s.alpha, b2 = s.beta * s.beta;
    const double ab = s.alpha * s.beta;
    const double ef1 = std::exp(-4.0 * a2 * sp2 * t1 * t1);
    const double ef2 = std::exp(-4.0 * b2 * sp2 * t2 * t2);
    const double eg = std::exp(-4.0 * ab * sp2 * t1 * t2);
    const double denom = 1.0 + ct * eg;
    if (denom <= 1e-300)
      throw std::domain_error("decayed_overlap covariance: degenerate norm");
    const double nd2 = 1.0 / denom;
    const double f1 = 1.0 + c2p * ct * ef1;
    const double f2 = 1.0 + c2p * ct * ef2;
    const double g = c2p + ct * eg;
    CovarianceMatrix V;
    const double a1e = (a2 / 2) * (nd2 * f1 - 1.0) * t1 * t1 + 0.25;
    const double a2e = (b2 / 2) * (nd2 * f2 - 1.0) * t2 * t2 + 0.25;
    const double b = (ab / 2) * (nd2 * g - c2p) * t1 * t2;
    const double c = (ab / 2) * (nd2 * g - 1.0) * t1 * t2;
    V.at(0, 0) = V.at(1, 1) = a1e;
    V.at(2, 2) = V.at(3, 3) = a2e;
    V.at(0, 2) = V.at(2, 0) = b;
    V.at(1, 3) = V.at(3, 1) = c;
    return V;
  }

  const SourceMoments sm = source_moments(s);
  const double vq1 = 0.25 + t1 * t1 * ((sm.num1 + sm.sq1) / 2 - sm.mean1 * sm.mean1);
  const double vp1 = 0.25 + t1 * t1 * ((sm.num1 - sm.sq1) / 2);
  const double vq2 = 0.25 + t2 * t2 * ((sm.num2 + sm.sq2) / 2 - sm.mean2 * sm.mean2);
  const double vp2 = 0.25 + t2 * t2 * ((sm.num2 - sm.sq2) / 2);
  const double b =
      t1 * t2 * ((sm.cross_aa + sm.cross_ad) / 2 - sm.mean1 * sm.mean2);
  const double c = t1 * t2 * ((sm.cross_ad - sm.cross_aa) / 2);

  CovarianceMatrix V;
  if (model == CovarianceModel::physical) {
    V.at(0, 0) = vq1;
    V.at(1, 1) = vp1;
    V.at(2, 2) = vq2;
    V.at(3, 3) = vp2;
  } else {  // witness_layout
    V.at(0, 0) = V.at(1, 1) = vq1;
    V.at(2, 2) = V.at(3, 3) = vq2;
  }
  V.at(0, 2) = V.at(2, 0) = b;
  V.at(1, 3) = V.at(3, 1) = c;
  return V;
}

// Cloner noise lands on Bob's clone: both of mode 2's diagonal entries gain
// sigma_b^2 = e^{-2 gamma}/4 (exactly 1/4 at gamma = 0).
inline CovarianceMatrix apply_cloner_to_covariance(CovarianceMatrix V,
                                                   const ClonerParams& c) {
  V.at(2, 2) += c.sigma_b_sq();
  V.at(3, 3) += c.sigma_b_sq();
  return V;
}

inline double witness_w(const CovarianceMatrix& V) {
  return 1.0 + V.det4() + 2.0 * V.det_c() - V.det_a1() - V.det_a2();
}

}  // namespace ecsqkd
