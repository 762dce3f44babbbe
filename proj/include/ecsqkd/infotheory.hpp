#pragma once
// Gaussian information theory on 4x4 covariance matrices (vacuum = 1/4
// convention): symplectic eigenvalues, the thermal-state entropy function,
// Alice–Bob mutual information, Eve's information through the cloner, and
// the resulting key-rate margin.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "ecsqkd/covariance.hpp"
#include "ecsqkd/model.hpp"

namespace ecsqkd {

// Entropy of a thermal mode with symplectic eigenvalue x (x = 1/4 is
// vacuum): h(x) = g(2x) with g(v) = (v + 1/2) ln(v + 1/2) - (v - 1/2) ln(v - 1/2).
// h(1/4) = 0 exactly; tiny negative arguments from roundoff are clamped.
inline double entropy_h(double x) {
  const double v = 2.0 * x;
  const double up = v + 0.5;
  double dn = v - 0.5;
  if (dn < 0) {
    if (dn < -1e-9) throw std::domain_error("entropy_h: x below vacuum");
    dn = 0.0;
  }
  const double lo = dn == 0.0 ? 0.0 : dn * std::log(dn);
  return up * std::log(up) - lo;
}

// Alternative closed form retained for comparison only: it evaluates to
// (1/2) ln(1/2) != 0 at the vacuum point x = 1/4, so it is not used by the
// production pipeline.  (0 * ln 0 is taken as 0.)
inline double entropy_h_alt(double x) {
  const double up = x + 0.25;
  const double dn = x - 0.25;
  if (dn < -1e-12) throw std::domain_error("entropy_h_alt: x below vacuum");
  const double lo = dn <= 0.0 ? 0.0 : dn * std::log(dn);
  return up * std::log(up) + lo;
}

struct SymplecticPair {
  double d_minus = 0.0;
  double d_plus = 0.0;
};

// Closed form for a two-mode matrix: with Delta = det A + det B + 2 det C,
// d_pm^2 = (Delta ± sqrt(Delta^2 - 4 det V)) / 2.  Tiny negative radicands
// from roundoff are clamped to zero; anything worse is an error (the input
// was not a physical covariance matrix).
inline SymplecticPair symplectic_eigenvalues(const CovarianceMatrix& V) {
  // The radicand delta^2 - 4 det cancels almost completely when the two
  // invariants nearly coincide (states close to pure and close to vacuum,
  // where the d+/d- split is ~1e-10), so the determinants and the radicand
  // are evaluated in extended precision; results return as doubles.
  long double e[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) e[i][j] = V.at(i, j);
  auto m2 = [&](int r0, int r1, int c0, int c1) {
    return e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0];
  };
  const long double det_a1 = m2(0, 1, 0, 1);
  const long double det_a2 = m2(2, 3, 2, 3);
  const long double det_c = m2(0, 1, 2, 3);
  const long double det_l =
      m2(0, 1, 0, 1) * m2(2, 3, 2, 3) - m2(0, 1, 0, 2) * m2(2, 3, 1, 3) +
      m2(0, 1, 0, 3) * m2(2, 3, 1, 2) + m2(0, 1, 1, 2) * m2(2, 3, 0, 3) -
      m2(0, 1, 1, 3) * m2(2, 3, 0, 2) + m2(0, 1, 2, 3) * m2(2, 3, 0, 1);
  const long double delta_l = det_a1 + det_a2 + 2.0L * det_c;
  long double rad = delta_l * delta_l - 4.0L * det_l;
  const long double scale = std::max(1.0L, delta_l * delta_l);
  if (rad < 0) {
    if (rad < -1e-10L * scale)
      throw std::domain_error("symplectic_eigenvalues: complex pair (matrix not physical)");
    rad = 0.0L;
  }
  // delta - root cancels several digits whenever d- << d+, so the
  // subtraction stays in extended precision as well.
  const long double root = std::sqrt(rad);
  auto safe_sqrt = [](long double x) {
    if (x < 0) {
      if (x < -1e-12L) throw std::domain_error("symplectic_eigenvalues: negative d^2");
      x = 0.0L;
    }
    return double(std::sqrt(x));
  };
  SymplecticPair out;
  out.d_plus = safe_sqrt((delta_l + root) / 2.0L);
  out.d_minus = safe_sqrt((delta_l - root) / 2.0L);
  return out;
}

// Independent route: moduli of the eigenvalues of Omega V, which come in
// pairs ± i d_j.  Used to validate the closed form.
inline SymplecticPair symplectic_eigenvalues_eigenroute(
    const CovarianceMatrix& V) {
  Eigen::Matrix4d M;
  Eigen::Matrix4d Omega;
  Omega << 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) M(i, j) = V.at(i, j);

  // |eig(Omega V)| = sqrt(eig(-(Omega V)^2)), and -(Omega V)^2 =
  // (Omega V Omega^T) V is similar to the symmetric positive matrix
  // L^T (Omega V Omega^T) L for V = L L^T.  The self-adjoint solver keeps
  // full precision where the general solver loses digits on the clustered
  // spectra of nearly pure states.
  const Eigen::LLT<Eigen::Matrix4d> llt(M);
  if (llt.info() == Eigen::Success) {
    const Eigen::Matrix4d L = llt.matrixL();
    const Eigen::Matrix4d K =
        L.transpose() * (Omega * M * Omega.transpose()) * L;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(
        K, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending; d_j^2 twice each
    return SymplecticPair{std::sqrt(std::max(0.0, (ev[0] + ev[1]) / 2.0)),
                          std::sqrt(std::max(0.0, (ev[2] + ev[3]) / 2.0))};
  }

  // Non positive-definite input: fall back to the general solver.
  const Eigen::Matrix4d OV = Omega * M;
  Eigen::EigenSolver<Eigen::Matrix4d> es(OV, /*computeEigenvectors=*/false);
  std::array<double, 4> mod;
  for (int i = 0; i < 4; ++i) mod[i] = std::abs(es.eigenvalues()[i]);
  std::sort(mod.begin(), mod.end());
  return SymplecticPair{(mod[0] + mod[1]) / 2.0, (mod[2] + mod[3]) / 2.0};
}

// Comparison variant with a doubly nested radical; generally NaN for
// physical inputs (inner radical exceeds Delta^2).  Never used in the
// production pipeline; kept so the discrepancy can be reported.
inline SymplecticPair symplectic_eigenvalues_alt(const CovarianceMatrix& V) {
  const double delta = V.det_a1() + V.det_a2() + 2.0 * V.det_c();
  const double det = V.det4();
  const double inner = std::sqrt(delta * delta - 4.0 * det);
  SymplecticPair out;
  out.d_plus = std::sqrt((delta + std::sqrt(delta * delta - inner)) / 2.0);
  out.d_minus = std::sqrt((delta - std::sqrt(delta * delta - inner)) / 2.0);
  return out;
}

// I(A:B) = h(sqrt(det A)) + h(sqrt(det B)) - h(d+) - h(d-)  [nats].
inline double mutual_information(const CovarianceMatrix& V) {
  const SymplecticPair d = symplectic_eigenvalues(V);
  const double ia = entropy_h(std::sqrt(V.det_a1()));
  const double ib = entropy_h(std::sqrt(V.det_a2()));
  double mi = ia + ib - entropy_h(d.d_plus) - entropy_h(d.d_minus);
  if (mi < 0) {
    if (mi < -1e-9)
      throw std::domain_error("mutual_information: negative result");
    mi = 0.0;
  }
  return mi;
}

struct InfoReport {
  double i_ab = 0.0;
  double i_be = 0.0;
  double kappa = 0.0;
};

// Cloner symmetry: Eve's clone of mode 2 sees the same Gaussian channel as
// Bob's with gamma -> -gamma (her added noise is e^{+2 gamma}/4).  Both
// informations are evaluated on the physical covariance matrix.
inline InfoReport eve_information_and_key_rate(const SourceParams& s,
                                               const LinkParams& link,
                                               const ClonerParams& c) {
  const CovarianceMatrix V =
      covariance_matrix(s, link, CovarianceModel::physical);
  const CovarianceMatrix Vb = apply_cloner_to_covariance(V, c);
  const CovarianceMatrix Ve =
      apply_cloner_to_covariance(V, ClonerParams::make(-c.gamma));
  InfoReport r;
  r.i_ab = mutual_information(Vb);
  r.i_be = mutual_information(Ve);
  r.kappa = std::max(0.0, r.i_ab - r.i_be);
  return r;
}

}  // namespace ecsqkd
