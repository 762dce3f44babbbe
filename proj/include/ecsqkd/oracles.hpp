#pragma once
// Two independent brute-force routes used to adjudicate every closed form in
// this library:
//
//  * coherent-dyad algebra: the state is a 4-term sum of coherent dyads
//    w |a,b><c,d|; loss, normally-ordered moments, and the cloner all have
//    exact expressions in terms of coherent overlaps.
//
//  * truncated Fock basis: explicit amplitudes, ladder operators, and a
//    Kraus-operator loss channel, with certified truncation tails.
//
// Neither route shares formulas with the production code in
// moments.hpp/covariance.hpp beyond the definitional quadrature algebra.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecsqkd/covariance.hpp"
#include "ecsqkd/model.hpp"
#include "ecsqkd/moments.hpp"

namespace ecsqkd::oracle {

using C = std::complex<double>;

inline double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// ---------------------------------------------------------------------------
// Coherent-dyad route
// ---------------------------------------------------------------------------

struct DyadTerm {
  C w, a, b, c, d;  // w |a>_1 |b>_2 <c|_1 <d|_2
};
struct DyadState {
  std::vector<DyadTerm> terms;
};

inline C coherent_overlap_pow(C c, C a, double lam) {
  return std::exp(lam *
                  (-0.5 * std::norm(a) - 0.5 * std::norm(c) + std::conj(c) * a));
}
inline C coherent_overlap(C c, C a) { return coherent_overlap_pow(c, a, 1.0); }

inline DyadState build_dyads(const SourceParams& s) {
  const C iu(0.0, 1.0);
  const C ap = s.alpha * std::exp(iu * s.phi);
  const C am = s.alpha * std::exp(-iu * s.phi);
  const C bp = s.beta * std::exp(iu * s.phi);
  const C bm = s.beta * std::exp(-iu * s.phi);
  const C eith = std::exp(iu * s.theta);
  // Normalization straight from overlaps (no use of the closed form).
  const C cross = eith * coherent_overlap(ap, am) * coherent_overlap(bm, bp);
  const double n2 = 1.0 / (1.0 + cross.real());
  const C half(n2 / 2.0, 0.0);
  DyadState st;
  st.terms = {{half, ap, bm, ap, bm},
              {half * std::conj(eith), ap, bm, am, bp},
              {half * eith, am, bp, ap, bm},
              {half, am, bp, am, bp}};
  return st;
}

inline C dyad_trace(const DyadState& s) {
  C acc = 0;
  for (const auto& T : s.terms)
    acc += T.w * coherent_overlap(T.c, T.a) * coherent_overlap(T.d, T.b);
  return acc;
}

// Pure-loss channel on a coherent dyad: |a><c| -> <c|a>^{1-t^2} |ta><tc|.
// The decohering prefactor is the environment overlap after the beam
// splitter; the trace is preserved exactly because the prefactor cancels
// the overlap change of the scaled kets.
inline DyadState apply_loss_to_dyads(DyadState s, double t1, double t2) {
  if (!(t1 >= 0.0 && t1 <= 1.0) || !(t2 >= 0.0 && t2 <= 1.0))
    throw std::domain_error("loss channel needs amplitude transmittances in [0, 1]");
  for (auto& T : s.terms) {
    T.w *= coherent_overlap_pow(T.c, T.a, 1.0 - t1 * t1) *
           coherent_overlap_pow(T.d, T.b, 1.0 - t2 * t2);
    T.a *= t1;
    T.c *= t1;
    T.b *= t2;
    T.d *= t2;
  }
  return s;
}

// Normally-ordered moment <a1†^m a1^l a2†^p a2^n>.
inline C dyad_moment(const DyadState& s, int l, int m, int n, int p) {
  C acc = 0;
  for (const auto& T : s.terms) {
    C v = T.w;
    v *= std::pow(std::conj(T.c), m) * std::pow(T.a, l);
    v *= std::pow(std::conj(T.d), p) * std::pow(T.b, n);
    v *= coherent_overlap(T.c, T.a) * coherent_overlap(T.d, T.b);
    acc += v;
  }
  return acc;
}

// Expectation of the operator string as written, a1^l a1†^m a2^n a2†^p,
// reduced to normal order with a^l a†^m = sum_k k! C(l,k) C(m,k) a†^{m-k} a^{l-k}.
inline C dyad_moment_general(const DyadState& s, int l, int m, int n, int p) {
  C acc = 0;
  for (int k = 0; k <= std::min(l, m); ++k)
    for (int j = 0; j <= std::min(n, p); ++j)
      acc += binom(l, k) * binom(m, k) * factorial(k) * binom(n, j) *
             binom(p, j) * factorial(j) * dyad_moment(s, l - k, m - k, n - j, p - j);
  return acc;
}

// Moments of Bob's cloner output a2' = a2 - kappa (c + b†) with vacuum
// ancillas.  A = c + b† commutes with A† = c† + b and <A†^u A^v> = u! d_uv,
// so only diagonal ancilla pairings survive and the signs square away:
//   <a1†^m a1^l a2'†^p a2'^n>
//     = sum_j C(p,j) C(n,j) j! kappa^{2j} <a1†^m a1^l a2†^{p-j} a2^{n-j}>.
inline C cloner_moment(const DyadState& s, const ClonerParams& cl, int l, int m,
                       int n, int p, bool eve = false) {
  const double k2 = eve ? cl.kappa_e_sq() : cl.kappa_sq();
  C acc = 0;
  double kj = 1.0;
  for (int j = 0; j <= std::min(n, p); ++j) {
    acc += binom(p, j) * binom(n, j) * factorial(j) * kj *
           dyad_moment(s, l, m, n - j, p - j);
    kj *= k2;
  }
  return acc;
}

inline MomentSet dyad_moment_set(const DyadState& s) {
  MomentSet m;
  m.m_a1 = dyad_moment(s, 1, 0, 0, 0);
  m.m_a2 = dyad_moment(s, 0, 0, 1, 0);
  m.m_a1a2d = dyad_moment(s, 1, 0, 0, 1);
  m.m_n1 = dyad_moment(s, 1, 1, 0, 0);
  m.m_n2 = dyad_moment(s, 0, 0, 1, 1);
  m.m_a1n2 = dyad_moment(s, 1, 0, 1, 1);
  m.m_n1n2 = dyad_moment(s, 1, 1, 1, 1);
  return m;
}

inline CovarianceMatrix dyad_covariance(const DyadState& s) {
  return covariance_from_moments(
      dyad_moment(s, 1, 0, 0, 0), dyad_moment(s, 0, 0, 1, 0),
      dyad_moment(s, 2, 0, 0, 0), dyad_moment(s, 0, 0, 2, 0),
      dyad_moment(s, 1, 1, 0, 0).real(), dyad_moment(s, 0, 0, 1, 1).real(),
      dyad_moment(s, 1, 0, 0, 1), dyad_moment(s, 1, 0, 1, 0));
}

// ---------------------------------------------------------------------------
// Truncated Fock route
// ---------------------------------------------------------------------------

struct FockState {
  int n_max = 0;
  std::vector<C> amp;             // (n_max+1)^2, index n1*(n_max+1)+n2
  double norm_prefactor_sq = 0.0; // |N|^2 implied by explicit renormalization
};

inline std::vector<C> coherent_coeffs(C z, int n_max) {
  std::vector<C> c(n_max + 1);
  c[0] = std::exp(C(-0.5 * std::norm(z), 0.0));
  for (int n = 0; n < n_max; ++n) c[n + 1] = c[n] * z / std::sqrt(double(n + 1));
  return c;
}

// Photon-number tail mass of a coherent state |z| = r beyond n_max.
inline double poisson_tail(double r2, int n_max) {
  double term = std::exp(-r2), sum = term;
  for (int n = 1; n <= n_max; ++n) {
    term *= r2 / n;
    sum += term;
  }
  return std::max(0.0, 1.0 - sum);
}

inline int suggested_n_max(double r) {
  return static_cast<int>(std::ceil(r * r + 8.0 * r + 20.0));
}

inline FockState build_fock(const SourceParams& s, int n_max) {
  const double rmax = std::max(s.alpha, s.beta);
  const double tail = std::max(poisson_tail(s.alpha * s.alpha, n_max),
                               poisson_tail(s.beta * s.beta, n_max));
  if (tail > 1e-12) {
    std::ostringstream os;
    os << "fock truncation: tail mass " << tail << " at n_max=" << n_max
       << " exceeds 1e-12; need n_max >= " << suggested_n_max(rmax);
    throw TruncationError(os.str());
  }
  const C iu(0.0, 1.0);
  const auto c1p = coherent_coeffs(s.alpha * std::exp(iu * s.phi), n_max);
  const auto c1m = coherent_coeffs(s.alpha * std::exp(-iu * s.phi), n_max);
  const auto c2m = coherent_coeffs(s.beta * std::exp(-iu * s.phi), n_max);
  const auto c2p = coherent_coeffs(s.beta * std::exp(iu * s.phi), n_max);
  const C eith = std::exp(iu * s.theta);
  FockState f;
  f.n_max = n_max;
  f.amp.resize((n_max + 1) * (n_max + 1));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2)
      f.amp[n1 * (n_max + 1) + n2] =
          inv_sqrt2 * (c1p[n1] * c2m[n2] + eith * c1m[n1] * c2p[n2]);
  double ssum = 0;
  for (const auto& a : f.amp) ssum += std::norm(a);
  f.norm_prefactor_sq = 1.0 / ssum;
  const double inv = 1.0 / std::sqrt(ssum);
  for (auto& a : f.amp) a *= inv;
  return f;
}

inline std::vector<C> fock_apply_a(const std::vector<C>& v, int n_max,
                                   int mode) {
  const int dim = n_max + 1;
  std::vector<C> out(v.size(), C(0, 0));
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2) {
      if (mode == 1 && n1 < n_max)
        out[n1 * dim + n2] = std::sqrt(double(n1 + 1)) * v[(n1 + 1) * dim + n2];
      if (mode == 2 && n2 < n_max)
        out[n1 * dim + n2] = std::sqrt(double(n2 + 1)) * v[n1 * dim + (n2 + 1)];
    }
  return out;
}

inline C fock_inner(const std::vector<C>& u, const std::vector<C>& v) {
  C acc = 0;
  for (size_t i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * v[i];
  return acc;
}

// <a1†^m a1^l a2†^p a2^n> on one vector = <a1^m a2^p psi | a1^l a2^n psi>.
inline C fock_vector_moment(const std::vector<C>& psi, int n_max, int l, int m,
                            int n, int p) {
  auto left = psi;
  for (int i = 0; i < m; ++i) left = fock_apply_a(left, n_max, 1);
  for (int i = 0; i < p; ++i) left = fock_apply_a(left, n_max, 2);
  auto right = psi;
  for (int i = 0; i < l; ++i) right = fock_apply_a(right, n_max, 1);
  for (int i = 0; i < n; ++i) right = fock_apply_a(right, n_max, 2);
  return fock_inner(left, right);
}

// Kraus branches of the pure-loss channel, mode by mode:
//   A_k |n> = sqrt(C(n,k)) t^{n-k} s^k |n-k>,  s = sqrt(1-t^2).
// Branch vectors are unnormalized; the squared norms sum to 1.  Branch
// generation stops once the captured mass reaches 1 - 1e-13 of the input.
struct FockEnsemble {
  int n_max = 0;
  std::vector<std::vector<C>> branches;
};

inline std::vector<C> fock_kraus_branch(const std::vector<C>& v, int n_max,
                                        int mode, int k, double t, double ss) {
  const int dim = n_max + 1;
  std::vector<C> out(v.size(), C(0, 0));
  for (int n1 = 0; n1 <= n_max; ++n1)
    for (int n2 = 0; n2 <= n_max; ++n2) {
      const int nk = (mode == 1 ? n1 : n2) + k;
      if (nk > n_max) continue;
      const double fac =
          std::exp(0.5 * (std::lgamma(nk + 1) - std::lgamma(k + 1) -
                          std::lgamma(nk - k + 1))) *
          std::pow(t, nk - k) * std::pow(ss, k);
      out[n1 * dim + n2] +=
          fac * v[(mode == 1 ? nk : n1) * dim + (mode == 1 ? n2 : nk)];
    }
  return out;
}

inline FockEnsemble apply_loss_to_fock(const FockState& f, double t1,
                                       double t2) {
  if (!(t1 >= 0.0 && t1 <= 1.0) || !(t2 >= 0.0 && t2 <= 1.0))
    throw std::domain_error("loss channel needs amplitude transmittances in [0, 1]");
  FockEnsemble ens;
  ens.n_max = f.n_max;
  const double s1 = std::sqrt(std::max(0.0, 1.0 - t1 * t1));
  const double s2 = std::sqrt(std::max(0.0, 1.0 - t2 * t2));
  std::vector<std::vector<C>> stage1;
  double captured = 0.0;
  for (int k1 = 0; k1 <= f.n_max && captured < 1.0 - 1e-13; ++k1) {
    auto b = fock_kraus_branch(f.amp, f.n_max, 1, k1, t1, s1);
    const double nb = fock_inner(b, b).real();
    captured += nb;
    if (nb > 1e-18) stage1.push_back(std::move(b));
  }
  for (const auto& v : stage1) {
    const double nv = fock_inner(v, v).real();
    double cap2 = 0.0;
    for (int k2 = 0; k2 <= f.n_max && cap2 < nv * (1.0 - 1e-13); ++k2) {
      auto b = fock_kraus_branch(v, f.n_max, 2, k2, t2, s2);
      const double nb = fock_inner(b, b).real();
      cap2 += nb;
      if (nb > 1e-18) ens.branches.push_back(std::move(b));
    }
  }
  return ens;
}

inline C fock_moment(const FockEnsemble& e, int l, int m, int n, int p) {
  C acc = 0;
  for (const auto& b : e.branches)
    acc += fock_vector_moment(b, e.n_max, l, m, n, p);
  return acc;
}

inline FockEnsemble fock_pure_ensemble(const FockState& f) {
  FockEnsemble e;
  e.n_max = f.n_max;
  e.branches.push_back(f.amp);
  return e;
}

inline MomentSet fock_moment_set(const FockEnsemble& e) {
  MomentSet m;
  m.m_a1 = fock_moment(e, 1, 0, 0, 0);
  m.m_a2 = fock_moment(e, 0, 0, 1, 0);
  m.m_a1a2d = fock_moment(e, 1, 0, 0, 1);
  m.m_n1 = fock_moment(e, 1, 1, 0, 0);
  m.m_n2 = fock_moment(e, 0, 0, 1, 1);
  m.m_a1n2 = fock_moment(e, 1, 0, 1, 1);
  m.m_n1n2 = fock_moment(e, 1, 1, 1, 1);
  return m;
}

inline CovarianceMatrix fock_covariance(const FockEnsemble& e) {
  return covariance_from_moments(
      fock_moment(e, 1, 0, 0, 0), fock_moment(e, 0, 0, 1, 0),
      fock_moment(e, 2, 0, 0, 0), fock_moment(e, 0, 0, 2, 0),
      fock_moment(e, 1, 1, 0, 0).real(), fock_moment(e, 0, 0, 1, 1).real(),
      fock_moment(e, 1, 0, 0, 1), fock_moment(e, 1, 0, 1, 0));
}

// ---------------------------------------------------------------------------
// Route agreement
// ---------------------------------------------------------------------------

struct CheckRow {
  std::string id;
  double worst = 0.0;  // worst relative deviation (floor max(1,|ref|))
  double tol = 0.0;
  bool pass = false;
};

inline double rel_dev(C got, C ref) {
  return std::abs(got - ref) / std::max(1.0, std::abs(ref));
}
inline double rel_dev(double got, double ref) {
  return std::abs(got - ref) / std::max(1.0, std::abs(ref));
}

inline std::array<C, 7> as_array(const MomentSet& m) {
  return {m.m_a1, m.m_a2, m.m_a1a2d, m.m_n1, m.m_n2, m.m_a1n2, m.m_n1n2};
}

struct AgreementGrid {
  std::vector<double> alphas{0.5, 1.0, 2.0};
  std::vector<double> phis{0.1, 0.5};
  std::vector<double> thetas{0.0, kPi};
  std::vector<double> ts{1.0, 0.8, 0.5};
};

// Full oracle sweep: analytic moments and covariances against both routes,
// trace/norm preservation, loss semigroup, cloner shifts, and witness
// consistency.  Tolerances: 1e-9 against dyads, 1e-8 against Fock.
inline std::vector<CheckRow> run_route_agreement(
    const AgreementGrid& grid = {}) {
  double d_mom_dyad = 0, d_mom_fock = 0, d_cov_dyad = 0, d_cov_fock = 0;
  double d_trace = 0, d_norm = 0, d_semi = 0, d_cloner = 0, d_wit = 0;
  double d_dyad_fock = 0;
  const double K = kDefaultFibreK;
  for (double a : grid.alphas)
    for (double phi : grid.phis)
      for (double th : grid.thetas)
        for (double t : grid.ts) {
          const auto src = SourceParams::make(a, phi, th);
          const double d = t < 1.0 ? -2.0 * std::log(t) / K : 0.0;
          const auto link = LinkParams::make(K, d, K, d);

          auto dy = apply_loss_to_dyads(build_dyads(src), t, t);
          d_trace = std::max(d_trace, std::abs(dyad_trace(dy).real() - 1.0));
          d_trace = std::max(d_trace, std::abs(dyad_trace(dy).imag()));

          const auto f = build_fock(src, suggested_n_max(std::max(a, 1.0)));
          d_norm = std::max(
              d_norm, rel_dev(f.norm_prefactor_sq, src.norm_sq()));
          const auto fe = t < 1.0 ? apply_loss_to_fock(f, t, t)
                                  : fock_pure_ensemble(f);

          const auto ana = as_array(moment_set(src, link));
          const auto dya = as_array(dyad_moment_set(dy));
          const auto foc = as_array(fock_moment_set(fe));
          for (int i = 0; i < 7; ++i) {
            d_mom_dyad = std::max(d_mom_dyad, rel_dev(ana[i], dya[i]));
            d_mom_fock = std::max(d_mom_fock, rel_dev(ana[i], foc[i]));
            d_dyad_fock = std::max(d_dyad_fock, rel_dev(dya[i], foc[i]));
          }

          const auto Va = covariance_matrix(src, link);
          const auto Vd = dyad_covariance(dy);
          const auto Vf = fock_covariance(fe);
          for (int i = 0; i < 16; ++i) {
            d_cov_dyad = std::max(d_cov_dyad, rel_dev(Va.v[i], Vd.v[i]));
            d_cov_fock = std::max(d_cov_fock, rel_dev(Va.v[i], Vf.v[i]));
          }

          // Semigroup: loss(t*0.9) == loss(0.9) after loss(t).
          const auto two_step = apply_loss_to_dyads(dy, 0.9, 0.9);
          const auto one_step =
              apply_loss_to_dyads(build_dyads(src), 0.9 * t, 0.9 * t);
          const auto m2 = as_array(dyad_moment_set(two_step));
          const auto m1 = as_array(dyad_moment_set(one_step));
          for (int i = 0; i < 7; ++i)
            d_semi = std::max(d_semi, rel_dev(m2[i], m1[i]));

          // Cloner shifts against the ancilla-expansion oracle.
          for (double g : {-0.5, 0.0, 1.0}) {
            const auto cl = ClonerParams::make(g);
            const auto mc = apply_cloner_to_moments(moment_set(src, link), cl);
            const std::array<C, 7> ora = {
                cloner_moment(dy, cl, 1, 0, 0, 0), cloner_moment(dy, cl, 0, 0, 1, 0),
                cloner_moment(dy, cl, 1, 0, 0, 1), cloner_moment(dy, cl, 1, 1, 0, 0),
                cloner_moment(dy, cl, 0, 0, 1, 1), cloner_moment(dy, cl, 1, 0, 1, 1),
                cloner_moment(dy, cl, 1, 1, 1, 1)};
            const auto got = as_array(mc);
            for (int i = 0; i < 7; ++i)
              d_cloner = std::max(d_cloner, rel_dev(got[i], ora[i]));
            d_wit = std::max(d_wit, rel_dev(witness_s(mc),
                                            witness_s_stable(src, link, cl)));
          }
          d_wit = std::max(
              d_wit, rel_dev(witness_s(dyad_moment_set(dy)),
                             witness_s_stable(src, link)));
        }
  std::vector<CheckRow> rows;
  auto push = [&](std::string id, double worst, double tol) {
    rows.push_back({std::move(id), worst, tol, worst <= tol});
  };
  push("dyad.trace-preserved", d_trace, 1e-12);
  push("fock.norm-prefactor-vs-closed-form", d_norm, 1e-10);
  push("moments.analytic-vs-dyad", d_mom_dyad, 1e-9);
  push("moments.analytic-vs-fock", d_mom_fock, 1e-8);
  push("moments.dyad-vs-fock", d_dyad_fock, 1e-8);
  push("covariance.analytic-vs-dyad", d_cov_dyad, 1e-9);
  push("covariance.analytic-vs-fock", d_cov_fock, 1e-8);
  push("loss.semigroup", d_semi, 1e-12);
  push("cloner.analytic-vs-ancilla-expansion", d_cloner, 1e-11);
  push("witness-s.determinant-vs-factored", d_wit, 1e-6);
  return rows;
}

}  // namespace ecsqkd::oracle
