#pragma once
// Distance analysis of the covariance witness W(d): numeric root finding on
// the exact pipeline and the family of closed-form crossing distances used
// for comparison.  The closed forms are evaluated verbatim; whenever a
// logarithm argument is non-positive the corresponding crossing does not
// exist and the field is left empty.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "ecsqkd/covariance.hpp"
#include "ecsqkd/model.hpp"

namespace ecsqkd {

enum class SplitMode { symmetric, source_at_alice };

inline LinkParams link_for(double K1, double K2, SplitMode split,
                           double d_total) {
  if (split == SplitMode::symmetric)
    return LinkParams::make(K1, d_total / 2, K2, d_total / 2);
  return LinkParams::make(K1, 0.0, K2, d_total);
}

struct CrossingProblem {
  SourceParams src;
  double K1 = kDefaultFibreK;
  double K2 = kDefaultFibreK;
  SplitMode split = SplitMode::symmetric;
  std::optional<ClonerParams> cloner;
  double lambda = -10.0;
  CovarianceModel model = CovarianceModel::witness_layout;
};

inline double w_at(const CrossingProblem& p, double d_total) {
  CovarianceMatrix V =
      covariance_matrix(p.src, link_for(p.K1, p.K2, p.split, d_total), p.model);
  if (p.cloner) V = apply_cloner_to_covariance(V, *p.cloner);
  return witness_w(V);
}

// First solution of W(d) = lambda on [0, d_max]: coarse scan for a sign
// change of W - lambda followed by bisection down to ~1e-9 km, which pins
// |W(d*) - lambda| to ~1e-9 for the O(1) slopes this family produces.
inline std::optional<double> crossing_distance_numeric(const CrossingProblem& p,
                                                       double d_max,
                                                       int coarse = 512) {
  if (!(d_max > 0) || coarse < 2)
    throw std::invalid_argument("crossing_distance_numeric: bad search range");
  auto f = [&](double d) { return w_at(p, d) - p.lambda; };
  double lo = 0.0, flo = f(lo);
  if (!std::isfinite(flo))
    throw std::runtime_error("crossing search: non-finite witness value");
  if (flo == 0.0) return 0.0;
  double hi = lo;
  bool bracketed = false;
  for (int i = 1; i <= coarse; ++i) {
    hi = d_max * static_cast<double>(i) / coarse;
    const double fhi = f(hi);
    if (!std::isfinite(fhi))
      throw std::runtime_error("crossing search: non-finite witness value");
    if (fhi == 0.0) return hi;
    if ((flo < 0) != (fhi < 0)) {
      bracketed = true;
      break;
    }
    lo = hi;
    flo = fhi;
  }
  if (!bracketed) return std::nullopt;
  for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0) == (flo < 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Closed-form family (alpha = beta assumed by these expressions):
//   d0              no-cloner zero of W
//   F(gamma)        = (15/16)(1 - e^{-2 gamma}/15)
//   d_gamma         zero of W with cloner asymmetry gamma
//   d_gamma_lambda  solution of W = lambda with cloner
//   delta_d         d_gamma_lambda - d_lambda (cloner-induced shift)
//   gamma0          -ln(15)/2, the asymmetry below which d_gamma ceases
//                   to exist in this closed-form family.
struct ClosedForms {
  double gamma0 = -0.5 * std::log(15.0);
  double F = 0.0;
  std::optional<double> d0;
  std::optional<double> d_gamma;
  std::optional<double> d_gamma_lambda;
  std::optional<double> delta_d;
};

inline ClosedForms crossing_closed_forms(const SourceParams& s, double K,
                                         std::optional<double> gamma,
                                         double lambda) {
  if (!(K > 0)) throw std::invalid_argument("closed forms need K > 0");
  ClosedForms out;
  const double sp = std::sin(s.phi);
  const double as = s.alpha * sp;
  auto log_or_none = [&](double arg) -> std::optional<double> {
    if (!(arg > 0)) return std::nullopt;
    const double d = (2.0 / K) * std::log(arg);
    return d >= 0 ? std::optional<double>(d) : std::nullopt;
  };
  out.d0 = log_or_none(std::sqrt(8.0 / 15.0) * as);
  if (gamma) {
    const double F = (15.0 / 16.0) * (1.0 - std::exp(-2.0 * *gamma) / 15.0);
    out.F = F;
    if (1.0 - std::exp(-2.0 * *gamma) / 15.0 > 0) {
      out.d_gamma = log_or_none(std::sqrt(8.0 / 15.0) * as * as /
                                (1.0 - std::exp(-2.0 * *gamma) / 15.0));
      if (F != 0.0) {
        const double denom = F - lambda / F;
        if (denom > 0) {
          out.d_gamma_lambda = log_or_none(as * as / denom);
          const double num = 15.0 / 16.0 - (16.0 / 15.0) * lambda;
          if (num > 0) out.delta_d = (2.0 / K) * std::log(num / denom);
        }
      }
    }
  }
  return out;
}

struct CrossingReport {
  std::optional<double> d_numeric;
  std::optional<double> gamma;
  double lambda = -10.0;
  ClosedForms closed;
};

inline CrossingReport crossing_report(const CrossingProblem& p, double d_max,
                                      int coarse = 512) {
  CrossingReport r;
  r.d_numeric = crossing_distance_numeric(p, d_max, coarse);
  r.lambda = p.lambda;
  if (p.cloner) r.gamma = p.cloner->gamma;
  r.closed = crossing_closed_forms(p.src, p.K1, r.gamma, p.lambda);
  return r;
}

}  // namespace ecsqkd
