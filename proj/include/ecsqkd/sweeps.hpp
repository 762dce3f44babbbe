#pragma once
// Deterministic sweep runners behind the CLI: distance curves for the two
// witnesses, crossing reports, key-rate curves, the cloner-shift solver,
// and the oracle adjudication run that (re)generates NOTES.  CSV output is
// byte-stable: fixed %.17g formatting, "-0" normalized to "0", serial and
// threaded execution produce identical bytes.

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ecsqkd/covariance.hpp"
#include "ecsqkd/crossing.hpp"
#include "ecsqkd/infotheory.hpp"
#include "ecsqkd/model.hpp"
#include "ecsqkd/moments.hpp"
#include "ecsqkd/oracles.hpp"

namespace ecsqkd {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Scenario { witness_curve, crossing, keyrate, oracle_check, delta_d };

struct SweepConfig {
  Scenario scenario = Scenario::witness_curve;
  double alpha = 1000.0;
  std::optional<double> beta;
  double phi = 0.1;
  double theta = kPi;
  double K = kDefaultFibreK;
  std::optional<double> gamma;
  double lambda = -10.0;
  double d_max = -1.0;  // <0: scenario default
  int steps = 200;
  SplitMode split = SplitMode::symmetric;
  std::string out;  // empty: stdout (oracle_check: "NOTES")
  int threads = 1;
  bool alpha_explicit = false;

  SourceParams source() const {
    try {
      return SourceParams::make(alpha, phi, theta, beta.value_or(-1.0));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  void validate() const {
    if (!(K > 0.0)) throw ConfigError("K must be > 0");
    if (steps < 2) throw ConfigError("steps must be >= 2");
    if (threads < 1 || threads > 64)
      throw ConfigError("threads must lie in [1, 64]");
    if (d_max > 0 && !(d_max < 1e9)) throw ConfigError("d-max too large");
    source();  // validates alpha/beta/phi/theta
    if ((scenario == Scenario::keyrate || scenario == Scenario::delta_d) &&
        !gamma)
      throw ConfigError("this scenario requires --gamma");
    if (gamma) ClonerParams::make(*gamma);  // range check
  }
  double default_d_max() const {
    const double amp = std::max(alpha, beta.value_or(alpha));
    const double photon_limit =
        amp > 1.0 ? 2.0 * std::log(amp) / K : 0.0;  // ~alpha^2 -> 1 photon
    return std::max(100.0, 3.0 * photon_limit);
  }
  double resolved_d_max() const { return d_max > 0 ? d_max : default_d_max(); }
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const size_t nt = std::min<size_t>(threads, n);
  for (size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (size_t i = t; i < n; i += nt) fn(i);
    });
  for (auto& th : pool) th.join();
}

inline std::string format_csv_value(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit_csv(const Table& t, std::ostream& os) {
  for (size_t i = 0; i < t.header.size(); ++i)
    os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << format_csv_value(row[i]);
    os << '\n';
  }
}

inline std::string csv_string(const Table& t) {
  std::ostringstream os;
  emit_csv(t, os);
  return os.str();
}

inline void write_table(const Table& t, const std::string& path,
                        std::ostream& fallback) {
  if (path.empty()) {
    emit_csv(t, fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  emit_csv(t, f);
  if (!f.good()) throw std::runtime_error("write failed: " + path);
}

// --------------------------------------------------------------------------
// Scenario runners
// --------------------------------------------------------------------------

inline Table run_witness_curve(const SweepConfig& cfg) {
  cfg.validate();
  const SourceParams src = cfg.source();
  const double dm = cfg.resolved_d_max();
  const bool with_cloner = cfg.gamma.has_value();
  Table t;
  t.header = {"d", "s", "w"};
  if (with_cloner) {
    t.header.push_back("s_cloner");
    t.header.push_back("w_cloner");
  }
  t.rows.assign(cfg.steps, {});
  parallel_for(cfg.steps, cfg.threads, [&](size_t i) {
    const double d = dm * double(i) / (cfg.steps - 1);
    const LinkParams link = link_for(cfg.K, cfg.K, cfg.split, d);
    std::vector<double> row;
    row.push_back(d);
    row.push_back(witness_s_stable(src, link));
    const CovarianceMatrix V =
        covariance_matrix(src, link, CovarianceModel::witness_layout);
    row.push_back(witness_w(V));
    if (with_cloner) {
      const ClonerParams cl = ClonerParams::make(*cfg.gamma);
      row.push_back(witness_s_stable(src, link, cl));
      row.push_back(witness_w(apply_cloner_to_covariance(V, cl)));
    }
    t.rows[i] = std::move(row);
  });
  return t;
}

inline Table run_keyrate(const SweepConfig& cfg) {
  cfg.validate();
  const SourceParams src = cfg.source();
  const ClonerParams cl = ClonerParams::make(*cfg.gamma);
  const double dm = cfg.resolved_d_max();
  Table t;
  t.header = {"d", "i_ab", "i_be", "kappa"};
  t.rows.assign(cfg.steps, {});
  parallel_for(cfg.steps, cfg.threads, [&](size_t i) {
    const double d = dm * double(i) / (cfg.steps - 1);
    const LinkParams link = link_for(cfg.K, cfg.K, cfg.split, d);
    const InfoReport r = eve_information_and_key_rate(src, link, cl);
    t.rows[i] = {d, r.i_ab, r.i_be, r.kappa};
  });
  return t;
}

inline CrossingProblem crossing_problem(const SweepConfig& cfg) {
  CrossingProblem p;
  p.src = cfg.source();
  p.K1 = p.K2 = cfg.K;
  p.split = cfg.split;
  p.lambda = cfg.lambda;
  if (cfg.gamma) p.cloner = ClonerParams::make(*cfg.gamma);
  return p;
}

inline double crossing_default_d_max(const SweepConfig& cfg) {
  // Generous default: the frozen cross-covariance decays like e^{-K d/2},
  // so crossings sit near (2/K) ln(alpha beta sin^2 phi / threshold).
  const double ab = cfg.alpha * cfg.beta.value_or(cfg.alpha);
  const double sp = std::sin(cfg.phi);
  const double c0 = ab * sp * sp;
  const double base = c0 > 1.0 ? (2.0 / cfg.K) * std::log(c0) : 0.0;
  return std::max(200.0, base + 200.0);
}

inline std::pair<CrossingReport, Table> run_crossing(const SweepConfig& cfg) {
  cfg.validate();
  const CrossingProblem p = crossing_problem(cfg);
  const double dm = cfg.d_max > 0 ? cfg.d_max : crossing_default_d_max(cfg);
  const CrossingReport r = crossing_report(p, dm);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto opt = [&](const std::optional<double>& o) { return o ? *o : nan; };
  Table t;
  t.header = {"d",        "gamma",          "lambda",  "d0_closed",
              "d_gamma_closed", "d_gamma_lambda_closed", "delta_d_closed",
              "gamma0"};
  t.rows = {{opt(r.d_numeric), r.gamma ? *r.gamma : nan, r.lambda,
             opt(r.closed.d0), opt(r.closed.d_gamma),
             opt(r.closed.d_gamma_lambda), opt(r.closed.delta_d),
             r.closed.gamma0}};
  return {r, t};
}

// Cloner-induced shift of the W = lambda crossing, numerically.  Missing
// crossings count as an infinite delay, which keeps the bisection for
// gamma(target) well-ordered.
inline double delta_d_numeric(const CrossingProblem& base, double gamma,
                              double d_max, int coarse = 1024) {
  CrossingProblem with = base;
  with.cloner = ClonerParams::make(gamma);
  CrossingProblem without = base;
  without.cloner.reset();
  const auto d0 = crossing_distance_numeric(without, d_max, coarse);
  if (!d0)
    throw std::domain_error("delta-d: no cloner-free crossing in range");
  const auto dg = crossing_distance_numeric(with, d_max, coarse);
  if (!dg) return std::numeric_limits<double>::infinity();
  return *dg - *d0;
}

inline std::optional<double> solve_gamma_for_delta_d(
    const CrossingProblem& base, double target_km, double d_max,
    double glo = -1.2, double ghi = 14.0) {
  auto f = [&](double g) { return delta_d_numeric(base, g, d_max) - target_km; };
  double flo = f(glo), fhi = f(ghi);
  if (!(flo > 0) || !(fhi < 0)) return std::nullopt;  // not bracketed
  for (int i = 0; i < 90 && ghi - glo > 1e-10; ++i) {
    const double mid = 0.5 * (glo + ghi);
    if (f(mid) > 0)
      glo = mid;
    else
      ghi = mid;
  }
  return 0.5 * (glo + ghi);
}

// Rows: the queried gamma (if given) plus the asymmetries reproducing
// |delta_d| of 1 m and 0.5 m.  Columns: the shift itself (km), gamma, the
// cloner noise ratio r = e^{4 gamma}, and lambda.
inline Table run_delta_d(const SweepConfig& cfg) {
  cfg.validate();
  const CrossingProblem p0 = crossing_problem(cfg);
  CrossingProblem p = p0;
  p.cloner.reset();
  const double dm = cfg.d_max > 0 ? cfg.d_max : crossing_default_d_max(cfg);
  Table t;
  t.header = {"d", "gamma", "r", "lambda"};
  if (cfg.gamma) {
    const double dd = delta_d_numeric(p, *cfg.gamma, dm);
    t.rows.push_back(
        {dd, *cfg.gamma, ClonerParams::make(*cfg.gamma).noise_ratio(),
         cfg.lambda});
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double target : {1e-3, 5e-4}) {
    const auto g = solve_gamma_for_delta_d(p, target, dm);
    if (g)
      t.rows.push_back(
          {target, *g, ClonerParams::make(*g).noise_ratio(), cfg.lambda});
    else
      t.rows.push_back({target, nan, nan, cfg.lambda});
  }
  return t;
}

// --------------------------------------------------------------------------
// Oracle adjudication + NOTES
// --------------------------------------------------------------------------

struct OracleCheckResult {
  std::vector<oracle::CheckRow> rows;
  bool pass = false;
  std::string notes;  // full NOTES text
};

namespace detail {

inline std::string fmt(double v, int prec = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

inline double worst_moment_dev(const MomentSet& got, const MomentSet& ref) {
  const auto g = oracle::as_array(got), r = oracle::as_array(ref);
  double w = 0;
  for (int i = 0; i < 7; ++i) w = std::max(w, oracle::rel_dev(g[i], r[i]));
  return w;
}

}  // namespace detail

inline OracleCheckResult run_oracle_check(const SweepConfig& cfg) {
  if (cfg.alpha_explicit && cfg.alpha > 3.0)
    throw ConfigError("oracle-check: alpha must be <= 3 (Fock-basis cost)");
  oracle::AgreementGrid grid;
  if (cfg.alpha_explicit) grid.alphas.push_back(cfg.alpha);

  OracleCheckResult res;
  res.rows = oracle::run_route_agreement(grid);
  res.pass = true;
  for (const auto& r : res.rows) res.pass = res.pass && r.pass;

  std::ostringstream n;
  n << "adjudication notes: closed forms vs brute-force oracles\n"
    << "regenerate with: ecsqkd oracle-check\n"
    << "\n"
    << "section 1: route agreement (gated; worst relative deviation, floor 1)\n";
  for (const auto& r : res.rows)
    n << "  [" << r.id << "] worst=" << detail::fmt(r.worst, 3)
      << " tol=" << detail::fmt(r.tol, 2) << (r.pass ? "  ok" : "  FAIL")
      << "\n";

  n << "\nsection 2: comparison forms (informational; production pipeline "
       "uses the oracle-exact forms)\n";
  {
    // Sign-flipped loss exponent: for a moment with (l+m)=0, (n+p)=2 the
    // variant exponent -K/2 ((l+m) d1 - (n+p) d2) amplifies with distance.
    const auto src = SourceParams::make(1.0, 0.1, 0.0);
    const double d2 = 10.0, K = kDefaultFibreK;
    const auto dy = oracle::apply_loss_to_dyads(oracle::build_dyads(src), 1.0,
                                                std::exp(-K * d2 / 2));
    const double ora = oracle::dyad_moment(dy, 0, 0, 1, 1).real();
    const double n2src = source_moments(src).num2;
    const double variant = n2src * std::exp(+K * d2);
    n << "  [loss.exponent-sign-variant] <a2†a2> at d2=10km: oracle="
      << detail::fmt(ora) << " sign-flipped-exponent=" << detail::fmt(variant)
      << " (amplifies; rejected)\n";
  }
  {
    double worst_m = 0, worst_iso = 0, worst_dec = 0;
    for (double a : {1.0, 2.0})
      for (double phi : {0.1, 0.5})
        for (double th : {0.0, kPi}) {
          const auto src = SourceParams::make(a, phi, th);
          const double t = 0.5, K = kDefaultFibreK;
          const double d = -2.0 * std::log(t) / K;
          const auto link = LinkParams::make(K, d, K, d);
          const auto dy =
              oracle::apply_loss_to_dyads(oracle::build_dyads(src), t, t);
          worst_m = std::max(
              worst_m,
              detail::worst_moment_dev(
                  moment_set(src, link, MomentModel::decayed_overlap),
                  oracle::dyad_moment_set(dy)));
          const auto Vd = oracle::dyad_covariance(dy);
          const auto Vi =
              covariance_matrix(src, link, CovarianceModel::witness_layout);
          const auto Vc =
              covariance_matrix(src, link, CovarianceModel::decayed_overlap);
          for (int i = 0; i < 16; ++i) {
            worst_iso = std::max(worst_iso, std::abs(Vi.v[i] - Vd.v[i]));
            worst_dec = std::max(worst_dec, std::abs(Vc.v[i] - Vd.v[i]));
          }
        }
    n << "  [moments.decayed-overlap-rule] worst rel dev vs oracle at t=0.5: "
      << detail::fmt(worst_m, 3)
      << " (interference factor is frozen under loss, not re-evaluated)\n"
      << "  [covariance.equal-qp-layout] worst |entry dev| vs oracle: "
      << detail::fmt(worst_iso, 3)
      << " (p-quadrature variances of this state differ from q)\n"
      << "  [covariance.decayed-overlap-rule] worst |entry dev| vs oracle: "
      << detail::fmt(worst_dec, 3) << "\n";
  }
  {
    const auto src = SourceParams::make(1.0, 0.1, 0.0);
    const auto dy = oracle::build_dyads(src);
    const auto cl = ClonerParams::make(0.0);
    const double before = oracle::dyad_moment(dy, 1, 0, 1, 1).real();
    const double after = oracle::cloner_moment(dy, cl, 1, 0, 1, 1).real();
    n << "  [cloner.triple-moment-shift] <a1 a2†a2> gains kappa^2 <a1>: "
      << detail::fmt(before) << " -> " << detail::fmt(after)
      << " at gamma=0 (a claim of invariance would be off by "
      << detail::fmt(after - before) << ")\n";
  }
  {
    n << "  [witness-s.phase-sign] S(dyad det) at phi=0.5:";
    for (double th : {0.0, kPi}) {
      n << (th == 0.0 ? "  theta=0:" : "  theta=pi:");
      for (double a : {0.5, 1.0, 2.0}) {
        const auto src = SourceParams::make(a, 0.5, th);
        const double s =
            witness_s(oracle::dyad_moment_set(oracle::build_dyads(src)));
        n << " " << detail::fmt(s, 3);
      }
    }
    n << " (negative-at-all-alpha branch is theta=0)\n";
  }
  {
    const auto V = covariance_matrix(SourceParams::make(1.0, 0.1, kPi),
                                     LinkParams{});
    n << "  [covariance.cross-block-sign] at alpha=1 phi=0.1 theta=pi d=0: "
      << "Cov(q1,q2)=" << detail::fmt(V.at(0, 2)) << " Cov(p1,p2)="
      << detail::fmt(V.at(1, 3)) << " det C=" << detail::fmt(V.det_c(), 3)
      << " (both cross-covariances negative, so det C > 0 whenever the "
         "branch overlap is nonzero; a claimed non-positive det C holds "
         "only in the vanishing-overlap limit)\n";
  }

  n << "\nsection 3: closed-form crossing family vs numeric pipeline "
       "(equal-variance layout, frozen overlap)\n";
  {
    SweepConfig c;
    c.alpha = 100.0;
    c.phi = 0.1;
    c.theta = kPi;
    c.lambda = 0.0;
    CrossingProblem p = crossing_problem(c);
    const double dm = crossing_default_d_max(c);
    const auto dnum = crossing_distance_numeric(p, dm);
    const auto cf = crossing_closed_forms(p.src, c.K, std::nullopt, 0.0);
    n << "  [crossing.closed-form.d0] alpha=100 phi=0.1 lambda=0: numeric="
      << (dnum ? detail::fmt(*dnum) : "none")
      << " closed=" << (cf.d0 ? detail::fmt(*cf.d0) : "none") << " km\n";
    p.cloner = ClonerParams::make(1.0);
    const auto dg = crossing_distance_numeric(p, dm);
    const auto cfg1 = crossing_closed_forms(p.src, c.K, 1.0, 0.0);
    n << "  [crossing.closed-form.d-gamma] gamma=1: numeric="
      << (dg ? detail::fmt(*dg) : "none")
      << " closed=" << (cfg1.d_gamma ? detail::fmt(*cfg1.d_gamma) : "none")
      << " km\n";
  }
  {
    // Existence bound for the crossing in gamma.  The far-distance witness
    // value is (15/16)(1 - (1 + e^{-2 gamma})^2 / 16), so a crossing of the
    // level lambda exists (for long enough fibre) iff that value exceeds
    // lambda; the closed-form family instead gates existence at gamma0.
    SweepConfig c;
    c.alpha = 1e5;
    CrossingProblem p = crossing_problem(c);
    const double dm = 2.0 * photon_decay_distance(c.alpha, c.K, 1.0);
    auto exists = [&](double g, double lambda) {
      CrossingProblem q = p;
      q.cloner = ClonerParams::make(g);
      q.lambda = lambda;
      return crossing_distance_numeric(q, dm, 1024).has_value();
    };
    auto bound = [](double lambda) {
      // solve (15/16)(1 - (1+x)^2/16) = lambda for x = e^{-2 gamma}
      const double x = std::sqrt(16.0 * (1.0 - lambda * 16.0 / 15.0)) - 1.0;
      return -0.5 * std::log(x);
    };
    n << "  [crossing.gamma-existence-bound] alpha=1e5 window=" << detail::fmt(dm)
      << " km: at lambda=-10 crossing " << (exists(-1.35, -10) ? "exists" : "none")
      << " at gamma=-1.35, " << (exists(-1.0, -10) ? "exists" : "none")
      << " at gamma=-1 (asymptote bound gamma>" << detail::fmt(bound(-10.0), 4)
      << "); at lambda=0 crossing " << (exists(-1.0, 0.0) ? "exists" : "none")
      << " at gamma=-1, " << (exists(0.0, 0.0) ? "exists" : "none")
      << " at gamma=0 (bound gamma>" << detail::fmt(bound(0.0), 4)
      << "); closed-form bound gamma0=" << detail::fmt(-0.5 * std::log(15.0), 4)
      << " matches the default-level bound, not the zero-level one\n";
  }
  {
    SweepConfig c;  // defaults: alpha=1000, phi=0.1, lambda=-10
    CrossingProblem p = crossing_problem(c);
    const double dm = crossing_default_d_max(c);
    const double dd = delta_d_numeric(p, 1.0, dm);
    const auto cf = crossing_closed_forms(p.src, c.K, 1.0, c.lambda);
    n << "  [crossing.closed-form.delta-d] gamma=1 lambda=-10: numeric="
      << detail::fmt(dd)
      << " closed=" << (cf.delta_d ? detail::fmt(*cf.delta_d) : "none")
      << " km (opposite sign: numeric shift is a delay)\n";
    const auto g1 = solve_gamma_for_delta_d(p, 1e-3, dm);
    const auto g2 = solve_gamma_for_delta_d(p, 5e-4, dm);
    n << "  [delta-d.reference-pairs]";
    if (g1)
      n << " delta_d=1m -> gamma=" << detail::fmt(*g1)
        << " r=" << detail::fmt(ClonerParams::make(*g1).noise_ratio(), 3);
    if (g2)
      n << "; delta_d=0.5m -> gamma=" << detail::fmt(*g2)
        << " r=" << detail::fmt(ClonerParams::make(*g2).noise_ratio(), 3);
    const double g22 = std::log(2.2) / 4.0;
    const double g86 = std::log(8.6) / 4.0;
    n << "; reference pairings put delta_d=1m at r=2.2 and 0.5m at r=8.6,"
      << " but measured delta_d at r=2.2 (gamma=" << detail::fmt(g22)
      << ") is " << detail::fmt(delta_d_numeric(p, g22, dm))
      << " km and at r=8.6 (gamma=" << detail::fmt(g86) << ") is "
      << detail::fmt(delta_d_numeric(p, g86, dm)) << " km\n";
  }

  n << "\nsection 4: scalar comparison forms\n";
  {
    n << "  [entropy.alt-form] h_alt(1/4)=" << detail::fmt(entropy_h_alt(0.25))
      << " (production h(1/4)=0 exactly); h_alt(3/4)="
      << detail::fmt(entropy_h_alt(0.75))
      << " vs h(3/4)=" << detail::fmt(entropy_h(0.75)) << "\n";
    const auto src = SourceParams::make(2.0, 0.3, 0.0);
    const auto link = LinkParams::make(kDefaultFibreK, 10, kDefaultFibreK, 10);
    const auto V = covariance_matrix(src, link);
    const auto dpm = symplectic_eigenvalues(V);
    const auto alt = symplectic_eigenvalues_alt(V);
    n << "  [symplectic.alt-form] sample V: closed (d-,d+)=("
      << detail::fmt(dpm.d_minus) << "," << detail::fmt(dpm.d_plus)
      << ") nested-radical variant=(" << detail::fmt(alt.d_minus) << ","
      << detail::fmt(alt.d_plus) << ")\n";
    const auto s1 = SourceParams::make(1000.0, 0.1, kPi, 250.0);
    const auto s2 = SourceParams::make(500.0, 0.1, kPi);
    const auto l50 = LinkParams::symmetric(kDefaultFibreK, 50.0);
    const auto cl = ClonerParams::make(0.5);
    n << "  [info.amplitude-ordering] I_AB at d=50, gamma=0.5: "
         "alpha=1000,beta=250 -> "
      << detail::fmt(eve_information_and_key_rate(s1, l50, cl).i_ab)
      << " nats; alpha=beta=500 -> "
      << detail::fmt(eve_information_and_key_rate(s2, l50, cl).i_ab)
      << " nats (same geometric mean)\n";
  }

  res.notes = n.str();
  return res;
}

}  // namespace ecsqkd
