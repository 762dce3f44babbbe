// Command-line front end.  Exit codes: 0 success (including "no crossing
// found"), 1 configuration/usage errors, 2 numeric trouble (degenerate
// states, truncation failures, I/O errors, oracle disagreement).

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "ecsqkd/sweeps.hpp"

namespace {

using namespace ecsqkd;

void print_crossing_report(const CrossingReport& r, std::ostream& os) {
  auto show = [&](const char* name, const std::optional<double>& v) {
    os << "  " << name << ": ";
    if (v)
      os << *v << " km\n";
    else
      os << "none\n";
  };
  os << "crossing report (lambda = " << r.lambda;
  if (r.gamma) os << ", gamma = " << *r.gamma;
  os << ")\n";
  show("numeric crossing distance", r.d_numeric);
  show("closed-form d0 (no cloner)", r.closed.d0);
  if (r.gamma) {
    show("closed-form d(gamma)", r.closed.d_gamma);
    show("closed-form d(gamma, lambda)", r.closed.d_gamma_lambda);
    show("closed-form delta-d", r.closed.delta_d);
  }
  os << "  gamma0 (closed-form existence bound): " << r.closed.gamma0 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entangled coherent-state QKD link analysis"};
  app.set_config("--config", "", "flat key=value parameter file");
  app.allow_config_extras(false);

  SweepConfig cfg;
  double beta = -1.0, gamma = 0.0;
  std::string split = "symmetric";

  app.add_option("--alpha", cfg.alpha, "source amplitude, Alice mode");
  app.add_option("--beta", beta, "source amplitude, Bob mode (default: alpha)");
  app.add_option("--phi", cfg.phi, "branch phase offset [rad]");
  app.add_option("--theta", cfg.theta, "superposition phase [rad], default pi");
  app.add_option("--K", cfg.K, "fibre loss coefficient [1/km]");
  app.add_option("--gamma", gamma, "cloner asymmetry (enables cloner columns)");
  app.add_option("--lambda", cfg.lambda, "witness threshold for crossings");
  app.add_option("--d-max", cfg.d_max, "sweep/search range [km]");
  app.add_option("--steps", cfg.steps, "number of sweep points");
  app.add_option("--split", split,
                 "fibre split: symmetric | source-at-alice")
      ->check(CLI::IsMember({"symmetric", "source-at-alice"}));
  app.add_option("--out", cfg.out, "output file (default: stdout; oracle-check: NOTES)");
  app.add_option("--threads", cfg.threads, "worker threads for sweeps");

  auto* wc = app.add_subcommand("witness-curve",
                                "sweep the moment witness S(d) and covariance "
                                "witness W(d) over distance");
  auto* cr = app.add_subcommand(
      "crossing", "locate the first W(d) = lambda crossing distance");
  auto* kr = app.add_subcommand(
      "keyrate", "Gaussian informations I_AB, I_BE and key-rate margin vs distance");
  auto* oc = app.add_subcommand(
      "oracle-check", "adjudicate closed forms against brute-force oracles; writes NOTES");
  auto* dd = app.add_subcommand(
      "delta-d", "cloner-induced shift of the lambda crossing; solves gamma for 1 m / 0.5 m");
  for (auto* s : {wc, cr, kr, oc, dd}) s->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  }

  if (app.count("--beta")) cfg.beta = beta;
  if (app.count("--gamma")) cfg.gamma = gamma;
  cfg.alpha_explicit = app.count("--alpha") > 0;
  cfg.split = split == "symmetric" ? SplitMode::symmetric
                                   : SplitMode::source_at_alice;

  try {
    if (wc->parsed()) {
      cfg.scenario = Scenario::witness_curve;
      write_table(run_witness_curve(cfg), cfg.out, std::cout);
    } else if (kr->parsed()) {
      cfg.scenario = Scenario::keyrate;
      write_table(run_keyrate(cfg), cfg.out, std::cout);
    } else if (cr->parsed()) {
      cfg.scenario = Scenario::crossing;
      auto [report, table] = run_crossing(cfg);
      print_crossing_report(report, std::cout);
      if (!cfg.out.empty()) write_table(table, cfg.out, std::cout);
    } else if (dd->parsed()) {
      cfg.scenario = Scenario::delta_d;
      write_table(run_delta_d(cfg), cfg.out, std::cout);
    } else if (oc->parsed()) {
      cfg.scenario = Scenario::oracle_check;
      const OracleCheckResult r = run_oracle_check(cfg);
      const std::string path = cfg.out.empty() ? "NOTES" : cfg.out;
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open output file: " + path);
      f << r.notes;
      if (!f.good()) throw std::runtime_error("write failed: " + path);
      for (const auto& row : r.rows)
        std::cout << (row.pass ? "ok   " : "FAIL ") << row.id
                  << "  worst=" << row.worst << " tol=" << row.tol << "\n";
      std::cout << (r.pass ? "oracle check: VERIFIED" : "oracle check: FAILED")
                << " (details: " << path << ")\n";
      if (!r.pass) return 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numeric/runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
