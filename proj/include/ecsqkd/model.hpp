#pragma once
// Two-mode entangled coherent-state link model: source parameters, fibre
// loss, and the asymmetric Gaussian cloner used as the eavesdropping model.
//
// Quadrature convention throughout: q = (a + a†)/2, p = (a − a†)/(2i),
// so the vacuum variance is 1/4 and [q, p] = i/2.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace ecsqkd {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultFibreK = 0.046;  // km^-1  (~3 dB per 15 km)
inline constexpr double kVacuumVar = 0.25;
inline constexpr double kMaxAmplitude = 1.0e6;

using Amplitude = std::complex<double>;

// Raised when a Fock-space truncation cannot represent the requested state
// to the demanded tail mass.  CLI maps this (and other numeric trouble) to
// exit code 2, while configuration errors map to exit code 1.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Source emits (N/sqrt2)(|a e^{+i phi}, b e^{-i phi}> + e^{i theta}|a e^{-i phi}, b e^{+i phi}>)
// with real a = alpha (mode 1, Alice) and b = beta (mode 2, Bob).
// Every moment of this family is real; the interference terms enter through
//   E   = exp(-2 (alpha^2 + beta^2) sin^2 phi)   branch overlap magnitude
//   psi = theta - (alpha^2 - beta^2) sin 2phi    joint interference phase
// and the normalization is |N|^2 = 1 / (1 + E cos psi).
struct SourceParams {
  double alpha = 1.0;
  double phi = 0.1;
  double theta = kPi;
  double beta = 1.0;

  static SourceParams make(double alpha, double phi, double theta,
                           double beta = -1.0) {
    if (beta < 0.0) beta = alpha;
    if (!(alpha > 0.0) || alpha > kMaxAmplitude)
      throw std::invalid_argument("alpha must lie in (0, 1e6]");
    if (!(beta > 0.0) || beta > kMaxAmplitude)
      throw std::invalid_argument("beta must lie in (0, 1e6]");
    if (!(phi >= 0.0) || phi > kPi / 2 + 1e-12)
      throw std::invalid_argument("phi must lie in [0, pi/2]");
    if (!(theta >= -1e-12) || theta >= 2 * kPi)
      throw std::invalid_argument("theta must lie in [0, 2*pi)");
    SourceParams s{alpha, phi, theta, beta};
    if (s.norm_denom() <= 1e-14)
      throw std::invalid_argument(
          "degenerate state: branch superposition has vanishing norm "
          "(phi ~ 0 with theta ~ pi)");
    return s;
  }

  double log_branch_overlap() const {
    const double sp = std::sin(phi);
    return -2.0 * (alpha * alpha + beta * beta) * sp * sp;
  }
  double branch_overlap() const { return std::exp(log_branch_overlap()); }
  double interference_phase() const {
    return theta - (alpha * alpha - beta * beta) * std::sin(2.0 * phi);
  }
  double norm_denom() const {
    return 1.0 + branch_overlap() * std::cos(interference_phase());
  }
  double norm_sq() const { return 1.0 / norm_denom(); }
};

// One fibre per mode.  Amplitude transmittance t_j = exp(-K_j d_j / 2), so
// intensity decays as exp(-K_j d_j).
struct LinkParams {
  double K1 = kDefaultFibreK;
  double K2 = kDefaultFibreK;
  double d1 = 0.0;
  double d2 = 0.0;

  static LinkParams make(double K1, double d1, double K2, double d2) {
    if (!(K1 >= 0.0) || !(K2 >= 0.0))
      throw std::invalid_argument("fibre loss coefficients must be >= 0");
    if (!(d1 >= 0.0) || !(d2 >= 0.0))
      throw std::invalid_argument("fibre lengths must be >= 0");
    return LinkParams{K1, K2, d1, d2};
  }
  static LinkParams symmetric(double K, double d_total) {
    return make(K, d_total / 2, K, d_total / 2);
  }
  static LinkParams source_at_alice(double K, double d_total) {
    return make(K, 0.0, K, d_total);
  }

  double t1() const { return std::exp(-K1 * d1 / 2); }
  double t2() const { return std::exp(-K2 * d2 / 2); }
  // Product of the two intensity transmittances' square root: the factor by
  // which the comparison-model overlap exponent is shrunk.
  double joint_decay() const { return std::exp(-(K1 * d1 + K2 * d2) / 2); }
};

inline Amplitude propagate_amplitude(Amplitude a, double K, double d) {
  if (!(K >= 0.0) || !(d >= 0.0))
    throw std::invalid_argument("propagate_amplitude: K and d must be >= 0");
  return a * std::exp(-K * d / 2);
}

// Distance at which the surviving mean photon number alpha^2 e^{-K d}
// drops to N photons.  Requires alpha^2 >= N (equality gives 0 km).
inline double photon_decay_distance(double alpha, double K, double N) {
  if (!(alpha > 0.0) || !(K > 0.0) || !(N > 0.0))
    throw std::invalid_argument("photon_decay_distance: need alpha, K, N > 0");
  if (alpha * alpha < N)
    throw std::invalid_argument(
        "photon_decay_distance: alpha^2 < N, threshold never reached");
  return std::log(alpha * alpha / N) / K;
}

// 1 -> 2 asymmetric Gaussian cloner attached to Bob's mode.  gamma controls
// the split: Bob's clone picks up noise sigma_b^2 = e^{-2 gamma}/4 while
// Eve's picks up sigma_e^2 = e^{+2 gamma}/4; the product is 1/16 for every
// gamma and the noise ratio is r = e^{4 gamma}.  In operator form Bob's
// output is a_out = a_in - kappa (c + b†) with vacuum ancillas (b, c) and
// kappa = e^{-gamma}/sqrt(2); Eve's tap uses kappa_e = e^{+gamma}/sqrt(2).
struct ClonerParams {
  double gamma = 0.0;

  static ClonerParams make(double gamma) {
    if (!(std::abs(gamma) <= 350.0))
      throw std::invalid_argument("cloner gamma out of range (|gamma| <= 350)");
    return ClonerParams{gamma};
  }

  double xi() const { return gamma + 0.5 * std::log(2.0); }
  double kappa_sq() const { return std::exp(-2.0 * gamma) / 2.0; }
  double kappa_e_sq() const { return std::exp(2.0 * gamma) / 2.0; }
  double sigma_b_sq() const { return std::exp(-2.0 * gamma) / 4.0; }
  double sigma_e_sq() const { return std::exp(2.0 * gamma) / 4.0; }
  double noise_ratio() const { return std::exp(4.0 * gamma); }
};

}  // namespace ecsqkd
