#pragma once

// Characteristic matrix P^(theta)_{ij} = exp(i theta f_j) p_ij and its
// perturbation theory around theta = 0: principal eigenvalue, Perron
// projection derivatives by contour integration of the resolvent, and the
// cumulants of ln lambda(theta).

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "mkedge/chain_core.hpp"

namespace mkedge {

using Complex = std::complex<double>;

struct CharMatrix {
  double theta = 0.0;
  CMatrix M;
};

CharMatrix char_matrix(const ChainSpec& spec, double theta);

struct PrincipalEig {
  Complex lambda;
  CVector right;  // normalized with left . right = 1 and sum(left) = 1
  CVector left;
};

/// Top eigenvalue by modulus. Throws EigenvalueCollision when the two
/// largest moduli are within 1e-9 of each other.
PrincipalEig principal_eig(const CharMatrix& cm);

struct RadiusPoint {
  double theta;
  double r;
};

struct RadiusScan {
  std::vector<RadiusPoint> points;
  bool below_one_off_zero = true;  // r(theta) < 1 - 1e-10 at every theta != 0
  double max_off_zero = 0.0;       // max r over theta != 0
  double tail_max = 0.0;           // max r over the largest |theta| decade
};

RadiusScan spectral_radius_scan(const ChainSpec& spec, std::span<const double> grid);

struct CramerCheck {
  double limsup_estimate = 1.0;
  bool satisfied = false;
};

/// |hat mu_f(theta)| = |sum_j mu_j exp(i theta f_j)|.
double char_fn_modulus(const ChainSpec& spec, double theta);

/// Heuristic for limsup |hat mu_f| < 1: max of |hat mu_f| over the tail grid.
/// Finite discrete mu_f never satisfies it; the estimate only approaches 1
/// from below on a fine enough grid.
CramerCheck cramer_check(const ChainSpec& spec, std::span<const double> tail_grid);

struct ContourOptions {
  int nodes = 256;
  double delta = 0.0;  // radius of |zeta - 1| = delta; 0 selects (1 - gamma_erg) / 3
};

double contour_radius(const StationaryStructure& ss, const ContourOptions& opts);

/// P^(m)_{ij} = p_ij f_j^m for m = 0..k.
std::vector<Matrix> moment_matrices(const ChainSpec& spec, int k);

/// Taylor coefficients of the Perron projection P_1(theta) in (i theta)^m / m!,
/// m = 0..k, by trapezoidal quadrature of the resolvent Neumann series on
/// |zeta - 1| = delta.
std::vector<Matrix> proj_derivatives(const ChainSpec& spec, const StationaryStructure& ss,
                                     int k, const ContourOptions& opts = {});

/// Perron projection of P^(theta) itself, by contour integration of its
/// resolvent. Throws ContourTooClose when the contour does not isolate lambda.
CMatrix projector_at(const ChainSpec& spec, const StationaryStructure& ss, double theta,
                     const ContourOptions& opts = {});

struct MomentsCumulants {
  std::vector<double> moments;    // [0] = 1, [m] = mu_m
  std::vector<double> cumulants;  // [0] = 0, [m] = gamma_m
};

/// gamma_m = mu_m - sum_{j=1}^{m-1} C(m-1, j-1) gamma_j mu_{m-j}.
std::vector<double> cumulants_from_moments(std::span<const double> moments);

MomentsCumulants moments_and_cumulants(const ChainSpec& spec, const StationaryStructure& ss,
                                       std::span<const Matrix> proj_derivs, int k);

struct FdOptions {
  int richardson_levels = 4;
};

/// Cumulants gamma_1..gamma_k (index 0 unused) from central differences of
/// ln lambda(theta) at 0 with step h, refined by Richardson extrapolation over
/// h, h/2, h/4, ... Test oracle only.
std::vector<double> cumulant_crosscheck_fd(const ChainSpec& spec, int k, double h,
                                           const FdOptions& opts = {});

struct SpectralSummary {
  int order_k = 0;
  RowVector pi;
  std::vector<Matrix> moment_mats;
  std::vector<Matrix> proj_derivs;
  std::vector<double> moments_mu;
  std::vector<double> cumulants_gamma;
  double sigma = 0.0;
};

SpectralSummary summarize(const ChainSpec& spec, const StationaryStructure& ss, int k,
                          const ContourOptions& opts = {});

struct IterateBoundReport {
  double theta = 0.0;
  int n = 0;
  int trials = 0;
  double char_fn_modulus = 1.0;
  double bound = 1.0;
  double max_ratio = 0.0;
};

/// Samples `trials` vectors with sup-norm <= 1 and compares ||P^(theta)^n g||
/// to (1 - alpha^4 / (2 beta) (1 - |hat mu_f(theta)|^2))^{(n-1)/2}.
/// Throws BoundViolated when any ratio exceeds 1 + 1e-9.
IterateBoundReport iterate_bound_check(const ChainSpec& spec, const PsiBounds& pb, double theta,
                                       int n, int trials, std::uint64_t seed = 1);

/// Largest dyadic theta = 2^-j (j >= -2) at which the contour |zeta - 1| = delta
/// cleanly isolates lambda(theta) and the top-two modulus gap exceeds ten
/// times the quadrature error estimate.
double perturbative_threshold(const ChainSpec& spec, const StationaryStructure& ss,
                              const ContourOptions& opts = {});

}  // namespace mkedge
