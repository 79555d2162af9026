#pragma once

// Finite-state Markov chain instances and their stationary / potential
// objects: pi, the Perron projection Pi, the potential operator E, the
// two-sided density bounds (alpha, beta) and the asymptotic variance.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mkedge/error.hpp"

namespace mkedge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// A chain instance: transition matrix P, observable f, initial law mu.
struct ChainSpec {
  Matrix P;
  Vector f;
  Vector mu;
  std::string label;

  int d() const { return static_cast<int>(P.rows()); }
};

struct StationaryStructure {
  RowVector pi;
  Matrix Pi;  // rank one, every row equal to pi
  Matrix E;   // sum_{n>=0} (P^n - Pi) = (I - P + Pi)^{-1} - Pi
  double gamma_erg = 0.0;  // second-largest eigenvalue modulus of P
  double C_erg = 1.0;      // smallest C with ||P^n - Pi|| <= C gamma^n, n = 1..100
};

struct PsiBounds {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Messages produced while accepting an input (renormalizations, centering).
using Notes = std::vector<std::string>;

inline constexpr double kRenormTolerance = 1e-9;

/// Checks the stochasticity of P and mu. Rows and mu within 1e-9 of unit
/// mass are renormalized (with a note); anything further off is rejected.
ChainSpec validate(ChainSpec spec, Notes* notes = nullptr);

/// True iff some power of P is strictly positive (tested via repeated
/// squaring of the sparsity pattern up to an exponent beyond the Wielandt
/// bound (d-1)^2 + 1).
bool is_primitive(const Matrix& P);

StationaryStructure stationary(const ChainSpec& spec);

/// Replaces f by f - (pi . f) 1.
ChainSpec center_observable(ChainSpec spec, const RowVector& pi);

PsiBounds psi_bounds(const ChainSpec& spec);

/// sigma^2 = sum_i pi_i f_i^2 + 2 sum_i pi_i f_i ((E - I) f)_i for centered f.
double sigma_sq_series(const ChainSpec& spec, const StationaryStructure& ss);

/// Sup-norm operator norm (maximum absolute row sum), real or complex.
template <typename Derived>
double sup_norm(const Eigen::MatrixBase<Derived>& A) {
  return A.rows() == 0 ? 0.0 : A.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace mkedge
