#pragma once

// Operator-valued Edgeworth expansion of the joint law of (S_n, xi_n):
//   P[S_n < z sigma sqrt(n), xi_n = j | xi_0 = i]  ~  sum_m n^{-m/2} A_{m,z}(i, j)
// with A_{0,z} = N(z) Pi and A_{m,z} = sum_{j<=m} a_j(z) P_1^{(j)}.

#include <complex>
#include <span>
#include <vector>

#include "mkedge/spectral.hpp"

namespace mkedge {

inline constexpr int kMaxExpansionOrder = 4;

double normal_pdf(double z);
double normal_cdf(double z);

/// Probabilists' Hermite polynomial He_nu(z).
double hermite(int nu, double z);

/// Tuples (k_1..k_m), sum i k_i = m, in decreasing lexicographic order.
/// m = 0 yields the single empty tuple.
struct PartitionSet {
  int m = 0;
  std::vector<std::vector<int>> tuples;
};

PartitionSet partitions(int m);

/// sum over K_nu of prod_m (1/k_m!) (gamma_{m+2} (i theta)^{m+2} / ((m+2)! sigma^{m+2}))^{k_m}.
/// `cumulants[r]` is gamma_r.
std::complex<double> frak_P(int nu, std::complex<double> itheta, std::span<const double> cumulants,
                            double sigma);

/// a_j(z) for the order-nu operator term, 0 <= j <= nu, nu >= 1.
double coeff_a(int j, int nu, double z, std::span<const double> cumulants, double sigma);

/// A_{m,z}; proj_derivs[j] = P_1^{(j)} with proj_derivs[0] = Pi.
Matrix operator_A(int m, double z, std::span<const Matrix> proj_derivs,
                  std::span<const double> cumulants, double sigma);

/// The truncated expansion for a fixed chain length n, with each a_j(z)
/// stored as -n(z) times a Hermite combination so evaluation stays cheap.
class EdgeworthApprox {
 public:
  EdgeworthApprox(const SpectralSummary& summ, int n, int order);

  int order() const { return order_; }
  int n() const { return n_; }
  int states() const { return static_cast<int>(proj_derivs_.front().rows()); }
  double sigma() const { return sigma_; }
  std::span<const double> cumulants() const { return cumulants_; }

  /// n^{-m/2} A_{m,z}.
  Matrix term(int m, double z) const;
  /// sum_{m <= order} n^{-m/2} A_{m,z}.
  Matrix evaluate(double z) const;
  /// Row i of evaluate(z).
  RowVector row(int i, double z) const;
  /// Scalar weights w_j(z) such that evaluate(z) = sum_j w_j(z) P_1^{(j)}.
  std::vector<double> weights(double z) const;

 private:
  struct HermiteTerm {
    int degree;
    double coeff;
  };
  // combos_[m][j]: a_j(z) of the order-m term is -n(z) sum coeff He_degree(z).
  std::vector<std::vector<std::vector<HermiteTerm>>> combos_;
  std::vector<Matrix> proj_derivs_;
  std::vector<double> cumulants_;
  double sigma_;
  int n_;
  int order_;
};

/// sum_{m=0}^{order} n^{-m/2} A_{m,z}.
Matrix edgeworth_cdf(const SpectralSummary& summ, int n, int order, double z);

/// N(z) + n^{-1/2} n(z) gamma_3 / (6 sigma^3) (1 - z^2).
double scalar_esae(const SpectralSummary& summ, int n, double z);

/// Frequency-domain form
/// exp(-theta^2/2) sum_{m<=order} sum_{j<=m} (i theta)^j / (n^{m/2} j! sigma^j) frak_P_{m-j}(i theta) P_1^{(j)},
/// the Fourier-Stieltjes transform in z of the expansion.
CMatrix frequency_form(const SpectralSummary& summ, int n, int order, double theta);

/// 481 points on [-6, 6] with step 0.025.
std::vector<double> default_z_grid();

}  // namespace mkedge
