#include "mkedge/chain_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mkedge {

namespace {

// A decimal defect of exactly 1e-9 is itself off by a few ulps in binary.
constexpr double kRenormSlack = kRenormTolerance + 8 * std::numeric_limits<double>::epsilon();

// Sums this close to 1 are summation roundoff of an already normalized row;
// leaving them alone keeps write/parse round trips exact.
bool needs_renormalization(double sum, Eigen::Index terms) {
  return std::abs(sum - 1.0) > 2.0 * static_cast<double>(terms) * std::numeric_limits<double>::epsilon();
}

std::string fmt_row(int i, double sum) {
  std::ostringstream os;
  os.precision(17);
  os << "row " << i << " sums to " << sum;
  return os.str();
}

}  // namespace

ChainSpec validate(ChainSpec spec, Notes* notes) {
  const auto d = spec.P.rows();
  if (d < 2 || spec.P.cols() != d) {
    throw Error(ErrorCode::NonStochastic, "transition matrix must be square with d >= 2");
  }
  if (spec.f.size() != d) {
    throw Error(ErrorCode::InvalidArgument, "observable length does not match state count");
  }
  if (spec.mu.size() != d) {
    throw Error(ErrorCode::BadInitial, "initial distribution length does not match state count");
  }
  if (!spec.P.allFinite() || !spec.f.allFinite()) {
    throw Error(ErrorCode::NonStochastic, "non-finite entry in P or f");
  }

  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (spec.P(i, j) < 0.0) {
        std::ostringstream os;
        os << "P(" << i << "," << j << ") = " << spec.P(i, j);
        throw Error(ErrorCode::NegativeEntry, os.str());
      }
    }
    const double sum = spec.P.row(i).sum();
    if (std::abs(sum - 1.0) > kRenormSlack) {
      throw Error(ErrorCode::NonStochastic, fmt_row(static_cast<int>(i), sum));
    }
    if (needs_renormalization(sum, d)) {
      spec.P.row(i) /= sum;
      if (notes) {
        notes->push_back("renormalized " + fmt_row(static_cast<int>(i), sum));
      }
    }
  }

  if (!spec.mu.allFinite() || (spec.mu.array() < 0.0).any()) {
    throw Error(ErrorCode::BadInitial, "initial distribution has a negative or non-finite entry");
  }
  const double mass = spec.mu.sum();
  if (std::abs(mass - 1.0) > kRenormSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "initial distribution sums to " << mass;
    throw Error(ErrorCode::BadInitial, os.str());
  }
  if (needs_renormalization(mass, d)) {
    spec.mu /= mass;
    if (notes) {
      notes->push_back("renormalized initial distribution");
    }
  }
  return spec;
}

bool is_primitive(const Matrix& P) {
  const auto d = P.rows();
  using Pattern = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
  Pattern B = (P.array() > 0.0).cast<int>();
  // Any exponent >= (d-1)^2 + 1 decides primitivity.
  const long long target = static_cast<long long>(d - 1) * (d - 1) + 1;
  long long power = 1;
  while (power < target) {
    Pattern sq = B * B;
    B = (sq.array() > 0).cast<int>();
    power *= 2;
  }
  return (B.array() > 0).all();
}

StationaryStructure stationary(const ChainSpec& spec) {
  const auto d = spec.P.rows();
  if (!is_primitive(spec.P)) {
    throw Error(ErrorCode::NotPrimitive, "no power of P up to d^2 is strictly positive");
  }

  // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
  Matrix A = spec.P.transpose() - Matrix::Identity(d, d);
  A.row(d - 1).setOnes();
  Vector rhs = Vector::Zero(d);
  rhs(d - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::SingularSystem, "stationary system is singular");
  }

  StationaryStructure ss;
  ss.pi = lu.solve(rhs).transpose();
  ss.Pi = Vector::Ones(d) * ss.pi;

  Matrix fundamental = Matrix::Identity(d, d) - spec.P + ss.Pi;
  Eigen::FullPivLU<Matrix> lu2(fundamental);
  if (!lu2.isInvertible()) {
    throw Error(ErrorCode::SingularSystem, "I - P + Pi is singular");
  }
  ss.E = lu2.inverse() - ss.Pi;

  Eigen::EigenSolver<Matrix> es(spec.P, /*computeEigenvectors=*/false);
  std::vector<double> moduli;
  moduli.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) moduli.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  ss.gamma_erg = std::clamp(moduli[1], 0.0, 1.0);

  ss.C_erg = 1.0;
  if (ss.gamma_erg > 1e-12) {
    Matrix Pn = spec.P;
    double gamma_n = ss.gamma_erg;
    for (int n = 1; n <= 100; ++n) {
      const double gap = sup_norm(Matrix(Pn - ss.Pi));
      if (gap > 1e-14 && gamma_n > 0.0) ss.C_erg = std::max(ss.C_erg, gap / gamma_n);
      Pn = Pn * spec.P;
      gamma_n *= ss.gamma_erg;
      if (gamma_n < 1e-280) break;
    }
  }
  return ss;
}

ChainSpec center_observable(ChainSpec spec, const RowVector& pi) {
  const double mean = pi.dot(spec.f.transpose());
  spec.f.array() -= mean;
  return spec;
}

PsiBounds psi_bounds(const ChainSpec& spec) {
  PsiBounds pb{std::numeric_limits<double>::infinity(), 0.0};
  bool any = false;
  for (Eigen::Index j = 0; j < spec.mu.size(); ++j) {
    if (spec.mu(j) <= 0.0) continue;
    for (Eigen::Index i = 0; i < spec.P.rows(); ++i) {
      const double ratio = spec.P(i, j) / spec.mu(j);
      pb.alpha = std::min(pb.alpha, ratio);
      pb.beta = std::max(pb.beta, ratio);
      any = true;
    }
  }
  if (!any || !(pb.alpha > 0.0)) {
    throw Error(ErrorCode::PsiViolated, "some p_ij = 0 where mu_j > 0");
  }
  return pb;
}

double sigma_sq_series(const ChainSpec& spec, const StationaryStructure& ss) {
  const auto d = spec.P.rows();
  const Vector& f = spec.f;
  const Vector correction = (ss.E - Matrix::Identity(d, d)) * f;
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    s2 += ss.pi(i) * f(i) * f(i) + 2.0 * ss.pi(i) * f(i) * correction(i);
  }
  if (!(s2 > 1e-12)) {
    std::ostringstream os;
    os << "sigma^2 = " << s2 << " (observable is numerically a coboundary)";
    throw Error(ErrorCode::DegenerateVariance, os.str());
  }
  return s2;
}

}  // namespace mkedge
