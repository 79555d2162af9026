#include "mkedge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mkedge {

namespace {

constexpr Complex kI{0.0, 1.0};
// Radii this close to 1 are treated as equal to 1 (lattice periodicity).
constexpr double kUnitRadiusTolerance = 1e-10;

double factorial(int m) {
  double r = 1.0;
  for (int i = 2; i <= m; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Real part of a matrix whose imaginary part must be roundoff.
Matrix real_checked(const CMatrix& A, const char* what) {
  const double re = A.real().cwiseAbs().maxCoeff();
  const double im = A.imag().cwiseAbs().maxCoeff();
  if (im > 1e-10 * std::max(1.0, re)) {
    std::ostringstream os;
    os << what << " has imaginary residue " << im;
    throw Error(ErrorCode::ComplexResidue, os.str());
  }
  return A.real();
}

struct SortedSpectrum {
  Eigen::VectorXcd values;        // unsorted eigenvalues
  std::vector<Eigen::Index> order;  // indices by decreasing modulus, ties by real part
};

SortedSpectrum sorted_spectrum(const CMatrix& M) {
  Eigen::ComplexEigenSolver<CMatrix> es(M, /*computeEigenvectors=*/false);
  SortedSpectrum s{es.eigenvalues(), {}};
  s.order.resize(static_cast<std::size_t>(M.rows()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) s.order[static_cast<std::size_t>(i)] = i;
  std::sort(s.order.begin(), s.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(s.values(a));
    const double mb = std::abs(s.values(b));
    if (ma != mb) return ma > mb;
    return s.values(a).real() > s.values(b).real();
  });
  return s;
}

/// (1 / 2 pi i) \oint_{|zeta - 1| = delta} (zeta - M)^{-1} d zeta, trapezoidal.
CMatrix contour_projection(const CMatrix& M, double delta, int nodes) {
  const auto d = M.rows();
  CMatrix acc = CMatrix::Zero(d, d);
  const CMatrix I = CMatrix::Identity(d, d);
  for (int q = 0; q < nodes; ++q) {
    const double phi = 2.0 * std::numbers::pi * q / nodes;
    const Complex w = std::polar(1.0, phi);
    const Complex zeta = 1.0 + delta * w;
    Eigen::PartialPivLU<CMatrix> lu(zeta * I - M);
    acc += (delta * w) * lu.inverse();
  }
  return acc / static_cast<double>(nodes);
}

}  // namespace

CharMatrix char_matrix(const ChainSpec& spec, double theta) {
  const auto d = spec.P.rows();
  CharMatrix cm{theta, CMatrix(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const Complex phase = theta == 0.0 ? Complex(1.0, 0.0) : std::exp(kI * (theta * spec.f(j)));
    for (Eigen::Index i = 0; i < d; ++i) cm.M(i, j) = phase * spec.P(i, j);
  }
  return cm;
}

PrincipalEig principal_eig(const CharMatrix& cm) {
  Eigen::ComplexEigenSolver<CMatrix> es(cm.M);
  const auto& vals = es.eigenvalues();
  const auto d = cm.M.rows();
  Eigen::Index top = 0;
  for (Eigen::Index i = 1; i < d; ++i) {
    const double mi = std::abs(vals(i));
    const double mt = std::abs(vals(top));
    if (mi > mt || (mi == mt && vals(i).real() > vals(top).real())) top = i;
  }
  double second = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i != top) second = std::max(second, std::abs(vals(i)));
  }
  if (std::abs(vals(top)) - second < 1e-9) {
    std::ostringstream os;
    os << "top eigenvalue moduli " << std::abs(vals(top)) << " and " << second
       << " at theta = " << cm.theta;
    throw Error(ErrorCode::EigenvalueCollision, os.str());
  }

  PrincipalEig pe;
  pe.lambda = vals(top);
  pe.right = es.eigenvectors().col(top);

  Eigen::ComplexEigenSolver<CMatrix> left_es(cm.M.transpose());
  Eigen::Index match = 0;
  for (Eigen::Index i = 1; i < d; ++i) {
    if (std::abs(left_es.eigenvalues()(i) - pe.lambda) <
        std::abs(left_es.eigenvalues()(match) - pe.lambda)) {
      match = i;
    }
  }
  pe.left = left_es.eigenvectors().col(match);

  const Complex pairing = (pe.left.transpose() * pe.right)(0, 0);
  pe.right /= pairing;
  const Complex mass = pe.left.sum();
  if (std::abs(mass) > 1e-300) {
    pe.left /= mass;
    pe.right *= mass;
  }
  return pe;
}

RadiusScan spectral_radius_scan(const ChainSpec& spec, std::span<const double> grid) {
  RadiusScan scan;
  double max_abs_theta = 0.0;
  for (double t : grid) max_abs_theta = std::max(max_abs_theta, std::abs(t));
  for (double t : grid) {
    const auto spectrum = sorted_spectrum(char_matrix(spec, t).M);
    const double r = std::abs(spectrum.values(spectrum.order.front()));
    scan.points.push_back({t, r});
    if (t != 0.0) {
      scan.max_off_zero = std::max(scan.max_off_zero, r);
      if (!(r < 1.0 - kUnitRadiusTolerance)) scan.below_one_off_zero = false;
    }
    if (std::abs(t) >= max_abs_theta / 10.0) scan.tail_max = std::max(scan.tail_max, r);
  }
  return scan;
}

double char_fn_modulus(const ChainSpec& spec, double theta) {
  Complex acc = 0.0;
  for (Eigen::Index j = 0; j < spec.mu.size(); ++j) {
    acc += spec.mu(j) * std::exp(kI * (theta * spec.f(j)));
  }
  return std::abs(acc);
}

CramerCheck cramer_check(const ChainSpec& spec, std::span<const double> tail_grid) {
  CramerCheck cc{0.0, false};
  for (double t : tail_grid) cc.limsup_estimate = std::max(cc.limsup_estimate, char_fn_modulus(spec, t));
  cc.satisfied = cc.limsup_estimate < 1.0 - 1e-6;
  return cc;
}

double contour_radius(const StationaryStructure& ss, const ContourOptions& opts) {
  return opts.delta > 0.0 ? opts.delta : (1.0 - ss.gamma_erg) / 3.0;
}

std::vector<Matrix> moment_matrices(const ChainSpec& spec, int k) {
  std::vector<Matrix> mats;
  mats.reserve(static_cast<std::size_t>(k + 1));
  Vector fpow = Vector::Ones(spec.f.size());
  for (int m = 0; m <= k; ++m) {
    mats.push_back(spec.P * fpow.asDiagonal());
    fpow = fpow.cwiseProduct(spec.f);
  }
  return mats;
}

std::vector<Matrix> proj_derivatives(const ChainSpec& spec, const StationaryStructure& ss,
                                     int k, const ContourOptions& opts) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "projector derivative order must be >= 0");
  const double delta = contour_radius(ss, opts);
  if (!(delta > 0.0) || delta >= 1.0 - ss.gamma_erg) {
    std::ostringstream os;
    os << "delta = " << delta << " but 1 - gamma_erg = " << 1.0 - ss.gamma_erg;
    throw Error(ErrorCode::ContourTooClose, os.str());
  }
  const auto d = spec.P.rows();
  const auto ku = static_cast<std::size_t>(k);

  // f^nu / nu! as column scalings of R P.
  std::vector<Vector> scaled_f(ku + 1);
  for (int nu = 1; nu <= k; ++nu) {
    scaled_f[static_cast<std::size_t>(nu)] = spec.f.array().pow(nu) / factorial(nu);
  }

  std::vector<CMatrix> acc(ku + 1, CMatrix::Zero(d, d));
  std::vector<CMatrix> RV(ku + 1);
  std::vector<CMatrix> T(ku + 1);
  const CMatrix I = CMatrix::Identity(d, d);
  const CMatrix Pc = spec.P.cast<Complex>();

  for (int q = 0; q < opts.nodes; ++q) {
    const double phi = 2.0 * std::numbers::pi * q / opts.nodes;
    const Complex w = std::polar(1.0, phi);
    const Complex zeta = 1.0 + delta * w;
    Eigen::PartialPivLU<CMatrix> lu(zeta * I - Pc);
    T[0] = lu.inverse();
    const CMatrix RP = T[0] * Pc;
    for (std::size_t nu = 1; nu <= ku; ++nu) {
      RV[nu] = RP * scaled_f[nu].cast<Complex>().asDiagonal();
    }
    // Coefficient of (i theta)^m in the Neumann series of the perturbed resolvent.
    for (std::size_t m = 1; m <= ku; ++m) {
      T[m] = RV[1] * T[m - 1];
      for (std::size_t nu = 2; nu <= m; ++nu) T[m].noalias() += RV[nu] * T[m - nu];
    }
    const Complex weight = delta * w;
    for (std::size_t m = 0; m <= ku; ++m) acc[m] += weight * T[m];
  }

  std::vector<Matrix> out;
  out.reserve(ku + 1);
  for (std::size_t m = 0; m <= ku; ++m) {
    const CMatrix coeff = acc[m] * (factorial(static_cast<int>(m)) / opts.nodes);
    out.push_back(real_checked(coeff, "projector derivative"));
  }
  return out;
}

CMatrix projector_at(const ChainSpec& spec, const StationaryStructure& ss, double theta,
                     const ContourOptions& opts) {
  const double delta = contour_radius(ss, opts);
  const CMatrix M = char_matrix(spec, theta).M;
  const auto spectrum = sorted_spectrum(M);
  int inside = 0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double dist = std::abs(spectrum.values(i) - 1.0);
    if (std::abs(dist - delta) < 1e-3 * delta) {
      throw Error(ErrorCode::ContourTooClose, "an eigenvalue lies on the contour");
    }
    if (dist < delta) ++inside;
  }
  if (inside != 1) {
    std::ostringstream os;
    os << inside << " eigenvalues inside |zeta - 1| = " << delta << " at theta = " << theta;
    throw Error(ErrorCode::ContourTooClose, os.str());
  }
  return contour_projection(M, delta, opts.nodes);
}

std::vector<double> cumulants_from_moments(std::span<const double> moments) {
  const int k = static_cast<int>(moments.size()) - 1;
  std::vector<double> gamma(moments.size(), 0.0);
  for (int m = 1; m <= k; ++m) {
    double g = moments[static_cast<std::size_t>(m)];
    for (int j = 1; j < m; ++j) {
      g -= binomial(m - 1, j - 1) * gamma[static_cast<std::size_t>(j)] *
           moments[static_cast<std::size_t>(m - j)];
    }
    gamma[static_cast<std::size_t>(m)] = g;
  }
  return gamma;
}

MomentsCumulants moments_and_cumulants(const ChainSpec& spec, const StationaryStructure& ss,
                                       std::span<const Matrix> proj_derivs, int k) {
  if (static_cast<int>(proj_derivs.size()) < k + 1) {
    throw Error(ErrorCode::InvalidArgument, "projector derivatives not available to order k");
  }
  const auto ku = static_cast<std::size_t>(k);
  const auto moments_mats = moment_matrices(spec, k);
  const Vector ones = Vector::Ones(spec.P.rows());

  // hat lambda^(m) = pi P_1^(m) 1
  std::vector<double> lam_hat(ku + 1);
  for (std::size_t m = 0; m <= ku; ++m) lam_hat[m] = ss.pi * proj_derivs[m] * ones;

  MomentsCumulants mc;
  mc.moments.assign(ku + 1, 0.0);
  mc.moments[0] = 1.0;
  // Leibniz on lambda(theta) pi P_1(theta) 1 = pi P^(theta) P_1(theta) 1.
  for (int m = 1; m <= k; ++m) {
    double rhs = 0.0;
    for (int nu = 1; nu <= m; ++nu) {
      rhs += binomial(m, nu) *
             (ss.pi * moments_mats[static_cast<std::size_t>(nu)] *
              proj_derivs[static_cast<std::size_t>(m - nu)] * ones)(0, 0);
    }
    for (int nu = 1; nu < m; ++nu) {
      rhs -= binomial(m, nu) * mc.moments[static_cast<std::size_t>(nu)] *
             lam_hat[static_cast<std::size_t>(m - nu)];
    }
    mc.moments[static_cast<std::size_t>(m)] = rhs / lam_hat[0];
  }
  mc.cumulants = cumulants_from_moments(mc.moments);
  return mc;
}

std::vector<double> cumulant_crosscheck_fd(const ChainSpec& spec, int k, double h,
                                           const FdOptions& opts) {
  if (h < 1e-3 || h > 1e-1) {
    throw Error(ErrorCode::InvalidArgument, "finite-difference step must lie in [1e-3, 1e-1]");
  }
  const int levels = std::max(1, opts.richardson_levels);
  const auto log_lambda = [&](double theta) {
    return std::log(principal_eig(char_matrix(spec, theta)).lambda);
  };

  std::vector<double> gamma(static_cast<std::size_t>(k + 1), 0.0);
  for (int m = 1; m <= k; ++m) {
    // Minimal central stencil for the m-th derivative on points -p..p.
    const int p = (m + 1) / 2;
    const int width = 2 * p + 1;
    Matrix V(width, width);
    Vector rhs = Vector::Zero(width);
    for (int q = 0; q < width; ++q) {
      for (int t = -p; t <= p; ++t) V(q, t + p) = std::pow(static_cast<double>(t), q);
    }
    rhs(m) = factorial(m);
    const Vector weights = V.fullPivLu().solve(rhs);

    std::vector<std::vector<Complex>> tab(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
      const double step = h / std::pow(2.0, l);
      Complex est = 0.0;
      for (int t = -p; t <= p; ++t) {
        if (weights(t + p) == 0.0) continue;
        est += weights(t + p) * (t == 0 ? Complex(0.0) : log_lambda(t * step));
      }
      est /= std::pow(step, m);
      auto& row = tab[static_cast<std::size_t>(l)];
      row.push_back(est);
      for (int c = 1; c <= l; ++c) {
        const Complex prev = tab[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(c - 1)];
        const Complex cur = row[static_cast<std::size_t>(c - 1)];
        row.push_back(cur + (cur - prev) / (std::pow(4.0, c) - 1.0));
      }
    }
    // Stop at the diagonal entry where refinement stops helping; deeper levels
    // only amplify roundoff for high derivatives.
    Complex deriv = tab.front().front();
    double best = std::numeric_limits<double>::infinity();
    for (int l = 1; l < levels; ++l) {
      const Complex cur = tab[static_cast<std::size_t>(l)][static_cast<std::size_t>(l)];
      const Complex prev = tab[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(l - 1)];
      const double change = std::abs(cur - prev);
      if (change >= best) break;
      best = change;
      deriv = cur;
    }
    gamma[static_cast<std::size_t>(m)] = (deriv / std::pow(kI, m)).real();
  }
  return gamma;
}

SpectralSummary summarize(const ChainSpec& spec, const StationaryStructure& ss, int k,
                          const ContourOptions& opts) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "summary order must be >= 2");
  SpectralSummary s;
  s.order_k = k;
  s.pi = ss.pi;
  s.moment_mats = moment_matrices(spec, k);
  s.proj_derivs = proj_derivatives(spec, ss, k, opts);
  auto mc = moments_and_cumulants(spec, ss, s.proj_derivs, k);
  s.moments_mu = std::move(mc.moments);
  s.cumulants_gamma = std::move(mc.cumulants);
  const double var = s.cumulants_gamma[2];
  if (!(var > 1e-12)) {
    throw Error(ErrorCode::DegenerateVariance, "gamma_2 <= 1e-12");
  }
  s.sigma = std::sqrt(var);
  return s;
}

IterateBoundReport iterate_bound_check(const ChainSpec& spec, const PsiBounds& pb, double theta,
                                       int n, int trials, std::uint64_t seed) {
  if (n < 1 || trials < 1) throw Error(ErrorCode::InvalidArgument, "n and trials must be >= 1");
  IterateBoundReport rep;
  rep.theta = theta;
  rep.n = n;
  rep.trials = trials;
  rep.char_fn_modulus = std::min(1.0, char_fn_modulus(spec, theta));
  const double contraction =
      1.0 - std::pow(pb.alpha, 4) / (2.0 * pb.beta) * (1.0 - rep.char_fn_modulus * rep.char_fn_modulus);
  rep.bound = std::pow(std::sqrt(std::max(0.0, contraction)), n - 1);

  const CMatrix M = char_matrix(spec, theta).M;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto d = spec.P.rows();
  for (int t = 0; t < trials; ++t) {
    CVector g(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      g(j) = std::polar(unit(rng), 2.0 * std::numbers::pi * unit(rng));
    }
    g /= g.cwiseAbs().maxCoeff();
    CVector v = g;
    for (int s = 0; s < n; ++s) v = M * v;
    const double ratio = v.cwiseAbs().maxCoeff() / rep.bound;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  if (rep.max_ratio > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "ratio " << rep.max_ratio << " at theta = " << theta << ", n = " << n;
    throw Error(ErrorCode::BoundViolated, os.str());
  }
  return rep;
}

double perturbative_threshold(const ChainSpec& spec, const StationaryStructure& ss,
                              const ContourOptions& opts) {
  const double delta = contour_radius(ss, opts);
  for (int j = -2; j <= 40; ++j) {
    const double theta = std::ldexp(1.0, -j);
    const auto spectrum = sorted_spectrum(char_matrix(spec, theta).M);
    const Complex top = spectrum.values(spectrum.order[0]);
    const double sep = std::abs(top) - std::abs(spectrum.values(spectrum.order[1]));
    const double inner = std::abs(top - 1.0) / delta;
    double outer = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < spectrum.order.size(); ++i) {
      outer = std::min(outer, std::abs(spectrum.values(spectrum.order[i]) - 1.0) / delta);
    }
    const double rho = std::max(inner, 1.0 / outer);
    if (!(rho < 1.0)) continue;
    const double floor = std::max(std::pow(rho, opts.nodes), 1e-15);
    if (sep >= 10.0 * floor) return theta;
  }
  return 0.0;
}

}  // namespace mkedge
