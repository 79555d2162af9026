#include <gtest/gtest.h>

#include "common/chains.hpp"
#include "common/checks.hpp"
#include "mkedge/spectral.hpp"

namespace mkedge {
namespace {

using testing::two_state;

TEST(CharMatrix, ZeroFrequencyIsP) {
  const ChainSpec s = testing::random_positive();
  const CharMatrix cm = char_matrix(s, 0.0);
  EXPECT_EQ(cm.M.real(), s.P);
  EXPECT_EQ(cm.M.imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(CharMatrix, ZeroObservableIsP) {
  ChainSpec s = two_state();
  s.f.setZero();
  EXPECT_EQ(char_matrix(s, 1.7).M.real(), s.P);
}

TEST(CharMatrix, ModulusAndConjugateSymmetry) {
  const ChainSpec s = testing::random_positive();
  for (double t : {0.3, 1.0, 4.5}) {
    const CMatrix a = char_matrix(s, t).M;
    const CMatrix b = char_matrix(s, -t).M;
    EXPECT_LT((a.cwiseAbs() - s.P).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((a.conjugate() - b).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(PrincipalEig, PerronDataAtZero) {
  const ChainSpec s = testing::random_positive();
  const PrincipalEig pe = principal_eig(char_matrix(s, 0.0));
  const StationaryStructure ss = stationary(s);
  EXPECT_NEAR(std::abs(pe.lambda - 1.0), 0.0, 1e-12);
  EXPECT_LT((pe.right - CVector::Ones(s.d())).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((pe.left - ss.pi.transpose().cast<Complex>()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PrincipalEig, RankOneGivesCharacteristicFunction) {
  const ChainSpec s = testing::rank_one_skewed();
  for (double t : {0.2, 0.9, 2.5}) {
    Complex cf = 0.0;
    for (int j = 0; j < s.d(); ++j) cf += s.mu(j) * std::exp(Complex(0.0, t * s.f(j)));
    EXPECT_LT(std::abs(principal_eig(char_matrix(s, t)).lambda - cf), 1e-12);
  }
}

TEST(PrincipalEig, ModulusAtMostOneAndConjugate) {
  const ChainSpec s = testing::three_state_nonlattice();
  for (double t = 0.05; t < 1.0; t += 0.05) {
    const Complex a = principal_eig(char_matrix(s, t)).lambda;
    const Complex b = principal_eig(char_matrix(s, -t)).lambda;
    EXPECT_LE(std::abs(a), 1.0 + 1e-12);
    EXPECT_LT(std::abs(a - std::conj(b)), 1e-12);
  }
}

TEST(PrincipalEig, CollisionIsReported) {
  // Two uncoupled-looking states with the same modulus after tilting.
  Matrix P(2, 2);
  P << 0.5, 0.5, 0.5, 0.5;
  Vector f(2);
  f << 1.0, -1.0;
  const ChainSpec s = testing::make_chain(P, f, "collision");
  // At theta = pi/2 the tilted matrix has eigenvalues 0 and 0.5 (i - i) = 0.
  try {
    principal_eig(char_matrix(s, std::numbers::pi / 2));
    FAIL() << "expected EigenvalueCollision";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EigenvalueCollision);
  }
}

TEST(RadiusScan, ZeroAndLatticePeriod) {
  const ChainSpec s = two_state();
  // f = (3, -4) lives on 7Z - 4, so r = 1 again at theta = 2 pi / 7.
  const std::vector<double> grid{0.0, 2.0 * std::numbers::pi / 7.0, 2.0 * std::numbers::pi};
  const RadiusScan scan = spectral_radius_scan(s, grid);
  for (const auto& p : scan.points) EXPECT_NEAR(p.r, 1.0, 1e-12) << "theta = " << p.theta;
  EXPECT_FALSE(scan.below_one_off_zero);
}

TEST(RadiusScan, NonLatticeStaysBelowOne) {
  Vector f(2);
  f << 1.0, -std::sqrt(2.0);
  const ChainSpec s = testing::centered(testing::make_chain(two_state().P, f, "non-lattice"));
  std::vector<double> grid;
  for (int k = 1; k <= 4000; ++k) grid.push_back(0.025 * k);
  const RadiusScan scan = spectral_radius_scan(s, grid);
  EXPECT_TRUE(scan.below_one_off_zero);
  EXPECT_LT(scan.max_off_zero, 1.0);
  const RadiusScan symmetric = spectral_radius_scan(s, std::vector<double>{-0.7, 0.7});
  EXPECT_NEAR(symmetric.points[0].r, symmetric.points[1].r, 1e-13);
}

TEST(Cramer, PointMassFails) {
  ChainSpec s = two_state();
  s.mu << 1.0, 0.0;
  std::vector<double> grid;
  for (int k = 0; k < 1000; ++k) grid.push_back(100.0 + k);
  const CramerCheck cc = cramer_check(s, grid);
  EXPECT_NEAR(cc.limsup_estimate, 1.0, 1e-15);
  EXPECT_FALSE(cc.satisfied);
}

TEST(Cramer, FiniteDiscreteFailsOnFineTail) {
  ChainSpec s = two_state();
  s.f << 1.0, -std::sqrt(2.0);
  s = testing::centered(s);
  std::vector<double> grid;
  for (int k = 0; k < 200000; ++k) grid.push_back(1e3 + 5e-4 * k);
  const CramerCheck cc = cramer_check(s, grid);
  EXPECT_GT(cc.limsup_estimate, 1.0 - 1e-6);
  EXPECT_FALSE(cc.satisfied);
}

TEST(Cramer, DiscretizedContinuousPassesOnTestedWindow) {
  const ChainSpec s = testing::cosine_kernel(64, [](double x) { return std::exp(3.0 * x); });
  std::vector<double> grid;
  for (int k = 0; k < 20000; ++k) grid.push_back(50.0 + 0.05 * k);
  EXPECT_TRUE(cramer_check(s, grid).satisfied);
}

TEST(ProjDerivatives, ZerothIsPi) {
  const ChainSpec s = testing::random_positive();
  const StationaryStructure ss = stationary(s);
  const auto d = proj_derivatives(s, ss, 3);
  EXPECT_LT((d[0] - ss.Pi).cwiseAbs().maxCoeff(), 1e-8);
}

class ProjClosedForm : public ::testing::TestWithParam<int> {};

TEST_P(ProjClosedForm, FirstDerivativeMatchesClosedForm) {
  const ChainSpec s = GetParam() == 0 ? two_state() : GetParam() == 1 ? testing::random_positive()
                                                                       : testing::rank_one_skewed();
  const StationaryStructure ss = stationary(s);
  const auto d = proj_derivatives(s, ss, 2);
  const Matrix P1 = moment_matrices(s, 1)[1];
  const Matrix closed = ss.Pi * P1 * ss.E + ss.E * P1 * ss.Pi;
  EXPECT_LT((d[1] - closed).cwiseAbs().maxCoeff(), 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Chains, ProjClosedForm, ::testing::Values(0, 1, 2));

TEST(ProjDerivatives, RankOneFirstDerivative) {
  const ChainSpec s = testing::rank_one_skewed();
  const StationaryStructure ss = stationary(s);
  const Matrix I = Matrix::Identity(s.d(), s.d());
  const Matrix P1 = moment_matrices(s, 1)[1];
  EXPECT_NEAR((ss.Pi * P1 * ss.Pi).cwiseAbs().maxCoeff(), 0.0, 1e-14);
  const Matrix expected = ss.Pi * P1 * (I - ss.Pi) + (I - ss.Pi) * P1 * ss.Pi;
  EXPECT_LT((proj_derivatives(s, ss, 1)[1] - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ProjDerivatives, ContourTooClose) {
  const ChainSpec s = two_state();
  const StationaryStructure ss = stationary(s);
  try {
    proj_derivatives(s, ss, 2, ContourOptions{256, 0.75});
    FAIL() << "expected ContourTooClose";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ContourTooClose);
  }
}

TEST(ProjDerivatives, InvariantUnderNodesAndRadius) {
  const ChainSpec s = testing::random_positive();
  const StationaryStructure ss = stationary(s);
  const double delta = (1.0 - ss.gamma_erg) / 3.0;
  const auto base = proj_derivatives(s, ss, 4);
  for (const ContourOptions& o : {ContourOptions{512, 0.0}, ContourOptions{256, 0.8 * delta},
                                  ContourOptions{256, 1.2 * delta}}) {
    const auto alt = proj_derivatives(s, ss, 4, o);
    for (int m = 0; m <= 4; ++m) {
      EXPECT_LT((alt[static_cast<std::size_t>(m)] - base[static_cast<std::size_t>(m)]).cwiseAbs().maxCoeff(),
                1e-8)
          << "m = " << m << ", nodes = " << o.nodes << ", delta = " << o.delta;
    }
  }
}

TEST(Cumulants, SigmaSqAgreesWithSeries) {
  for (const ChainSpec& s : {two_state(), testing::random_positive(), testing::three_state_nonlattice()}) {
    const StationaryStructure ss = stationary(s);
    const SpectralSummary summ = summarize(s, ss, 4);
    EXPECT_NEAR(summ.cumulants_gamma[2], sigma_sq_series(s, ss), 1e-8) << s.label;
    EXPECT_NEAR(summ.moments_mu[1], 0.0, 1e-10);
    EXPECT_NEAR(summ.cumulants_gamma[1], 0.0, 1e-10);
    EXPECT_NEAR(summ.cumulants_gamma[3], summ.moments_mu[3], 1e-8);
    EXPECT_NEAR(summ.sigma * summ.sigma, summ.cumulants_gamma[2], 1e-12);
  }
}

TEST(Cumulants, RankOneReducesToIid) {
  const ChainSpec s = testing::rank_one_skewed();
  const SpectralSummary summ = summarize(s, stationary(s), 4);
  const auto k = testing::discrete_cumulants(s.mu, s.f);
  for (int m = 2; m <= 4; ++m) {
    EXPECT_NEAR(summ.cumulants_gamma[static_cast<std::size_t>(m)], k[static_cast<std::size_t>(m)], 1e-8)
        << "m = " << m;
  }
}

TEST(Cumulants, MomentConversionKnownValues) {
  // Exponential(1): moments m! and cumulants (m-1)!.
  const std::vector<double> moments{1.0, 1.0, 2.0, 6.0, 24.0, 120.0};
  const auto c = cumulants_from_moments(moments);
  EXPECT_NEAR(c[1], 1.0, 1e-14);
  EXPECT_NEAR(c[2], 1.0, 1e-14);
  EXPECT_NEAR(c[3], 2.0, 1e-14);
  EXPECT_NEAR(c[4], 6.0, 1e-13);
  EXPECT_NEAR(c[5], 24.0, 1e-12);
}

TEST(CumulantFd, MatchesAnalytic) {
  for (const ChainSpec& s : {two_state(), testing::random_positive()}) {
    const SpectralSummary summ = summarize(s, stationary(s), 4);
    const auto fd = cumulant_crosscheck_fd(s, 4, 1e-2);
    EXPECT_NEAR(fd[1], 0.0, 1e-6) << s.label;
    EXPECT_NEAR(fd[2], summ.cumulants_gamma[2], 1e-5) << s.label;
    EXPECT_NEAR(fd[3], summ.cumulants_gamma[3], 1e-4) << s.label;
    EXPECT_NEAR(fd[4], summ.cumulants_gamma[4], 1e-4 * std::max(1.0, std::abs(summ.cumulants_gamma[4])))
        << s.label;
  }
}

TEST(CumulantFd, RejectsStepOutsideRange) {
  EXPECT_THROW(cumulant_crosscheck_fd(two_state(), 3, 0.5), Error);
  EXPECT_THROW(cumulant_crosscheck_fd(two_state(), 3, 1e-4), Error);
}

TEST(IterateBound, TrivialCases) {
  const ChainSpec s = two_state();
  const PsiBounds pb = psi_bounds(s);
  const IterateBoundReport zero = iterate_bound_check(s, pb, 0.0, 20, 50);
  EXPECT_NEAR(zero.bound, 1.0, 1e-15);
  EXPECT_LE(zero.max_ratio, 1.0 + 1e-9);

  ChainSpec flat = s;
  flat.f.setZero();
  const IterateBoundReport r = iterate_bound_check(flat, pb, 1.3, 20, 50);
  EXPECT_NEAR(r.char_fn_modulus, 1.0, 1e-15);
  EXPECT_NEAR(r.bound, 1.0, 1e-15);
}

TEST(IterateBound, TwoStateAtThetaOne) {
  const ChainSpec s = two_state();
  const IterateBoundReport r = iterate_bound_check(s, psi_bounds(s), 1.0, 20, 100);
  EXPECT_EQ(r.trials, 100);
  EXPECT_LT(r.bound, 1.0);
  EXPECT_LE(r.max_ratio, 1.0 + 1e-9);
}

TEST(SpectralSplit, ResidualWithinGeometricEnvelope) {
  const ChainSpec s = two_state();
  const StationaryStructure ss = stationary(s);
  const double kappa = 1.0 / 3.0 + 2.0 / 3.0 * ss.gamma_erg;
  const double xi = perturbative_threshold(s, ss);
  const std::vector<double> thetas{0.05, 0.1, xi};
  double K = 0.0;
  for (double t : thetas) K = std::max(K, testing::split_residual(s, ss, t, 1) / (kappa * t));
  for (double t : thetas) {
    for (int n = 1; n <= 50; ++n) {
      EXPECT_LE(testing::split_residual(s, ss, t, n), K * std::pow(kappa, n) * t + 1e-12)
          << "theta = " << t << ", n = " << n;
    }
  }
}

TEST(ProjectorSeries, ResidualOrder) {
  const ChainSpec s = testing::random_positive();
  const StationaryStructure ss = stationary(s);
  const auto derivs = proj_derivatives(s, ss, 4);
  for (int k : {2, 3}) {
    std::vector<double> x, y;
    for (int j = 3; j <= 9; ++j) {
      const double t = std::ldexp(1.0, -j);
      x.push_back(t);
      y.push_back(testing::maclaurin_residual(s, ss, derivs, t, k));
    }
    EXPECT_GT(testing::loglog_slope(x, y), k - 0.1) << "k = " << k;
  }
}

TEST(PerturbativeThreshold, IsolatesPrincipalEigenvalue) {
  const ChainSpec s = two_state();
  const StationaryStructure ss = stationary(s);
  const double xi = perturbative_threshold(s, ss);
  EXPECT_GT(xi, 0.0);
  EXPECT_NO_THROW(projector_at(s, ss, xi));
}

}  // namespace
}  // namespace mkedge
