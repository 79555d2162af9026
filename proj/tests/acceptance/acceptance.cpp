// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "common/chains.hpp"
#include "common/checks.hpp"
#include "mkedge/error.hpp"
#include "mkedge/oracle.hpp"

namespace {

using namespace mkedge;
namespace t = mkedge::testing;

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Tracks the worst value of a checked quantity against its tolerance.
class Worst {
 public:
  explicit Worst(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}

  void add(double value) {
    if (!(value <= worst_)) worst_ = value;
  }
  bool ok() const { return worst_ <= tol_; }
  std::string str() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.3g (tol %.10g)", name_.c_str(), worst_, tol_);
    return buf;
  }

 private:
  std::string name_;
  double tol_;
  double worst_ = 0.0;
};

Outcome combine(std::initializer_list<const Worst*> parts) {
  Outcome o;
  for (const Worst* w : parts) {
    o.pass = o.pass && w->ok();
    o.detail += (o.detail.empty() ? "" : "; ") + w->str();
  }
  return o;
}

double max_abs(const Matrix& A) { return A.cwiseAbs().maxCoeff(); }

Outcome exact_identities() {
  Worst w("max deviation", 1e-8);
  for (const ChainSpec& s : {t::two_state(), t::random_positive(), t::rank_one_skewed()}) {
    const StationaryStructure ss = stationary(s);
    const auto d = s.d();
    const Matrix I = Matrix::Identity(d, d);
    const Vector ones = Vector::Ones(d);
    w.add(max_abs(ss.Pi - ones * ss.pi));
    w.add(max_abs(ss.Pi * ss.Pi - ss.Pi));
    w.add(max_abs(s.P * ss.Pi - ss.Pi));
    w.add(max_abs(ss.Pi * s.P - ss.Pi));
    w.add((ss.pi * ss.E).cwiseAbs().maxCoeff());
    w.add((ss.E * ones).cwiseAbs().maxCoeff());
    w.add(max_abs(ss.E * (I - s.P) - (I - ss.Pi)));
    const auto derivs = proj_derivatives(s, ss, 1);
    w.add(max_abs(derivs[0] - ss.Pi));
    const Matrix P1 = moment_matrices(s, 1)[1];
    w.add(max_abs(derivs[1] - (ss.Pi * P1 * ss.E + ss.E * P1 * ss.Pi)));
  }
  return combine({&w});
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

Outcome cumulant_consistency() {
  Worst series("gamma_2 series gap", 1e-8);
  Worst fd("finite-difference gap", 1e-4);
  Worst dp("DP slope gap", 1e-3);
  Worst iid("rank-one gap", 1e-8);

  for (const ChainSpec& s : {t::two_state(), t::random_positive(), t::rank_one_skewed()}) {
    const StationaryStructure ss = stationary(s);
    const SpectralSummary summ = summarize(s, ss, 4);
    series.add(std::abs(sigma_sq_series(s, ss) - summ.cumulants_gamma[2]));
    const auto g = cumulant_crosscheck_fd(s, 3, 1e-2);
    for (int m : {2, 3}) {
      fd.add(std::abs(g[static_cast<std::size_t>(m)] - summ.cumulants_gamma[static_cast<std::size_t>(m)]));
    }
  }

  const ChainSpec a = t::two_state();
  const StationaryStructure ssa = stationary(a);
  const SpectralSummary summa = summarize(a, ssa, 4);
  std::vector<double> ns, var, k3;
  for (int n : {8, 16, 32, 64}) {
    const DpMoments m = dp_moments(dp_exact(a, n), 3, ssa.pi);
    const double m1 = m.mixed[1], m2 = m.mixed[2], m3 = m.mixed[3];
    ns.push_back(n);
    var.push_back(m2 - m1 * m1);
    k3.push_back(m3 - 3 * m2 * m1 + 2 * m1 * m1 * m1);
  }
  dp.add(std::abs(slope(ns, var) - summa.cumulants_gamma[2]));
  // The third cumulant is affine in n up to geometrically small terms; its
  // slope over the two largest n removes the boundary term.
  const std::vector<double> tail_n(ns.end() - 2, ns.end());
  const std::vector<double> tail_k3(k3.end() - 2, k3.end());
  dp.add(std::abs(slope(tail_n, tail_k3) - summa.cumulants_gamma[3]));

  const ChainSpec r = t::rank_one_skewed();
  const SpectralSummary summr = summarize(r, stationary(r), 4);
  const auto kappa = t::discrete_cumulants(r.mu, r.f);
  for (int m = 1; m <= 4; ++m) {
    iid.add(std::abs(summr.cumulants_gamma[static_cast<std::size_t>(m)] - kappa[static_cast<std::size_t>(m)]));
  }
  return combine({&series, &fd, &dp, &iid});
}

Outcome scalar_reduction() {
  Worst mixed("pi-mixed vs scalar form", 1e-12);
  Worst iid("rank-one vs i.i.d. Edgeworth", 1e-12);
  const auto grid = default_z_grid();
  for (const ChainSpec& s : {t::two_state(), t::random_positive(), t::three_state_nonlattice()}) {
    const SpectralSummary summ = summarize(s, stationary(s), 3);
    const Vector ones = Vector::Ones(s.d());
    for (int n : {16, 256}) {
      const EdgeworthApprox approx(summ, n, 1);
      for (double z : grid) mixed.add(std::abs((summ.pi * approx.evaluate(z) * ones).value() - scalar_esae(summ, n, z)));
    }
  }
  const ChainSpec r = t::rank_one_skewed();
  const SpectralSummary summ = summarize(r, stationary(r), 3);
  const auto kappa = t::discrete_cumulants(r.mu, r.f);
  const Vector ones = Vector::Ones(r.d());
  for (int n : {16, 256}) {
    const EdgeworthApprox approx(summ, n, 1);
    for (double z : grid) {
      const double classical = t::classical_edgeworth(kappa[3], kappa[4], std::sqrt(kappa[2]), n, 1, z);
      iid.add(std::abs((summ.pi * approx.evaluate(z) * ones).value() - classical));
    }
  }
  return combine({&mixed, &iid});
}

Outcome fourier_consistency() {
  Worst w("max entrywise gap", 1e-6);
  for (const ChainSpec& s : {t::two_state(), t::cosine_kernel(64, t::skewed_observable)}) {
    const SpectralSummary summ = summarize(s, stationary(s), 4);
    for (int order = 0; order <= 2; ++order) {
      const EdgeworthApprox approx(summ, 64, order);
      for (double theta : {0.5, 1.0, 2.0}) {
        const CMatrix lhs = t::fourier_stieltjes(approx, theta);
        w.add((lhs - frequency_form(summ, 64, order, theta)).cwiseAbs().maxCoeff());
      }
    }
  }
  return combine({&w});
}

struct RateSummary {
  bool ordering = true;       // (i)
  bool monotone = true;       // (ii)
  double min_margin = 1e300;  // min over (n, start) of (err0 - err1) / (2 hw)
  double worst_ratio = 0.0;   // max over starts and steps of scaled(n_k) / scaled(n_{k-1})
};

RateSummary rate_check(const ChainSpec& s, std::uint64_t seed) {
  const SpectralSummary summ = summarize(s, stationary(s), 3);
  VerifyOptions opts;
  opts.n_values = {64, 256, 1024};
  opts.max_order = 1;
  opts.samples = 2'000'000;
  opts.seed = seed;
  const VerificationReport report = run_verification(s, summ, opts);

  std::map<std::pair<int, int>, double> err0, err1;  // (n, start)
  for (const VerifyRow& r : report.rows) {
    if (r.target != kSupOverTargets) continue;
    (r.order == 0 ? err0 : err1)[{r.n, r.start}] = r.sup_error;
  }
  RateSummary out;
  const double hw = ks_halfwidth(opts.samples);
  for (const auto& [key, e1] : err1) {
    const double margin = (err0.at(key) - e1) / (2.0 * hw);
    out.min_margin = std::min(out.min_margin, margin);
    out.ordering = out.ordering && margin > 1.0;
  }
  for (int start = 0; start < s.d(); ++start) {
    for (std::size_t k = 1; k < opts.n_values.size(); ++k) {
      const int n0 = opts.n_values[k - 1], n1 = opts.n_values[k];
      const double prev = std::sqrt(n0) * err1.at({n0, start});
      const double cur = std::sqrt(n1) * err1.at({n1, start});
      out.worst_ratio = std::max(out.worst_ratio, cur / prev);
      out.monotone = out.monotone && cur < prev;
    }
  }
  return out;
}

Outcome empirical_rate() {
  const RateSummary chain = rate_check(t::three_state_nonlattice(), 7);
  const RateSummary kernel = rate_check(t::cosine_kernel(64, t::skewed_observable), 7);
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "3-state: (i) %s min margin %.2f x 2hw, (ii) %s worst ratio %.3f; "
                "kernel m=64: (i) %s min margin %.2f x 2hw, (ii) %s worst ratio %.3f",
                chain.ordering ? "ok" : "FAIL", chain.min_margin, chain.monotone ? "ok" : "FAIL",
                chain.worst_ratio, kernel.ordering ? "ok" : "FAIL", kernel.min_margin,
                kernel.monotone ? "ok" : "FAIL", kernel.worst_ratio);
  return {chain.ordering && chain.monotone && kernel.ordering && kernel.monotone, buf};
}

Outcome iterate_bound() {
  Worst w("max ratio", 1.0 + 1e-9);
  bool thrown = false;
  for (const ChainSpec& s : {t::two_state(), t::random_positive()}) {
    const PsiBounds pb = psi_bounds(s);
    for (double theta : {0.3, 1.0, 3.0}) {
      try {
        const IterateBoundReport r = iterate_bound_check(s, pb, theta, 20, 100);
        w.add(r.max_ratio);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BoundViolated) throw;
        thrown = true;
      }
    }
  }
  Outcome o = combine({&w});
  if (thrown) {
    o.pass = false;
    o.detail += "; BoundViolated raised";
  }
  return o;
}

Outcome spectral_split() {
  const ChainSpec s = t::two_state();
  const StationaryStructure ss = stationary(s);
  const double kappa = 1.0 / 3.0 + 2.0 / 3.0 * ss.gamma_erg;
  const std::vector<double> thetas{0.05, 0.1, 0.2};
  double K = 0.0;
  for (double th : thetas) K = std::max(K, t::split_residual(s, ss, th, 1) / (kappa * th));
  double worst = 0.0;
  double worst_theta = 0.0;
  int worst_n = 0;
  for (double th : thetas) {
    for (int n = 1; n <= 50; ++n) {
      const double ratio = t::split_residual(s, ss, th, n) / (K * std::pow(kappa, n) * th);
      if (ratio > worst) {
        worst = ratio;
        worst_theta = th;
        worst_n = n;
      }
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "K = %.4g, kappa = %.4g, max residual / envelope %.4f at theta = %.2f, n = %d", K,
                kappa, worst, worst_theta, worst_n);
  return {worst <= 1.0 + 1e-12, buf};
}

Outcome projector_series() {
  double worst_excess = 1e300;
  std::string detail;
  for (const ChainSpec& s : {t::two_state(), t::random_positive()}) {
    const StationaryStructure ss = stationary(s);
    const auto derivs = proj_derivatives(s, ss, 4);
    for (int k : {2, 3}) {
      std::vector<double> x, y;
      for (int j = 3; j <= 9; ++j) {
        const double th = std::ldexp(1.0, -j);
        x.push_back(th);
        y.push_back(t::maclaurin_residual(s, ss, derivs, th, k));
      }
      const double sl = t::loglog_slope(x, y);
      worst_excess = std::min(worst_excess, sl - (k - 0.1));
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%s k=%d slope %.3f", detail.empty() ? "" : "; ", s.label.c_str(), k, sl);
      detail += buf;
    }
  }
  return {worst_excess > 0.0, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "exact identities", exact_identities},
      {2, "cumulant consistency", cumulant_consistency},
      {3, "scalar reduction", scalar_reduction},
      {4, "Fourier consistency", fourier_consistency},
      {5, "empirical rate", empirical_rate},
      {6, "iterate bound", iterate_bound},
      {7, "spectral split envelope", spectral_split},
      {8, "projector series order", projector_series},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %-26s %s  [%.1fs] %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
