#pragma once

// Ground truth for the joint law of (S_n, xi_n) given xi_0 = i: exact
// dynamic programming for lattice observables, Monte-Carlo otherwise.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mkedge/chain_core.hpp"
#include "mkedge/expansion.hpp"

namespace mkedge {

/// Target set index for "all states".
inline constexpr int kAllStates = -1;

/// P[S_n < x, xi_n in B | xi_0 = start] (or <= x when inclusive).
class JointLaw {
 public:
  virtual ~JointLaw() = default;
  virtual int n() const = 0;
  virtual int states() const = 0;
  virtual bool has_start(int start) const = 0;
  virtual double probability_below(int start, int target, double x, bool inclusive) const = 0;
};

class LatticeLaw final : public JointLaw {
 public:
  /// Support points are origin + s * span for s in [s_min, s_max].
  LatticeLaw(int n, int states, double span, double origin, long long s_min, long long s_max);

  int n() const override { return n_; }
  int states() const override { return states_; }
  bool has_start(int start) const override { return start >= 0 && start < states_; }
  double probability_below(int start, int target, double x, bool inclusive) const override;

  double span() const { return span_; }
  double origin() const { return origin_; }
  double value(long long s) const { return origin_ + static_cast<double>(s) * span_; }
  long long s_min() const { return s_min_; }
  long long s_max() const { return s_max_; }
  std::size_t width() const { return static_cast<std::size_t>(s_max_ - s_min_ + 1); }

  /// Mass of {S_n = value(s), xi_n = j} given xi_0 = i (0 outside the range).
  double mass(int i, int j, long long s) const;
  std::span<const double> masses(int i, int j) const;
  std::span<double> masses(int i, int j);

  /// Rebuilds the cumulative tables after the masses were written.
  void finalize();

 private:
  std::size_t offset(int i, int j) const;
  /// Number of support points below x (at or below when inclusive).
  std::size_t bins_below(double x, bool inclusive) const;

  int n_;
  int states_;
  double span_;
  double origin_;
  long long s_min_;
  long long s_max_;
  std::vector<double> mass_;        // [(i * d + j) * width + (s - s_min)]
  std::vector<double> cumulative_;  // running sums of mass_ along s
  std::vector<double> cumulative_all_;  // [(i * width) + k], summed over j
};

inline constexpr double kDpBudget = 1e8;

/// Exact joint law by forward recursion
///   mass_{t+1}(s + k_j, j) = sum_i mass_t(s, i) p_ij,  f_j = c + k_j h.
/// A common offset c is allowed, so centered lattice observables stay exact.
/// Throws NotLattice when the differences of f have no common span,
/// BudgetExceeded when n * d * range exceeds the budget.
LatticeLaw dp_exact(const ChainSpec& spec, int n, double budget = kDpBudget);

struct DpMoments {
  std::vector<std::vector<double>> per_start;  // [i][q] = E_i[S_n^q], q = 0..p
  std::vector<double> mixed;                   // sum_i w_i E_i[S_n^q]
};

/// Raw power sums of S_n up to order p <= 6, per start and mixed with `weights`.
DpMoments dp_moments(const LatticeLaw& law, int p, const RowVector& weights);

/// Raw Monte-Carlo output in path order.
struct PathSamples {
  int n = 0;
  int start = 0;
  std::vector<double> sums;
  std::vector<std::int32_t> states;
};

/// Simulates `samples` paths from `start` and records (S_h, xi_h) at every
/// horizon. Deterministic in (seed, start, path index) regardless of the
/// thread count or the kernel ISA.
std::vector<PathSamples> simulate_paths(const ChainSpec& spec, int start, std::span<const int> horizons,
                                        std::size_t samples, std::uint64_t seed);

class EmpiricalLaw final : public JointLaw {
 public:
  struct PerStart {
    int start = 0;
    std::vector<std::vector<double>> by_state;  // sorted S_n per end state
    std::vector<double> all;                    // sorted S_n over all end states
  };

  EmpiricalLaw(int n, int states, std::size_t samples, std::uint64_t seed);

  int n() const override { return n_; }
  int states() const override { return states_; }
  bool has_start(int start) const override;
  double probability_below(int start, int target, double x, bool inclusive) const override;

  std::size_t samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }
  const PerStart& of(int start) const;
  const std::vector<PerStart>& starts() const { return per_start_; }

  void add(const PathSamples& paths);

 private:
  int n_;
  int states_;
  std::size_t samples_;
  std::uint64_t seed_;
  std::vector<PerStart> per_start_;
};

/// Empirical joint law for the given starts (all states when empty).
/// Requires samples >= 1e4.
EmpiricalLaw mc_sample(const ChainSpec& spec, int n, std::size_t samples, std::uint64_t seed,
                       std::span<const int> starts = {});

/// One empirical law per horizon, all read off the same simulated paths.
std::vector<EmpiricalLaw> mc_sample_horizons(const ChainSpec& spec, std::span<const int> horizons,
                                             std::size_t samples, std::uint64_t seed,
                                             std::span<const int> starts = {});

/// Kolmogorov-Smirnov 95% half-width 1.36 / sqrt(samples).
double ks_halfwidth(std::size_t samples);
/// Dvoretzky-Kiefer-Wolfowitz 99% half-width 1.63 / sqrt(samples).
double dkw_halfwidth99(std::size_t samples);

/// Approximation side of a sup-error comparison: values for every end state
/// j at standardized point z (one-sided limits for discontinuous sources).
using ApproxRow = std::function<RowVector(int start, double z, bool inclusive)>;

ApproxRow approx_row(const EdgeworthApprox& approx);
/// A joint law used as the approximation, read at x = z * scale.
ApproxRow law_row(const JointLaw& law, double scale);

/// Sup over z of |truth - approx| for one start, per target set.
struct SupError {
  int start = 0;
  std::vector<double> per_target;  // d singletons then the full set
  double sup = 0.0;                // max over targets
};

/// Compares approx with truth at x = z * scale on `z_grid`, for target sets
/// {1}, ..., {d} and the full set. Throws GridMismatch on an empty grid or
/// when n differs (approx_n < 0 skips that check).
SupError sup_error(const ApproxRow& approx, int approx_n, const JointLaw& truth, double scale,
                   std::span<const double> z_grid, int start);

/// Standardized sample quantiles of S_n for one start (at most max_points),
/// merged with the base grid and sorted.
std::vector<double> augmented_grid(std::span<const double> base, const EmpiricalLaw& law, int start,
                                   double scale, std::size_t max_points);

/// One line of a verification report. target is a 0-based state, kAllStates
/// for the full set, or kSupOverTargets for the max over all target sets.
inline constexpr int kSupOverTargets = -2;

struct VerifyRow {
  int n = 0;
  int order = 0;
  int start = 0;
  int target = kSupOverTargets;
  double sup_error = 0.0;
  double scaled = 0.0;  // sqrt(n) * sup_error
  double halfwidth = 0.0;
  bool pass = true;
};

struct VerificationReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<VerifyRow> rows;

  bool passed() const;
};

struct VerifyOptions {
  std::vector<int> n_values;   // strictly ascending
  int max_order = 1;
  std::size_t samples = 2'000'000;
  std::uint64_t seed = 1;
  std::vector<int> starts;     // all states when empty
  std::vector<double> z_grid;  // default_z_grid() when empty
  std::size_t quantile_points = 4096;
};

/// Runs the Monte-Carlo oracle once up to max(n_values) and compares every
/// order 0..max_order against it. Rows with target kSupOverTargets pass iff
/// the order beats the previous order by more than twice the half-width and
/// sqrt(n) * error is below its value at the previous n. Per-target rows pass
/// iff the order is no worse than the previous one beyond twice the
/// half-width.
VerificationReport run_verification(const ChainSpec& spec, const SpectralSummary& summ,
                                    const VerifyOptions& opts);

}  // namespace mkedge
