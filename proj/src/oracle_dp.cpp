#include <algorithm>
#include <cmath>
#include <string>

#include "mkedge/lattice.hpp"
#include "mkedge/oracle.hpp"
#include "mkedge/simd/kernels.hpp"

namespace mkedge {

namespace {

// Support points within this relative distance of x count as equal to x.
constexpr double kTieTolerance = 1e-9;

}  // namespace

LatticeLaw::LatticeLaw(int n, int states, double span, double origin, long long s_min, long long s_max)
    : n_(n), states_(states), span_(span), origin_(origin), s_min_(s_min), s_max_(s_max) {
  if (states < 1 || span <= 0.0 || s_max < s_min) {
    throw Error(ErrorCode::InvalidArgument, "lattice law: bad shape");
  }
  const std::size_t cells = static_cast<std::size_t>(states) * static_cast<std::size_t>(states) * width();
  mass_.assign(cells, 0.0);
}

std::size_t LatticeLaw::offset(int i, int j) const {
  return (static_cast<std::size_t>(i) * static_cast<std::size_t>(states_) + static_cast<std::size_t>(j)) *
         width();
}

double LatticeLaw::mass(int i, int j, long long s) const {
  if (s < s_min_ || s > s_max_) return 0.0;
  return mass_[offset(i, j) + static_cast<std::size_t>(s - s_min_)];
}

std::span<const double> LatticeLaw::masses(int i, int j) const {
  return {mass_.data() + offset(i, j), width()};
}

std::span<double> LatticeLaw::masses(int i, int j) { return {mass_.data() + offset(i, j), width()}; }

void LatticeLaw::finalize() {
  const std::size_t w = width();
  const auto d = static_cast<std::size_t>(states_);
  cumulative_.assign(mass_.size(), 0.0);
  cumulative_all_.assign(d * w, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t base = (i * d + j) * w;
      double run = 0.0;
      for (std::size_t k = 0; k < w; ++k) {
        run += mass_[base + k];
        cumulative_[base + k] = run;
      }
    }
    double run = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
      for (std::size_t j = 0; j < d; ++j) run += mass_[(i * d + j) * w + k];
      cumulative_all_[i * w + k] = run;
    }
  }
}

std::size_t LatticeLaw::bins_below(double x, bool inclusive) const {
  const double s = (x - origin_) / span_ - static_cast<double>(s_min_);
  const double tol = kTieTolerance * std::max(1.0, std::abs(s));
  double count = inclusive ? std::floor(s + tol) + 1.0 : std::ceil(s - tol);
  count = std::clamp(count, 0.0, static_cast<double>(width()));
  return static_cast<std::size_t>(count);
}

double LatticeLaw::probability_below(int start, int target, double x, bool inclusive) const {
  if (!has_start(start) || target < kAllStates || target >= states_) {
    throw Error(ErrorCode::InvalidArgument, "lattice law: state out of range");
  }
  if (cumulative_.empty()) throw Error(ErrorCode::InvalidArgument, "lattice law: not finalized");
  const std::size_t k = bins_below(x, inclusive);
  if (k == 0) return 0.0;
  if (target == kAllStates) return cumulative_all_[static_cast<std::size_t>(start) * width() + k - 1];
  return cumulative_[offset(start, target) + k - 1];
}

LatticeLaw dp_exact(const ChainSpec& spec, int n, double budget) {
  const int d = spec.d();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dp_exact: n must be >= 1");
  const std::vector<double> f(spec.f.data(), spec.f.data() + d);
  const double lowest = *std::min_element(f.begin(), f.end());
  const double highest = *std::max_element(f.begin(), f.end());
  double h = 1.0;
  if (highest > lowest) {
    const auto span = difference_span(f);
    if (!span) throw Error(ErrorCode::NotLattice, "dp_exact: observable values share no lattice span");
    h = *span;
  }
  std::vector<long long> k(static_cast<std::size_t>(d));
  long long k_max = 0;
  for (int j = 0; j < d; ++j) {
    k[static_cast<std::size_t>(j)] = std::llround((f[static_cast<std::size_t>(j)] - lowest) / h);
    k_max = std::max(k_max, k[static_cast<std::size_t>(j)]);
  }
  const double range = static_cast<double>(n) * static_cast<double>(k_max) + 1.0;
  const double cells = static_cast<double>(n) * d * range;
  if (cells > budget) {
    throw Error(ErrorCode::BudgetExceeded,
                "dp_exact: " + std::to_string(cells) + " cells exceed the budget of " + std::to_string(budget));
  }

  LatticeLaw law(n, d, h, static_cast<double>(n) * lowest, 0, static_cast<long long>(n) * k_max);
  const std::size_t w = law.width();
  const auto& kern = simd::kernels();
  std::vector<double> cur(static_cast<std::size_t>(d) * w);
  std::vector<double> next(cur.size());
  for (int i = 0; i < d; ++i) {
    std::fill(cur.begin(), cur.end(), 0.0);
    cur[static_cast<std::size_t>(i) * w] = 1.0;
    for (int t = 0; t < n; ++t) {
      // After t steps the support is [0, t * k_max].
      const std::size_t len = static_cast<std::size_t>(t) * static_cast<std::size_t>(k_max) + 1;
      std::fill(next.begin(), next.end(), 0.0);
      for (int a = 0; a < d; ++a) {
        const double* src = cur.data() + static_cast<std::size_t>(a) * w;
        for (int j = 0; j < d; ++j) {
          const double p = spec.P(a, j);
          if (p == 0.0) continue;
          double* dst = next.data() + static_cast<std::size_t>(j) * w +
                        static_cast<std::size_t>(k[static_cast<std::size_t>(j)]);
          kern.axpy(p, src, dst, len);
        }
      }
      cur.swap(next);
    }
    for (int j = 0; j < d; ++j) {
      const auto out = law.masses(i, j);
      std::copy_n(cur.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * w), w, out.begin());
    }
  }
  law.finalize();
  return law;
}

DpMoments dp_moments(const LatticeLaw& law, int p, const RowVector& weights) {
  if (p < 0 || p > 6) throw Error(ErrorCode::InvalidArgument, "dp_moments: order must be in [0, 6]");
  const int d = law.states();
  if (weights.size() != d) throw Error(ErrorCode::InvalidArgument, "dp_moments: weight length");
  DpMoments out;
  out.per_start.assign(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(p) + 1, 0.0));
  out.mixed.assign(static_cast<std::size_t>(p) + 1, 0.0);
  for (int i = 0; i < d; ++i) {
    auto& m = out.per_start[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
      const auto mass = law.masses(i, j);
      for (std::size_t s = 0; s < mass.size(); ++s) {
        if (mass[s] == 0.0) continue;
        const double x = law.value(law.s_min() + static_cast<long long>(s));
        double power = mass[s];
        for (int q = 0; q <= p; ++q) {
          m[static_cast<std::size_t>(q)] += power;
          power *= x;
        }
      }
    }
    for (int q = 0; q <= p; ++q) {
      out.mixed[static_cast<std::size_t>(q)] += weights(i) * m[static_cast<std::size_t>(q)];
    }
  }
  return out;
}

}  // namespace mkedge
