#pragma once

// Chains shared by the unit tests and the acceptance suite.

#include <cmath>
#include <numbers>
#include <random>

#include "mkedge/chain_core.hpp"
#include "mkedge/kernel_table.hpp"

namespace mkedge::testing {

inline ChainSpec make_chain(Matrix P, Vector f, std::string label) {
  ChainSpec s;
  const auto d = P.rows();
  s.P = std::move(P);
  s.f = std::move(f);
  s.mu = Vector::Constant(d, 1.0 / static_cast<double>(d));
  s.label = std::move(label);
  return s;
}

inline ChainSpec centered(ChainSpec spec) {
  const StationaryStructure ss = stationary(spec);
  return center_observable(std::move(spec), ss.pi);
}

/// Chain (a): P = [[0.7, 0.3], [0.4, 0.6]], f = (3, -4), already centered.
inline ChainSpec two_state() {
  Matrix P(2, 2);
  P << 0.7, 0.3, 0.4, 0.6;
  Vector f(2);
  f << 3.0, -4.0;
  ChainSpec s = make_chain(P, f, "two-state");
  s.mu << 0.5, 0.5;
  return s;
}

/// Chain (b): strictly positive random chain with a centered observable.
inline ChainSpec random_positive(int d = 5, std::uint64_t seed = 20240611) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix P(d, d);
  Vector f(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) P(i, j) = u(rng);
    P.row(i) /= P.row(i).sum();
    f(i) = g(rng);
  }
  return centered(make_chain(P, f, "random-positive"));
}

/// Chain (c): rank one, every row equal to mu, so the steps are i.i.d.
inline ChainSpec rank_one(const Vector& mu, const Vector& f) {
  const auto d = mu.size();
  Matrix P(d, d);
  for (Eigen::Index i = 0; i < d; ++i) P.row(i) = mu.transpose();
  ChainSpec s = make_chain(P, f, "rank-one");
  s.mu = mu;
  return centered(s);
}

inline ChainSpec rank_one_skewed() {
  Vector mu(4);
  mu << 0.1, 0.2, 0.3, 0.4;
  Vector f(4);
  f << -1.5, 0.25, std::sqrt(2.0), 2.0;
  return rank_one(mu, f);
}

/// Three-state strictly positive chain with f = (1, sqrt 2, 0) centered.
inline ChainSpec three_state_nonlattice() {
  Matrix P(3, 3);
  P << 0.85, 0.14, 0.01, 0.03, 0.34, 0.63, 0.01, 0.13, 0.86;
  Vector f(3);
  f << 1.0, std::sqrt(2.0), 0.0;
  return centered(make_chain(P, f, "three-state"));
}

inline double cosine_density(double x, double y) {
  return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * (x - y));
}

/// The cosine kernel discretized on m midpoints with observable f, centered.
inline ChainSpec cosine_kernel(int m, double (*f)(double)) {
  const KernelTable kt = sample_kernel(m, cosine_density, f);
  return centered(discretize_kernel(kt).spec);
}

inline double skewed_observable(double x) { return 1.0 / x + std::numbers::pi * x; }

}  // namespace mkedge::testing
