#pragma once

// Continuous-state chains on [0, 1] enter through a transition density sampled
// at the midpoints of an m-cell grid, discretized by the midpoint rule.

#include <functional>
#include <optional>

#include "mkedge/chain_core.hpp"

namespace mkedge {

struct KernelTable {
  int m = 0;
  Matrix values;            // values(i, j) = p(x_i, x_j) at midpoints
  Vector f_values;          // f(x_i)
  std::optional<Vector> mu; // uniform when absent
};

struct DiscretizedKernel {
  ChainSpec spec;
  double p_minus = 0.0;
  double p_plus = 0.0;
  PsiBounds psi;
};

/// Samples p and f at the midpoints (i + 1/2) / m.
KernelTable sample_kernel(int m, const std::function<double(double, double)>& density,
                          const std::function<double(double)>& f);

/// P_ij = values(i, j) / m with rows renormalized to 1. Throws NegativeEntry
/// for negative samples and DegenerateKernel when the minimum is not positive.
DiscretizedKernel discretize_kernel(const KernelTable& kt, Notes* notes = nullptr);

}  // namespace mkedge
