#include <cmath>
#include <sstream>

#include "mkedge/kernel_table.hpp"

namespace mkedge {

KernelTable sample_kernel(int m, const std::function<double(double, double)>& density,
                          const std::function<double(double)>& f) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "kernel: grid size must be >= 2");
  KernelTable kt;
  kt.m = m;
  kt.values.resize(m, m);
  kt.f_values.resize(m);
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) / m;
    kt.f_values(i) = f(x);
    for (int j = 0; j < m; ++j) kt.values(i, j) = density(x, (j + 0.5) / m);
  }
  return kt;
}

DiscretizedKernel discretize_kernel(const KernelTable& kt, Notes* notes) {
  const int m = kt.m;
  if (m < 2 || kt.values.rows() != m || kt.values.cols() != m || kt.f_values.size() != m) {
    throw Error(ErrorCode::InvalidArgument, "kernel: table shape does not match m");
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double v = kt.values(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "kernel: density value " << v << " at (" << i << ", " << j << ") is negative or not finite";
        throw Error(ErrorCode::NegativeEntry, msg.str());
      }
    }
  }
  DiscretizedKernel out;
  out.p_minus = kt.values.minCoeff();
  out.p_plus = kt.values.maxCoeff();
  if (out.p_minus <= 0.0) throw Error(ErrorCode::DegenerateKernel, "kernel: minimum density is not positive");

  ChainSpec& spec = out.spec;
  spec.P = kt.values / static_cast<double>(m);
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = spec.P.row(i).sum();
    worst = std::max(worst, std::abs(s - 1.0));
    spec.P.row(i) /= s;
  }
  if (notes && worst > 0.0) {
    std::ostringstream msg;
    msg << "kernel rows renormalized (largest midpoint-rule mass defect " << worst << ")";
    notes->push_back(msg.str());
  }
  spec.f = kt.f_values;
  spec.mu = kt.mu ? *kt.mu : Vector::Constant(m, 1.0 / m);
  spec.label = "kernel m=" + std::to_string(m);
  spec = validate(std::move(spec), notes);
  out.psi = psi_bounds(spec);
  return out;
}

}  // namespace mkedge
