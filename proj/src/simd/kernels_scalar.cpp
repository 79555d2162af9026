#include "mkedge/simd/kernels.hpp"
#include "mkedge/simd/rng.hpp"

namespace mkedge::simd::detail {

std::array<std::uint32_t, 4> seed_stream(std::uint64_t seed, int start, std::uint64_t path) {
  return stream_state(seed, start, path);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

void run_paths_scalar(const PathTables& tables, const PathBlock& block) {
  const int bits = tables.table_bits;
  const int shift = 32 - bits;
  const std::uint32_t frac_mask = (std::uint32_t{1} << shift) - 1;
  const std::uint32_t* thr = tables.threshold.data();
  const std::int32_t* alias = tables.alias.data();
  const double* f = tables.f.data();
  const int last = block.horizons.empty() ? 0 : block.horizons.back();
  const std::size_t stride = block.out_stride();

  for (std::size_t p = 0; p < block.count; ++p) {
    auto state = stream_state(block.seed, block.start, block.first_path + p);
    std::int32_t cur = block.start;
    double sum = 0.0;
    std::size_t next_h = 0;
    for (int t = 1; t <= last; ++t) {
      const std::uint32_t x = xoshiro128pp(state);
      const auto col = static_cast<std::int32_t>(x >> shift);
      const std::uint32_t frac = x & frac_mask;
      const std::size_t idx = (static_cast<std::size_t>(cur) << bits) + static_cast<std::size_t>(col);
      cur = frac < thr[idx] ? col : alias[idx];
      sum += f[cur];
      if (t == block.horizons[next_h]) {
        block.sums[next_h * stride + p] = sum;
        block.states[next_h * stride + p] = cur;
        ++next_h;
      }
    }
  }
}

}  // namespace mkedge::simd::detail
