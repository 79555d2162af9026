#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mkedge/simd/kernels.hpp"

namespace mkedge::simd {

namespace {

constexpr KernelSet kScalarKernels{detail::axpy_scalar, detail::run_paths_scalar};
#if defined(MKEDGE_HAVE_AVX2_KERNELS)
constexpr KernelSet kAvx2Kernels{detail::axpy_avx2, detail::run_paths_avx2};
#endif

Isa initial_isa() {
  if (const char* env = std::getenv("EDGEWORTH_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(MKEDGE_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument(std::string("ISA not supported: ") + std::string(to_string(isa)));
  }
  active().store(isa, std::memory_order_relaxed);
}

const KernelSet& kernels(Isa isa) {
#if defined(MKEDGE_HAVE_AVX2_KERNELS)
  if (isa == Isa::Avx2 && isa_supported(Isa::Avx2)) return kAvx2Kernels;
#endif
  if (isa != Isa::Scalar) {
    throw std::invalid_argument(std::string("ISA not supported: ") + std::string(to_string(isa)));
  }
  return kScalarKernels;
}

const KernelSet& kernels() { return kernels(active_isa()); }

PathTables build_path_tables(std::span<const double> P, int d, std::span<const double> f) {
  if (d < 1 || P.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d) ||
      f.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("path tables: inconsistent sizes");
  }
  PathTables t;
  t.states = d;
  t.table_bits = 2;
  while ((1 << t.table_bits) < d) ++t.table_bits;
  const int T = 1 << t.table_bits;
  const double unit = std::ldexp(1.0, 32 - t.table_bits);
  t.threshold.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(T), 0);
  t.alias.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(T), 0);
  t.f.assign(f.begin(), f.end());

  std::vector<double> scaled(static_cast<std::size_t>(T));
  std::vector<int> small;
  std::vector<int> large;
  for (int i = 0; i < d; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < d; ++j) row_sum += P[static_cast<std::size_t>(i * d + j)];
    small.clear();
    large.clear();
    for (int c = 0; c < T; ++c) {
      const double p = c < d ? P[static_cast<std::size_t>(i * d + c)] / row_sum : 0.0;
      scaled[static_cast<std::size_t>(c)] = p * T;
      (scaled[static_cast<std::size_t>(c)] < 1.0 ? small : large).push_back(c);
    }
    std::vector<double> prob(static_cast<std::size_t>(T), 1.0);
    std::vector<int> alias(static_cast<std::size_t>(T));
    for (int c = 0; c < T; ++c) alias[static_cast<std::size_t>(c)] = c;
    // Vose's construction
    while (!small.empty() && !large.empty()) {
      const int s = small.back();
      small.pop_back();
      const int l = large.back();
      prob[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
      alias[static_cast<std::size_t>(s)] = l;
      scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
      if (scaled[static_cast<std::size_t>(l)] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers are 1 up to rounding, except impossible columns stranded by
    // that rounding, which must always defer to a possible state.
    int most_likely = 0;
    for (int j = 1; j < d; ++j) {
      if (P[static_cast<std::size_t>(i * d + j)] > P[static_cast<std::size_t>(i * d + most_likely)]) {
        most_likely = j;
      }
    }
    for (const auto* rest : {&small, &large}) {
      for (int c : *rest) {
        const bool possible = c < d && P[static_cast<std::size_t>(i * d + c)] > 0.0;
        prob[static_cast<std::size_t>(c)] = possible ? 1.0 : 0.0;
        alias[static_cast<std::size_t>(c)] = possible ? c : most_likely;
      }
    }

    for (int c = 0; c < T; ++c) {
      const auto k = static_cast<std::size_t>(i * T + c);
      const double q = std::clamp(prob[static_cast<std::size_t>(c)], 0.0, 1.0);
      t.threshold[k] = static_cast<std::uint32_t>(std::llround(q * unit));
      t.alias[k] = alias[static_cast<std::size_t>(c)];
    }
  }
  return t;
}

}  // namespace mkedge::simd
