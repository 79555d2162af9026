#pragma once

// Data-parallel inner loops of the oracles. Every kernel has a scalar
// reference and, on x86-64, an AVX2 variant; the variants produce
// bit-identical results (no FMA contraction, same accumulation order), which
// the equivalence tests assert.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mkedge::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

bool isa_supported(Isa isa);

/// Best supported ISA unless EDGEWORTH_SIMD=scalar|avx2 overrides it (or
/// set_active_isa was called).
Isa active_isa();

/// Throws std::invalid_argument when the ISA is not supported here.
void set_active_isa(Isa isa);

/// Walker alias tables for one-uniform-per-step transitions. Columns are
/// padded to T = 2^table_bits >= max(d, 4); a 32-bit draw x selects column
/// x >> (32 - table_bits) and accepts it iff its low bits are below the
/// column threshold, otherwise jumps to the alias.
struct PathTables {
  int states = 0;
  int table_bits = 0;
  std::vector<std::uint32_t> threshold;  // states * T
  std::vector<std::int32_t> alias;       // states * T
  std::vector<double> f;                 // observable per state
};

/// `P` is row-major d x d.
PathTables build_path_tables(std::span<const double> P, int d, std::span<const double> f);

/// A block of independent paths started at `start`. Path p uses the stream
/// keyed by (seed, start, first_path + p). At each horizon h (strictly
/// ascending, >= 1) the running sum S_h and the state xi_h are written to
/// sums[k * stride + p] and states[k * stride + p] for horizon index k;
/// stride 0 means `count`.
struct PathBlock {
  std::uint64_t seed = 0;
  int start = 0;
  std::uint64_t first_path = 0;
  std::size_t count = 0;
  std::span<const int> horizons;
  double* sums = nullptr;
  std::int32_t* states = nullptr;
  std::size_t stride = 0;

  std::size_t out_stride() const { return stride == 0 ? count : stride; }
};

struct KernelSet {
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*run_paths)(const PathTables& tables, const PathBlock& block);
};

const KernelSet& kernels(Isa isa);
const KernelSet& kernels();  // active ISA

/// y += a x, elementwise.
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  kernels().axpy(a, x.data(), y.data(), x.size());
}

inline void run_paths(const PathTables& tables, const PathBlock& block) {
  kernels().run_paths(tables, block);
}

namespace detail {
/// Out-of-line so that ISA-specific translation units never instantiate the
/// inline generator themselves.
std::array<std::uint32_t, 4> seed_stream(std::uint64_t seed, int start, std::uint64_t path);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void run_paths_scalar(const PathTables& tables, const PathBlock& block);
#if defined(MKEDGE_HAVE_AVX2_KERNELS)
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void run_paths_avx2(const PathTables& tables, const PathBlock& block);
#endif
}  // namespace detail

}  // namespace mkedge::simd
