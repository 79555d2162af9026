#include <algorithm>
#include <cmath>
#include <string>

#include "mkedge/oracle.hpp"
#include "mkedge/parallel.hpp"
#include "mkedge/simd/kernels.hpp"

namespace mkedge {

namespace {

constexpr std::size_t kMinSamples = 10000;
constexpr std::size_t kPathGrain = 1 << 14;

simd::PathTables tables_for(const ChainSpec& spec) {
  const int d = spec.d();
  std::vector<double> P(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) P[static_cast<std::size_t>(i * d + j)] = spec.P(i, j);
  }
  const std::vector<double> f(spec.f.data(), spec.f.data() + d);
  return simd::build_path_tables(P, d, f);
}

std::vector<int> resolve_starts(const ChainSpec& spec, std::span<const int> starts) {
  std::vector<int> out(starts.begin(), starts.end());
  if (out.empty()) {
    for (int i = 0; i < spec.d(); ++i) out.push_back(i);
  }
  for (int s : out) {
    if (s < 0 || s >= spec.d()) throw Error(ErrorCode::InvalidArgument, "mc: start state out of range");
  }
  return out;
}

void check_horizons(std::span<const int> horizons) {
  if (horizons.empty()) throw Error(ErrorCode::InvalidArgument, "mc: no horizons");
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (horizons[k] < 1 || (k > 0 && horizons[k] <= horizons[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "mc: horizons must be positive and strictly ascending");
    }
  }
}

std::vector<PathSamples> simulate_with(const simd::PathTables& tables, int start, std::span<const int> horizons,
                                       std::size_t samples, std::uint64_t seed) {
  std::vector<double> sums(horizons.size() * samples);
  std::vector<std::int32_t> states(horizons.size() * samples);
  const auto& kern = simd::kernels();
  parallel_for(samples, kPathGrain, [&](std::size_t begin, std::size_t end) {
    simd::PathBlock block;
    block.seed = seed;
    block.start = start;
    block.first_path = begin;
    block.count = end - begin;
    block.horizons = horizons;
    block.sums = sums.data() + begin;
    block.states = states.data() + begin;
    block.stride = samples;
    kern.run_paths(tables, block);
  });
  std::vector<PathSamples> out(horizons.size());
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    out[k].n = horizons[k];
    out[k].start = start;
    const auto first = static_cast<std::ptrdiff_t>(k * samples);
    const auto last = static_cast<std::ptrdiff_t>((k + 1) * samples);
    out[k].sums.assign(sums.begin() + first, sums.begin() + last);
    out[k].states.assign(states.begin() + first, states.begin() + last);
  }
  return out;
}

}  // namespace

std::vector<PathSamples> simulate_paths(const ChainSpec& spec, int start, std::span<const int> horizons,
                                        std::size_t samples, std::uint64_t seed) {
  check_horizons(horizons);
  if (start < 0 || start >= spec.d()) throw Error(ErrorCode::InvalidArgument, "mc: start state out of range");
  return simulate_with(tables_for(spec), start, horizons, samples, seed);
}

EmpiricalLaw::EmpiricalLaw(int n, int states, std::size_t samples, std::uint64_t seed)
    : n_(n), states_(states), samples_(samples), seed_(seed) {}

bool EmpiricalLaw::has_start(int start) const {
  return std::any_of(per_start_.begin(), per_start_.end(), [&](const PerStart& p) { return p.start == start; });
}

const EmpiricalLaw::PerStart& EmpiricalLaw::of(int start) const {
  for (const auto& p : per_start_) {
    if (p.start == start) return p;
  }
  throw Error(ErrorCode::InvalidArgument, "empirical law: start " + std::to_string(start) + " not sampled");
}

void EmpiricalLaw::add(const PathSamples& paths) {
  if (paths.n != n_ || paths.sums.size() != samples_ || paths.states.size() != samples_) {
    throw Error(ErrorCode::InvalidArgument, "empirical law: sample shape mismatch");
  }
  if (has_start(paths.start)) throw Error(ErrorCode::InvalidArgument, "empirical law: start added twice");
  PerStart p;
  p.start = paths.start;
  p.by_state.resize(static_cast<std::size_t>(states_));
  for (std::size_t k = 0; k < samples_; ++k) {
    p.by_state[static_cast<std::size_t>(paths.states[k])].push_back(paths.sums[k]);
  }
  for (auto& v : p.by_state) std::sort(v.begin(), v.end());
  p.all = paths.sums;
  std::sort(p.all.begin(), p.all.end());
  per_start_.push_back(std::move(p));
}

double EmpiricalLaw::probability_below(int start, int target, double x, bool inclusive) const {
  if (target < kAllStates || target >= states_) {
    throw Error(ErrorCode::InvalidArgument, "empirical law: target out of range");
  }
  const PerStart& p = of(start);
  const auto& v = target == kAllStates ? p.all : p.by_state[static_cast<std::size_t>(target)];
  const auto it = inclusive ? std::upper_bound(v.begin(), v.end(), x) : std::lower_bound(v.begin(), v.end(), x);
  return static_cast<double>(it - v.begin()) / static_cast<double>(samples_);
}

std::vector<EmpiricalLaw> mc_sample_horizons(const ChainSpec& spec, std::span<const int> horizons,
                                             std::size_t samples, std::uint64_t seed, std::span<const int> starts) {
  if (samples < kMinSamples) {
    throw Error(ErrorCode::InvalidArgument, "mc: samples must be at least " + std::to_string(kMinSamples));
  }
  check_horizons(horizons);
  const auto tables = tables_for(spec);
  std::vector<EmpiricalLaw> laws;
  for (int h : horizons) laws.emplace_back(h, spec.d(), samples, seed);
  for (int start : resolve_starts(spec, starts)) {
    auto paths = simulate_with(tables, start, horizons, samples, seed);
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      laws[k].add(paths[k]);
      paths[k] = PathSamples{};
    }
  }
  return laws;
}

EmpiricalLaw mc_sample(const ChainSpec& spec, int n, std::size_t samples, std::uint64_t seed,
                       std::span<const int> starts) {
  const int horizon[] = {n};
  return std::move(mc_sample_horizons(spec, horizon, samples, seed, starts).front());
}

double ks_halfwidth(std::size_t samples) { return 1.36 / std::sqrt(static_cast<double>(samples)); }

double dkw_halfwidth99(std::size_t samples) { return 1.63 / std::sqrt(static_cast<double>(samples)); }

}  // namespace mkedge
