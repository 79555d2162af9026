#include "mkedge/lattice.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace mkedge {

namespace {

constexpr double kTolerance = 1e-9;
// Rational reconstruction must be much tighter than kTolerance, otherwise
// convergents with denominators below the cap match almost any irrational
// (their error is only ~1 / den^2 >= 1e-12).
constexpr double kReconstructionTolerance = 1e-14;
constexpr std::int64_t kMaxDenominator = 1'000'000;

struct Fraction {
  std::int64_t num;
  std::int64_t den;
};

/// Best rational approximation of x with den <= kMaxDenominator, by continued fractions.
std::optional<Fraction> to_fraction(double x) {
  const double target = x;
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(rest);
    if (std::abs(a_real) > 9e15) break;
    const auto a = static_cast<std::int64_t>(a_real);
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > kMaxDenominator) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (std::abs(target - static_cast<double>(h1) / static_cast<double>(k1)) <=
        kReconstructionTolerance * std::max(1.0, std::abs(target))) {
      return Fraction{h1, k1};
    }
    const double frac = rest - a_real;
    if (frac < 1e-15) break;
    rest = 1.0 / frac;
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> lattice_span(std::span<const double> values) {
  double ref = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) return std::nullopt;
    if (std::abs(v) > kTolerance && (ref == 0.0 || std::abs(v) < ref)) ref = std::abs(v);
  }
  if (ref == 0.0) return std::nullopt;

  std::vector<Fraction> fracs;
  std::int64_t lcm = 1;
  for (double v : values) {
    if (std::abs(v) <= kTolerance * ref) {
      fracs.push_back({0, 1});
      continue;
    }
    const auto fr = to_fraction(v / ref);
    if (!fr) return std::nullopt;
    fracs.push_back(*fr);
    lcm = std::lcm(lcm, fr->den);
    if (lcm > kMaxDenominator) return std::nullopt;
  }

  std::int64_t g = 0;
  std::vector<std::int64_t> ints;
  for (const auto& fr : fracs) {
    const std::int64_t k = fr.num * (lcm / fr.den);
    ints.push_back(k);
    g = std::gcd(g, k < 0 ? -k : k);
  }
  if (g == 0) return std::nullopt;
  const double span = ref * static_cast<double>(g) / static_cast<double>(lcm);

  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const double v = values[idx];
    const double k = std::round(v / span);
    if (std::abs(v - k * span) > kTolerance * std::max(1.0, std::abs(v))) return std::nullopt;
  }
  return span;
}

std::optional<double> difference_span(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> diffs;
  diffs.reserve(values.size());
  for (double v : values) diffs.push_back(v - values.front());
  return lattice_span(diffs);
}

}  // namespace mkedge
