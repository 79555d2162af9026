#pragma once

#include <optional>
#include <span>

namespace mkedge {

/// Largest h > 0 such that every value is an integer multiple of h within
/// 1e-9 (relative), found by rational reconstruction of the ratios to the
/// smallest nonzero magnitude with denominators capped at 1e6. Returns
/// nullopt when no such span exists or all values are zero.
std::optional<double> lattice_span(std::span<const double> values);

/// Span of the pairwise differences. Sums of such values live on a shifted
/// lattice iff this exists.
std::optional<double> difference_span(std::span<const double> values);

}  // namespace mkedge
