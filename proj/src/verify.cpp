#include <algorithm>
#include <cmath>
#include <map>

#include "mkedge/oracle.hpp"

namespace mkedge {

ApproxRow approx_row(const EdgeworthApprox& approx) {
  return [&approx](int start, double z, bool) { return approx.row(start, z); };
}

ApproxRow law_row(const JointLaw& law, double scale) {
  return [&law, scale](int start, double z, bool inclusive) {
    RowVector r(law.states());
    for (int j = 0; j < law.states(); ++j) r(j) = law.probability_below(start, j, z * scale, inclusive);
    return r;
  };
}

SupError sup_error(const ApproxRow& approx, int approx_n, const JointLaw& truth, double scale,
                   std::span<const double> z_grid, int start) {
  if (z_grid.empty()) throw Error(ErrorCode::GridMismatch, "sup_error: empty z grid");
  if (approx_n >= 0 && approx_n != truth.n()) {
    throw Error(ErrorCode::GridMismatch, "sup_error: approximation built for n = " + std::to_string(approx_n) +
                                             " but the oracle has n = " + std::to_string(truth.n()));
  }
  if (!truth.has_start(start)) throw Error(ErrorCode::GridMismatch, "sup_error: start not covered by the oracle");
  const int d = truth.states();
  SupError out;
  out.start = start;
  out.per_target.assign(static_cast<std::size_t>(d) + 1, 0.0);
  for (double z : z_grid) {
    const double x = z * scale;
    for (bool inclusive : {false, true}) {
      const RowVector a = approx(start, z, inclusive);
      for (int j = 0; j < d; ++j) {
        const double gap = std::abs(truth.probability_below(start, j, x, inclusive) - a(j));
        auto& slot = out.per_target[static_cast<std::size_t>(j)];
        slot = std::max(slot, gap);
      }
      const double gap = std::abs(truth.probability_below(start, kAllStates, x, inclusive) - a.sum());
      out.per_target.back() = std::max(out.per_target.back(), gap);
    }
  }
  out.sup = *std::max_element(out.per_target.begin(), out.per_target.end());
  return out;
}

std::vector<double> augmented_grid(std::span<const double> base, const EmpiricalLaw& law, int start,
                                   double scale, std::size_t max_points) {
  std::vector<double> grid(base.begin(), base.end());
  const auto& all = law.of(start).all;
  const std::size_t count = std::min(max_points, all.size());
  for (std::size_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>((static_cast<double>(k) + 0.5) / static_cast<double>(count) *
                                              static_cast<double>(all.size()));
    grid.push_back(all[std::min(idx, all.size() - 1)] / scale);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

bool VerificationReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.pass; });
}

VerificationReport run_verification(const ChainSpec& spec, const SpectralSummary& summ,
                                    const VerifyOptions& opts) {
  if (opts.n_values.empty()) throw Error(ErrorCode::InvalidArgument, "verify: no n values");
  if (opts.max_order < 0 || opts.max_order > summ.order_k - 2) {
    throw Error(ErrorCode::InvalidArgument, "verify: order exceeds the available cumulants");
  }
  const std::vector<double> base = opts.z_grid.empty() ? default_z_grid() : opts.z_grid;
  const double hw = ks_halfwidth(opts.samples);
  const int d = spec.d();
  std::vector<int> starts = opts.starts;
  if (starts.empty()) {
    for (int i = 0; i < d; ++i) starts.push_back(i);
  }

  // One start at a time keeps memory at one start's paths; rows are then
  // regrouped by n.
  std::vector<std::vector<VerifyRow>> rows_by_n(opts.n_values.size());
  for (int start : starts) {
    const std::vector<int> one{start};
    const auto laws = mc_sample_horizons(spec, opts.n_values, opts.samples, opts.seed, one);
    std::map<int, double> previous_scaled;  // by order
    for (std::size_t k = 0; k < laws.size(); ++k) {
      const EmpiricalLaw& law = laws[k];
      const int n = law.n();
      const double scale = summ.sigma * std::sqrt(static_cast<double>(n));
      const auto grid = augmented_grid(base, law, start, scale, opts.quantile_points);
      std::vector<SupError> by_order;
      for (int order = 0; order <= opts.max_order; ++order) {
        const EdgeworthApprox approx(summ, n, order);
        by_order.push_back(sup_error(approx_row(approx), n, law, scale, grid, start));
      }
      auto& rows = rows_by_n[k];
      for (int order = 0; order <= opts.max_order; ++order) {
        const SupError& e = by_order[static_cast<std::size_t>(order)];
        for (int t = 0; t <= d; ++t) {
          VerifyRow row{n, order, start, t == d ? kAllStates : t, e.per_target[static_cast<std::size_t>(t)]};
          row.scaled = std::sqrt(static_cast<double>(n)) * row.sup_error;
          row.halfwidth = hw;
          if (order > 0) {
            row.pass = row.sup_error <=
                       by_order[static_cast<std::size_t>(order) - 1].per_target[static_cast<std::size_t>(t)] + 2.0 * hw;
          }
          rows.push_back(row);
        }
        VerifyRow sup{n, order, start, kSupOverTargets, e.sup};
        sup.scaled = std::sqrt(static_cast<double>(n)) * sup.sup_error;
        sup.halfwidth = hw;
        if (order > 0) {
          sup.pass = by_order[static_cast<std::size_t>(order) - 1].sup - sup.sup_error > 2.0 * hw;
          if (const auto it = previous_scaled.find(order); it != previous_scaled.end()) {
            sup.pass = sup.pass && sup.scaled < it->second;
          }
          previous_scaled[order] = sup.scaled;
        }
        rows.push_back(sup);
      }
    }
  }

  VerificationReport report;
  report.samples = opts.samples;
  report.seed = opts.seed;
  for (auto& rows : rows_by_n) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  return report;
}

}  // namespace mkedge
