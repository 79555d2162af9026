#include "mkedge/expansion.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mkedge {

namespace {

double factorial(int m) {
  double r = 1.0;
  for (int i = 2; i <= m; ++i) r *= i;
  return r;
}

void require_cumulants(std::span<const double> cumulants, int highest) {
  if (static_cast<int>(cumulants.size()) <= highest) {
    std::ostringstream os;
    os << "cumulant gamma_" << highest << " not available";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

void enumerate(int pos, int m, int remaining, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (pos > m) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  for (int k = remaining / pos; k >= 0; --k) {
    cur[static_cast<std::size_t>(pos - 1)] = k;
    enumerate(pos + 1, m, remaining - k * pos, cur, out);
  }
  cur[static_cast<std::size_t>(pos - 1)] = 0;
}

/// prod_m (1/k_m!) (gamma_{m+2} / ((m+2)! sigma^{m+2}))^{k_m} and sum k_m.
std::pair<double, int> partition_weight(const std::vector<int>& tuple,
                                        std::span<const double> cumulants, double sigma) {
  double w = 1.0;
  int count = 0;
  for (std::size_t idx = 0; idx < tuple.size(); ++idx) {
    const int k = tuple[idx];
    if (k == 0) continue;
    const int r = static_cast<int>(idx) + 3;  // m + 2 with m = idx + 1
    const double base = cumulants[static_cast<std::size_t>(r)] / (factorial(r) * std::pow(sigma, r));
    w *= std::pow(base, k) / factorial(k);
    count += k;
  }
  return {w, count};
}

}  // namespace

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double hermite(int nu, double z) {
  if (nu < 0) throw Error(ErrorCode::InvalidArgument, "Hermite degree must be >= 0");
  if (nu == 0) return 1.0;
  double prev = 1.0;
  double cur = z;
  for (int k = 1; k < nu; ++k) {
    const double next = z * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

PartitionSet partitions(int m) {
  if (m < 0 || m > 12) throw Error(ErrorCode::InvalidArgument, "partition size must be in [0, 12]");
  PartitionSet ps;
  ps.m = m;
  if (m == 0) {
    ps.tuples.emplace_back();
    return ps;
  }
  std::vector<int> cur(static_cast<std::size_t>(m), 0);
  enumerate(1, m, m, cur, ps.tuples);
  return ps;
}

std::complex<double> frak_P(int nu, std::complex<double> itheta, std::span<const double> cumulants,
                            double sigma) {
  if (nu == 0) return 1.0;
  require_cumulants(cumulants, nu + 2);
  std::complex<double> total = 0.0;
  for (const auto& tuple : partitions(nu).tuples) {
    std::complex<double> prod = 1.0;
    for (std::size_t idx = 0; idx < tuple.size(); ++idx) {
      const int k = tuple[idx];
      if (k == 0) continue;
      const int r = static_cast<int>(idx) + 3;
      const auto base = cumulants[static_cast<std::size_t>(r)] * std::pow(itheta, r) /
                        (factorial(r) * std::pow(sigma, r));
      prod *= std::pow(base, k) / factorial(k);
    }
    total += prod;
  }
  return total;
}

double coeff_a(int j, int nu, double z, std::span<const double> cumulants, double sigma) {
  if (nu < 1 || j < 0 || j > nu) throw Error(ErrorCode::InvalidArgument, "need 0 <= j <= nu, nu >= 1");
  require_cumulants(cumulants, nu - j + 2);
  const double lead = 1.0 / (factorial(j) * std::pow(sigma, j));
  double sum = 0.0;
  for (const auto& tuple : partitions(nu - j).tuples) {
    const auto [w, count] = partition_weight(tuple, cumulants, sigma);
    sum += lead * w * hermite(nu - 1 + 2 * count, z);
  }
  return -normal_pdf(z) * sum;
}

Matrix operator_A(int m, double z, std::span<const Matrix> proj_derivs,
                  std::span<const double> cumulants, double sigma) {
  if (static_cast<int>(proj_derivs.size()) <= m) {
    throw Error(ErrorCode::InvalidArgument, "projector derivatives not available to order m");
  }
  if (m == 0) return normal_cdf(z) * proj_derivs[0];
  Matrix A = Matrix::Zero(proj_derivs[0].rows(), proj_derivs[0].cols());
  for (int j = 0; j <= m; ++j) {
    A += coeff_a(j, m, z, cumulants, sigma) * proj_derivs[static_cast<std::size_t>(j)];
  }
  return A;
}

EdgeworthApprox::EdgeworthApprox(const SpectralSummary& summ, int n, int order)
    : proj_derivs_(summ.proj_derivs),
      cumulants_(summ.cumulants_gamma),
      sigma_(summ.sigma),
      n_(n),
      order_(order) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "chain length n must be >= 1");
  if (order < 0 || order > kMaxExpansionOrder || order > summ.order_k - 2) {
    std::ostringstream os;
    os << "expansion order " << order << " unavailable (summary order k = " << summ.order_k << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  if (!(sigma_ > 0.0)) throw Error(ErrorCode::DegenerateVariance, "sigma must be positive");

  combos_.resize(static_cast<std::size_t>(order + 1));
  for (int m = 1; m <= order; ++m) {
    auto& per_j = combos_[static_cast<std::size_t>(m)];
    per_j.resize(static_cast<std::size_t>(m + 1));
    for (int j = 0; j <= m; ++j) {
      const double lead = 1.0 / (factorial(j) * std::pow(sigma_, j));
      std::vector<HermiteTerm> terms;
      for (const auto& tuple : partitions(m - j).tuples) {
        const auto [w, count] = partition_weight(tuple, cumulants_, sigma_);
        const int degree = m - 1 + 2 * count;
        bool merged = false;
        for (auto& t : terms) {
          if (t.degree == degree) {
            t.coeff += lead * w;
            merged = true;
          }
        }
        if (!merged) terms.push_back({degree, lead * w});
      }
      per_j[static_cast<std::size_t>(j)] = std::move(terms);
    }
  }
}

std::vector<double> EdgeworthApprox::weights(double z) const {
  std::vector<double> w(static_cast<std::size_t>(order_ + 1), 0.0);
  w[0] = normal_cdf(z);
  if (order_ == 0) return w;

  int max_degree = 0;
  for (const auto& per_j : combos_) {
    for (const auto& terms : per_j) {
      for (const auto& t : terms) max_degree = std::max(max_degree, t.degree);
    }
  }
  std::vector<double> he(static_cast<std::size_t>(max_degree + 1));
  he[0] = 1.0;
  if (max_degree >= 1) he[1] = z;
  for (int k = 1; k < max_degree; ++k) {
    he[static_cast<std::size_t>(k + 1)] = z * he[static_cast<std::size_t>(k)] - k * he[static_cast<std::size_t>(k - 1)];
  }

  const double pdf = normal_pdf(z);
  for (int m = 1; m <= order_; ++m) {
    const double scale = std::pow(static_cast<double>(n_), -0.5 * m);
    const auto& per_j = combos_[static_cast<std::size_t>(m)];
    for (int j = 0; j <= m; ++j) {
      double s = 0.0;
      for (const auto& t : per_j[static_cast<std::size_t>(j)]) {
        s += t.coeff * he[static_cast<std::size_t>(t.degree)];
      }
      w[static_cast<std::size_t>(j)] += -pdf * s * scale;
    }
  }
  return w;
}

Matrix EdgeworthApprox::term(int m, double z) const {
  if (m < 0 || m > order_) throw Error(ErrorCode::InvalidArgument, "term index out of range");
  if (m == 0) return normal_cdf(z) * proj_derivs_[0];
  return std::pow(static_cast<double>(n_), -0.5 * m) *
         operator_A(m, z, proj_derivs_, cumulants_, sigma_);
}

Matrix EdgeworthApprox::evaluate(double z) const {
  const auto w = weights(z);
  Matrix out = w[0] * proj_derivs_[0];
  for (std::size_t j = 1; j < w.size(); ++j) out += w[j] * proj_derivs_[j];
  return out;
}

RowVector EdgeworthApprox::row(int i, double z) const {
  const auto w = weights(z);
  RowVector out = w[0] * proj_derivs_[0].row(i);
  for (std::size_t j = 1; j < w.size(); ++j) out += w[j] * proj_derivs_[j].row(i);
  return out;
}

Matrix edgeworth_cdf(const SpectralSummary& summ, int n, int order, double z) {
  const EdgeworthApprox approx(summ, n, order);
  Matrix out = approx.term(0, z);
  for (int m = 1; m <= order; ++m) out += approx.term(m, z);
  return out;
}

double scalar_esae(const SpectralSummary& summ, int n, double z) {
  require_cumulants(summ.cumulants_gamma, 3);
  const double s3 = std::pow(summ.sigma, 3);
  return normal_cdf(z) + normal_pdf(z) * summ.cumulants_gamma[3] / (6.0 * s3) * (1.0 - z * z) /
                             std::sqrt(static_cast<double>(n));
}

CMatrix frequency_form(const SpectralSummary& summ, int n, int order, double theta) {
  const auto d = summ.proj_derivs.front().rows();
  const std::complex<double> it(0.0, theta);
  CMatrix out = CMatrix::Zero(d, d);
  for (int m = 0; m <= order; ++m) {
    const double scale = std::pow(static_cast<double>(n), -0.5 * m);
    for (int j = 0; j <= m; ++j) {
      const auto c = std::pow(it, j) / (factorial(j) * std::pow(summ.sigma, j)) *
                     frak_P(m - j, it, summ.cumulants_gamma, summ.sigma) * scale;
      out += c * summ.proj_derivs[static_cast<std::size_t>(j)].cast<std::complex<double>>();
    }
  }
  return std::exp(-0.5 * theta * theta) * out;
}

std::vector<double> default_z_grid() {
  std::vector<double> grid;
  grid.reserve(481);
  for (int k = 0; k <= 480; ++k) grid.push_back(-6.0 + 0.025 * k);
  return grid;
}

}  // namespace mkedge
