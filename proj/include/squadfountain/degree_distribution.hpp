#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "squadfountain/errors.hpp"
#include "squadfountain/rng.hpp"

namespace sqf {

/// Probability mass over code-symbol degrees {1, ..., max_degree}.
///
/// Immutable once built. Construction checks nonnegativity and that the mass
/// sums to one within 1e-12; the cumulative table is pinned to exactly 1 at
/// the top so inverse-transform sampling never falls off the end.
class DegreeDistribution {
 public:
  /// `pmf[d]` is the probability of degree d; `pmf[0]` must be zero.
  explicit DegreeDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.size() < 2) {
      throw InvalidParameter("degree distribution needs support of at least {1}");
    }
    if (pmf_[0] != 0.0) {
      throw InvalidParameter("degree 0 must carry no mass");
    }
    double total = 0.0;
    for (double p : pmf_) {
      if (!(p >= 0.0)) {
        throw InvalidParameter("degree distribution has a negative or NaN entry");
      }
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
      throw InvalidParameter("degree distribution mass is " + std::to_string(total));
    }
    cdf_.resize(pmf_.size());
    std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
    cdf_.back() = 1.0;
  }

  [[nodiscard]] std::uint32_t max_degree() const noexcept {
    return static_cast<std::uint32_t>(pmf_.size() - 1);
  }
  [[nodiscard]] double pmf(std::uint32_t d) const noexcept {
    return d < pmf_.size() ? pmf_[d] : 0.0;
  }
  [[nodiscard]] double cdf(std::uint32_t d) const noexcept {
    return d < cdf_.size() ? cdf_[d] : 1.0;
  }
  [[nodiscard]] const std::vector<double>& masses() const noexcept { return pmf_; }

  [[nodiscard]] double mean() const noexcept {
    double m = 0.0;
    for (std::size_t d = 1; d < pmf_.size(); ++d) {
      m += static_cast<double>(d) * pmf_[d];
    }
    return m;
  }

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

/// rho(1) = 1/k, rho(d) = 1/(d(d-1)) for d = 2..k.
inline DegreeDistribution ideal_soliton(std::uint32_t k) {
  if (k < 2) {
    throw InvalidParameter("ideal soliton requires k >= 2");
  }
  std::vector<double> pmf(k + 1, 0.0);
  pmf[1] = 1.0 / k;
  for (std::uint32_t d = 2; d <= k; ++d) {
    pmf[d] = 1.0 / (static_cast<double>(d) * (d - 1));
  }
  return DegreeDistribution(std::move(pmf));
}

/// Spike position and spread parameter R = c ln(k/delta) sqrt(k) of the
/// robust soliton.
struct RobustSolitonShape {
  double spread = 0.0;
  std::uint32_t spike = 0;
};

inline RobustSolitonShape robust_soliton_shape(std::uint32_t k, double c, double delta_rs) {
  if (k < 2 || !(c > 0.0) || !(delta_rs > 0.0 && delta_rs < 1.0)) {
    throw InvalidParameter("robust soliton requires k >= 2, c > 0, 0 < delta < 1");
  }
  const double spread = c * std::log(k / delta_rs) * std::sqrt(static_cast<double>(k));
  if (spread >= k) {
    throw InvalidParameter("robust soliton spread R >= k; lower c or raise delta");
  }
  return {spread, static_cast<std::uint32_t>(std::ceil(k / spread))};
}

/// Luby's robust soliton: (rho(d) + tau(d)) / beta.
inline DegreeDistribution robust_soliton(std::uint32_t k, double c = 0.1, double delta_rs = 0.5) {
  const auto [spread, spike] = robust_soliton_shape(k, c, delta_rs);
  std::vector<double> mass(k + 1, 0.0);
  mass[1] = 1.0 / k;
  for (std::uint32_t d = 2; d <= k; ++d) {
    mass[d] = 1.0 / (static_cast<double>(d) * (d - 1));
  }
  for (std::uint32_t d = 1; d < spike && d <= k; ++d) {
    mass[d] += spread / (static_cast<double>(d) * k);
  }
  if (spike <= k) {
    mass[spike] += spread * std::log(spread / delta_rs) / k;
  }
  const double beta = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) {
    m /= beta;
  }
  return DegreeDistribution(std::move(mass));
}

/// All mass on a single degree.
inline DegreeDistribution point_mass(std::uint32_t degree) {
  if (degree < 1) {
    throw InvalidParameter("point mass degree must be >= 1");
  }
  std::vector<double> pmf(degree + 1, 0.0);
  pmf[degree] = 1.0;
  return DegreeDistribution(std::move(pmf));
}

/// Inverse-transform sample: the smallest d with cdf(d) > u.
template <class Rng>
std::uint32_t sample_degree(const DegreeDistribution& dist, Rng& rng) {
  const double u = uniform_real(rng);
  std::uint32_t lo = 1;
  std::uint32_t hi = dist.max_degree();
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (dist.cdf(mid) > u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

/// log of the Poisson pmf with mean `mean` at r. Handles mean == 0.
inline double poisson_log_pmf(double mean, std::uint64_t r) {
  if (mean == 0.0) {
    return r == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double x = static_cast<double>(r);
  return x * std::log(mean) - mean - std::lgamma(x + 1.0);
}

inline double poisson_pmf(double mean, std::int64_t r) {
  if (r < 0) {
    return 0.0;
  }
  return std::exp(poisson_log_pmf(mean, static_cast<std::uint64_t>(r)));
}

/// Poisson pmf truncated to {0..n_max} (not renormalized).
inline double truncated_poisson_pmf(double lambda, std::uint64_t r, std::uint64_t n_max) {
  if (r > n_max) {
    return 0.0;
  }
  return std::exp(poisson_log_pmf(lambda, r));
}

}  // namespace sqf
