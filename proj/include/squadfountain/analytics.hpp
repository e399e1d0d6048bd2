#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "squadfountain/degree_distribution.hpp"
#include "squadfountain/errors.hpp"

namespace sqf {

/// P(a column of the decoding matrix has degree d) after `ell` decodings of an
/// Ideal Soliton code: ((k-ell)/k) rho(d) for 2 <= d <= k-ell, else 0.
inline double degree_evolution_pmf(std::uint32_t k, std::uint32_t ell, std::uint32_t d) {
  if (k < 3 || ell + 3 > k) {
    throw InvalidParameter("degree evolution needs 0 <= ell <= k-3");
  }
  if (d < 2 || d > k - ell) {
    return 0.0;
  }
  return (static_cast<double>(k - ell) / k) / (static_cast<double>(d) * (d - 1));
}

/// Degree law of the still-unreleased symbols after `ell` decodings.
struct UnreleasedDegrees {
  std::vector<double> raw;  // raw[d] = rho(d) on {2..k-ell}; sums to 1 - 1/(k-ell)
  DegreeDistribution normalized;
};

inline UnreleasedDegrees unreleased_degree_dist(std::uint32_t k, std::uint32_t ell) {
  if (k < 3 || ell + 3 > k) {
    throw InvalidParameter("unreleased degree law needs 0 <= ell <= k-3");
  }
  const std::uint32_t top = k - ell;
  std::vector<double> raw(top + 1, 0.0);
  for (std::uint32_t d = 2; d <= top; ++d) {
    raw[d] = 1.0 / (static_cast<double>(d) * (d - 1));
  }
  const double mass = 1.0 - 1.0 / top;
  std::vector<double> norm(raw);
  for (double& p : norm) {
    p /= mass;
  }
  return {std::move(raw), DegreeDistribution(std::move(norm))};
}

/// Ripple intensity after ell decodings with collection surplus delta:
/// 1 + delta k / (k - ell).
inline double ripple_intensity(double k, double delta, double ell) {
  if (!(ell < k)) {
    throw InvalidParameter("ripple intensity needs ell < k");
  }
  return 1.0 + delta * k / (k - ell);
}

/// Distribution of the number of symbols decoded between dopings.
struct YieldPmf {
  double lambda = 1.0;
  std::vector<double> probs;  // probs[t] = P(Y = t), t = 0..t_max
  double tail = 1.0;          // 1 - sum(probs)
  std::uint32_t clamp_events = 0;
  double clamped_mass = 0.0;  // total magnitude of negative values set to 0

  [[nodiscard]] std::uint32_t t_max() const noexcept {
    return probs.empty() ? 0 : static_cast<std::uint32_t>(probs.size() - 1);
  }
  [[nodiscard]] double at(std::uint64_t t) const noexcept {
    return t < probs.size() ? probs[t] : 0.0;
  }
};

/// First-passage law of the ripple walk started at two with Poisson(lambda)
/// releases per decoding, computed by
///   P(Y=t+1) = e^{-lambda} [ A_t(t-1) - sum_{i=1}^{t-1} P(Y=t-i) A_i(1+i) ]
/// with A_s(d) the Poisson(s lambda) pmf at d.
inline YieldPmf interdoping_yield_pmf(double lambda, std::uint32_t t_max) {
  if (!(lambda >= 1.0)) {
    throw InvalidParameter("yield intensity must be >= 1");
  }
  if (t_max < 2) {
    throw InvalidParameter("yield pmf needs t_max >= 2");
  }
  YieldPmf out;
  out.lambda = lambda;
  out.probs.assign(t_max + 1, 0.0);
  // overshoot[i] = A_i(1+i), reach[t] = A_t(t-1)
  std::vector<double> overshoot(t_max + 1, 0.0);
  std::vector<double> reach(t_max + 1, 0.0);
  for (std::uint32_t i = 1; i <= t_max; ++i) {
    overshoot[i] = poisson_pmf(i * lambda, std::int64_t{i} + 1);
    reach[i] = poisson_pmf(i * lambda, std::int64_t{i} - 1);
  }
  const double stay = std::exp(-lambda);
  auto& p = out.probs;
  for (std::uint32_t t = 1; t < t_max; ++t) {
    double acc = reach[t];
    for (std::uint32_t i = 1; i + 1 <= t; ++i) {
      acc -= p[t - i] * overshoot[i];
    }
    double value = stay * acc;
    if (value < 0.0) {
      ++out.clamp_events;
      out.clamped_mass -= value;
      value = 0.0;
    }
    p[t + 1] = value;
  }
  double total = 0.0;
  for (double v : p) {
    total += v;
  }
  out.tail = 1.0 - total;
  return out;
}

/// Yield pmf of the surplus-free collection (lambda = 1) up to t = k.
inline YieldPmf yield_pmf_delta0(std::uint32_t k) {
  if (k < 3) {
    throw InvalidParameter("k must be >= 3");
  }
  return interdoping_yield_pmf(1.0, k);
}

/// Dense absorbing chain for the ripple walk. State v = 1..n stands for a
/// ripple of v-1 symbols; state 1 traps. From v > 1 the chain moves to v-1+r
/// with probability Poisson(lambda) at r; moves past n are dropped.
class RippleTransitionMatrix {
 public:
  RippleTransitionMatrix(double lambda, std::uint32_t n) : lambda_(lambda), n_(n) {
    if (!(lambda > 0.0) || n < 3) {
      throw InvalidParameter("transition matrix needs lambda > 0 and n >= 3");
    }
    p_.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> release(n + 1);
    for (std::uint32_t r = 0; r <= n; ++r) {
      release[r] = poisson_pmf(lambda, r);
    }
    at(1, 1) = 1.0;
    for (std::uint32_t v = 2; v <= n; ++v) {
      for (std::uint32_t w = v - 1; w <= n; ++w) {
        at(v, w) = release[w - v + 1];
      }
    }
  }

  [[nodiscard]] std::uint32_t size() const noexcept { return n_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  /// Entry (v, w), 1-based states.
  [[nodiscard]] double operator()(std::uint32_t v, std::uint32_t w) const {
    return p_[index(v, w)];
  }

  /// Row vector x P.
  [[nodiscard]] std::vector<double> left_multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::uint32_t v = 0; v < n_; ++v) {
      const double xv = x[v];
      if (xv == 0.0) {
        continue;
      }
      const double* row = p_.data() + static_cast<std::size_t>(v) * n_;
      for (std::uint32_t w = 0; w < n_; ++w) {
        y[w] += xv * row[w];
      }
    }
    return y;
  }

 private:
  [[nodiscard]] std::size_t index(std::uint32_t v, std::uint32_t w) const {
    if (v < 1 || v > n_ || w < 1 || w > n_) {
      throw InvalidParameter("transition matrix index out of range");
    }
    return static_cast<std::size_t>(v - 1) * n_ + (w - 1);
  }
  double& at(std::uint32_t v, std::uint32_t w) { return p_[index(v, w)]; }

  double lambda_;
  std::uint32_t n_;
  std::vector<double> p_;
};

inline RippleTransitionMatrix ripple_transition_matrix(double lambda, std::uint32_t k) {
  return RippleTransitionMatrix(lambda, k);
}

/// probs[u] = e_3 (P^u - P^{u-1}) e_1 for u = 1..u_max (probs[0] = 0): the
/// chance the walk started from a ripple of two first traps at step u.
inline std::vector<double> trapping_probs(const RippleTransitionMatrix& m, std::uint32_t u_max) {
  std::vector<double> x(m.size(), 0.0);
  x[2] = 1.0;
  std::vector<double> out(u_max + 1, 0.0);
  double trapped = 0.0;
  for (std::uint32_t u = 1; u <= u_max; ++u) {
    x = m.left_multiply(x);
    out[u] = x[0] - trapped;
    trapped = x[0];
  }
  return out;
}

inline double trapping_prob(const RippleTransitionMatrix& m, std::uint32_t u) {
  if (u == 0) {
    return 0.0;
  }
  return trapping_probs(m, u)[u];
}

/// Expected number of source symbols absent from k(1+delta) ln k uniformly
/// drawn single-packet symbols.
struct UncoveredEstimate {
  double exact = 0.0;   // k (1 - 1/k)^{k (1+delta) ln k}
  double approx = 0.0;  // k e^{-(1+delta) ln k}
};

inline UncoveredEstimate uncovered_count(std::uint32_t k, double delta) {
  if (k < 2 || !(delta >= 0.0)) {
    throw InvalidParameter("uncovered count needs k >= 2 and delta >= 0");
  }
  const double kk = k;
  const double draws = kk * (1.0 + delta) * std::log(kk);
  return {kk * std::exp(draws * std::log1p(-1.0 / kk)),
          kk * std::exp(-(1.0 + delta) * std::log(kk))};
}

/// Mean yield censored at `bound`: sum_{t<=bound} t P(Y=t) plus the remaining
/// mass placed at `bound`.
inline double expected_yield(const YieldPmf& pmf, double bound) {
  if (!(bound >= 0.0)) {
    throw InvalidParameter("censoring bound must be >= 0");
  }
  const auto last = static_cast<std::uint64_t>(std::floor(bound));
  double mean = 0.0;
  double mass = 0.0;
  for (std::uint64_t t = 1; t <= last && t < pmf.probs.size(); ++t) {
    mean += static_cast<double>(t) * pmf.probs[t];
    mass += pmf.probs[t];
  }
  return mean + (1.0 - mass) * bound;
}

inline double expected_yield(const YieldPmf& pmf, std::uint32_t k, double l_i) {
  return expected_yield(pmf, static_cast<double>(k) - l_i);
}

struct DopingPrediction {
  std::uint32_t k = 0;
  double delta = 0.0;
  std::uint32_t stall_dopings = 0;  // iterations until the decoded count reaches k - u
  double uncovered = 0.0;           // u, added to the total
  double total = 0.0;               // stall_dopings + uncovered
  double percent = 0.0;             // 100 total / k
  std::vector<double> decoded_after;  // running expected decoded count per doping
};

/// Expected dopings for a collection of k(1+delta) Ideal Soliton symbols.
///
/// Starting from l = 0, each doping i uses the intensity for the current
/// decoded count, adds the censored mean yield to D and moves l to D; the loop
/// stops once D + u >= k, with u the expected uncovered count.
inline DopingPrediction expected_dopings(std::uint32_t k, double delta) {
  if (k < 3 || !(delta >= 0.0)) {
    throw InvalidParameter("expected dopings needs k >= 3 and delta >= 0");
  }
  DopingPrediction out;
  out.k = k;
  out.delta = delta;
  out.uncovered = uncovered_count(k, delta).exact;
  double decoded = 0.0;
  std::uint32_t i = 0;
  while (true) {
    ++i;
    if (i > k) {
      throw Diverged("expected dopings did not converge for k=" + std::to_string(k) +
                     " delta=" + std::to_string(delta));
    }
    const double remaining = k - decoded;
    const double lambda = ripple_intensity(k, delta, decoded);
    const auto t_max = std::max<std::uint32_t>(2, static_cast<std::uint32_t>(remaining));
    const YieldPmf pmf = interdoping_yield_pmf(lambda, t_max);
    decoded += expected_yield(pmf, remaining);
    out.decoded_after.push_back(decoded);
    if (decoded + out.uncovered >= k) {
      break;
    }
  }
  out.stall_dopings = i;
  out.total = i + out.uncovered;
  out.percent = 100.0 * out.total / k;
  return out;
}

/// Renewal estimate k / E[Y] with E[Y] the mean yield at lambda = 1 censored at k.
inline double wald_dopings(std::uint32_t k) {
  const YieldPmf pmf = yield_pmf_delta0(k);
  return k / expected_yield(pmf, static_cast<double>(k));
}

}  // namespace sqf
