#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "squadfountain/analytics.hpp"
#include "squadfountain/errors.hpp"

namespace sqf {

/// Squads drained to gather k_s symbols at h symbols per squad.
inline std::uint32_t supersquad_squads(double k_s, double h) {
  if (!(h >= 1.0)) {
    throw InvalidParameter("coverage redundancy h must be >= 1");
  }
  if (!(k_s > 0.0)) {
    return 0;
  }
  // Guard against k_s/h landing a hair above an integer through rounding.
  return static_cast<std::uint32_t>(std::ceil(k_s / h - 1e-9));
}

/// Per-symbol supersquad hop charge: 1 + (s+1)/4 (costeq) or 1 + (s-1)/4 (sec2).
enum class HopModel { costeq, sec2 };

inline double supersquad_symbol_cost(std::uint32_t s, HopModel model) {
  const double shift = model == HopModel::costeq ? 1.0 : -1.0;
  return 1.0 + (s + shift) / 4.0;
}

/// Hop cost of polling one source packet, ceil(k/4).
inline double doping_symbol_cost(std::uint32_t k) { return std::ceil(k / 4.0); }

/// Per-source-packet collection cost (c_s k_s + ceil(k/4) k_d) / k.
inline double collection_cost(std::uint32_t k, double k_s, double k_d, double h,
                              HopModel model = HopModel::costeq) {
  if (k == 0 || !(k_s >= 0.0) || !(k_d >= 0.0)) {
    throw InvalidParameter("collection cost needs k > 0 and nonnegative symbol counts");
  }
  const std::uint32_t s = supersquad_squads(k_s, h);
  return (supersquad_symbol_cost(s, model) * k_s + doping_symbol_cost(k) * k_d) / k;
}

enum class Strategy { polling, coupon, rs_no_doping, is_doping };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::polling:
      return "polling";
    case Strategy::coupon:
      return "coupon";
    case Strategy::rs_no_doping:
      return "rs_no_doping";
    case Strategy::is_doping:
      return "is_doping";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& name) {
  if (name == "polling") return Strategy::polling;
  if (name == "coupon") return Strategy::coupon;
  if (name == "rs_no_doping" || name == "rs") return Strategy::rs_no_doping;
  if (name == "is_doping" || name == "is") return Strategy::is_doping;
  throw InvalidParameter("unknown strategy '" + name + "'");
}

struct CostPoint {
  Strategy strategy = Strategy::polling;
  std::uint32_t k = 0;
  double h = 0.0;
  double delta = 0.0;
  double k_s = 0.0;
  double k_d = 0.0;
  double c_T = 0.0;

  /// Cost relative to pure polling, c_T / (k/4).
  [[nodiscard]] double normalized() const noexcept { return c_T / (k / 4.0); }
};

/// Harmonic number H_k.
inline double harmonic(std::uint32_t k) {
  double h = 0.0;
  for (std::uint32_t i = k; i >= 1; --i) {
    h += 1.0 / i;
  }
  return h;
}

/// Symbols an RS collection needs on average: k + sqrt(k) ln^2(k / epsilon).
inline double rs_symbol_count(std::uint32_t k, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidParameter("RS epsilon must be in (0, 1)");
  }
  const double l = std::log(k / epsilon);
  return k + std::sqrt(static_cast<double>(k)) * l * l;
}

/// Memoized doping predictions keyed by delta.
class PredictionTable {
 public:
  explicit PredictionTable(std::uint32_t k) : k_(k) {}

  [[nodiscard]] std::uint32_t k() const noexcept { return k_; }

  const DopingPrediction& at(double delta) {
    auto it = cache_.find(delta);
    if (it == cache_.end()) {
      it = cache_.emplace(delta, expected_dopings(k_, delta)).first;
    }
    return it->second;
  }

  /// Stores a prediction computed elsewhere (e.g. on a worker thread).
  void insert(const DopingPrediction& p) {
    if (p.k != k_) {
      throw InvalidParameter("prediction is for a different k");
    }
    cache_.emplace(p.delta, p);
  }

  /// Fills the table for every delta in `grid` (already computed entries are kept).
  void precompute(const std::vector<double>& grid) {
    for (double d : grid) {
      at(d);
    }
  }

 private:
  std::uint32_t k_;
  std::map<double, DopingPrediction> cache_;
};

struct StrategyParams {
  HopModel hop_model = HopModel::costeq;
  double delta = 0.0;           // collection surplus for is_doping
  double rs_epsilon = 0.5;      // epsilon in the RS symbol count
  std::optional<double> k_s;    // override: upfront symbols (coupon: simulated coverage)
  std::optional<double> k_d;    // override: doped symbols (e.g. a Monte Carlo mean)
};

inline CostPoint strategy_cost(Strategy strategy, std::uint32_t k, double h,
                               const StrategyParams& params, PredictionTable* table = nullptr) {
  if (k < 3) {
    throw InvalidParameter("strategy cost needs k >= 3");
  }
  CostPoint pt;
  pt.strategy = strategy;
  pt.k = k;
  pt.h = h;
  switch (strategy) {
    case Strategy::polling:
      pt.k_s = 0.0;
      pt.k_d = k;
      break;
    case Strategy::coupon:
      pt.k_s = params.k_s.value_or(k * harmonic(k));
      pt.k_d = params.k_d.value_or(k * std::exp(pt.k_s * std::log1p(-1.0 / k)));
      break;
    case Strategy::rs_no_doping:
      pt.k_s = params.k_s.value_or(rs_symbol_count(k, params.rs_epsilon));
      pt.k_d = params.k_d.value_or(0.0);
      break;
    case Strategy::is_doping: {
      pt.delta = params.delta;
      pt.k_s = params.k_s.value_or(k * (1.0 + params.delta));
      if (params.k_d) {
        pt.k_d = *params.k_d;
      } else if (table != nullptr && table->k() == k) {
        pt.k_d = table->at(params.delta).total;
      } else {
        pt.k_d = expected_dopings(k, params.delta).total;
      }
      break;
    }
  }
  pt.c_T = collection_cost(k, pt.k_s, pt.k_d, h, params.hop_model);
  return pt;
}

struct CostMinimum {
  double delta = 0.0;
  CostPoint point;
  std::vector<CostPoint> curve;  // one point per grid entry, in grid order
};

/// Cheapest is_doping operating point over `delta_grid`; ties go to the
/// smallest delta.
inline CostMinimum minimize_cost(std::uint32_t k, double h, const std::vector<double>& delta_grid,
                                 PredictionTable& table, HopModel model = HopModel::costeq) {
  if (delta_grid.empty()) {
    throw InvalidParameter("delta grid is empty");
  }
  CostMinimum best;
  bool have = false;
  for (double d : delta_grid) {
    StrategyParams p;
    p.hop_model = model;
    p.delta = d;
    const CostPoint pt = strategy_cost(Strategy::is_doping, k, h, p, &table);
    best.curve.push_back(pt);
    if (!have || pt.c_T < best.point.c_T || (pt.c_T == best.point.c_T && d < best.delta)) {
      best.delta = d;
      best.point = pt;
      have = true;
    }
  }
  return best;
}

inline CostMinimum minimize_cost(std::uint32_t k, double h, const std::vector<double>& delta_grid,
                                 HopModel model = HopModel::costeq) {
  PredictionTable table(k);
  return minimize_cost(k, h, delta_grid, table, model);
}

/// a, a+step, ..., up to b inclusive (with a small tolerance on the last point).
inline std::vector<double> linear_grid(double a, double b, double step) {
  if (!(step > 0.0) || b < a) {
    throw InvalidParameter("grid needs step > 0 and b >= a");
  }
  std::vector<double> out;
  const auto n = static_cast<std::int64_t>(std::floor((b - a) / step + 1e-9));
  for (std::int64_t i = 0; i <= n; ++i) {
    // Round to 12 decimals so grid values print and compare cleanly.
    out.push_back(std::round((a + i * step) * 1e12) / 1e12);
  }
  return out;
}

}  // namespace sqf
