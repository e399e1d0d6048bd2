#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "squadfountain/analytics.hpp"
#include "squadfountain/codec.hpp"
#include "squadfountain/cost.hpp"
#include "squadfountain/experiments.hpp"
#include "squadfountain/network.hpp"
#include "squadfountain/parallel.hpp"
#include "squadfountain/rng.hpp"

namespace sqf::acceptance {

struct Options {
  double tolerance_scale = 1.0;  // multiplies every numeric tolerance
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
};

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Result(const Options&)> run;
};

namespace detail {

inline std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

inline std::string num(double v) { return format_real(v); }

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    tv += std::fabs(x - y);
  }
  return tv / 2.0;
}

inline const std::vector<double>& lambdas() {
  static const std::vector<double> v{1.0, 1.05, 1.2};
  return v;
}

}  // namespace detail

inline Result decoder_exact(const Options& opt) {
  Result r{1, "decoder_exact", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint32_t k = 100;
  const auto dist = ideal_soliton(k);
  const auto ok = parallel_map(100, opt.threads, [&](std::size_t seed) {
    Philox rng = Philox::for_trial(opt.seed, seed);
    const auto block = SourceBlock::random(k, 32, rng);
    const auto symbols = encode_symbols(block, dist, k, rng);
    PeelingDecoder dec(k, symbols);
    const BlockOracle oracle{&block};
    while (!dec.complete()) {
      if (dec.stalled()) {
        dec.dope(oracle, rng);
      } else {
        dec.process_ripple_symbol();
      }
    }
    for (SourceIndex j = 0; j < k; ++j) {
      const auto got = dec.recovered(j);
      if (!std::equal(got.begin(), got.end(), block.packet(j).begin(), block.packet(j).end())) {
        return 0;
      }
    }
    return 1;
  });
  int exact = 0;
  for (int v : ok) {
    exact += v;
  }
  r.seconds = detail::seconds_since(t0);
  r.passed = exact == 100 && r.seconds < 5.0;
  r.detail = "bit-exact " + std::to_string(exact) + "/100 in " + detail::fmt("%.2fs", r.seconds) +
             " (limit 5s)";
  return r;
}

inline Result yield_anchor(const Options& opt) {
  Result r{2, "yield_anchor", true, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  const double tol = 1e-12 * opt.tolerance_scale;
  double worst = 0.0;
  for (double lambda : detail::lambdas()) {
    const auto pmf = interdoping_yield_pmf(lambda, 10);
    worst = std::max(worst, std::fabs(pmf.probs[2] - std::exp(-2.0 * lambda)));
    worst = std::max(worst, std::fabs(pmf.probs[3] - 2.0 * lambda * std::exp(-3.0 * lambda)));
  }
  r.passed = worst <= tol;
  r.detail = "max |recursion - closed form| = " + detail::num(worst) + " (tol " +
             detail::num(tol) + ")";
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result recursion_matrix(const Options& opt) {
  Result r{3, "recursion_matrix", true, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  const double tol = 1e-8 * opt.tolerance_scale;
  double worst = 0.0;
  for (double lambda : detail::lambdas()) {
    const auto pmf = interdoping_yield_pmf(lambda, 500);
    const auto m = ripple_transition_matrix(lambda, 500);
    const auto trap = trapping_probs(m, 50);
    for (std::uint32_t u = 1; u <= 50; ++u) {
      worst = std::max(worst, std::fabs(trap[u] - pmf.probs[u]));
    }
  }
  r.passed = worst <= tol;
  r.detail = "max entrywise gap u<=50 = " + detail::num(worst) + " (tol " + detail::num(tol) + ")";
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result walk_monte_carlo(const Options& opt) {
  Result r{4, "walk_monte_carlo", true, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint32_t horizon = 50;
  constexpr std::uint64_t walks = 1000000;
  constexpr std::uint64_t chunks = 16;
  const auto counts = parallel_map(chunks, opt.threads, [&](std::size_t c) {
    Philox rng = Philox(opt.seed, 0x77616c6bull).substream(c + 1);
    std::vector<std::uint64_t> hist(horizon + 1, 0);
    for (std::uint64_t w = c; w < walks; w += chunks) {
      std::int64_t ripple = 2;
      for (std::uint32_t t = 1; t <= horizon; ++t) {
        ripple += static_cast<std::int64_t>(sample_poisson(rng, 1.0)) - 1;
        if (ripple <= 0) {
          ++hist[t];
          break;
        }
      }
    }
    return hist;
  });
  std::vector<double> emp(horizon + 1, 0.0);
  for (const auto& h : counts) {
    for (std::uint32_t t = 0; t <= horizon; ++t) {
      emp[t] += static_cast<double>(h[t]) / walks;
    }
  }
  const auto pmf = interdoping_yield_pmf(1.0, horizon);
  const double tv = detail::total_variation(emp, pmf.probs);
  const double tol = 0.02 * opt.tolerance_scale;
  r.passed = tv < tol;
  r.detail = "TV(walks, recursion) over t<=50 = " + detail::num(tv) + " (tol " +
             detail::num(tol) + ", 1e6 walks)";
  r.seconds = detail::seconds_since(t0);
  return r;
}

/// Mean and variance of k_d over `trials` decode-sim trials.
inline sqf::detail::Moments simulate_dopings(const ExperimentConfig& cfg, const std::string& dist,
                                             double delta) {
  const auto kd = parallel_map(cfg.trials, cfg.threads, [&](std::size_t t) {
    return static_cast<double>(run_decode_trial(cfg, dist, delta, t).k_d);
  });
  return sqf::detail::moments(kd);
}

inline Result analytic_vs_simulated(const Options& opt) {
  Result r{5, "analytic_vs_simulated_dopings", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.k = 1000;
  cfg.h = 200;
  cfg.network = true;
  cfg.disseminations = {Dissemination::degree_one};
  cfg.trials = 200;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;
  const auto mc = simulate_dopings(cfg, "is", 0.0);
  const auto pred = expected_dopings(1000, 0.0);
  const double rel = std::fabs(pred.total - mc.mean) / mc.mean;
  const double tol = 0.25 * opt.tolerance_scale;
  r.seconds = detail::seconds_since(t0);
  r.passed = rel <= tol && r.seconds < 120.0;
  r.detail = "predicted=" + detail::num(pred.total) + " simulated mean=" + detail::num(mc.mean) +
             " rel=" + detail::fmt("%.4f", rel) + " (tol " + detail::num(tol) + ") in " +
             detail::fmt("%.1fs", r.seconds) + " (limit 120s)";
  return r;
}

inline Result is_vs_rs(const Options& opt) {
  Result r{6, "is_vs_rs", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.k = 1000;
  cfg.trials = 200;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;
  const auto is = simulate_dopings(cfg, "is", 0.0);
  const auto rs = simulate_dopings(cfg, "rs", 0.0);
  r.passed = is.mean < rs.mean && is.variance < rs.variance;
  r.detail = "IS ratio mean=" + detail::num(is.mean / 1000) + " var=" +
             detail::num(is.variance / 1e6) + "; RS ratio mean=" + detail::num(rs.mean / 1000) +
             " var=" + detail::num(rs.variance / 1e6);
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result wald_estimate(const Options& opt) {
  Result r{7, "wald_estimate", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.k = 1000;
  cfg.trials = 200;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;
  const auto mc = simulate_dopings(cfg, "is", 0.0);
  const double wald = wald_dopings(1000);
  const double rel = std::fabs(wald - mc.mean) / mc.mean;
  const double tol = 0.15 * opt.tolerance_scale;
  r.passed = rel <= tol;
  r.detail = "k/E[Y]=" + detail::num(wald) + " simulated mean=" + detail::num(mc.mean) +
             " rel=" + detail::fmt("%.4f", rel) + " (tol " + detail::num(tol) + ")";
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result degree_evolution(const Options& opt) {
  Result r{8, "degree_evolution", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint32_t k = 1000;
  constexpr std::uint32_t ell = 500;
  const auto dist = ideal_soliton(k);
  const auto snaps = parallel_map(50, opt.threads, [&](std::size_t seed) {
    Philox rng = Philox::for_trial(opt.seed, seed);
    const auto block = SourceBlock::random(k, 8, rng);
    const auto symbols = encode_symbols(block, dist, k, rng);
    std::vector<std::uint64_t> counts;
    bool taken = false;
    decode_with_doping(k, symbols, BlockOracle{&block}, rng, {},
                       [&](const PeelingDecoder& dec) {
                         if (!taken && dec.decoded_count() == ell) {
                           counts = dec.unreleased_degree_counts();
                           taken = true;
                         }
                       });
    return counts;
  });
  std::vector<double> pooled(k - ell + 1, 0.0);
  double total = 0.0;
  for (const auto& c : snaps) {
    for (std::size_t d = 0; d < c.size(); ++d) {
      pooled.at(d) += static_cast<double>(c[d]);
      total += static_cast<double>(c[d]);
    }
  }
  for (double& p : pooled) {
    p /= total;
  }
  const auto ref = unreleased_degree_dist(k, ell).normalized.masses();
  const double tv = detail::total_variation(pooled, ref);
  const double tol = 0.05 * opt.tolerance_scale;
  r.passed = tv < tol;
  r.detail = "TV(pooled unreleased degrees at 500 decoded, IS on {2..500}) = " +
             detail::num(tv) + " (tol " + detail::num(tol) + ", " +
             std::to_string(static_cast<std::uint64_t>(total)) + " symbols)";
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result degree_two_dissemination(const Options& opt) {
  Result r{9, "degree_two_dissemination", true, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail_text;
  for (std::uint32_t k : {3u, 5u, 7u, 9u, 15u}) {
    Philox rng(opt.seed, k);
    const auto block = SourceBlock::random(k, 32, rng);
    const auto sched = disseminate_degree_two(block);
    const std::uint32_t want = (k - 1 + 1) / 2;
    const bool ok = sched.rounds == want && sched.verified && sched.max_buffer <= 6;
    r.passed = r.passed && ok;
    detail_text += "k=" + std::to_string(k) + ":" + std::to_string(sched.rounds) + "/" +
                   std::to_string(want) + (sched.verified ? " ok" : " MISSING") + "; ";
    if (k == 7) {
      const auto& tx = sched.by_relay[1];
      const bool shape = tx.size() == 3 && tx[0].packets.size() == 1 && tx[0].packets[0] == 1 &&
                         tx[1].packets.size() == 2 && tx[1].packets[0] == 0 &&
                         tx[1].packets[1] == 2 && tx[2].packets.size() == 2 &&
                         tx[2].packets[0] == 3 && tx[2].packets[1] == 6;
      r.passed = r.passed && shape;
      detail_text += std::string("k=7 relay 1 sends p1, p0^p2, p3^p6: ") + (shape ? "yes" : "no") +
                     "; ";
    }
  }
  r.detail = detail_text;
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result coupon_coverage(const Options& opt) {
  Result r{10, "coupon_coverage", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint32_t k = 500;
  constexpr std::uint32_t trials = 200;
  const auto need = parallel_map(trials, opt.threads, [&](std::size_t t) {
    Philox rng = Philox::for_trial(opt.seed, t);
    NetworkConfig nc;
    nc.k = k;
    nc.h = 50;
    nc.storage = StorageMode::coupon;
    const auto net = build_network(nc, rng);
    return static_cast<double>(nodes_to_cover(net, 0));
  });
  const double mean = sqf::detail::moments(need).mean;
  const double expect = k * harmonic(k);
  const double rel = std::fabs(mean - expect) / expect;
  const double tol = 0.05 * opt.tolerance_scale;
  r.passed = rel <= tol;
  r.detail = "mean nodes to cover=" + detail::num(mean) + " k*H_k=" + detail::num(expect) +
             " rel=" + detail::fmt("%.4f", rel) + " (tol " + detail::num(tol) +
             "); k ln k=" + detail::num(k * std::log(static_cast<double>(k)));
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result uncovered_symbols(const Options& opt) {
  Result r{11, "uncovered_count", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint32_t k = 1000;
  constexpr std::uint32_t trials = 500;
  const auto est = uncovered_count(k, 0.0);
  const bool unit = std::fabs(est.approx - 1.0) <= 1e-12;
  const auto k_s = static_cast<std::uint32_t>(std::llround(k * std::log(static_cast<double>(k))));
  const auto counts = parallel_map(trials, opt.threads, [&](std::size_t t) {
    Philox rng = Philox::for_trial(opt.seed, t);
    NetworkConfig nc;
    nc.k = k;
    nc.h = 10;
    nc.storage = StorageMode::coupon;
    const auto net = build_network(nc, rng);
    const auto plan = collect(net, 0, k_s);
    std::vector<std::uint8_t> covered(k, 0);
    for (auto node : plan.nodes) {
      for (auto j : net.slots(node)) {
        covered[j] = 1;
      }
    }
    double n = 0;
    for (auto c : covered) {
      n += c == 0 ? 1.0 : 0.0;
    }
    return n;
  });
  const auto m = sqf::detail::moments(counts);
  const double se = std::sqrt(m.variance / trials);
  const double z = std::fabs(m.mean - est.exact) / se;
  const double tol = 3.0 * opt.tolerance_scale;
  r.passed = unit && z <= tol;
  r.detail = "approx(delta=0)=" + detail::num(est.approx) + "; simulated mean=" +
             detail::num(m.mean) + " formula=" + detail::num(est.exact) + " |gap|/SE=" +
             detail::fmt("%.3f", z) + " (tol " + detail::num(tol) + ", k_s=" +
             std::to_string(k_s) + ")";
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result cost_minima(const Options& opt) {
  Result r{12, "cost_minima", true, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::uint32_t k = 2000;
  const auto grid = linear_grid(0.0, 0.06, 0.001);
  PredictionTable table(k);
  const auto preds = parallel_map(grid.size(), opt.threads,
                                  [&](std::size_t i) { return expected_dopings(k, grid[i]); });
  for (const auto& p : preds) {
    table.insert(p);
  }
  const double tol = 0.01 * opt.tolerance_scale;
  const std::vector<std::pair<double, double>> targets{{10, 0.01}, {15, 0.03}, {30, 0.04}};
  for (const auto& [h, want] : targets) {
    const auto best = minimize_cost(k, h, grid, table);
    const bool ok = std::fabs(best.delta - want) <= tol + 1e-12;
    r.passed = r.passed && ok;
    r.detail += "h=" + detail::num(h) + " delta*=" + detail::num(best.delta) + " (want " +
                detail::num(want) + ") ";
  }
  r.detail += "(tol " + detail::num(tol) + ")";
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result strategy_ordering(const Options& opt) {
  Result r{13, "strategy_ordering", true, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  (void)opt;
  constexpr std::uint32_t k = 2000;
  PredictionTable table(k);
  const StrategyParams params;  // is_doping with k_s = k
  std::string bad;
  for (double h : {20.0, 30.0, 50.0, 100.0, 200.0, 300.0, 500.0}) {
    const double is = strategy_cost(Strategy::is_doping, k, h, params, &table).normalized();
    const double rs = strategy_cost(Strategy::rs_no_doping, k, h, params).normalized();
    const double cp = strategy_cost(Strategy::coupon, k, h, params).normalized();
    if (!(is < rs && rs < cp)) {
      r.passed = false;
      bad += " h=" + detail::num(h);
    }
  }
  bool crossover = false;
  double cross_h = 0.0;
  for (double h : {1500.0, 2000.0, 3000.0, 5000.0}) {
    const double is = strategy_cost(Strategy::is_doping, k, h, params, &table).normalized();
    const double rs = strategy_cost(Strategy::rs_no_doping, k, h, params).normalized();
    if (is >= rs && !crossover) {
      crossover = true;
      cross_h = h;
    }
  }
  r.passed = r.passed && crossover;
  const auto at = [&](double h) {
    return "h=" + detail::num(h) + ": is=" +
           detail::fmt("%.4f", strategy_cost(Strategy::is_doping, k, h, params, &table).normalized()) +
           " rs=" + detail::fmt("%.4f", strategy_cost(Strategy::rs_no_doping, k, h, params).normalized()) +
           " coupon=" + detail::fmt("%.4f", strategy_cost(Strategy::coupon, k, h, params).normalized());
  };
  r.detail = at(20) + "; " + at(500) + "; " +
             (crossover ? "is >= rs at h=" + detail::num(cross_h) : std::string("no crossover above 1000")) +
             (bad.empty() ? "" : "; ordering broken at" + bad);
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline Result determinism(const Options& opt) {
  Result r{14, "determinism", true, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  const auto twice = [&](auto&& run) {
    std::ostringstream a;
    std::ostringstream b;
    run(a, 1u);
    run(b, std::max(2u, opt.threads));
    return a.str() == b.str() && !a.str().empty();
  };
  ExperimentConfig cfg;
  cfg.k = 200;
  cfg.h = 50;
  cfg.trials = 12;
  cfg.seed = opt.seed;
  cfg.dists = {"is", "rs"};
  cfg.deltas = {0.0, 0.05};
  const bool sim = twice([&](std::ostream& os, unsigned th) {
    auto c = cfg;
    c.threads = th;
    run_decode_sim(c, os);
  });
  const bool net = twice([&](std::ostream& os, unsigned th) {
    auto c = cfg;
    c.threads = th;
    c.network = true;
    c.dists = {"is"};
    run_decode_sim(c, os);
  });
  const bool ana = twice([&](std::ostream& os, unsigned th) {
    auto c = cfg;
    c.threads = th;
    run_analyze(c, os);
  });
  const bool cost = twice([&](std::ostream& os, unsigned th) {
    auto c = cfg;
    c.threads = th;
    c.kd_source = "mc";
    c.sweep = "strategy";
    run_cost(c, os);
  });
  r.passed = sim && net && ana && cost;
  r.detail = std::string("decode-sim ") + (sim ? "identical" : "DIFFERS") + ", network decode-sim " +
             (net ? "identical" : "DIFFERS") + ", analyze " + (ana ? "identical" : "DIFFERS") +
             ", cost " + (cost ? "identical" : "DIFFERS") + " (1 vs 2+ workers)";
  r.seconds = detail::seconds_since(t0);
  return r;
}

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "decoder_exact", decoder_exact},
      {2, "yield_anchor", yield_anchor},
      {3, "recursion_matrix", recursion_matrix},
      {4, "walk_monte_carlo", walk_monte_carlo},
      {5, "analytic_vs_simulated_dopings", analytic_vs_simulated},
      {6, "is_vs_rs", is_vs_rs},
      {7, "wald_estimate", wald_estimate},
      {8, "degree_evolution", degree_evolution},
      {9, "degree_two_dissemination", degree_two_dissemination},
      {10, "coupon_coverage", coupon_coverage},
      {11, "uncovered_count", uncovered_symbols},
      {12, "cost_minima", cost_minima},
      {13, "strategy_ordering", strategy_ordering},
      {14, "determinism", determinism},
  };
  return all;
}

/// True when `filter` (empty, a criterion number or a name) selects `c`.
inline bool selected(const Criterion& c, const std::string& filter) {
  return filter.empty() || filter == c.name || filter == std::to_string(c.id);
}

inline std::string format(const Result& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-30s ", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str());
  return head + r.detail;
}

/// Runs the selected criteria, printing one line each. Returns the number of
/// failures; throws InvalidParameter when the filter matches nothing.
inline int run(const Options& opt, const std::vector<std::string>& filters, std::ostream& os) {
  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria()) {
    bool want = filters.empty();
    for (const auto& f : filters) {
      want = want || selected(c, f);
    }
    if (!want) {
      continue;
    }
    ++ran;
    Result res;
    try {
      res = c.run(opt);
    } catch (const std::exception& e) {
      res = {c.id, c.name, false, std::string("error: ") + e.what(), 0.0};
    }
    failures += res.passed ? 0 : 1;
    os << format(res) << '\n' << std::flush;
  }
  if (ran == 0) {
    throw InvalidParameter("no acceptance criterion matches the filter");
  }
  return failures;
}

}  // namespace sqf::acceptance
