#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "squadfountain/analytics.hpp"
#include "squadfountain/codec.hpp"
#include "squadfountain/cost.hpp"
#include "squadfountain/csv.hpp"
#include "squadfountain/degree_distribution.hpp"
#include "squadfountain/network.hpp"
#include "squadfountain/parallel.hpp"
#include "squadfountain/rng.hpp"

namespace sqf {

/// Parameters shared by every experiment runner.
struct ExperimentConfig {
  std::uint32_t k = 1000;
  double h = 200.0;
  std::vector<double> deltas{0.0};
  std::vector<std::string> dists{"is"};
  double rs_c = 0.1;
  double rs_delta = 0.5;
  std::vector<Dissemination> disseminations{Dissemination::degree_one};
  CombineInput combine = CombineInput::degree_one_inputs;
  SquadSizeModel squad_model = SquadSizeModel::fixed;
  bool network = false;  // decode-sim: collect from a simulated squad network
  DopingRule doping = DopingRule::uniform_input;
  RippleOrder order = RippleOrder::fifo;
  std::uint32_t trials = 1;
  std::uint64_t seed = 0;
  HopModel hop_model = HopModel::costeq;
  unsigned threads = 1;
  std::size_t payload_len = 32;
  std::optional<double> yield_lambda;  // analyze: also dump P(Y=t)
  std::uint32_t yield_t_max = 0;       // 0 means k
  std::string sweep = "delta";         // cost: delta or strategy
  std::vector<double> h_grid{10.0, 15.0, 30.0};
  std::string kd_source = "analytic";  // cost: analytic or mc
  std::vector<std::string> strategies{"polling", "coupon", "rs_no_doping", "is_doping"};

  void validate() const {
    if (k < 3) {
      throw InvalidParameter("k must be >= 3");
    }
    if (!(h >= 1.0)) {
      throw InvalidParameter("h must be >= 1");
    }
    if (trials < 1) {
      throw InvalidParameter("trials must be >= 1");
    }
    if (deltas.empty()) {
      throw InvalidParameter("at least one delta is required");
    }
    for (double d : deltas) {
      if (!(d >= 0.0)) {
        throw InvalidParameter("delta must be >= 0");
      }
    }
    if (payload_len == 0) {
      throw InvalidParameter("payload length must be >= 1");
    }
    if (kd_source != "analytic" && kd_source != "mc") {
      throw InvalidParameter("kd source must be analytic or mc");
    }
    if (sweep != "delta" && sweep != "strategy") {
      throw InvalidParameter("sweep must be delta or strategy");
    }
  }
};

inline const char* to_string(HopModel m) { return m == HopModel::costeq ? "costeq" : "sec2"; }
inline const char* to_string(DopingRule r) {
  return r == DopingRule::uniform_input ? "uniform_input" : "output_column";
}
inline const char* to_string(RippleOrder o) {
  switch (o) {
    case RippleOrder::fifo:
      return "fifo";
    case RippleOrder::lifo:
      return "lifo";
    case RippleOrder::random:
      return "random";
  }
  return "?";
}

namespace detail {

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out += (i ? ";" : "") + parts[i];
  }
  return out;
}

inline std::string join_reals(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) {
    parts.push_back(format_real(x));
  }
  return join(parts);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single sample
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) {
    return m;
  }
  for (double x : xs) {
    m.mean += x;
  }
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    for (double x : xs) {
      m.variance += (x - m.mean) * (x - m.mean);
    }
    m.variance /= static_cast<double>(xs.size() - 1);
  }
  return m;
}

inline std::uint32_t surplus_symbols(std::uint32_t k, double delta) {
  return static_cast<std::uint32_t>(std::llround(k * (1.0 + delta)));
}

}  // namespace detail

/// Writes the full configuration as '#' metadata lines.
inline void write_config(CsvWriter& csv, const ExperimentConfig& cfg, const std::string& command) {
  csv.meta("command", command);
  csv.meta("k", cfg.k);
  csv.meta("h", cfg.h);
  csv.meta("delta", detail::join_reals(cfg.deltas));
  csv.meta("dist", detail::join(cfg.dists));
  csv.meta("rs_c", cfg.rs_c);
  csv.meta("rs_delta", cfg.rs_delta);
  std::vector<std::string> modes;
  for (auto d : cfg.disseminations) {
    modes.emplace_back(to_string(d));
  }
  csv.meta("dissemination", detail::join(modes));
  csv.meta("combine", cfg.combine == CombineInput::degree_one_inputs ? "d1" : "d2");
  csv.meta("squad_model", cfg.squad_model == SquadSizeModel::fixed ? "fixed" : "poisson");
  csv.meta("network", cfg.network);
  csv.meta("doping", to_string(cfg.doping));
  csv.meta("order", to_string(cfg.order));
  csv.meta("trials", cfg.trials);
  csv.meta("seed", cfg.seed);
  csv.meta("hop_model", to_string(cfg.hop_model));
  csv.meta("payload_len", cfg.payload_len);
  if (cfg.yield_lambda) {
    csv.meta("yield_lambda", *cfg.yield_lambda);
  }
  csv.meta("sweep", cfg.sweep);
  csv.meta("h_grid", detail::join_reals(cfg.h_grid));
  csv.meta("kd_source", cfg.kd_source);
  csv.meta("strategies", detail::join(cfg.strategies));
}

inline DegreeDistribution named_distribution(const std::string& name, std::uint32_t k, double rs_c,
                                             double rs_delta) {
  if (name == "is") return ideal_soliton(k);
  if (name == "rs") return robust_soliton(k, rs_c, rs_delta);
  if (name == "coupon") return point_mass(1);
  throw InvalidParameter("unknown distribution '" + name + "' (expected is, rs or coupon)");
}

inline StorageMode named_storage(const std::string& name) {
  if (name == "is") return StorageMode::is_combining;
  if (name == "rs") return StorageMode::rs_combining;
  if (name == "coupon") return StorageMode::coupon;
  throw InvalidParameter("unknown storage '" + name + "' (expected coupon, is or rs)");
}

/// Outcome of one decode-sim trial.
struct TrialOutcome {
  std::uint32_t k_s = 0;
  std::uint32_t k_d = 0;
  std::uint32_t fallback = 0;
  std::uint32_t uncovered = 0;
  double doping_hops = 0.0;
  bool exact = false;
};

/// One decode-with-doping trial. Without a network the k_s symbols are
/// encoded directly from the distribution; with one they are collected from
/// the squads nearest relay 0.
inline TrialOutcome run_decode_trial(const ExperimentConfig& cfg, const std::string& dist,
                                     double delta, std::uint64_t trial) {
  Philox rng = Philox::for_trial(cfg.seed, trial);
  const std::uint32_t k_s = detail::surplus_symbols(cfg.k, delta);
  const SourceBlock block = SourceBlock::random(cfg.k, cfg.payload_len, rng);
  DecoderOptions opts;
  opts.order = cfg.order;
  opts.doping = cfg.doping;
  opts.order_seed = cfg.seed ^ trial;
  TrialOutcome out;
  out.k_s = k_s;
  DecodeReport rep;
  if (cfg.network) {
    NetworkConfig nc;
    nc.k = cfg.k;
    nc.h = cfg.h;
    nc.squad_model = cfg.squad_model;
    nc.dissemination = cfg.disseminations.front();
    nc.storage = named_storage(dist);
    nc.combine_input = cfg.combine;
    nc.rs_c = cfg.rs_c;
    nc.rs_delta = cfg.rs_delta;
    const Network net = build_network(nc, rng);
    const Schedule sched = disseminate(block, nc.dissemination);
    auto [dec, col] = simulate_collection_with_doping(net, sched, block, 0, k_s, rng, opts);
    rep = std::move(dec);
    out.doping_hops = col.doping_hops();
  } else {
    const auto d = named_distribution(dist, cfg.k, cfg.rs_c, cfg.rs_delta);
    const auto symbols = encode_symbols(block, d, k_s, rng);
    rep = decode_with_doping(cfg.k, symbols, BlockOracle{&block}, rng, opts);
  }
  out.k_d = rep.k_d;
  out.fallback = rep.fallback_dopings;
  out.uncovered = rep.uncovered_dopings;
  out.exact = rep.success;
  return out;
}

/// Monte Carlo doping counts: one row per trial plus a summary row per
/// (distribution, delta).
inline void run_decode_sim(const ExperimentConfig& cfg, std::ostream& os) {
  cfg.validate();
  CsvWriter csv(os);
  write_config(csv, cfg, "decode-sim");
  csv.header({"record", "strategy", "delta", "trial", "seed", "k", "k_s", "k_d", "p_d",
              "fallback_dopings", "uncovered_dopings", "doping_hops", "kd_mean", "kd_var"});
  for (const auto& dist : cfg.dists) {
    for (double delta : cfg.deltas) {
      const auto results = parallel_map(cfg.trials, cfg.threads, [&](std::size_t t) {
        return run_decode_trial(cfg, dist, delta, t);
      });
      std::vector<double> kd;
      for (std::size_t t = 0; t < results.size(); ++t) {
        const auto& r = results[t];
        kd.push_back(r.k_d);
        csv.row({"trial", dist, delta, t, cfg.seed ^ t, cfg.k, r.k_s, r.k_d,
                 100.0 * r.k_d / cfg.k, r.fallback, r.uncovered, r.doping_hops, "", ""});
      }
      const auto m = detail::moments(kd);
      csv.row({"summary", dist, delta, cfg.trials, cfg.seed, cfg.k,
               detail::surplus_symbols(cfg.k, delta), "", 100.0 * m.mean / cfg.k, "", "", "",
               m.mean, m.variance});
    }
  }
}

/// Analytical doping predictions over the delta grid; optionally the yield
/// pmf P(Y=t) to `yield_os`.
inline void run_analyze(const ExperimentConfig& cfg, std::ostream& os,
                        std::ostream* yield_os = nullptr) {
  cfg.validate();
  CsvWriter csv(os);
  write_config(csv, cfg, "analyze");
  csv.meta("assumption", "predicted_kd = stall_dopings + expected uncovered symbols");
  csv.header({"delta", "k", "stall_dopings", "uncovered", "predicted_kd", "p_d"});
  const auto preds = parallel_map(cfg.deltas.size(), cfg.threads, [&](std::size_t i) {
    return expected_dopings(cfg.k, cfg.deltas[i]);
  });
  for (const auto& p : preds) {
    csv.row({p.delta, p.k, p.stall_dopings, p.uncovered, p.total, p.percent});
  }
  if (cfg.yield_lambda && yield_os != nullptr) {
    const std::uint32_t t_max = cfg.yield_t_max == 0 ? cfg.k : cfg.yield_t_max;
    const YieldPmf pmf = interdoping_yield_pmf(*cfg.yield_lambda, t_max);
    CsvWriter ycsv(*yield_os);
    write_config(ycsv, cfg, "analyze");
    ycsv.meta("lambda", pmf.lambda);
    ycsv.meta("tail", pmf.tail);
    ycsv.meta("clamp_events", pmf.clamp_events);
    ycsv.meta("clamped_mass", pmf.clamped_mass);
    ycsv.header({"t", "prob"});
    for (std::uint32_t t = 0; t <= pmf.t_max(); ++t) {
      ycsv.row({t, pmf.probs[t]});
    }
  }
}

/// Per-relay transmission counts for each dissemination mode. `dump`, when
/// given, receives the network and schedule text dumps.
inline void run_disseminate(const ExperimentConfig& cfg, std::ostream& os,
                            std::ostream* dump = nullptr) {
  cfg.validate();
  CsvWriter csv(os);
  write_config(csv, cfg, "disseminate");
  csv.header({"mode", "k", "relay", "transmissions", "rounds", "verified", "max_buffer"});
  Philox rng(cfg.seed);
  const SourceBlock block = SourceBlock::random(cfg.k, cfg.payload_len, rng);
  for (auto mode : cfg.disseminations) {
    const Schedule sched = disseminate(block, mode);
    for (std::uint32_t i = 0; i < cfg.k; ++i) {
      csv.row({to_string(mode), cfg.k, i, sched.transmissions(i), sched.rounds, sched.verified,
               sched.max_buffer});
    }
    if (dump != nullptr) {
      NetworkConfig nc;
      nc.k = cfg.k;
      nc.h = cfg.h;
      nc.squad_model = cfg.squad_model;
      nc.dissemination = mode;
      nc.storage = named_storage(cfg.dists.front());
      nc.combine_input = cfg.combine;
      nc.rs_c = cfg.rs_c;
      nc.rs_delta = cfg.rs_delta;
      Philox net_rng = rng.substream(1);
      dump_network(*dump, build_network(nc, net_rng));
      dump_schedule(*dump, sched);
    }
  }
}

/// Monte Carlo inputs for the cost model.
struct CostSimulation {
  double is_kd = 0.0;           // mean dopings of an IS collection of k(1+delta)
  double coupon_cover = 0.0;    // mean single-packet symbols until all k are covered
  double coupon_uncovered = 0.0;  // mean uncovered after k H_k symbols
};

inline double simulate_is_dopings(const ExperimentConfig& cfg, double delta) {
  ExperimentConfig c = cfg;
  c.network = false;
  const auto r = parallel_map(cfg.trials, cfg.threads, [&](std::size_t t) {
    return static_cast<double>(run_decode_trial(c, "is", delta, t).k_d);
  });
  return detail::moments(r).mean;
}

inline std::pair<double, double> simulate_coupon(const ExperimentConfig& cfg) {
  const std::uint32_t k = cfg.k;
  const auto draws = static_cast<std::uint64_t>(std::llround(k * harmonic(k)));
  const auto r = parallel_map(cfg.trials, cfg.threads, [&](std::size_t t) {
    Philox rng = Philox::for_trial(cfg.seed, t).substream(7);
    std::vector<std::uint8_t> seen(k, 0);
    std::uint32_t left = k;
    std::uint64_t n = 0;
    std::uint32_t uncovered_at_draws = k;
    while (left > 0) {
      const auto j = uniform_below(rng, k);
      ++n;
      if (!seen[j]) {
        seen[j] = 1;
        --left;
      }
      if (n == draws) {
        uncovered_at_draws = left;
      }
    }
    if (n < draws) {
      uncovered_at_draws = 0;
    }
    return std::pair<double, double>(static_cast<double>(n), uncovered_at_draws);
  });
  std::vector<double> cover;
  std::vector<double> unc;
  for (const auto& [c, u] : r) {
    cover.push_back(c);
    unc.push_back(u);
  }
  return {detail::moments(cover).mean, detail::moments(unc).mean};
}

/// Cost curves: per-h delta sweeps with their minimum (sweep=delta) or
/// strategy comparisons over the h grid (sweep=strategy).
inline void run_cost(const ExperimentConfig& cfg, std::ostream& os) {
  cfg.validate();
  CsvWriter csv(os);
  write_config(csv, cfg, "cost");
  csv.header({"record", "strategy", "k", "h", "delta", "k_s", "k_d", "c_T", "c_T_normalized"});
  const bool mc = cfg.kd_source == "mc";
  PredictionTable table(cfg.k);
  const auto emit = [&](const char* record, const CostPoint& p) {
    csv.row({record, to_string(p.strategy), p.k, p.h, p.delta, p.k_s, p.k_d, p.c_T,
             p.normalized()});
  };
  std::map<double, double> mc_kd;
  const auto kd_for = [&](double delta) -> std::optional<double> {
    if (!mc) {
      return std::nullopt;
    }
    auto it = mc_kd.find(delta);
    if (it == mc_kd.end()) {
      it = mc_kd.emplace(delta, simulate_is_dopings(cfg, delta)).first;
    }
    return it->second;
  };
  if (cfg.sweep == "delta") {
    if (!mc) {
      const auto preds = parallel_map(cfg.deltas.size(), cfg.threads, [&](std::size_t i) {
        return expected_dopings(cfg.k, cfg.deltas[i]);
      });
      for (const auto& p : preds) {
        table.insert(p);
      }
    }
    for (double h : cfg.h_grid) {
      std::optional<CostPoint> best;
      for (double d : cfg.deltas) {
        StrategyParams p;
        p.hop_model = cfg.hop_model;
        p.delta = d;
        p.k_d = kd_for(d);
        const CostPoint pt = strategy_cost(Strategy::is_doping, cfg.k, h, p, &table);
        emit("point", pt);
        if (!best || pt.c_T < best->c_T) {
          best = pt;
        }
      }
      emit("min", *best);
    }
    return;
  }
  std::optional<std::pair<double, double>> coupon_mc;
  for (double h : cfg.h_grid) {
    for (const auto& name : cfg.strategies) {
      const Strategy s = parse_strategy(name);
      StrategyParams p;
      p.hop_model = cfg.hop_model;
      p.delta = cfg.deltas.front();
      p.rs_epsilon = cfg.rs_delta;
      if (mc && s == Strategy::is_doping) {
        p.k_d = kd_for(p.delta);
      }
      if (mc && s == Strategy::coupon) {
        if (!coupon_mc) {
          coupon_mc = simulate_coupon(cfg);
        }
        p.k_s = coupon_mc->first;
        p.k_d = coupon_mc->second;
      }
      emit("point", strategy_cost(s, cfg.k, h, p, &table));
    }
  }
}

}  // namespace sqf
