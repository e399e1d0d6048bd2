// Command-line front end for the squad fountain simulator.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "squadfountain/acceptance.hpp"
#include "squadfountain/experiments.hpp"

namespace {

using sqf::ExperimentConfig;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) {
      out.push_back(cur);
    }
  }
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw sqf::InvalidParameter("bad number '" + s + "' in " + what);
  }
}

/// "a:b:step" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
      throw sqf::InvalidParameter(what + " grid must look like a:b:step");
    }
    return sqf::linear_grid(parse_real(parts[0], what), parse_real(parts[1], what),
                            parse_real(parts[2], what));
  }
  std::vector<double> out;
  for (const auto& p : split(text, ',')) {
    out.push_back(parse_real(p, what));
  }
  if (out.empty()) {
    throw sqf::InvalidParameter(what + " is empty");
  }
  return out;
}

struct RawOptions {
  std::uint32_t k = 1000;
  double h = 200.0;
  std::string delta;
  std::string delta_grid;
  std::string dist;
  double rs_c = 0.1;
  double rs_delta = 0.5;
  std::string dissemination;
  std::string storage;
  std::string combine = "d1";
  std::string squad_model = "fixed";
  bool network = false;
  std::string doping = "uniform";
  std::string order = "fifo";
  std::uint32_t trials = 1;
  std::optional<std::uint64_t> seed;
  std::string hop_model = "costeq";
  std::string out;
  std::string config;
  unsigned threads = 1;
  std::size_t payload_len = 32;
  std::optional<double> yield_lambda;
  std::string yield_out;
  std::uint32_t yield_t_max = 0;
  std::string sweep = "delta";
  std::string h_grid;
  std::string kd_source = "analytic";
  std::string strategies;
  std::string dump;
  std::vector<std::string> criteria;
  double tolerance_scale = 1.0;
};

void add_common(CLI::App* sub, RawOptions& o) {
  sub->add_option("--k", o.k, "Number of source packets (relays)");
  sub->add_option("--h", o.h, "Coverage redundancy: storage nodes per squad");
  sub->add_option("--delta", o.delta, "Collection surplus k_s/k - 1 (comma list allowed)");
  sub->add_option("--delta-grid", o.delta_grid, "Surplus grid a:b:step");
  sub->add_option("--dist", o.dist, "Degree distributions: is, rs, coupon (comma list)");
  sub->add_option("--rs-c", o.rs_c, "Robust soliton c");
  sub->add_option("--rs-delta", o.rs_delta, "Robust soliton failure bound");
  sub->add_option("--dissemination", o.dissemination, "d1, d2 or d1,d2");
  sub->add_option("--storage", o.storage, "Storage mode: coupon, is, rs (comma list)");
  sub->add_option("--trials", o.trials, "Monte Carlo trials");
  sub->add_option("--seed", o.seed, "Experiment seed");
  sub->add_option("--hop-model", o.hop_model, "costeq or sec2");
  sub->add_option("--out", o.out, "Output CSV path (default stdout)");
  sub->add_option("--config", o.config, "key=value config file; flags override it");
  sub->add_option("--threads", o.threads, "Worker threads");
  sub->add_option("--payload-len", o.payload_len, "Bytes per source packet");
}

ExperimentConfig to_config(const RawOptions& o, bool seed_required) {
  ExperimentConfig cfg;
  cfg.k = o.k;
  cfg.h = o.h;
  if (!o.delta_grid.empty()) {
    cfg.deltas = parse_grid(o.delta_grid, "--delta-grid");
  } else if (!o.delta.empty()) {
    cfg.deltas = parse_grid(o.delta, "--delta");
  }
  if (!o.dist.empty()) {
    cfg.dists = split(o.dist, ',');
  }
  if (!o.storage.empty()) {
    cfg.dists = split(o.storage, ',');
    cfg.network = true;
  }
  cfg.network = cfg.network || o.network;
  cfg.rs_c = o.rs_c;
  cfg.rs_delta = o.rs_delta;
  if (!o.dissemination.empty()) {
    cfg.disseminations.clear();
    for (const auto& m : split(o.dissemination, ',')) {
      if (m == "d1") {
        cfg.disseminations.push_back(sqf::Dissemination::degree_one);
      } else if (m == "d2") {
        cfg.disseminations.push_back(sqf::Dissemination::degree_two);
      } else {
        throw sqf::InvalidParameter("--dissemination expects d1 or d2, got '" + m + "'");
      }
    }
  }
  if (o.combine != "d1" && o.combine != "d2") {
    throw sqf::InvalidParameter("--combine expects d1 or d2");
  }
  cfg.combine =
      o.combine == "d1" ? sqf::CombineInput::degree_one_inputs : sqf::CombineInput::degree_two_inputs;
  if (o.squad_model != "fixed" && o.squad_model != "poisson") {
    throw sqf::InvalidParameter("--squad-model expects fixed or poisson");
  }
  cfg.squad_model =
      o.squad_model == "fixed" ? sqf::SquadSizeModel::fixed : sqf::SquadSizeModel::poisson;
  if (o.doping == "uniform") {
    cfg.doping = sqf::DopingRule::uniform_input;
  } else if (o.doping == "column") {
    cfg.doping = sqf::DopingRule::output_column;
  } else {
    throw sqf::InvalidParameter("--doping expects uniform or column");
  }
  if (o.order == "fifo") {
    cfg.order = sqf::RippleOrder::fifo;
  } else if (o.order == "lifo") {
    cfg.order = sqf::RippleOrder::lifo;
  } else if (o.order == "random") {
    cfg.order = sqf::RippleOrder::random;
  } else {
    throw sqf::InvalidParameter("--order expects fifo, lifo or random");
  }
  cfg.trials = o.trials;
  if (!o.seed && seed_required) {
    throw sqf::InvalidParameter("--seed is required");
  }
  cfg.seed = o.seed.value_or(0);
  if (o.hop_model == "costeq") {
    cfg.hop_model = sqf::HopModel::costeq;
  } else if (o.hop_model == "sec2") {
    cfg.hop_model = sqf::HopModel::sec2;
  } else {
    throw sqf::InvalidParameter("--hop-model expects costeq or sec2");
  }
  cfg.threads = o.threads == 0 ? sqf::default_threads() : o.threads;
  cfg.payload_len = o.payload_len;
  cfg.yield_lambda = o.yield_lambda;
  cfg.yield_t_max = o.yield_t_max;
  cfg.sweep = o.sweep;
  if (!o.h_grid.empty()) {
    cfg.h_grid = parse_grid(o.h_grid, "--h-grid");
  }
  cfg.kd_source = o.kd_source;
  if (!o.strategies.empty()) {
    cfg.strategies = split(o.strategies, ',');
    for (const auto& s : cfg.strategies) {
      sqf::parse_strategy(s);
    }
  }
  return cfg;
}

/// Output stream for --out (or stdout).
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) {
        throw sqf::InvalidParameter("cannot open '" + path + "' for writing");
      }
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) {
      throw sqf::Error("write failed");
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

/// Reads key=value lines; blank lines and '#' comments are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw sqf::InvalidParameter("cannot read config file '" + path + "'");
  }
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw sqf::InvalidParameter(path + ":" + std::to_string(n) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw sqf::InvalidParameter(path + ":" + std::to_string(n) + ": empty key");
    }
    if (key.rfind("--", 0) == 0) {
      key = key.substr(2);
    }
    for (auto& c : key) {
      if (c == '_') {
        c = '-';
      }
    }
    if (key == "config") {
      throw sqf::InvalidParameter(path + ":" + std::to_string(n) + ": nested config files are not supported");
    }
    out.emplace_back(key + "\x1f" + std::to_string(n), value);
  }
  return out;
}

/// Finds --config in argv without a full parse.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      return argv[i + 1];
    }
    if (a.rfind("--config=", 0) == 0) {
      return a.substr(9);
    }
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fountain-coded squad network storage: simulation, analysis and cost sweeps"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  RawOptions o;

  auto* sim = app.add_subcommand("decode-sim", "Monte Carlo decoding with doping");
  add_common(sim, o);
  sim->add_flag("--network", o.network, "Collect symbols from a simulated squad network");
  sim->add_option("--combine", o.combine, "Storage inputs: d1 (decoded packets) or d2 (raw pairs)");
  sim->add_option("--squad-model", o.squad_model, "fixed or poisson squad sizes");
  sim->add_option("--doping", o.doping, "uniform (input) or column doping choice");
  sim->add_option("--order", o.order, "Ripple order: fifo, lifo, random");

  auto* analyze = app.add_subcommand("analyze", "Expected doping predictions");
  add_common(analyze, o);
  analyze->add_option("--yield-lambda", o.yield_lambda, "Also dump P(Y=t) at this intensity");
  analyze->add_option("--yield-out", o.yield_out, "Path for the yield pmf CSV (default stdout)");
  analyze->add_option("--yield-tmax", o.yield_t_max, "Largest t in the yield dump (default k)");

  auto* dis = app.add_subcommand("disseminate", "Relay dissemination schedules");
  add_common(dis, o);
  dis->add_option("--combine", o.combine, "Storage inputs for the network dump: d1 or d2");
  dis->add_option("--squad-model", o.squad_model, "fixed or poisson squad sizes");
  dis->add_option("--dump", o.dump, "Write network and schedule text dumps here");

  auto* cost = app.add_subcommand("cost", "Collection cost curves");
  add_common(cost, o);
  cost->add_option("--sweep", o.sweep, "delta or strategy");
  cost->add_option("--h-grid", o.h_grid, "h values: list or a:b:step");
  cost->add_option("--kd-source", o.kd_source, "analytic or mc");
  cost->add_option("--strategies", o.strategies, "polling,coupon,rs_no_doping,is_doping");

  auto* val = app.add_subcommand("validate", "Run the acceptance criteria");
  add_common(val, o);
  val->add_option("--criterion", o.criteria, "Criterion number or name (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  val->add_option("--tolerance-scale", o.tolerance_scale, "Multiply every tolerance");

  // Config-file values go in front of the real arguments so flags win.
  std::vector<std::string> args;
  try {
    const std::string config_path = find_config(argc, argv);
    args.emplace_back(argv[0]);
    if (argc > 1) {
      args.emplace_back(argv[1]);
    }
    if (!config_path.empty() && argc > 1) {
      CLI::App* target = nullptr;
      for (auto* s : {sim, analyze, dis, cost, val}) {
        if (s->get_name() == argv[1]) {
          target = s;
        }
      }
      if (target != nullptr) {
        for (const auto& [tagged, value] : read_config_file(config_path)) {
          const auto sep = tagged.find('\x1f');
          const std::string key = tagged.substr(0, sep);
          const std::string line = tagged.substr(sep + 1);
          if (target->get_option_no_throw("--" + key) == nullptr) {
            throw sqf::InvalidParameter(config_path + ":" + line + ": unknown key '" + key +
                                        "' for " + target->get_name());
          }
          args.push_back("--" + key + "=" + value);
        }
      }
    }
    for (int i = 2; i < argc; ++i) {
      args.emplace_back(argv[i]);
    }
  } catch (const sqf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::vector<char*> cargs;
  for (auto& a : args) {
    cargs.push_back(a.data());
  }

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*val) {
      sqf::acceptance::Options opt;
      opt.tolerance_scale = o.tolerance_scale;
      if (o.seed) {
        opt.seed = *o.seed;
      }
      opt.threads = o.threads == 0 ? sqf::default_threads() : o.threads;
      Output out(o.out);
      const int failures = sqf::acceptance::run(opt, o.criteria, out.stream());
      out.finish();
      return failures == 0 ? 0 : 1;
    }
    ExperimentConfig cfg = to_config(o, true);
    if (o.h_grid.empty() && app.get_subcommands().front()->count("--h") > 0) {
      cfg.h_grid = {cfg.h};
    }
    Output out(o.out);
    if (*sim) {
      sqf::run_decode_sim(cfg, out.stream());
    } else if (*analyze) {
      std::unique_ptr<Output> yield;
      std::ostream* yield_os = nullptr;
      if (cfg.yield_lambda) {
        if (o.yield_out.empty()) {
          yield_os = &std::cout;
        } else {
          yield = std::make_unique<Output>(o.yield_out);
          yield_os = &yield->stream();
        }
      }
      sqf::run_analyze(cfg, out.stream(), yield_os);
      if (yield) {
        yield->finish();
      }
    } else if (*dis) {
      ExperimentConfig c = cfg;
      if (o.dissemination.empty()) {
        c.disseminations = {sqf::Dissemination::degree_one, sqf::Dissemination::degree_two};
      }
      std::unique_ptr<Output> dump;
      if (!o.dump.empty()) {
        dump = std::make_unique<Output>(o.dump);
      }
      sqf::run_disseminate(c, out.stream(), dump ? &dump->stream() : nullptr);
      if (dump) {
        dump->finish();
      }
    } else if (*cost) {
      sqf::run_cost(cfg, out.stream());
    }
    out.finish();
  } catch (const sqf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
