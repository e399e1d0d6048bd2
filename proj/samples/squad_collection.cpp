// Builds a squad network, runs degree-two dissemination, collects k symbols
// near relay 0 and prints the hop bill.

#include <cstdio>

#include "squadfountain/cost.hpp"
#include "squadfountain/network.hpp"

int main() {
  sqf::NetworkConfig cfg;
  cfg.k = 400;
  cfg.h = 50;
  cfg.dissemination = sqf::Dissemination::degree_two;
  sqf::Philox rng(7);
  const auto block = sqf::SourceBlock::random(cfg.k, 32, rng);
  const auto net = sqf::build_network(cfg, rng);
  const auto sched = sqf::disseminate(block, cfg.dissemination);
  std::printf("dissemination: %u rounds, verified=%s, max buffer %zu\n", sched.rounds,
              sched.verified ? "yes" : "no", sched.max_buffer);

  const auto [dec, col] = sqf::simulate_collection_with_doping(net, sched, block, 0, cfg.k, rng);
  const double hops = col.supersquad_hops + col.doping_hops();
  std::printf("squads drained=%u doped=%u hops per packet=%.3f model=%.3f polling=%.0f\n", col.s,
              dec.k_d, hops / cfg.k, sqf::collection_cost(cfg.k, cfg.k, dec.k_d, cfg.h),
              sqf::doping_symbol_cost(cfg.k));
  return dec.success ? 0 : 1;
}
