// Encodes a random block with the Ideal Soliton, then decodes it, doping
// whenever the ripple runs dry.

#include <cstdio>

#include "squadfountain/codec.hpp"

int main() {
  const std::uint32_t k = 1000;
  sqf::Philox rng(2024);
  const auto block = sqf::SourceBlock::random(k, 64, rng);
  const auto symbols = sqf::encode_symbols(block, sqf::ideal_soliton(k), k, rng);
  const auto report = sqf::decode_with_doping(k, symbols, sqf::BlockOracle{&block}, rng);
  std::printf("k=%u collected=%u doped=%u (%.2f%%) uncovered=%u\n", k, report.k_s, report.k_d,
              100.0 * report.doping_ratio(), report.uncovered_dopings);
  return report.success ? 0 : 1;
}
