#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "squadfountain/analytics.hpp"
#include "squadfountain/codec.hpp"

using namespace sqf;

namespace {

SourceBlock block_of(std::uint32_t k, std::uint64_t seed = 11) {
  Philox rng(seed, 0);
  return SourceBlock::random(k, 16, rng);
}

bool equal_bytes(std::span<const std::uint8_t> a, const Payload& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

struct FailingOracle {
  std::optional<Payload> operator()(SourceIndex) const { return std::nullopt; }
};

}  // namespace

TEST(Encode, DegreeOneCopiesThePacket) {
  const auto block = block_of(10);
  Philox rng(1, 0);
  const auto sym = encode_symbol(block, point_mass(1), rng);
  ASSERT_EQ(sym.degree(), 1u);
  EXPECT_EQ(sym.payload, block.packet(sym.neighbors[0]));
}

TEST(Encode, FullDegreeXorsEverything) {
  const auto block = block_of(6);
  Philox rng(1, 0);
  const auto sym = encode_symbol(block, point_mass(6), rng);
  Payload acc(block.payload_len(), 0);
  for (SourceIndex j = 0; j < 6; ++j) {
    for (std::size_t b = 0; b < acc.size(); ++b) {
      acc[b] ^= block.packet(j)[b];
    }
  }
  EXPECT_EQ(sym.neighbors.size(), 6u);
  EXPECT_EQ(sym.payload, acc);
}

TEST(Encode, SymbolsAreConsistent) {
  const auto block = block_of(100);
  Philox rng(2, 0);
  for (const auto& s : encode_symbols(block, ideal_soliton(100), 200, rng)) {
    ASSERT_TRUE(consistent(s, block));
  }
}

TEST(Decoder, HandPeeledThreeSymbols) {
  const auto block = block_of(3);
  const std::vector<CodedSymbol> syms{combine(block, {0}), combine(block, {0, 1}),
                                      combine(block, {1, 2})};
  PeelingDecoder dec(3, syms);
  EXPECT_EQ(dec.ripple_contents(), std::vector<SourceIndex>{0});
  int steps = 0;
  while (!dec.complete()) {
    dec.process_ripple_symbol();
    ++steps;
  }
  EXPECT_EQ(steps, 3);
  for (SourceIndex j = 0; j < 3; ++j) {
    EXPECT_TRUE(equal_bytes(dec.recovered(j), block.packet(j)));
  }
}

TEST(Decoder, DegreeOneSymbolSeedsRipple) {
  const auto block = block_of(5);
  const std::vector<CodedSymbol> syms{combine(block, {3})};
  PeelingDecoder dec(5, syms);
  EXPECT_EQ(dec.ripple_contents(), std::vector<SourceIndex>{3});
}

TEST(Decoder, NoDegreeOneMeansStalledAtStart) {
  const auto block = block_of(5);
  const std::vector<CodedSymbol> syms{combine(block, {0, 1}), combine(block, {2, 3, 4})};
  PeelingDecoder dec(5, syms);
  EXPECT_TRUE(dec.stalled());
  EXPECT_EQ(dec.decoded_count(), 0u);
  EXPECT_THROW(dec.process_ripple_symbol(), StalledDecoder);
}

TEST(Decoder, DuplicateDegreeOneQueuedOnce) {
  const auto block = block_of(5);
  const std::vector<CodedSymbol> syms{combine(block, {3}), combine(block, {3})};
  PeelingDecoder dec(5, syms);
  EXPECT_EQ(dec.ripple_contents(), std::vector<SourceIndex>{3});
  EXPECT_EQ(dec.defected_total(), 1u);
}

TEST(Decoder, DegreeTwoPeelReleasesPartner) {
  const auto block = block_of(4);
  const std::vector<CodedSymbol> syms{combine(block, {1}), combine(block, {1, 2})};
  PeelingDecoder dec(4, syms);
  EXPECT_EQ(dec.process_ripple_symbol(), 1u);
  EXPECT_EQ(dec.ripple_contents(), std::vector<SourceIndex>{2});
  dec.process_ripple_symbol();
  EXPECT_TRUE(equal_bytes(dec.recovered(2), block.packet(2)));
}

TEST(Decoder, DegreeThreeDropsToTwo) {
  const auto block = block_of(4);
  const std::vector<CodedSymbol> syms{combine(block, {0}), combine(block, {0, 1, 2})};
  PeelingDecoder dec(4, syms);
  EXPECT_EQ(dec.process_ripple_symbol(), 0u);
  EXPECT_EQ(dec.residual_degree(1), 2u);
  EXPECT_TRUE(dec.stalled());
}

TEST(Decoder, OutOfRangeNeighborIsMalformed) {
  CodedSymbol bad{{0, 9}, Payload(4, 0)};
  EXPECT_THROW(PeelingDecoder(5, std::vector<CodedSymbol>{bad}), MalformedInput);
}

TEST(Doping, MinimalUnlock) {
  const auto block = block_of(5);
  const std::vector<CodedSymbol> syms{combine(block, {1, 4})};
  PeelingDecoder dec(5, syms);
  Philox rng(1, 0);
  const SourceIndex doped = dec.dope(BlockOracle{&block}, rng);
  EXPECT_TRUE(doped == 1 || doped == 4);
  EXPECT_EQ(dec.ripple_size(), 1u);
  EXPECT_EQ(dec.ripple_contents()[0], doped == 1 ? 4u : 1u);
}

TEST(Doping, ReleasesEveryDegreeTwoCoNeighbor) {
  const auto block = block_of(8);
  // Source 0 is the only candidate touching every degree-two output.
  const std::vector<CodedSymbol> syms{combine(block, {0, 1}), combine(block, {0, 2}),
                                      combine(block, {0, 3}), combine(block, {4, 5, 6})};
  std::uint32_t zero_releases = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    PeelingDecoder d(8, syms);
    Philox r(seed, 0);
    if (d.dope(BlockOracle{&block}, r) == 0) {
      zero_releases = static_cast<std::uint32_t>(d.ripple_size());
      break;
    }
  }
  EXPECT_EQ(zero_releases, 3u);
}

TEST(Doping, UncoveredSourceIsForced) {
  const auto block = block_of(8);
  std::vector<CodedSymbol> syms;
  for (SourceIndex j = 0; j < 8; ++j) {
    if (j != 7) {
      syms.push_back(combine(block, {j}));
    }
  }
  PeelingDecoder dec(8, syms);
  while (!dec.stalled()) {
    dec.process_ripple_symbol();
  }
  Philox rng(1, 0);
  EXPECT_EQ(dec.dope(BlockOracle{&block}, rng), 7u);
  EXPECT_EQ(dec.uncovered_dopings(), 1u);
}

TEST(Doping, OracleFailureSurfaces) {
  const auto block = block_of(4);
  const std::vector<CodedSymbol> syms{combine(block, {0, 1})};
  PeelingDecoder dec(4, syms);
  Philox rng(1, 0);
  EXPECT_THROW(dec.dope(FailingOracle{}, rng), DopingUnavailable);
}

TEST(DecodeWithDoping, FullPeelingNeedsNoDoping) {
  const auto block = block_of(6);
  std::vector<CodedSymbol> syms{combine(block, {0})};
  for (SourceIndex j = 1; j < 6; ++j) {
    syms.push_back(combine(block, {static_cast<SourceIndex>(j - 1), j}));
  }
  Philox rng(1, 0);
  const auto rep = decode_with_doping(6, syms, BlockOracle{&block}, rng);
  EXPECT_TRUE(rep.success);
  EXPECT_EQ(rep.k_d, 0u);
}

TEST(DecodeWithDoping, NoSymbolsIsPurePolling) {
  const auto block = block_of(9);
  Philox rng(1, 0);
  const auto rep = decode_with_doping(9, std::vector<CodedSymbol>{}, BlockOracle{&block}, rng);
  EXPECT_EQ(rep.k_d, 9u);
  EXPECT_EQ(rep.uncovered_dopings, 9u);
}

TEST(DecodeWithDoping, RecoversBlockAndAccountsSteps) {
  const std::uint32_t k = 500;
  const auto block = block_of(k, 5);
  Philox rng(6, 0);
  const auto syms = encode_symbols(block, ideal_soliton(k), k, rng);
  auto rep = decode_with_doping(k, syms, BlockOracle{&block}, rng, {}, [&](const PeelingDecoder& d) {
    if (d.complete()) {
      for (SourceIndex j = 0; j < k; ++j) {
        ASSERT_TRUE(equal_bytes(d.recovered(j), block.packet(j)));
      }
    }
  });
  std::uint32_t total = rep.initial_run + rep.final_run;
  for (auto y : rep.interdoping_yields) {
    total += y;
  }
  EXPECT_EQ(total, k);
  EXPECT_EQ(rep.k_d, rep.doping_times.size());
}

TEST(DecodeWithDoping, IdealSolitonDopesLessThanRobust) {
  const std::uint32_t k = 1000;
  double is_sum = 0.0;
  double rs_sum = 0.0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    auto rng = Philox::for_trial(123, t);
    const auto block = SourceBlock::random(k, 8, rng);
    const auto is = encode_symbols(block, ideal_soliton(k), k, rng);
    const auto rs = encode_symbols(block, robust_soliton(k), k, rng);
    is_sum += decode_with_doping(k, is, BlockOracle{&block}, rng).k_d;
    rs_sum += decode_with_doping(k, rs, BlockOracle{&block}, rng).k_d;
  }
  const double is_pct = 100.0 * is_sum / trials / k;
  EXPECT_GT(is_pct, 0.5);
  EXPECT_LT(is_pct, 10.0);
  EXPECT_LT(is_sum, rs_sum);
}

TEST(UnreleasedHistogram, FreshStateFollowsSolitonTail) {
  // Ten independent encodings, pooled.
  const std::uint32_t k = 1000;
  std::vector<double> pooled(k + 1, 0.0);
  const int draws = 10;
  for (int t = 0; t < draws; ++t) {
    auto rng = Philox::for_trial(8, t);
    const auto block = SourceBlock::random(k, 1, rng);
    const auto syms = encode_symbols(block, ideal_soliton(k), k, rng);
    const auto hist = unreleased_degree_histogram(PeelingDecoder(k, syms));
    for (std::size_t d = 0; d < hist.size(); ++d) {
      pooled[d] += hist[d] / draws;
    }
  }
  const auto want = unreleased_degree_dist(k, 0).normalized;
  double tv = 0.0;
  for (std::uint32_t d = 0; d <= k; ++d) {
    tv += std::fabs(pooled[d] - want.pmf(d));
  }
  EXPECT_LT(tv / 2.0, 0.05);
}

TEST(UnreleasedHistogram, SingleDegreeThreeOutput) {
  const auto block = block_of(5);
  PeelingDecoder dec(5, std::vector<CodedSymbol>{combine(block, {0, 2, 4})});
  const auto hist = unreleased_degree_histogram(dec);
  ASSERT_EQ(hist.size(), 4u);
  EXPECT_DOUBLE_EQ(hist[3], 1.0);
}

TEST(UnreleasedHistogram, EmptyWhenNothingUnreleased) {
  const auto block = block_of(5);
  PeelingDecoder dec(5, std::vector<CodedSymbol>{combine(block, {1})});
  EXPECT_TRUE(unreleased_degree_histogram(dec).empty());
}
