#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "squadfountain/degree_distribution.hpp"
#include "squadfountain/errors.hpp"
#include "squadfountain/rng.hpp"

namespace sqf {

using SourceIndex = std::uint32_t;
using Payload = std::vector<std::uint8_t>;

inline void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src) {
  const std::size_t n = std::min(dst.size(), src.size());
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] ^= src[i];
  }
}

inline bool is_zero(std::span<const std::uint8_t> bytes) {
  for (auto b : bytes) {
    if (b != 0) {
      return false;
    }
  }
  return true;
}

/// k equal-length source packets, indexed 0..k-1.
class SourceBlock {
 public:
  SourceBlock(std::vector<Payload> packets) : packets_(std::move(packets)) {
    if (packets_.empty()) {
      throw InvalidParameter("source block needs at least one packet");
    }
    const std::size_t len = packets_.front().size();
    if (len == 0) {
      throw InvalidParameter("payload length must be >= 1");
    }
    for (const auto& p : packets_) {
      if (p.size() != len) {
        throw InvalidParameter("source payloads differ in length");
      }
    }
  }

  /// k packets of `payload_len` random bytes.
  template <class Rng>
  static SourceBlock random(std::uint32_t k, std::size_t payload_len, Rng& rng) {
    std::vector<Payload> packets(k, Payload(payload_len));
    for (auto& p : packets) {
      for (std::size_t i = 0; i < payload_len; i += 8) {
        std::uint64_t word = rng();
        for (std::size_t j = i; j < std::min(i + 8, payload_len); ++j) {
          p[j] = static_cast<std::uint8_t>(word);
          word >>= 8;
        }
      }
    }
    return SourceBlock(std::move(packets));
  }

  [[nodiscard]] std::uint32_t k() const noexcept {
    return static_cast<std::uint32_t>(packets_.size());
  }
  [[nodiscard]] std::size_t payload_len() const noexcept { return packets_.front().size(); }
  [[nodiscard]] const Payload& packet(SourceIndex i) const { return packets_.at(i); }

 private:
  std::vector<Payload> packets_;
};

/// XOR of the source packets listed in `neighbors` (sorted, distinct).
///
/// An empty neighbor set is tolerated: a storage node whose combined
/// degree-two transmissions cancel out holds such a symbol, and the decoder
/// treats it as inert.
struct CodedSymbol {
  std::vector<SourceIndex> neighbors;
  Payload payload;

  [[nodiscard]] std::size_t degree() const noexcept { return neighbors.size(); }
};

inline CodedSymbol combine(const SourceBlock& block, std::vector<SourceIndex> neighbors) {
  CodedSymbol sym{std::move(neighbors), Payload(block.payload_len(), 0)};
  for (auto j : sym.neighbors) {
    xor_into(sym.payload, block.packet(j));
  }
  return sym;
}

/// True when the symbol's payload is the XOR of its neighbors' packets.
inline bool consistent(const CodedSymbol& sym, const SourceBlock& block) {
  Payload acc(block.payload_len(), 0);
  for (auto j : sym.neighbors) {
    xor_into(acc, block.packet(j));
  }
  return acc == sym.payload;
}

template <class Rng>
CodedSymbol encode_symbol(const SourceBlock& block, const DegreeDistribution& dist, Rng& rng) {
  if (dist.max_degree() > block.k()) {
    throw InvalidParameter("degree distribution support exceeds block size");
  }
  const std::uint32_t d = sample_degree(dist, rng);
  return combine(block, sample_distinct(rng, block.k(), d));
}

template <class Rng>
std::vector<CodedSymbol> encode_symbols(const SourceBlock& block, const DegreeDistribution& dist,
                                        std::size_t count, Rng& rng) {
  std::vector<CodedSymbol> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(encode_symbol(block, dist, rng));
  }
  return out;
}

enum class RippleOrder { fifo, lifo, random };

/// How a stalled decoder picks the symbol to dope.
enum class DopingRule {
  uniform_input,  ///< uniform over distinct inputs adjacent to lowest-degree outputs
  output_column,  ///< uniform lowest-degree output, then one of its inputs
};

struct DecoderOptions {
  RippleOrder order = RippleOrder::fifo;
  DopingRule doping = DopingRule::uniform_input;
  std::uint64_t order_seed = 0;  // only used by RippleOrder::random
};

enum class StepKind { decode, dope };

struct StepRecord {
  StepKind kind = StepKind::decode;
  SourceIndex index = 0;
  std::uint32_t ripple_before = 0;  // ripple size when the step started
  std::uint32_t releases = 0;       // new ripple entries
  std::uint32_t defected = 0;       // redundant releases dropped
  std::uint32_t dope_tier = 0;      // residual degree used for doping; 0 = uncovered
};

/// Belief-propagation (peeling) decoder over an erasure channel with doping.
///
/// Every output symbol keeps its residual degree, the XOR of its remaining
/// neighbor indices and its residual payload. When the residual degree drops
/// to one the index XOR names the last neighbor, so releases cost O(1).
class PeelingDecoder {
 public:
  PeelingDecoder(std::uint32_t k, std::span<const CodedSymbol> symbols,
                 DecoderOptions options = {})
      : k_(k),
        options_(options),
        order_rng_(options.order_seed, 0x6f72646572ull),
        decoded_(k, 0),
        queued_(k, 0),
        stamp_(k, 0) {
    if (k == 0) {
      throw InvalidParameter("decoder needs k >= 1");
    }
    payload_len_ = 0;
    for (const auto& s : symbols) {
      if (!s.neighbors.empty()) {
        payload_len_ = s.payload.size();
        break;
      }
    }
    outputs_.resize(symbols.size());
    std::vector<std::uint32_t> counts(k, 0);
    for (std::size_t o = 0; o < symbols.size(); ++o) {
      const auto& s = symbols[o];
      if (!s.neighbors.empty() && s.payload.size() != payload_len_) {
        throw MalformedInput("coded symbols differ in payload length");
      }
      for (std::size_t i = 0; i < s.neighbors.size(); ++i) {
        const auto j = s.neighbors[i];
        if (j >= k) {
          throw MalformedInput("symbol " + std::to_string(o) + " references source " +
                               std::to_string(j) + " outside block of " + std::to_string(k));
        }
        if (i > 0 && s.neighbors[i - 1] >= j) {
          throw MalformedInput("symbol " + std::to_string(o) +
                               " neighbors are not sorted and distinct");
        }
        ++counts[j];
      }
    }
    adjacency_offsets_.assign(k + 1, 0);
    for (std::uint32_t j = 0; j < k; ++j) {
      adjacency_offsets_[j + 1] = adjacency_offsets_[j] + counts[j];
    }
    adjacency_.resize(adjacency_offsets_[k]);
    std::vector<std::uint32_t> fill(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
    residual_.assign(symbols.size() * payload_len_, 0);
    recovered_.assign(static_cast<std::size_t>(k) * payload_len_, 0);
    for (std::size_t o = 0; o < symbols.size(); ++o) {
      auto& out = outputs_[o];
      out.neighbors = symbols[o].neighbors;
      out.degree = static_cast<std::uint32_t>(out.neighbors.size());
      for (auto j : out.neighbors) {
        out.index_xor ^= j;
        adjacency_[fill[j]++] = static_cast<std::uint32_t>(o);
      }
      if (out.degree > 0) {
        std::copy(symbols[o].payload.begin(), symbols[o].payload.end(),
                  residual_.begin() + static_cast<std::ptrdiff_t>(o * payload_len_));
      }
    }
    for (std::size_t o = 0; o < outputs_.size(); ++o) {
      if (outputs_[o].degree == 1) {
        release(static_cast<std::uint32_t>(o));
      }
    }
    initial_ripple_ = static_cast<std::uint32_t>(ripple_.size());
  }

  [[nodiscard]] std::uint32_t k() const noexcept { return k_; }
  [[nodiscard]] std::uint32_t decoded_count() const noexcept { return decoded_count_; }
  [[nodiscard]] std::uint32_t undecoded_count() const noexcept { return k_ - decoded_count_; }
  [[nodiscard]] bool complete() const noexcept { return decoded_count_ == k_; }
  [[nodiscard]] bool stalled() const noexcept { return ripple_.empty() && !complete(); }
  [[nodiscard]] std::size_t ripple_size() const noexcept { return ripple_.size(); }
  [[nodiscard]] std::uint32_t initial_ripple() const noexcept { return initial_ripple_; }
  [[nodiscard]] bool is_decoded(SourceIndex j) const { return decoded_.at(j) != 0; }
  [[nodiscard]] bool in_ripple(SourceIndex j) const { return queued_.at(j) != 0; }
  [[nodiscard]] const std::vector<SourceIndex>& doped() const noexcept { return doped_; }
  [[nodiscard]] const std::vector<StepRecord>& history() const noexcept { return history_; }
  [[nodiscard]] std::uint64_t defected_total() const noexcept { return defected_total_; }
  [[nodiscard]] std::uint32_t fallback_dopings() const noexcept { return fallback_dopings_; }
  [[nodiscard]] std::uint32_t uncovered_dopings() const noexcept { return uncovered_dopings_; }
  [[nodiscard]] std::size_t output_count() const noexcept { return outputs_.size(); }
  [[nodiscard]] std::uint32_t residual_degree(std::size_t output) const {
    return outputs_.at(output).degree;
  }
  [[nodiscard]] std::vector<SourceIndex> ripple_contents() const {
    return {ripple_.begin(), ripple_.end()};
  }

  /// Recovered payload of a decoded source symbol.
  [[nodiscard]] std::span<const std::uint8_t> recovered(SourceIndex j) const {
    if (!is_decoded(j)) {
      throw InvalidParameter("source " + std::to_string(j) + " is not decoded");
    }
    return {recovered_.data() + static_cast<std::size_t>(j) * payload_len_, payload_len_};
  }

  /// Counts of residual degrees over outputs with degree >= 2, indexed by degree.
  [[nodiscard]] std::vector<std::uint64_t> unreleased_degree_counts() const {
    std::vector<std::uint64_t> counts;
    for (const auto& out : outputs_) {
      if (out.degree >= 2) {
        if (counts.size() <= out.degree) {
          counts.resize(out.degree + 1, 0);
        }
        ++counts[out.degree];
      }
    }
    return counts;
  }

  /// Pops one ripple entry, peels it from its outputs and returns the number
  /// of new ripple entries.
  std::uint32_t process_ripple_symbol() {
    if (ripple_.empty()) {
      throw StalledDecoder("ripple is empty after " + std::to_string(decoded_count_) +
                           " decoded symbols");
    }
    SourceIndex j = 0;
    switch (options_.order) {
      case RippleOrder::fifo:
        j = ripple_.front();
        ripple_.pop_front();
        break;
      case RippleOrder::lifo:
        j = ripple_.back();
        ripple_.pop_back();
        break;
      case RippleOrder::random: {
        const auto pick = static_cast<std::size_t>(uniform_below(order_rng_, ripple_.size()));
        std::swap(ripple_[pick], ripple_.back());
        j = ripple_.back();
        ripple_.pop_back();
        break;
      }
    }
    StepRecord rec{StepKind::decode, j, static_cast<std::uint32_t>(ripple_.size() + 1), 0, 0, 0};
    queued_[j] = 0;
    peel(j, rec);
    history_.push_back(rec);
    return rec.releases;
  }

  /// Picks the doping candidate for a stalled decoder without changing state.
  /// Returns the source index and the residual degree tier it was drawn from
  /// (0 when no output with degree >= 2 remains).
  template <class Rng>
  std::pair<SourceIndex, std::uint32_t> choose_doping_symbol(Rng& rng) {
    if (!ripple_.empty()) {
      throw InvalidParameter("doping requested while the ripple is nonempty");
    }
    if (complete()) {
      throw InvalidParameter("doping requested after decoding completed");
    }
    std::uint32_t tier = 0;
    for (const auto& out : outputs_) {
      if (out.degree >= 2 && (tier == 0 || out.degree < tier)) {
        tier = out.degree;
        if (tier == 2) {
          break;
        }
      }
    }
    if (tier == 0) {
      candidates_.clear();
      for (SourceIndex j = 0; j < k_; ++j) {
        if (!decoded_[j]) {
          candidates_.push_back(j);
        }
      }
      return {candidates_[uniform_below(rng, candidates_.size())], 0};
    }
    if (options_.doping == DopingRule::output_column) {
      std::vector<std::uint32_t> columns;
      for (std::size_t o = 0; o < outputs_.size(); ++o) {
        if (outputs_[o].degree == tier) {
          columns.push_back(static_cast<std::uint32_t>(o));
        }
      }
      const auto& out = outputs_[columns[uniform_below(rng, columns.size())]];
      candidates_.clear();
      for (auto j : out.neighbors) {
        if (!decoded_[j]) {
          candidates_.push_back(j);
        }
      }
      return {candidates_[uniform_below(rng, candidates_.size())], tier};
    }
    ++generation_;
    candidates_.clear();
    for (const auto& out : outputs_) {
      if (out.degree != tier) {
        continue;
      }
      for (auto j : out.neighbors) {
        if (!decoded_[j] && stamp_[j] != generation_) {
          stamp_[j] = generation_;
          candidates_.push_back(j);
        }
      }
    }
    return {candidates_[uniform_below(rng, candidates_.size())], tier};
  }

  /// Dopes a stalled decoder with a source packet fetched from `oracle`.
  ///
  /// `oracle(index)` returns std::optional<Payload>; std::nullopt means the
  /// packet cannot be polled.
  template <class Oracle, class Rng>
  SourceIndex dope(Oracle&& oracle, Rng& rng) {
    const auto [j, tier] = choose_doping_symbol(rng);
    std::optional<Payload> value = oracle(j);
    if (!value) {
      throw DopingUnavailable("source " + std::to_string(j) + " could not be polled");
    }
    if (payload_len_ == 0) {
      payload_len_ = value->size();
      recovered_.assign(static_cast<std::size_t>(k_) * payload_len_, 0);
    }
    if (value->size() != payload_len_) {
      throw MalformedInput("doped payload length mismatch");
    }
    std::copy(value->begin(), value->end(),
              recovered_.begin() + static_cast<std::ptrdiff_t>(j * payload_len_));
    StepRecord rec{StepKind::dope, j, 0, 0, 0, tier};
    peel(j, rec);
    doped_.push_back(j);
    if (tier == 0) {
      ++uncovered_dopings_;
    } else if (tier > 2) {
      ++fallback_dopings_;
    }
    history_.push_back(rec);
    return j;
  }

 private:
  struct Output {
    std::vector<SourceIndex> neighbors;
    std::uint32_t degree = 0;
    SourceIndex index_xor = 0;
  };

  std::span<std::uint8_t> residual(std::uint32_t o) {
    return {residual_.data() + static_cast<std::size_t>(o) * payload_len_, payload_len_};
  }
  std::span<std::uint8_t> recovered_mut(SourceIndex j) {
    return {recovered_.data() + static_cast<std::size_t>(j) * payload_len_, payload_len_};
  }

  // Output o has residual degree one: queue its last neighbor unless redundant.
  // Returns true on a new ripple entry.
  bool release(std::uint32_t o) {
    const SourceIndex t = outputs_[o].index_xor;
    if (decoded_[t] || queued_[t]) {
      ++defected_total_;
      return false;
    }
    queued_[t] = 1;
    auto dst = recovered_mut(t);
    auto src = residual(o);
    std::copy(src.begin(), src.end(), dst.begin());
    ripple_.push_back(t);
    return true;
  }

  void peel(SourceIndex j, StepRecord& rec) {
    decoded_[j] = 1;
    ++decoded_count_;
    const auto value = std::span<const std::uint8_t>(
        recovered_.data() + static_cast<std::size_t>(j) * payload_len_, payload_len_);
    for (auto a = adjacency_offsets_[j]; a < adjacency_offsets_[j + 1]; ++a) {
      const auto o = adjacency_[a];
      auto& out = outputs_[o];
      if (out.degree == 0) {
        continue;
      }
      --out.degree;
      out.index_xor ^= j;
      xor_into(residual(o), value);
      if (out.degree == 1) {
        if (release(o)) {
          ++rec.releases;
        } else {
          ++rec.defected;
        }
      }
    }
  }

  std::uint32_t k_;
  DecoderOptions options_;
  Philox order_rng_;
  std::size_t payload_len_ = 0;
  std::vector<Output> outputs_;
  std::vector<std::uint32_t> adjacency_offsets_;
  std::vector<std::uint32_t> adjacency_;
  std::vector<std::uint8_t> residual_;
  std::vector<std::uint8_t> recovered_;
  std::vector<std::uint8_t> decoded_;
  std::vector<std::uint8_t> queued_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t generation_ = 0;
  std::vector<SourceIndex> candidates_;
  std::deque<SourceIndex> ripple_;
  std::uint32_t decoded_count_ = 0;
  std::uint32_t initial_ripple_ = 0;
  std::vector<SourceIndex> doped_;
  std::vector<StepRecord> history_;
  std::uint64_t defected_total_ = 0;
  std::uint32_t fallback_dopings_ = 0;
  std::uint32_t uncovered_dopings_ = 0;
};

/// Outcome of one decode-with-doping run.
///
/// Doping i happens when `doping_times[i]` symbols are already decoded.
/// `initial_run` symbols are decoded before the first doping, the
/// interdoping yields cover consecutive dopings (each yield counts the doping
/// step itself), and `final_run` counts the steps after the last doping, so
/// initial_run + sum(yields) + final_run == k.
struct DecodeReport {
  bool success = false;
  std::uint32_t k = 0;
  std::uint32_t k_s = 0;
  std::uint32_t k_d = 0;
  std::vector<SourceIndex> doped_indices;
  std::vector<std::uint32_t> doping_times;
  std::vector<std::uint32_t> ripple_trajectory;  // ripple size after each step
  std::vector<std::uint32_t> interdoping_yields;
  std::uint32_t initial_run = 0;
  std::uint32_t final_run = 0;
  std::uint32_t initial_ripple = 0;
  std::uint32_t fallback_dopings = 0;
  std::uint32_t uncovered_dopings = 0;
  std::uint64_t defected = 0;
  std::vector<StepRecord> history;

  [[nodiscard]] double doping_ratio() const noexcept {
    return k == 0 ? 0.0 : static_cast<double>(k_d) / k;
  }
};

struct NoObserver {
  void operator()(const PeelingDecoder&) const noexcept {}
};

/// Runs the decoder to completion: process the ripple while it is nonempty,
/// dope whenever it stalls. `observer(decoder)` is invoked after every step.
template <class Oracle, class Rng, class Observer = NoObserver>
DecodeReport decode_with_doping(std::uint32_t k, std::span<const CodedSymbol> symbols,
                                Oracle&& oracle, Rng& rng, DecoderOptions options = {},
                                Observer&& observer = {}) {
  PeelingDecoder dec(k, symbols, options);
  DecodeReport rep;
  rep.k = k;
  rep.k_s = static_cast<std::uint32_t>(symbols.size());
  rep.initial_ripple = dec.initial_ripple();
  rep.ripple_trajectory.reserve(k);
  while (!dec.complete()) {
    if (dec.stalled()) {
      rep.doping_times.push_back(dec.decoded_count());
      dec.dope(oracle, rng);
    } else {
      dec.process_ripple_symbol();
    }
    rep.ripple_trajectory.push_back(static_cast<std::uint32_t>(dec.ripple_size()));
    observer(std::as_const(dec));
  }
  rep.success = true;
  rep.k_d = static_cast<std::uint32_t>(dec.doped().size());
  rep.doped_indices = dec.doped();
  rep.fallback_dopings = dec.fallback_dopings();
  rep.uncovered_dopings = dec.uncovered_dopings();
  rep.defected = dec.defected_total();
  if (rep.doping_times.empty()) {
    rep.initial_run = k;
  } else {
    rep.initial_run = rep.doping_times.front();
    for (std::size_t i = 1; i < rep.doping_times.size(); ++i) {
      rep.interdoping_yields.push_back(rep.doping_times[i] - rep.doping_times[i - 1]);
    }
    rep.final_run = k - rep.doping_times.back();
  }
  rep.history = dec.history();
  return rep;
}

/// Empirical degree pmf of the outputs with residual degree >= 2.
/// Empty when there are none.
inline std::vector<double> unreleased_degree_histogram(const PeelingDecoder& dec) {
  auto counts = dec.unreleased_degree_counts();
  std::uint64_t total = 0;
  for (auto c : counts) {
    total += c;
  }
  std::vector<double> pmf;
  if (total == 0) {
    return pmf;
  }
  pmf.resize(counts.size(), 0.0);
  for (std::size_t d = 0; d < counts.size(); ++d) {
    pmf[d] = static_cast<double>(counts[d]) / static_cast<double>(total);
  }
  return pmf;
}

/// Doping oracle backed by the true source block.
struct BlockOracle {
  const SourceBlock* block = nullptr;
  std::optional<Payload> operator()(SourceIndex j) const { return block->packet(j); }
};

}  // namespace sqf
