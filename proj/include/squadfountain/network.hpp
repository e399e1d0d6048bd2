#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "squadfountain/codec.hpp"
#include "squadfountain/degree_distribution.hpp"
#include "squadfountain/errors.hpp"
#include "squadfountain/rng.hpp"

namespace sqf {

// Circular squad network. Relays 0..k-1 sit on a ring and relay i is the
// virtual source of packet i. Shared squad g holds the storage nodes that
// overhear relays g and g+1 (mod k).

enum class SquadSizeModel { fixed, poisson };
enum class Dissemination { degree_one, degree_two };
enum class StorageMode { coupon, is_combining, rs_combining };
enum class CombineInput { degree_one_inputs, degree_two_inputs };

struct NetworkConfig {
  std::uint32_t k = 1000;
  double h = 200.0;
  SquadSizeModel squad_model = SquadSizeModel::fixed;
  Dissemination dissemination = Dissemination::degree_one;
  StorageMode storage = StorageMode::is_combining;
  CombineInput combine_input = CombineInput::degree_one_inputs;
  double rs_c = 0.1;
  double rs_delta = 0.5;

  void validate() const {
    if (k < 3) {
      throw InvalidParameter("network needs k >= 3 relays");
    }
    if (!(h >= 1.0)) {
      throw InvalidParameter("coverage redundancy h must be >= 1");
    }
  }

  /// Storage nodes combine raw degree-two transmissions rather than packets.
  [[nodiscard]] bool transmission_slots() const noexcept {
    return dissemination == Dissemination::degree_two &&
           combine_input == CombineInput::degree_two_inputs && storage != StorageMode::coupon;
  }
};

/// Rounds of the degree-two exchange: ceil((k-1)/2).
constexpr std::uint32_t degree_two_rounds(std::uint32_t k) noexcept { return k / 2; }

/// Hop distance between relays a and b on a ring of k relays.
constexpr std::uint32_t ring_distance(std::uint32_t a, std::uint32_t b, std::uint32_t k) noexcept {
  const std::uint32_t d = a > b ? a - b : b - a;
  return std::min(d, k - d);
}

/// Storage nodes grouped by shared squad, each with its pre-planned degree and
/// slot subset. Node data is kept in flat arrays; squad g owns nodes
/// [squad_offsets[g], squad_offsets[g+1]).
class Network {
 public:
  Network(NetworkConfig cfg, std::uint32_t slot_count, std::vector<std::uint32_t> squad_offsets,
          std::vector<std::uint32_t> slot_offsets, std::vector<std::uint32_t> slots)
      : cfg_(cfg),
        slot_count_(slot_count),
        squad_offsets_(std::move(squad_offsets)),
        slot_offsets_(std::move(slot_offsets)),
        slots_(std::move(slots)) {}

  [[nodiscard]] const NetworkConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] std::uint32_t k() const noexcept { return cfg_.k; }
  [[nodiscard]] std::uint32_t slot_count() const noexcept { return slot_count_; }
  [[nodiscard]] std::uint32_t squad_count() const noexcept { return cfg_.k; }
  [[nodiscard]] std::uint32_t node_count() const noexcept { return squad_offsets_.back(); }
  [[nodiscard]] std::uint32_t squad_size(std::uint32_t g) const {
    return squad_offsets_.at(g + 1) - squad_offsets_.at(g);
  }
  [[nodiscard]] std::uint32_t first_node(std::uint32_t g) const { return squad_offsets_.at(g); }
  [[nodiscard]] std::uint32_t squad_of(std::uint32_t node) const {
    const auto it = std::upper_bound(squad_offsets_.begin(), squad_offsets_.end(), node);
    return static_cast<std::uint32_t>(it - squad_offsets_.begin()) - 1;
  }
  [[nodiscard]] std::uint32_t degree(std::uint32_t node) const {
    return slot_offsets_.at(node + 1) - slot_offsets_.at(node);
  }
  [[nodiscard]] std::span<const std::uint32_t> slots(std::uint32_t node) const {
    return {slots_.data() + slot_offsets_.at(node), degree(node)};
  }
  /// The relay holding source packet i is relay i.
  [[nodiscard]] static std::uint32_t source_relay(SourceIndex i) noexcept { return i; }

 private:
  NetworkConfig cfg_;
  std::uint32_t slot_count_;
  std::vector<std::uint32_t> squad_offsets_;
  std::vector<std::uint32_t> slot_offsets_;
  std::vector<std::uint32_t> slots_;
};

inline DegreeDistribution storage_distribution(const NetworkConfig& cfg) {
  switch (cfg.storage) {
    case StorageMode::coupon:
      return point_mass(1);
    case StorageMode::is_combining:
      return ideal_soliton(cfg.k);
    case StorageMode::rs_combining:
      return robust_soliton(cfg.k, cfg.rs_c, cfg.rs_delta);
  }
  throw InvalidParameter("unknown storage mode");
}

/// Populates every shared squad and lets each storage node decide ahead of
/// time which d of the dissemination slots it will combine.
template <class Rng>
Network build_network(const NetworkConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::uint32_t slot_count =
      cfg.transmission_slots() ? 2 * degree_two_rounds(cfg.k) : cfg.k;
  const DegreeDistribution dist = storage_distribution(cfg);
  std::vector<std::uint32_t> squad_offsets{0};
  std::vector<std::uint32_t> slot_offsets{0};
  std::vector<std::uint32_t> slots;
  squad_offsets.reserve(cfg.k + 1);
  for (std::uint32_t g = 0; g < cfg.k; ++g) {
    const auto size = cfg.squad_model == SquadSizeModel::fixed
                          ? static_cast<std::uint32_t>(std::llround(cfg.h))
                          : static_cast<std::uint32_t>(sample_poisson(rng, cfg.h));
    for (std::uint32_t n = 0; n < size; ++n) {
      const std::uint32_t d = std::min(sample_degree(dist, rng), slot_count);
      const auto chosen = sample_distinct(rng, slot_count, d);
      slots.insert(slots.end(), chosen.begin(), chosen.end());
      slot_offsets.push_back(static_cast<std::uint32_t>(slots.size()));
    }
    squad_offsets.push_back(squad_offsets.back() + size);
  }
  return Network(cfg, slot_count, std::move(squad_offsets), std::move(slot_offsets),
                 std::move(slots));
}

/// The one or two source packets a transmission carries, sorted.
class PacketSet {
 public:
  PacketSet() = default;
  PacketSet(std::initializer_list<SourceIndex> ids) {
    if (ids.size() > 2) {
      throw InvalidParameter("a transmission carries at most two packets");
    }
    for (auto id : ids) {
      ids_[n_++] = id;
    }
  }
  [[nodiscard]] const SourceIndex* begin() const noexcept { return ids_.data(); }
  [[nodiscard]] const SourceIndex* end() const noexcept { return ids_.data() + n_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] SourceIndex operator[](std::size_t i) const { return ids_.at(i); }

 private:
  std::array<SourceIndex, 2> ids_{};
  std::uint8_t n_ = 0;
};

/// One relay broadcast. The payload bytes live in the owning Schedule.
struct Transmission {
  std::uint32_t round = 0;
  PacketSet packets;
  std::size_t offset = 0;
};

/// Everything the relays sent, plus the delivery check.
struct Schedule {
  Dissemination mode = Dissemination::degree_one;
  std::uint32_t k = 0;
  std::uint32_t rounds = 0;  // rounds in which at least one relay transmitted
  std::vector<std::vector<Transmission>> by_relay;
  bool verified = false;       // every relay holds all k packets bit-exact
  std::size_t max_buffer = 0;  // largest relay working buffer (degree-two only)

  std::size_t payload_len = 0;
  std::vector<std::uint8_t> arena;

  [[nodiscard]] std::size_t transmissions(std::uint32_t relay) const {
    return by_relay.at(relay).size();
  }
  [[nodiscard]] std::span<const std::uint8_t> payload(const Transmission& tx) const {
    return {arena.data() + tx.offset, payload_len};
  }
  /// Appends payload bytes and returns their offset.
  std::size_t store(std::span<const std::uint8_t> bytes) {
    const std::size_t at = arena.size();
    arena.insert(arena.end(), bytes.begin(), bytes.end());
    return at;
  }
};

namespace detail {

inline std::uint32_t ring_index(std::int64_t i, std::uint32_t k) {
  const auto m = static_cast<std::int64_t>(k);
  return static_cast<std::uint32_t>(((i % m) + m) % m);
}

inline bool verify_delivery(const std::vector<std::vector<std::optional<Payload>>>& known,
                            const SourceBlock& block) {
  for (const auto& relay : known) {
    for (SourceIndex j = 0; j < block.k(); ++j) {
      if (!relay[j] || *relay[j] != block.packet(j)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Plain forwarding: each relay sends its own packet, then forwards every
/// packet the round after it first hears it. Every relay transmits each of the
/// k packets exactly once.
inline Schedule disseminate_degree_one(const SourceBlock& block) {
  const std::uint32_t k = block.k();
  if (k < 3) {
    throw InvalidParameter("dissemination needs k >= 3");
  }
  Schedule sched;
  sched.mode = Dissemination::degree_one;
  sched.k = k;
  sched.by_relay.resize(k);
  sched.payload_len = block.payload_len();
  sched.arena.reserve(static_cast<std::size_t>(k) * block.payload_len());
  constexpr std::size_t unknown = static_cast<std::size_t>(-1);
  // known[i * k + j]: arena offset of the copy of packet j relay i holds.
  // Forwarding re-sends those bytes without copying them.
  std::vector<std::size_t> known(static_cast<std::size_t>(k) * k, unknown);
  std::vector<std::vector<SourceIndex>> fresh(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    sched.by_relay[i].reserve(k);
    known[static_cast<std::size_t>(i) * k + i] = sched.store(block.packet(i));
    fresh[i].push_back(i);
  }
  for (std::uint32_t round = 1;; ++round) {
    bool any = false;
    std::vector<std::vector<SourceIndex>> next(k);
    for (std::uint32_t i = 0; i < k; ++i) {
      for (auto j : fresh[i]) {
        const std::size_t held = known[static_cast<std::size_t>(i) * k + j];
        sched.by_relay[i].push_back({round, {j}, held});
        any = true;
        for (auto nb : {detail::ring_index(std::int64_t{i} - 1, k),
                        detail::ring_index(std::int64_t{i} + 1, k)}) {
          auto& slot = known[static_cast<std::size_t>(nb) * k + j];
          if (slot == unknown) {
            slot = held;
            next[nb].push_back(j);
          }
        }
      }
    }
    if (!any) {
      break;
    }
    sched.rounds = round;
    fresh = std::move(next);
  }
  sched.verified = true;
  for (std::size_t c = 0; c < known.size(); ++c) {
    const auto& want = block.packet(static_cast<SourceIndex>(c % k));
    if (known[c] == unknown ||
        !std::equal(want.begin(), want.end(), sched.arena.begin() + known[c])) {
      sched.verified = false;
      break;
    }
  }
  return sched;
}

/// Degree-two combining exchange.
///
/// Round 1: relay i sends p_i. Round r >= 2: relay i first online-decodes the
/// combinations heard in round r-1 (recovering p_{i-r+1} and p_{i+r-1}), then
/// sends p_{i-r+1} XOR p_{i+r-1}. From round 4 on, storing the two recovered
/// packets overwrites p_{i-r+4} and p_{i+r-4}, so a relay never buffers more
/// than six packets. A final decoding pass follows the last round.
inline Schedule disseminate_degree_two(const SourceBlock& block) {
  const std::uint32_t k = block.k();
  if (k < 3) {
    throw InvalidParameter("dissemination needs k >= 3");
  }
  const std::uint32_t rounds = degree_two_rounds(k);
  Schedule sched;
  sched.mode = Dissemination::degree_two;
  sched.k = k;
  sched.rounds = rounds;
  sched.payload_len = block.payload_len();
  sched.by_relay.resize(k);
  for (auto& list : sched.by_relay) {
    list.reserve(rounds);  // inboxes hold pointers into these lists
  }
  std::vector<std::vector<std::optional<Payload>>> known(
      k, std::vector<std::optional<Payload>>(k));
  std::vector<std::map<SourceIndex, Payload>> buffer(k);
  std::vector<std::vector<const Transmission*>> inbox(k);
  const auto idx = [k](std::int64_t i) { return detail::ring_index(i, k); };

  // Online decoding of the combinations received in round `heard`.
  const auto decode_inbox = [&](std::uint32_t i, std::uint32_t heard) {
    const std::uint32_t r = heard + 1;
    for (const Transmission* tx : inbox[i]) {
      SourceIndex unknown = 0;
      const auto bytes = sched.payload(*tx);
      Payload value(bytes.begin(), bytes.end());
      int missing = 0;
      for (auto j : tx->packets) {
        const auto it = buffer[i].find(j);
        if (it == buffer[i].end()) {
          unknown = j;
          ++missing;
        } else if (tx->packets.size() == 2) {
          xor_into(value, it->second);
        }
      }
      if (missing == 0) {
        continue;
      }
      if (missing > 1) {
        throw std::logic_error("relay " + std::to_string(i) +
                               " cannot online-decode a round " + std::to_string(heard) +
                               " combination");
      }
      buffer[i][unknown] = value;
      if (!known[i][unknown]) {
        known[i][unknown] = std::move(value);
      }
    }
    inbox[i].clear();
    if (r > 3) {
      const std::int64_t off = std::int64_t{r} - 4;
      for (auto stale : {idx(std::int64_t{i} - off), idx(std::int64_t{i} + off)}) {
        if (stale != idx(std::int64_t{i} - r + 1) && stale != idx(std::int64_t{i} + r - 1)) {
          buffer[i].erase(stale);
        }
      }
    }
    sched.max_buffer = std::max(sched.max_buffer, buffer[i].size());
  };

  for (std::uint32_t r = 1; r <= rounds; ++r) {
    for (std::uint32_t i = 0; i < k; ++i) {
      Transmission tx;
      tx.round = r;
      if (r == 1) {
        known[i][i] = block.packet(i);
        buffer[i][i] = block.packet(i);
        tx.packets = {i};
        tx.offset = sched.store(block.packet(i));
      } else {
        decode_inbox(i, r - 1);
        const SourceIndex left = idx(std::int64_t{i} - r + 1);
        const SourceIndex right = idx(std::int64_t{i} + r - 1);
        tx.packets = {std::min(left, right), std::max(left, right)};
        Payload combined = buffer[i].at(left);
        xor_into(combined, buffer[i].at(right));
        tx.offset = sched.store(combined);
      }
      sched.max_buffer = std::max(sched.max_buffer, buffer[i].size());
      sched.by_relay[i].push_back(std::move(tx));
    }
    for (std::uint32_t i = 0; i < k; ++i) {
      inbox[i].push_back(&sched.by_relay[idx(std::int64_t{i} - 1)].back());
      inbox[i].push_back(&sched.by_relay[idx(std::int64_t{i} + 1)].back());
    }
  }
  for (std::uint32_t i = 0; i < k; ++i) {
    decode_inbox(i, rounds);
  }
  sched.verified = detail::verify_delivery(known, block);
  return sched;
}

inline Schedule disseminate(const SourceBlock& block, Dissemination mode) {
  return mode == Dissemination::degree_one ? disseminate_degree_one(block)
                                           : disseminate_degree_two(block);
}

namespace detail {

// What the nodes of squad g overhear: relay g's transmissions then relay g+1's.
inline std::vector<const Transmission*> overheard(const Schedule& sched, std::uint32_t g) {
  std::vector<const Transmission*> out;
  for (auto relay : {g, (g + 1) % sched.k}) {
    for (const auto& tx : sched.by_relay[relay]) {
      out.push_back(&tx);
    }
  }
  return out;
}

// Peels the overheard transmissions down to individual packets.
inline std::vector<std::optional<Payload>> online_decode(
    const Schedule& sched, const std::vector<const Transmission*>& heard) {
  const std::uint32_t k = sched.k;
  std::vector<std::optional<Payload>> packets(k);
  bool progress = true;
  while (progress) {
    progress = false;
    for (const Transmission* tx : heard) {
      SourceIndex unknown = 0;
      int missing = 0;
      for (auto j : tx->packets) {
        if (!packets[j]) {
          unknown = j;
          ++missing;
        }
      }
      if (missing != 1) {
        continue;
      }
      const auto bytes = sched.payload(*tx);
      Payload value(bytes.begin(), bytes.end());
      for (auto j : tx->packets) {
        if (j != unknown) {
          xor_into(value, *packets[j]);
        }
      }
      packets[unknown] = std::move(value);
      progress = true;
    }
  }
  return packets;
}

}  // namespace detail

/// Coded symbols stored by the given nodes after overhearing `sched`.
///
/// With transmission slots the node XORs the chosen degree-two transmissions
/// and its neighbor set is their symmetric difference. Otherwise the squad
/// online-decodes what it hears and the node XORs the chosen packets.
inline std::vector<CodedSymbol> storage_listen(const Network& net, const Schedule& sched,
                                               std::span<const std::uint32_t> nodes) {
  if (sched.k != net.k()) {
    throw InvalidParameter("schedule and network disagree on k");
  }
  const bool tx_slots = net.config().transmission_slots() && sched.mode == Dissemination::degree_two;
  std::map<std::uint32_t, std::vector<const Transmission*>> heard_cache;
  std::map<std::uint32_t, std::vector<std::optional<Payload>>> packet_cache;
  std::vector<CodedSymbol> out;
  out.reserve(nodes.size());
  for (auto node : nodes) {
    const std::uint32_t g = net.squad_of(node);
    auto heard_it = heard_cache.find(g);
    if (heard_it == heard_cache.end()) {
      heard_it = heard_cache.emplace(g, detail::overheard(sched, g)).first;
    }
    const auto& heard = heard_it->second;
    CodedSymbol sym;
    if (tx_slots) {
      if (heard.size() != net.slot_count()) {
        throw InvalidParameter("schedule does not match the network's slot plan");
      }
      std::vector<SourceIndex> all;
      for (auto s : net.slots(node)) {
        const auto* tx = heard[s];
        all.insert(all.end(), tx->packets.begin(), tx->packets.end());
        const auto bytes = sched.payload(*tx);
        if (sym.payload.empty()) {
          sym.payload.assign(bytes.begin(), bytes.end());
        } else {
          xor_into(sym.payload, bytes);
        }
      }
      std::sort(all.begin(), all.end());
      for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) {
          ++j;
        }
        if ((j - i) % 2 == 1) {
          sym.neighbors.push_back(all[i]);
        }
        i = j;
      }
    } else {
      auto pk_it = packet_cache.find(g);
      if (pk_it == packet_cache.end()) {
        pk_it = packet_cache.emplace(g, detail::online_decode(sched, heard)).first;
      }
      const auto& packets = pk_it->second;
      for (auto s : net.slots(node)) {
        if (!packets[s]) {
          throw std::logic_error("squad " + std::to_string(g) + " never recovered packet " +
                                 std::to_string(s));
        }
        sym.neighbors.push_back(s);
        if (sym.payload.empty()) {
          sym.payload = *packets[s];
        } else {
          xor_into(sym.payload, *packets[s]);
        }
      }
    }
    out.push_back(std::move(sym));
  }
  return out;
}

/// Per-collection accounting for the cost model.
struct CollectionReport {
  std::uint32_t collector = 0;
  std::uint32_t k_s = 0;
  std::uint32_t s = 0;    // squads drained
  std::uint32_t k_d = 0;  // filled in after decoding
  std::vector<std::uint32_t> squads;
  double supersquad_hops = 0.0;
  std::vector<std::uint32_t> doped_hop_costs;

  [[nodiscard]] double doping_hops() const noexcept {
    double total = 0.0;
    for (auto c : doped_hop_costs) {
      total += c;
    }
    return total;
  }
};

struct CollectionPlan {
  std::vector<std::uint32_t> nodes;
  CollectionReport report;
};

/// Squad visited at drain position j from the collection relay: the two
/// squads touching the relay first, then alternately further out.
constexpr std::uint32_t drain_squad(std::uint32_t collector, std::uint32_t position,
                                    std::uint32_t k) noexcept {
  const std::uint32_t step = (position + 1) / 2;
  return position % 2 == 0 ? (collector + step) % k : (collector + k - step % k) % k;
}

/// Takes k_s symbols from the squads nearest the collection relay. A symbol
/// from drain position j costs 1 + j/2 hops, which averages (s-1)/4 + 1 over
/// s full squads.
inline CollectionPlan collect(const Network& net, std::uint32_t collector, std::uint32_t k_s) {
  if (collector >= net.k()) {
    throw InvalidParameter("collector relay out of range");
  }
  if (k_s > net.node_count()) {
    throw ExhaustedNetwork("requested " + std::to_string(k_s) + " symbols from a network of " +
                           std::to_string(net.node_count()) + " storage nodes");
  }
  CollectionPlan plan;
  plan.report.collector = collector;
  plan.report.k_s = k_s;
  plan.nodes.reserve(k_s);
  for (std::uint32_t pos = 0; plan.nodes.size() < k_s && pos < net.k(); ++pos) {
    const std::uint32_t g = drain_squad(collector, pos, net.k());
    const std::uint32_t size = net.squad_size(g);
    if (size == 0) {
      continue;
    }
    plan.report.squads.push_back(g);
    const double hop = 1.0 + pos / 2.0;
    for (std::uint32_t n = 0; n < size && plan.nodes.size() < k_s; ++n) {
      plan.nodes.push_back(net.first_node(g) + n);
      plan.report.supersquad_hops += hop;
    }
  }
  plan.report.s = static_cast<std::uint32_t>(plan.report.squads.size());
  return plan;
}

/// Collect upfront, then decode with doping; each doped packet is polled from
/// its source relay at ring-distance hop cost.
template <class Rng>
std::pair<DecodeReport, CollectionReport> simulate_collection_with_doping(
    const Network& net, const Schedule& sched, const SourceBlock& block, std::uint32_t collector,
    std::uint32_t k_s, Rng& rng, DecoderOptions options = {}) {
  auto plan = collect(net, collector, k_s);
  const auto symbols = storage_listen(net, sched, plan.nodes);
  auto& rep = plan.report;
  auto oracle = [&](SourceIndex j) -> std::optional<Payload> {
    rep.doped_hop_costs.push_back(ring_distance(collector, Network::source_relay(j), net.k()));
    return block.packet(j);
  };
  DecodeReport dec = decode_with_doping(net.k(), symbols, oracle, rng, options);
  rep.k_d = dec.k_d;
  return {std::move(dec), std::move(rep)};
}

/// Neighbor set of a storage node, tracked symbolically (no payloads). The
/// schedule is only consulted when nodes combine raw transmissions.
inline std::vector<SourceIndex> node_neighbors(const Network& net, const Schedule* sched,
                                               std::uint32_t node) {
  const auto slots = net.slots(node);
  if (!net.config().transmission_slots()) {
    return {slots.begin(), slots.end()};
  }
  if (sched == nullptr || sched->mode != Dissemination::degree_two) {
    throw InvalidParameter("transmission slots need a degree-two schedule");
  }
  const auto heard = detail::overheard(*sched, net.squad_of(node));
  std::vector<SourceIndex> all;
  for (auto s : slots) {
    all.insert(all.end(), heard.at(s)->packets.begin(), heard.at(s)->packets.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<SourceIndex> out;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) {
      ++j;
    }
    if ((j - i) % 2 == 1) {
      out.push_back(all[i]);
    }
    i = j;
  }
  return out;
}

/// Storage nodes drained (in collection order) until every source packet
/// appears in some collected symbol.
inline std::uint32_t nodes_to_cover(const Network& net, std::uint32_t collector,
                                    const Schedule* sched = nullptr) {
  std::vector<std::uint8_t> covered(net.k(), 0);
  std::uint32_t remaining = net.k();
  std::uint32_t taken = 0;
  for (std::uint32_t pos = 0; pos < net.k(); ++pos) {
    const std::uint32_t g = drain_squad(collector, pos, net.k());
    for (std::uint32_t n = 0; n < net.squad_size(g); ++n) {
      ++taken;
      for (auto j : node_neighbors(net, sched, net.first_node(g) + n)) {
        if (!covered[j]) {
          covered[j] = 1;
          --remaining;
        }
      }
      if (remaining == 0) {
        return taken;
      }
    }
  }
  throw ExhaustedNetwork("network storage never covers all source packets");
}

/// Source packets absent from every symbol in `symbols`.
inline std::uint32_t uncovered_sources(std::uint32_t k, std::span<const CodedSymbol> symbols) {
  std::vector<std::uint8_t> covered(k, 0);
  for (const auto& s : symbols) {
    for (auto j : s.neighbors) {
      covered[j] = 1;
    }
  }
  std::uint32_t n = 0;
  for (auto c : covered) {
    n += c == 0 ? 1u : 0u;
  }
  return n;
}

inline const char* to_string(Dissemination d) {
  return d == Dissemination::degree_one ? "d1" : "d2";
}
inline const char* to_string(StorageMode s) {
  switch (s) {
    case StorageMode::coupon:
      return "coupon";
    case StorageMode::is_combining:
      return "is";
    case StorageMode::rs_combining:
      return "rs";
  }
  return "?";
}

/// One line per storage node: "<squad> <degree> <slot>,<slot>,...".
inline void dump_network(std::ostream& os, const Network& net) {
  const auto& c = net.config();
  os << "# network k=" << c.k << " h=" << c.h
     << " squad_model=" << (c.squad_model == SquadSizeModel::fixed ? "fixed" : "poisson")
     << " dissemination=" << to_string(c.dissemination) << " storage=" << to_string(c.storage)
     << " combine=" << (c.combine_input == CombineInput::degree_one_inputs ? "d1" : "d2")
     << " slots=" << net.slot_count() << " nodes=" << net.node_count() << '\n';
  for (std::uint32_t g = 0; g < net.squad_count(); ++g) {
    for (std::uint32_t n = 0; n < net.squad_size(g); ++n) {
      const std::uint32_t node = net.first_node(g) + n;
      os << g << ' ' << net.degree(node) << ' ';
      bool first = true;
      for (auto s : net.slots(node)) {
        os << (first ? "" : ",") << s;
        first = false;
      }
      os << '\n';
    }
  }
}

/// One line per transmission: "<relay> <round> <packet>[^<packet>]".
inline void dump_schedule(std::ostream& os, const Schedule& sched) {
  os << "# schedule mode=" << to_string(sched.mode) << " k=" << sched.k
     << " rounds=" << sched.rounds << " verified=" << (sched.verified ? 1 : 0) << '\n';
  for (std::uint32_t i = 0; i < sched.k; ++i) {
    for (const auto& tx : sched.by_relay[i]) {
      os << i << ' ' << tx.round << ' ';
      for (std::size_t p = 0; p < tx.packets.size(); ++p) {
        os << (p ? "^" : "") << tx.packets[p];
      }
      os << '\n';
    }
  }
}

}  // namespace sqf
