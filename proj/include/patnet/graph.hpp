#ifndef PATNET_GRAPH_HPP
#define PATNET_GRAPH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "patnet/error.hpp"
#include "patnet/kinds.hpp"
#include "patnet/rng.hpp"

namespace patnet {

using Ordinal = std::uint32_t;

struct EntityRef {
  EntityKind kind;
  std::string source_id;
  Ordinal ordinal;

  std::string label() const { return std::string(to_string(kind)) + ":" + source_id; }
};

struct Triple {
  Ordinal head;
  RelationKind relation;
  Ordinal tail;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    return static_cast<std::size_t>(
        mix64((std::uint64_t{t.head} << 32 | t.tail) ^ (std::uint64_t{index_of(t.relation)} << 61)));
  }
};

inline std::uint64_t triple_key(const Triple& t) { return TripleHash{}(t); }

/// Typed triple store over the five-relation patent graph.
///
/// Entities are interned in first-seen order, so ordinals are dense and
/// contiguous from 0. Two adjacency indexes, (head, relation) -> tails and
/// (tail, relation) -> heads, are maintained in lockstep with the triple set.
/// Construction is single-writer; a built store is read-only and may be
/// shared freely between threads.
class TripleStore {
 public:
  Ordinal intern(EntityKind kind, std::string_view source_id) {
    auto key = entity_key(kind, source_id);
    if (auto it = lookup_.find(key); it != lookup_.end()) return it->second;
    auto ord = static_cast<Ordinal>(entities_.size());
    entities_.push_back(EntityRef{kind, std::string(source_id), ord});
    by_kind_[index_of(kind)].push_back(ord);
    lookup_.emplace(std::move(key), ord);
    return ord;
  }

  std::optional<Ordinal> find(EntityKind kind, std::string_view source_id) const {
    auto it = lookup_.find(entity_key(kind, source_id));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  /// Resolves a "kind:id" label.
  std::optional<Ordinal> find(std::string_view label) const {
    auto colon = label.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto kind = parse_entity_kind(label.substr(0, colon));
    if (!kind) return std::nullopt;
    return find(*kind, label.substr(colon + 1));
  }

  const EntityRef& entity(Ordinal ord) const {
    if (ord >= entities_.size()) {
      throw Error(ErrorCode::UnknownEntity, "ordinal " + std::to_string(ord));
    }
    return entities_[ord];
  }

  EntityKind kind_of(Ordinal ord) const { return entity(ord).kind; }

  std::size_t entity_count() const { return entities_.size(); }
  std::span<const EntityRef> entities() const { return entities_; }
  std::span<const Ordinal> entities_of(EntityKind kind) const { return by_kind_[index_of(kind)]; }

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  std::span<const Triple> triples() const { return triples_; }

  bool contains(const Triple& t) const { return set_.contains(t); }

  /// Strict insertion: rejects duplicates.
  void add_triple(const Triple& t) {
    validate(t);
    if (contains(t)) throw Error(ErrorCode::DuplicateTriple, describe(t));
    insert_unchecked(t);
  }

  /// Bulk-load insertion: duplicates are ignored. Returns true when inserted.
  bool insert_triple(const Triple& t) {
    validate(t);
    if (contains(t)) return false;
    insert_unchecked(t);
    return true;
  }

  std::span<const Ordinal> tails(Ordinal head, RelationKind r) const {
    auto it = index_hr_.find(adjacency_key(head, r));
    if (it == index_hr_.end()) return {};
    return it->second;
  }

  std::span<const Ordinal> heads(Ordinal tail, RelationKind r) const {
    auto it = index_tr_.find(adjacency_key(tail, r));
    if (it == index_tr_.end()) return {};
    return it->second;
  }

  /// Every (head, relation) key present in the head index, unordered.
  template <typename Fn>
  void for_each_hr(Fn&& fn) const {
    for (const auto& [key, tails] : index_hr_) fn(key_ordinal(key), key_relation(key), tails);
  }

  template <typename Fn>
  void for_each_tr(Fn&& fn) const {
    for (const auto& [key, heads] : index_tr_) fn(key_ordinal(key), key_relation(key), heads);
  }

  /// Copy of the vocabulary with no triples. Ordinals are preserved.
  TripleStore vocabulary_only() const {
    TripleStore out;
    for (const auto& e : entities_) out.intern(e.kind, e.source_id);
    return out;
  }

  /// `<ordinal>\t<kind>:<source_id>` per line.
  std::string vocabulary_text() const {
    std::string out;
    for (const auto& e : entities_) {
      out += std::to_string(e.ordinal);
      out += '\t';
      out += e.label();
      out += '\n';
    }
    return out;
  }

  std::uint64_t fingerprint() const { return fnv1a64(vocabulary_text()); }

  std::string describe(const Triple& t) const {
    auto name = [&](Ordinal o) {
      return o < entities_.size() ? entities_[o].label() : "#" + std::to_string(o);
    };
    return "<" + name(t.head) + ", " + std::string(to_string(t.relation)) + ", " + name(t.tail) +
           ">";
  }

 private:
  static std::string entity_key(EntityKind kind, std::string_view id) {
    std::string key;
    key.reserve(id.size() + 2);
    key += static_cast<char>('0' + index_of(kind));
    key += ':';
    key += id;
    return key;
  }

  static std::uint64_t adjacency_key(Ordinal o, RelationKind r) {
    return std::uint64_t{o} << 3 | index_of(r);
  }
  static Ordinal key_ordinal(std::uint64_t key) { return static_cast<Ordinal>(key >> 3); }
  static RelationKind key_relation(std::uint64_t key) {
    return static_cast<RelationKind>(key & 7u);
  }

  void validate(const Triple& t) const {
    if (t.head >= entities_.size() || t.tail >= entities_.size()) {
      throw Error(ErrorCode::UnknownEntity, describe(t));
    }
    auto schema = schema_of(t.relation);
    if (entities_[t.head].kind != schema.head || entities_[t.tail].kind != schema.tail) {
      throw Error(ErrorCode::SchemaViolation,
                  describe(t) + " requires " + std::string(to_string(schema.head)) + " -> " +
                      std::string(to_string(schema.tail)));
    }
    if (t.relation == RelationKind::Cite && t.head == t.tail) {
      throw Error(ErrorCode::SchemaViolation, "self-citation " + describe(t));
    }
  }

  void insert_unchecked(const Triple& t) {
    triples_.push_back(t);
    set_.insert(t);
    index_hr_[adjacency_key(t.head, t.relation)].push_back(t.tail);
    index_tr_[adjacency_key(t.tail, t.relation)].push_back(t.head);
  }

  std::vector<EntityRef> entities_;
  std::array<std::vector<Ordinal>, kEntityKindCount> by_kind_;
  std::unordered_map<std::string, Ordinal> lookup_;
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> set_;
  std::unordered_map<std::uint64_t, std::vector<Ordinal>> index_hr_;
  std::unordered_map<std::uint64_t, std::vector<Ordinal>> index_tr_;
};

// ---------------------------------------------------------------------------
// Train/test split

struct SplitSpec {
  double test_fraction = 0.10;
  std::uint64_t seed = 0;
};

struct Split {
  TripleStore train;  // full vocabulary, training triples only
  std::vector<Triple> test;
};

inline Split split(const TripleStore& store, const SplitSpec& cfg) {
  if (store.empty()) throw Error(ErrorCode::EmptyStore, "cannot split an empty store");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "test_fraction must lie in (0, 1)");
  }
  const auto n = store.size();
  const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * double(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed({cfg.seed, 0x5b1u}));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<char> is_test(n, 0);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = 1;

  Split out{store.vocabulary_only(), {}};
  out.test.reserve(n_test);
  auto triples = store.triples();
  for (std::size_t i = 0; i < n; ++i) {
    if (is_test[i]) {
      out.test.push_back(triples[i]);
    } else {
      out.train.add_triple(triples[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corrupt-triple sampling

inline EntityKind slot_kind(RelationKind r, Side side) {
  auto s = schema_of(r);
  return side == Side::Head ? s.head : s.tail;
}

inline Ordinal slot_of(const Triple& t, Side side) { return side == Side::Head ? t.head : t.tail; }

inline Triple replace_slot(Triple t, Side side, Ordinal replacement) {
  (side == Side::Head ? t.head : t.tail) = replacement;
  return t;
}

/// Entities a corrupted slot may be drawn from (the original included).
inline std::vector<Ordinal> candidate_pool(const TripleStore& store, const Triple& t, Side side,
                                           Pool pool) {
  if (pool == Pool::SameKind) {
    auto ents = store.entities_of(slot_kind(t.relation, side));
    return {ents.begin(), ents.end()};
  }
  std::vector<Ordinal> all(store.entity_count());
  std::iota(all.begin(), all.end(), Ordinal{0});
  return all;
}

/// Number of replacements available for one slot of `t`.
inline std::size_t corruption_capacity(const TripleStore& store, const Triple& t, Side side,
                                       Pool pool, bool filtered) {
  const Ordinal original = slot_of(t, side);
  if (!filtered) {
    std::size_t n = pool == Pool::SameKind ? store.entities_of(slot_kind(t.relation, side)).size()
                                           : store.entity_count();
    return n > 0 ? n - 1 : 0;
  }
  std::size_t n = 0;
  for (auto c : candidate_pool(store, t, side, pool)) {
    if (c != original && !store.contains(replace_slot(t, side, c))) ++n;
  }
  return n;
}

/// Draws `n` distinct corruptions of one slot of `t`, uniformly without
/// replacement. Under `filtered`, corruptions that are themselves stored
/// triples are never returned. Pure in (store, t, arguments, seed).
inline std::vector<Triple> sample_corrupt(const TripleStore& store, const Triple& t, std::size_t n,
                                          Side side, Pool pool, bool filtered,
                                          std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "corruption count must be >= 1");
  const Ordinal original = slot_of(t, side);
  Rng rng(seed);
  std::vector<Triple> out;
  out.reserve(n);

  auto pool_span = [&]() -> std::pair<std::span<const Ordinal>, std::size_t> {
    if (pool == Pool::SameKind) {
      auto ents = store.entities_of(slot_kind(t.relation, side));
      return {ents, ents.size()};
    }
    return {{}, store.entity_count()};
  }();
  auto [kind_pool, pool_size] = pool_span;
  auto at = [&](std::size_t i) -> Ordinal {
    return pool == Pool::SameKind ? kind_pool[i] : static_cast<Ordinal>(i);
  };

  // Sparse case: rejection sampling with a seen-set.
  if (!filtered && pool_size > 0 && 4 * n < pool_size) {
    std::unordered_set<Ordinal> seen;
    seen.insert(original);
    std::uniform_int_distribution<std::size_t> pick(0, pool_size - 1);
    while (out.size() < n) {
      Ordinal c = at(pick(rng));
      if (seen.insert(c).second) out.push_back(replace_slot(t, side, c));
    }
    return out;
  }

  // Dense case: partial Fisher-Yates over the explicit candidate list.
  std::vector<Ordinal> candidates;
  candidates.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) {
    Ordinal c = at(i);
    if (c == original) continue;
    if (filtered && store.contains(replace_slot(t, side, c))) continue;
    candidates.push_back(c);
  }
  if (candidates.size() < n) {
    throw Error(ErrorCode::PoolTooSmall, "need " + std::to_string(n) + " corruptions of " +
                                             std::string(to_string(side)) + " for " +
                                             store.describe(t) + ", only " +
                                             std::to_string(candidates.size()) + " available");
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
    out.push_back(replace_slot(t, side, candidates[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct StoreStats {
  std::array<std::size_t, kEntityKindCount> entities{};
  std::array<std::size_t, kRelationCount> relations{};

  std::size_t entity_total() const { return std::accumulate(entities.begin(), entities.end(), std::size_t{0}); }
  std::size_t triple_total() const { return std::accumulate(relations.begin(), relations.end(), std::size_t{0}); }
};

inline StoreStats stats(const TripleStore& store) {
  StoreStats s;
  for (auto k : kAllEntityKinds) s.entities[index_of(k)] = store.entities_of(k).size();
  for (const auto& t : store.triples()) ++s.relations[index_of(t.relation)];
  return s;
}

// ---------------------------------------------------------------------------
// Planted-community synthetic graph

/// Desk-scale stand-in for the patent graph.
///
/// Each community owns one group, a block of patents, inventors and
/// assignees. Within a community, every assignee heads a team: inventors and
/// patents are dealt to teams round-robin, a patent is owned by its team's
/// assignee and written by 1-3 team inventors. Citations are Bernoulli per
/// ordered patent pair: `intra_cite_prob` is the expected rate for pairs in
/// the same community, of which a `team_affinity` share is concentrated on
/// the citing patent's own team; `inter_cite_prob` applies across
/// communities. Groups are coded <letter><2 digits><letter> and share
/// ceil(communities / 4) subsections.
struct SyntheticConfig {
  std::size_t communities = 5;
  std::size_t patents_per_community = 200;
  std::size_t inventors_per_community = 40;
  std::size_t assignees_per_community = 10;
  double intra_cite_prob = 0.02;
  double inter_cite_prob = 0.001;
  double team_affinity = 0.8;
  double secondary_group_prob = 0.05;  // extra Contain from another community
  std::uint64_t seed = 7;
};

inline std::string synthetic_subsection_code(std::size_t s) {
  std::string code = "H00";
  code[0] = static_cast<char>('A' + (s / 99) % 26);
  auto n = s % 99 + 1;
  code[1] = static_cast<char>('0' + n / 10);
  code[2] = static_cast<char>('0' + n % 10);
  return code;
}

inline std::string synthetic_group_code(std::size_t community) {
  return synthetic_subsection_code(community / 4) + static_cast<char>('A' + community % 4);
}

inline TripleStore generate_synthetic(const SyntheticConfig& cfg) {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (cfg.communities < 1 || cfg.patents_per_community < 1 || cfg.inventors_per_community < 1 ||
      cfg.assignees_per_community < 1) {
    throw Error(ErrorCode::InvalidConfig, "all synthetic counts must be >= 1");
  }
  if (!prob_ok(cfg.intra_cite_prob) || !prob_ok(cfg.inter_cite_prob) ||
      !prob_ok(cfg.team_affinity) || !prob_ok(cfg.secondary_group_prob)) {
    throw Error(ErrorCode::InvalidConfig, "probabilities must lie in [0, 1]");
  }
  if (cfg.inter_cite_prob > cfg.intra_cite_prob) {
    throw Error(ErrorCode::InvalidConfig, "inter_cite_prob must not exceed intra_cite_prob");
  }
  if (cfg.communities > 26 * 99 * 4) throw Error(ErrorCode::InvalidConfig, "too many communities");

  const std::size_t C = cfg.communities, P = cfg.patents_per_community,
                    I = cfg.inventors_per_community, A = cfg.assignees_per_community;
  Rng rng(derive_seed({cfg.seed, 0x5e7u}));
  std::bernoulli_distribution secondary(cfg.secondary_group_prob);

  TripleStore store;
  const std::size_t n_sub = (C + 3) / 4;
  std::vector<Ordinal> subsections(n_sub), groups(C);
  std::vector<std::vector<Ordinal>> patents(C), inventors(C), assignees(C);
  for (std::size_t s = 0; s < n_sub; ++s) {
    subsections[s] = store.intern(EntityKind::Subsection, synthetic_subsection_code(s));
  }
  std::size_t patent_serial = 1000000;
  for (std::size_t c = 0; c < C; ++c) {
    groups[c] = store.intern(EntityKind::Group, synthetic_group_code(c));
    for (std::size_t i = 0; i < P; ++i) {
      patents[c].push_back(store.intern(EntityKind::Patent, std::to_string(patent_serial++)));
    }
    for (std::size_t j = 0; j < I; ++j) {
      inventors[c].push_back(
          store.intern(EntityKind::Inventor, "i" + std::to_string(c) + "_" + std::to_string(j)));
    }
    for (std::size_t k = 0; k < A; ++k) {
      assignees[c].push_back(
          store.intern(EntityKind::Assignee, "a" + std::to_string(c) + "_" + std::to_string(k)));
    }
  }

  for (std::size_t c = 0; c < C; ++c) {
    store.insert_triple({subsections[c / 4], RelationKind::Comprise, groups[c]});
  }

  auto team_of_patent = [&](std::size_t i) { return i % A; };
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<std::vector<Ordinal>> team_inventors(A);
    for (std::size_t j = 0; j < I; ++j) team_inventors[j % A].push_back(inventors[c][j]);
    for (std::size_t k = 0; k < A; ++k) {
      if (team_inventors[k].empty()) team_inventors[k].push_back(inventors[c][k % I]);
    }
    for (std::size_t i = 0; i < P; ++i) {
      const Ordinal p = patents[c][i];
      const std::size_t team = team_of_patent(i);
      store.insert_triple({groups[c], RelationKind::Contain, p});
      if (C > 1 && secondary(rng)) {
        std::uniform_int_distribution<std::size_t> other(0, C - 2);
        std::size_t oc = other(rng);
        if (oc >= c) ++oc;
        store.insert_triple({groups[oc], RelationKind::Contain, p});
      }
      store.insert_triple({assignees[c][team], RelationKind::Own, p});
      auto writers = team_inventors[team];
      std::uniform_int_distribution<std::size_t> extra(0, 2);
      std::size_t n_writers = std::min(writers.size(), 1 + extra(rng));
      for (std::size_t w = 0; w < n_writers; ++w) {
        std::uniform_int_distribution<std::size_t> pick(w, writers.size() - 1);
        std::swap(writers[w], writers[pick(rng)]);
        store.insert_triple({writers[w], RelationKind::Write, p});
      }
    }
  }

  // Citations.
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<std::size_t> team_size(A, 0);
  for (std::size_t i = 0; i < P; ++i) ++team_size[team_of_patent(i)];
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < P; ++i) {
      const std::size_t team = team_of_patent(i);
      const double T = double(team_size[team]);
      double p_same = cfg.intra_cite_prob, p_other = cfg.intra_cite_prob;
      if (A > 1 && P > 1) {
        p_same = T > 1 ? std::min(1.0, cfg.intra_cite_prob * cfg.team_affinity * double(P - 1) /
                                           (T - 1))
                       : 0.0;
        p_other = double(P) > T ? std::min(1.0, cfg.intra_cite_prob * (1 - cfg.team_affinity) *
                                                     double(P - 1) / (double(P) - T))
                                : 0.0;
      }
      for (std::size_t c2 = 0; c2 < C; ++c2) {
        for (std::size_t i2 = 0; i2 < P; ++i2) {
          if (c2 == c && i2 == i) continue;
          double prob = c2 != c                        ? cfg.inter_cite_prob
                        : team_of_patent(i2) == team ? p_same
                                                     : p_other;
          if (prob > 0.0 && u01(rng) < prob) {
            store.insert_triple({patents[c][i], RelationKind::Cite, patents[c2][i2]});
          }
        }
      }
    }
  }
  return store;
}

}  // namespace patnet

#endif  // PATNET_GRAPH_HPP
