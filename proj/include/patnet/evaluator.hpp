#ifndef PATNET_EVALUATOR_HPP
#define PATNET_EVALUATOR_HPP

#include <array>
#include <map>
#include <span>
#include <vector>

#include "patnet/error.hpp"
#include "patnet/graph.hpp"
#include "patnet/models.hpp"

namespace patnet {

enum class SideSet { HeadOnly, TailOnly, Both };

/// How exact score ties with the true triple are ranked.
enum class TieMode { Midpoint, Optimistic, Pessimistic };

constexpr std::string_view to_string(SideSet s) {
  switch (s) {
    case SideSet::HeadOnly: return "head";
    case SideSet::TailOnly: return "tail";
    case SideSet::Both: return "both";
  }
  return "?";
}

constexpr std::string_view to_string(TieMode t) {
  switch (t) {
    case TieMode::Midpoint: return "midpoint";
    case TieMode::Optimistic: return "optimistic";
    case TieMode::Pessimistic: return "pessimistic";
  }
  return "?";
}

struct EvalConfig {
  std::size_t corruptions_per_side = 100;  // K
  SideSet sides = SideSet::Both;
  Pool pool = Pool::SameKind;
  bool filtered = false;
  std::uint64_t seed = 0;
  TieMode ties = TieMode::Midpoint;
};

struct RankRecord {
  Triple triple;
  Side side;
  double rank;
  std::size_t candidates;  // corruptions actually ranked against
};

inline constexpr std::array<std::size_t, 3> kHitsAt = {1, 3, 10};

struct Metrics {
  std::size_t queries = 0;
  double mr = 0.0;
  double mrr = 0.0;
  std::array<double, kHitsAt.size()> hits{};
};

struct EvalReport {
  Metrics overall;
  std::map<RelationKind, Metrics> per_relation;
  std::vector<RankRecord> records;
  EvalConfig config;
  std::size_t clamped = 0;  // queries whose pool held fewer than K corruptions
  std::size_t skipped = 0;  // queries with no corruption available at all
};

/// rank = 1 + #{corrupt score > true score} + ties/2 (midpoint rule).
inline double rank_target(const ModelParams& params, const Triple& triple,
                          std::span<const Triple> corrupts, TieMode ties = TieMode::Midpoint) {
  const double s_true = score(params, triple);
  std::size_t better = 0, equal = 0;
  for (const auto& c : corrupts) {
    const double s = score(params, c);
    if (s > s_true) {
      ++better;
    } else if (s == s_true) {
      ++equal;
    }
  }
  switch (ties) {
    case TieMode::Optimistic: return 1.0 + double(better);
    case TieMode::Pessimistic: return 1.0 + double(better + equal);
    case TieMode::Midpoint: break;
  }
  return 1.0 + double(better) + double(equal) / 2.0;
}

/// Aggregates ranks in the given order: MR, MRR and Hits@{1,3,10}.
inline Metrics aggregate(std::span<const double> ranks) {
  Metrics m;
  m.queries = ranks.size();
  if (ranks.empty()) return m;
  for (double r : ranks) {
    m.mr += r;
    m.mrr += 1.0 / r;
    for (std::size_t k = 0; k < kHitsAt.size(); ++k) m.hits[k] += r <= double(kHitsAt[k]) ? 1.0 : 0.0;
  }
  const double n = double(ranks.size());
  m.mr /= n;
  m.mrr /= n;
  for (auto& h : m.hits) h /= n;
  return m;
}

inline std::uint64_t query_seed(std::uint64_t seed, const Triple& t, Side side) {
  return derive_seed({seed, triple_key(t), static_cast<std::uint64_t>(side)});
}

/// Entity prediction over `test`. Each query draws fresh corruptions seeded
/// by (config.seed, triple, side), so the result is independent of query
/// order. K is clamped per query to the available pool.
inline EvalReport evaluate(const ModelParams& params, std::span<const Triple> test,
                           const TripleStore& store, const EvalConfig& config) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "no test triples");
  if (config.corruptions_per_side < 1) {
    throw Error(ErrorCode::InvalidConfig, "corruptions_per_side must be >= 1");
  }
  require_fingerprint(params, store);

  EvalReport report;
  report.config = config;
  std::vector<Side> sides;
  if (config.sides != SideSet::TailOnly) sides.push_back(Side::Head);
  if (config.sides != SideSet::HeadOnly) sides.push_back(Side::Tail);

  for (const auto& t : test) {
    for (auto side : sides) {
      const std::size_t cap = corruption_capacity(store, t, side, config.pool, config.filtered);
      if (cap == 0) {
        ++report.skipped;
        continue;
      }
      const std::size_t k = std::min(config.corruptions_per_side, cap);
      if (k < config.corruptions_per_side) ++report.clamped;
      auto corrupts = sample_corrupt(store, t, k, side, config.pool, config.filtered,
                                     query_seed(config.seed, t, side));
      report.records.push_back({t, side, rank_target(params, t, corrupts, config.ties), k});
    }
  }

  if (report.records.empty()) {
    throw Error(ErrorCode::EmptyTestSet, "no test query has a corruption to rank against");
  }
  std::vector<double> ranks;
  std::map<RelationKind, std::vector<double>> by_rel;
  for (const auto& r : report.records) {
    ranks.push_back(r.rank);
    by_rel[r.triple.relation].push_back(r.rank);
  }
  report.overall = aggregate(ranks);
  for (const auto& [rel, rs] : by_rel) report.per_relation[rel] = aggregate(rs);
  return report;
}

}  // namespace patnet

#endif  // PATNET_EVALUATOR_HPP
