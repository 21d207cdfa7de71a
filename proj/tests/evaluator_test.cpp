#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace patnet;

namespace {

// 50 entities: 30 patents, 8 inventors, 6 assignees, 4 groups, 2 subsections.
TripleStore fifty_entity_graph() {
  TripleStore s;
  std::vector<Ordinal> pat, inv, asg, grp, sub;
  for (int i = 0; i < 30; ++i) pat.push_back(s.intern(EntityKind::Patent, "p" + std::to_string(i)));
  for (int i = 0; i < 8; ++i) inv.push_back(s.intern(EntityKind::Inventor, "i" + std::to_string(i)));
  for (int i = 0; i < 6; ++i) asg.push_back(s.intern(EntityKind::Assignee, "a" + std::to_string(i)));
  for (const char* g : {"H01A", "H01B", "H02A", "H02B"}) grp.push_back(s.intern(EntityKind::Group, g));
  for (const char* x : {"H01", "H02"}) sub.push_back(s.intern(EntityKind::Subsection, x));
  EXPECT_EQ(s.entity_count(), 50u);
  for (int g = 0; g < 4; ++g) s.add_triple({sub[g / 2], RelationKind::Comprise, grp[g]});
  for (int i = 0; i < 30; ++i) {
    s.add_triple({grp[i % 4], RelationKind::Contain, pat[i]});
    s.add_triple({inv[i % 8], RelationKind::Write, pat[i]});
    s.add_triple({asg[i % 6], RelationKind::Own, pat[i]});
    if (i > 0) s.add_triple({pat[i], RelationKind::Cite, pat[(i * 7) % i]});
  }
  return s;
}

void expect_metrics_eq(const Metrics& a, const Metrics& b) {
  EXPECT_EQ(a.queries, b.queries);
  EXPECT_NEAR(a.mr, b.mr, 1e-12);
  EXPECT_NEAR(a.mrr, b.mrr, 1e-12);
  for (std::size_t k = 0; k < kHitsAt.size(); ++k) EXPECT_NEAR(a.hits[k], b.hits[k], 1e-12);
}

// Oracle metrics straight from the definitions.
Metrics oracle_metrics(const std::vector<double>& ranks) {
  Metrics m;
  m.queries = ranks.size();
  for (double r : ranks) {
    m.mr += r / double(ranks.size());
    m.mrr += (1.0 / r) / double(ranks.size());
    for (std::size_t k = 0; k < kHitsAt.size(); ++k) {
      if (r <= double(kHitsAt[k])) m.hits[k] += 1.0 / double(ranks.size());
    }
  }
  return m;
}

std::vector<Triple> every_candidate(const TripleStore& s, const Triple& t, Side side) {
  std::vector<Triple> out;
  for (auto c : s.entities_of(slot_kind(t.relation, side))) {
    if (c != slot_of(t, side)) out.push_back(replace_slot(t, side, c));
  }
  return out;
}

}  // namespace

TEST(RankTarget, Examples) {
  auto p = init_params(ModelKind::DistMult, 6, 1, 0);
  // 1-d DistMult with r = 1: score(h, t) = h * t.
  p.relations[index_of(RelationKind::Cite)] = {1.0};
  const double vals[] = {1.0, 1.0, 2.0, 1.0, 0.5, 3.0};
  for (Ordinal o = 0; o < 6; ++o) p.entity(o)[0] = vals[o];
  Triple truth{0, RelationKind::Cite, 1};  // score 1
  std::vector<Triple> below = {{0, RelationKind::Cite, 4}};
  std::vector<Triple> above = {{0, RelationKind::Cite, 2}, {0, RelationKind::Cite, 5}};
  EXPECT_EQ(rank_target(p, truth, below), 1.0);
  EXPECT_EQ(rank_target(p, truth, above), 3.0);
  // 4 corrupts: two ties (t=3, and head swapped to 3 gives 1*1), one above, one below.
  std::vector<Triple> mixed = {{0, RelationKind::Cite, 3}, {3, RelationKind::Cite, 1},
                               {0, RelationKind::Cite, 2}, {0, RelationKind::Cite, 4}};
  EXPECT_EQ(rank_target(p, truth, mixed), 3.0);
  EXPECT_EQ(rank_target(p, truth, mixed, TieMode::Optimistic), 2.0);
  EXPECT_EQ(rank_target(p, truth, mixed, TieMode::Pessimistic), 4.0);
}

TEST(Aggregate, Examples) {
  auto m = aggregate(std::vector<double>{1, 2, 4});
  EXPECT_NEAR(m.mr, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.mrr, 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(m.hits[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.hits[1], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(m.hits[2], 1.0);
  auto perfect = aggregate(std::vector<double>(7, 1.0));
  EXPECT_EQ(perfect.mr, 1.0);
  EXPECT_EQ(perfect.mrr, 1.0);
  for (double h : perfect.hits) EXPECT_EQ(h, 1.0);
}

TEST(Evaluate, FullPoolMatchesExhaustiveOracle) {
  auto s = fifty_entity_graph();
  for (auto kind : {ModelKind::TransE_L2, ModelKind::DistMult, ModelKind::RotatE}) {
    auto p = init_params(kind, s.entity_count(), 6, 21, s.fingerprint());
    std::vector<Triple> test(s.triples().begin(), s.triples().end());
    EvalConfig cfg;
    cfg.corruptions_per_side = 10000;  // clamped to each pool
    cfg.seed = 3;
    auto report = evaluate(p, test, s, cfg);

    std::vector<double> ranks;
    std::map<RelationKind, std::vector<double>> by_rel;
    for (const auto& t : test) {
      for (auto side : {Side::Head, Side::Tail}) {
        auto cands = every_candidate(s, t, side);
        if (cands.empty()) continue;
        const double r = oracle::brute_force_rank(p, t, cands);
        ranks.push_back(r);
        by_rel[t.relation].push_back(r);
      }
    }
    expect_metrics_eq(report.overall, oracle_metrics(ranks));
    for (const auto& [rel, rs] : by_rel) expect_metrics_eq(report.per_relation.at(rel), oracle_metrics(rs));
    EXPECT_GT(report.clamped, 0u);
  }
}

TEST(Evaluate, TiesMatchExhaustiveOracle) {
  auto s = fifty_entity_graph();
  auto p = init_params(ModelKind::DistMult, s.entity_count(), 3, 2, s.fingerprint());
  // Coarse values make exact score ties common.
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> v(-1, 1);
  for (auto& x : p.entities) x = v(rng);
  for (auto& b : p.relations) for (auto& x : b) x = v(rng);
  std::vector<Triple> test(s.triples().begin(), s.triples().end());
  EvalConfig cfg;
  cfg.corruptions_per_side = 1000;
  auto report = evaluate(p, test, s, cfg);
  std::vector<double> ranks;
  bool fractional = false;
  for (const auto& t : test) {
    for (auto side : {Side::Head, Side::Tail}) {
      auto cands = every_candidate(s, t, side);
      if (cands.empty()) continue;
      ranks.push_back(oracle::brute_force_rank(p, t, cands));
      fractional |= ranks.back() != std::floor(ranks.back());
    }
  }
  EXPECT_TRUE(fractional);
  expect_metrics_eq(report.overall, oracle_metrics(ranks));
}

TEST(Evaluate, SampledRanksMatchOracleOnSameCandidates) {
  auto s = fifty_entity_graph();
  auto p = init_params(ModelKind::TransE_L1, s.entity_count(), 5, 8, s.fingerprint());
  std::vector<Triple> test(s.triples().begin(), s.triples().end());
  EvalConfig cfg;
  cfg.corruptions_per_side = 20;
  cfg.seed = 3;
  auto report = evaluate(p, test, s, cfg);
  std::vector<double> ranks;
  for (const auto& rec : report.records) {
    auto k = std::min<std::size_t>(20, corruption_capacity(s, rec.triple, rec.side, Pool::SameKind, false));
    auto cands = sample_corrupt(s, rec.triple, k, rec.side, Pool::SameKind, false,
                                query_seed(3, rec.triple, rec.side));
    ranks.push_back(oracle::brute_force_rank(p, rec.triple, cands));
    EXPECT_EQ(rec.rank, ranks.back());
    EXPECT_GE(rec.rank, 1.0);
    EXPECT_LE(rec.rank, double(k) + 1.0);
  }
  expect_metrics_eq(report.overall, oracle_metrics(ranks));
}

TEST(Evaluate, InvariantsAndDeterminism) {
  auto s = generate_synthetic({3, 30, 6, 2, 0.1, 0.01, 0.8, 0.05, 5});
  auto parts = split(s, {0.2, 1});
  auto p = init_params(ModelKind::ComplEx, s.entity_count(), 4, 2, s.fingerprint());
  for (auto sides : {SideSet::HeadOnly, SideSet::TailOnly, SideSet::Both}) {
    for (auto pool : {Pool::SameKind, Pool::AllEntities}) {
      for (bool filtered : {false, true}) {
        EvalConfig cfg{15, sides, pool, filtered, 9, TieMode::Midpoint};
        auto a = evaluate(p, parts.test, parts.train, cfg);
        auto b = evaluate(p, parts.test, parts.train, cfg);
        EXPECT_EQ(a.overall.mr, b.overall.mr);
        EXPECT_EQ(a.overall.mrr, b.overall.mrr);
        EXPECT_GE(a.overall.mr, 1.0);
        EXPECT_LE(a.overall.mr, 16.0);
        EXPECT_GT(a.overall.mrr, 0.0);
        EXPECT_LE(a.overall.mrr, 1.0);
        EXPECT_LE(a.overall.hits[0], a.overall.hits[1]);
        EXPECT_LE(a.overall.hits[1], a.overall.hits[2]);
        for (const auto& r : a.records) {
          EXPECT_GE(r.rank, 1.0);
          EXPECT_LE(r.rank, double(r.candidates) + 1.0);
        }
        const std::size_t per = sides == SideSet::Both ? 2 : 1;
        EXPECT_EQ(a.records.size() + a.skipped, parts.test.size() * per);
      }
    }
  }
}

TEST(Evaluate, OrderIndependent) {
  auto s = fifty_entity_graph();
  auto p = init_params(ModelKind::TransE_L2, s.entity_count(), 4, 1, s.fingerprint());
  std::vector<Triple> test(s.triples().begin(), s.triples().end());
  EvalConfig cfg;
  cfg.corruptions_per_side = 5;
  auto a = evaluate(p, test, s, cfg);
  std::reverse(test.begin(), test.end());
  auto b = evaluate(p, test, s, cfg);
  EXPECT_NEAR(a.overall.mrr, b.overall.mrr, 1e-12);
  EXPECT_NEAR(a.overall.mr, b.overall.mr, 1e-12);
}

TEST(Evaluate, WorstCaseRankIsKPlusOne) {
  TripleStore s;
  auto g = s.intern(EntityKind::Group, "H01A");
  for (int i = 0; i <= 10; ++i) s.intern(EntityKind::Patent, std::to_string(i));
  s.add_triple({g, RelationKind::Contain, 1});
  auto p = init_params(ModelKind::DistMult, s.entity_count(), 1, 0, s.fingerprint());
  for (Ordinal o = 0; o < s.entity_count(); ++o) p.entity(o)[0] = 1.0;
  p.entity(1)[0] = -1.0;  // the true tail scores lowest
  p.relations[index_of(RelationKind::Contain)] = {1.0};
  EvalConfig cfg;
  cfg.corruptions_per_side = 10;
  cfg.sides = SideSet::TailOnly;
  auto r = evaluate(p, std::vector<Triple>{{g, RelationKind::Contain, 1}}, s, cfg);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].rank, 11.0);
}

TEST(Evaluate, Errors) {
  auto s = fifty_entity_graph();
  auto p = init_params(ModelKind::DistMult, s.entity_count(), 2, 0, s.fingerprint());
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EXPECT_EQ(code([&] { evaluate(p, std::vector<Triple>{}, s, {}); }), ErrorCode::EmptyTestSet);
  EvalConfig zero;
  zero.corruptions_per_side = 0;
  EXPECT_EQ(code([&] { evaluate(p, s.triples(), s, zero); }), ErrorCode::InvalidConfig);
  auto q = init_params(ModelKind::DistMult, s.entity_count(), 2, 0, 12345);
  EXPECT_EQ(code([&] { evaluate(q, s.triples(), s, {}); }), ErrorCode::FingerprintMismatch);

  // The only subsection has no alternative and the head side is requested.
  TripleStore tiny = patnet::testing::micro_graph();
  auto pt = init_params(ModelKind::DistMult, tiny.entity_count(), 2, 0, tiny.fingerprint());
  EvalConfig head;
  head.sides = SideSet::HeadOnly;
  Triple comprise{*tiny.find("subsection:H04"), RelationKind::Comprise, *tiny.find("group:H04L")};
  EXPECT_EQ(code([&] { evaluate(pt, std::vector<Triple>{comprise}, tiny, head); }),
            ErrorCode::EmptyTestSet);
}
