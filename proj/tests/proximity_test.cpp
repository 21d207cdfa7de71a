#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace patnet;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

// Vocabulary: inventor i (0), patent p (1), assignee a (2), group g (3), subsection s (4).
struct Toy {
  TripleStore vocab;
  ModelParams params;
};

Toy toy(ModelKind kind = ModelKind::TransE_L2) {
  Toy t;
  t.vocab.intern(EntityKind::Inventor, "i");
  t.vocab.intern(EntityKind::Patent, "p");
  t.vocab.intern(EntityKind::Assignee, "a");
  t.vocab.intern(EntityKind::Group, "H01A");
  t.vocab.intern(EntityKind::Subsection, "H01");
  t.params = init_params(kind, 5, 2, 3, t.vocab.fingerprint());
  return t;
}

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Cosine, Examples) {
  std::vector<double> u = {1, 0}, v = {-1, 0}, w = {0, 3};
  EXPECT_EQ(cosine(u, u), 1.0);
  EXPECT_EQ(cosine(u, w), 0.0);
  EXPECT_EQ(cosine(u, v), -1.0);
  std::vector<double> z = {0, 0};
  EXPECT_EQ(code_of([&] { cosine(u, z); }), ErrorCode::ZeroVector);
  std::vector<double> a = {0.3, -1.7, 2.2}, b = {1.1, 0.4, -0.9};
  std::vector<double> a2 = {0.9, -5.1, 6.6}, b2 = {0.11, 0.04, -0.09};
  EXPECT_NEAR(cosine(a, b), cosine(a2, b2), 1e-15);
}

TEST(Transform, RuleTableIsTotalAndTabulatedNegatesAlgebraic) {
  for (auto f : kAllEntityKinds) {
    for (auto t : kAllEntityKinds) {
      auto alg = transform_rule(f, t, TransformMode::Algebraic);
      auto tab = transform_rule(f, t, TransformMode::Tabulated);
      if (f == t) {
        EXPECT_TRUE(alg.steps.empty());
        EXPECT_TRUE(tab.steps.empty());
        continue;
      }
      EXPECT_FALSE(alg.steps.empty());
      std::map<RelationKind, int> net_alg, net_tab;
      for (auto s : alg.steps) net_alg[s.relation] += s.sign;
      for (auto s : tab.steps) net_tab[s.relation] += s.sign;
      ASSERT_EQ(net_alg.size(), net_tab.size()) << to_string(f) << "<-" << to_string(t);
      for (auto [r, n] : net_alg) EXPECT_EQ(net_tab[r], -n);
    }
  }
}

TEST(Transform, AlgebraicExamples) {
  using R = RelationKind;
  EXPECT_EQ(transform_rule(EntityKind::Patent, EntityKind::Inventor, TransformMode::Algebraic).steps,
            (std::vector<TransformStep>{{R::Write, +1}}));
  EXPECT_EQ(transform_rule(EntityKind::Inventor, EntityKind::Patent, TransformMode::Algebraic).steps,
            (std::vector<TransformStep>{{R::Write, -1}}));
  EXPECT_EQ(transform_rule(EntityKind::Inventor, EntityKind::Assignee, TransformMode::Algebraic).steps,
            (std::vector<TransformStep>{{R::Own, +1}, {R::Write, -1}}));
  EXPECT_EQ(transform_rule(EntityKind::Group, EntityKind::Subsection, TransformMode::Algebraic).steps,
            (std::vector<TransformStep>{{R::Comprise, +1}}));
}

TEST(Transform, AlgebraicRulesCompose) {
  // Net relation sums: (S <- P) = (G <- P) + (S <- G), and in general
  // (A <- C) = (B <- C) + (A <- B).
  for (auto a : kAllEntityKinds) {
    for (auto b : kAllEntityKinds) {
      for (auto c : kAllEntityKinds) {
        std::map<RelationKind, int> direct, via;
        for (auto s : transform_rule(a, c, TransformMode::Algebraic).steps) direct[s.relation] += s.sign;
        for (auto s : transform_rule(b, c, TransformMode::Algebraic).steps) via[s.relation] += s.sign;
        for (auto s : transform_rule(a, b, TransformMode::Algebraic).steps) via[s.relation] += s.sign;
        std::erase_if(via, [](const auto& kv) { return kv.second == 0; });
        EXPECT_EQ(direct, via);
      }
    }
  }
}

TEST(Transform, VectorExamples) {
  auto t = toy();
  t.params.entity(0)[0] = 1;
  t.params.entity(0)[1] = 0;
  t.params.relations[index_of(RelationKind::Write)] = {0, 1};
  const auto& inv = t.vocab.entity(0);
  EXPECT_EQ(transform(t.params, inv, EntityKind::Patent, TransformMode::Algebraic),
            (std::vector<double>{1, 1}));
  EXPECT_EQ(transform(t.params, inv, EntityKind::Patent, TransformMode::Tabulated),
            (std::vector<double>{1, -1}));
  EXPECT_EQ(transform(t.params, inv, EntityKind::Inventor), vec(t.params.entity(0)));
}

TEST(Transform, UnsupportedModels) {
  for (auto k : kAllModels) {
    auto t = toy(k);
    const auto& inv = t.vocab.entity(0);
    const auto& pat = t.vocab.entity(1);
    if (supports_cross_kind(k)) {
      EXPECT_NO_THROW(knowledge_proximity(t.params, pat, inv));
    } else {
      EXPECT_EQ(code_of([&] { knowledge_proximity(t.params, pat, inv); }), ErrorCode::UnsupportedModel)
          << to_string(k);
    }
    // Same kind never needs a relation.
    auto other = t.vocab;
    EXPECT_NO_THROW(knowledge_proximity(t.params, pat, pat));
  }
}

TEST(KnowledgeProximity, Basics) {
  auto t = toy();
  const auto& i = t.vocab.entity(0);
  const auto& p = t.vocab.entity(1);
  EXPECT_NEAR(knowledge_proximity(t.params, p, p), 1.0, 1e-15);
  EXPECT_EQ(knowledge_proximity(t.params, i, i), 1.0);
  const double ip = knowledge_proximity(t.params, i, p), pi = knowledge_proximity(t.params, p, i);
  EXPECT_GE(ip, -1.0);
  EXPECT_LE(ip, 1.0);
  EXPECT_GE(pi, -1.0);
  EXPECT_LE(pi, 1.0);
}

TEST(KnowledgeProximity, SameKindSymmetry) {
  auto s = generate_synthetic({2, 10, 3, 2, 0.2, 0.0, 0.8, 0.0, 1});
  auto p = init_params(ModelKind::TransE_L2, s.entity_count(), 6, 4, s.fingerprint());
  for (auto k : kAllEntityKinds) {
    auto ents = s.entities_of(k);
    for (std::size_t a = 0; a < ents.size(); ++a) {
      for (std::size_t b = 0; b < ents.size(); ++b) {
        const auto& ea = s.entity(ents[a]);
        const auto& eb = s.entity(ents[b]);
        EXPECT_EQ(knowledge_proximity(p, ea, eb), knowledge_proximity(p, eb, ea));
      }
    }
  }
}

TEST(NearestNeighbors, OrderingFilterAndPopulation) {
  auto s = generate_synthetic({2, 10, 3, 2, 0.2, 0.0, 0.8, 0.0, 1});
  auto p = init_params(ModelKind::TransE_L2, s.entity_count(), 6, 4, s.fingerprint());
  auto focal = s.entities_of(EntityKind::Inventor)[0];
  auto all = nearest_neighbors(p, s, focal, 1000);
  EXPECT_EQ(all.size(), s.entity_count() - 1);
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    EXPECT_TRUE(all[i].proximity > all[i + 1].proximity ||
                (all[i].proximity == all[i + 1].proximity &&
                 all[i].entity.ordinal < all[i + 1].entity.ordinal));
  }
  for (const auto& h : all) {
    EXPECT_NE(h.entity.ordinal, focal);
    EXPECT_NEAR(h.proximity, knowledge_proximity(p, s.entity(focal), h.entity), 1e-12);
  }
  auto assignees = nearest_neighbors(p, s, focal, 3, {EntityKind::Assignee});
  EXPECT_EQ(assignees.size(), 3u);
  for (const auto& h : assignees) EXPECT_EQ(h.entity.kind, EntityKind::Assignee);
  auto top = nearest_neighbors(p, s, focal, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(top[i].entity.ordinal, all[i].entity.ordinal);
  EXPECT_EQ(code_of([&] { nearest_neighbors(p, s, focal, 0); }), ErrorCode::InvalidConfig);
}

TEST(PairwiseMatrix, ShapeSymmetryDiagonal) {
  auto t = toy();
  std::vector<EntityRef> one = {t.vocab.entity(1)};
  auto m1 = pairwise_matrix(t.params, one, EntityKind::Patent);
  ASSERT_EQ(m1.size(), 1u);
  EXPECT_NEAR(m1[0][0], 1.0, 1e-15);

  std::vector<EntityRef> twins = {t.vocab.entity(1), t.vocab.entity(1)};
  for (const auto& row : pairwise_matrix(t.params, twins, EntityKind::Patent)) {
    for (double v : row) EXPECT_NEAR(v, 1.0, 1e-15);
  }

  std::vector<EntityRef> mixed(t.vocab.entities().begin(), t.vocab.entities().end());
  auto m = pairwise_matrix(t.params, mixed, EntityKind::Patent);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_NEAR(m[i][i], 1.0, 1e-9);
    for (std::size_t j = 0; j < m.size(); ++j) {
      EXPECT_EQ(m[i][j], m[j][i]);
      EXPECT_TRUE(std::isfinite(m[i][j]));
    }
  }
  EXPECT_EQ(code_of([&] { pairwise_matrix(t.params, {}, EntityKind::Patent); }), ErrorCode::InvalidConfig);
}

// Each inventor solely writes two patents; the second cites the first.
TEST(NearestNeighbors, SoleAuthoredPatentNearItsInventor) {
  std::string text;
  for (int k = 0; k < 10; ++k) {
    const std::string i = "inventor:i" + std::to_string(k);
    const std::string a = "patent:" + std::to_string(2 * k), b = "patent:" + std::to_string(2 * k + 1);
    text += i + "\twrite\t" + a + "\n" + i + "\twrite\t" + b + "\n";
    text += "assignee:a" + std::to_string(k % 2) + "\town\t" + a + "\n";
    text += "assignee:a" + std::to_string(k % 2) + "\town\t" + b + "\n";
    text += "group:H01" + std::string(1, char('A' + k % 3)) + "\tcontain\t" + a + "\n";
    text += "group:H01" + std::string(1, char('A' + k % 3)) + "\tcontain\t" + b + "\n";
    text += b + "\tcite\t" + a + "\n";
  }
  text += "subsection:H01\tcomprise\tgroup:H01A\n";
  auto s = patnet::testing::parse_text(text);
  auto cfg = default_config(ModelKind::TransE_L2);
  cfg.dim = 16;
  cfg.epochs = 300;
  cfg.seed = 2;
  auto [p, report] = train(s, ModelKind::TransE_L2, cfg);

  std::size_t checked = 0, hits = 0;
  for (auto inv : s.entities_of(EntityKind::Inventor)) {
    auto top = nearest_neighbors(p, s, inv, 5, {EntityKind::Patent});
    for (auto pat : s.tails(inv, RelationKind::Write)) {
      ++checked;
      hits += std::any_of(top.begin(), top.end(), [&](const auto& h) { return h.entity.ordinal == pat; });
    }
  }
  ASSERT_EQ(checked, 20u);
  EXPECT_GE(hits, 18u) << hits << "/" << checked;

  // Asymmetry across kinds.
  bool asymmetric = false;
  for (auto inv : s.entities_of(EntityKind::Inventor)) {
    for (auto pat : s.tails(inv, RelationKind::Write)) {
      const double x = knowledge_proximity(p, s.entity(inv), s.entity(pat));
      const double y = knowledge_proximity(p, s.entity(pat), s.entity(inv));
      asymmetric |= std::fabs(x - y) > 1e-6;
    }
  }
  EXPECT_TRUE(asymmetric);
}
