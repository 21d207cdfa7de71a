#ifndef PATNET_PROXIMITY_HPP
#define PATNET_PROXIMITY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "patnet/error.hpp"
#include "patnet/graph.hpp"
#include "patnet/models.hpp"

namespace patnet {

/// Cosine similarity clamped to [-1, 1].
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::InvalidConfig, "cosine of unequal lengths");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

/// How a target entity is moved into the focal entity's kind.
///
/// Algebraic: signs follow from h + r ~ t over the schema directions, e.g.
/// the patent-equivalent of an inventor is emb(inventor) + emb(write).
/// Tabulated: the published transformation guide with its printed signs,
/// which are the negation of the algebraic ones for every pair.
enum class TransformMode { Algebraic, Tabulated };

constexpr std::string_view to_string(TransformMode m) {
  return m == TransformMode::Algebraic ? "algebraic" : "tabulated";
}

struct TransformStep {
  RelationKind relation;
  int sign;  // +1 or -1

  friend bool operator==(const TransformStep&, const TransformStep&) = default;
};

struct TransformRule {
  EntityKind focal;
  EntityKind target;
  std::vector<TransformStep> steps;  // empty when focal == target
};

namespace detail {

// Relation path from an entity of `kind` to its patent-equivalent.
inline std::vector<TransformStep> patent_offset(EntityKind kind) {
  using R = RelationKind;
  switch (kind) {
    case EntityKind::Patent: return {};
    case EntityKind::Inventor: return {{R::Write, +1}};
    case EntityKind::Assignee: return {{R::Own, +1}};
    case EntityKind::Group: return {{R::Contain, +1}};
    case EntityKind::Subsection: return {{R::Comprise, +1}, {R::Contain, +1}};
  }
  return {};
}

inline std::vector<TransformStep> tabulated_steps(EntityKind focal, EntityKind target) {
  using R = RelationKind;
  using K = EntityKind;
  if (focal == target) return {};
  // Rows: focal kind. Columns: target kind.
  switch (focal) {
    case K::Patent:
      switch (target) {
        case K::Inventor: return {{R::Write, -1}};
        case K::Assignee: return {{R::Own, -1}};
        case K::Group: return {{R::Contain, -1}};
        case K::Subsection: return {{R::Contain, -1}, {R::Comprise, -1}};
        default: break;
      }
      break;
    case K::Inventor:
      switch (target) {
        case K::Patent: return {{R::Write, +1}};
        case K::Assignee: return {{R::Write, +1}, {R::Own, -1}};
        case K::Group: return {{R::Write, +1}, {R::Contain, -1}};
        case K::Subsection: return {{R::Write, +1}, {R::Contain, -1}, {R::Comprise, -1}};
        default: break;
      }
      break;
    case K::Assignee:
      switch (target) {
        case K::Patent: return {{R::Own, +1}};
        case K::Inventor: return {{R::Own, +1}, {R::Write, -1}};
        case K::Group: return {{R::Own, +1}, {R::Contain, -1}};
        case K::Subsection: return {{R::Own, +1}, {R::Contain, -1}, {R::Comprise, -1}};
        default: break;
      }
      break;
    case K::Group:
      switch (target) {
        case K::Patent: return {{R::Contain, +1}};
        case K::Inventor: return {{R::Contain, +1}, {R::Write, -1}};
        case K::Assignee: return {{R::Contain, +1}, {R::Own, -1}};
        case K::Subsection: return {{R::Comprise, -1}};
        default: break;
      }
      break;
    case K::Subsection:
      switch (target) {
        case K::Patent: return {{R::Comprise, +1}, {R::Contain, +1}};
        case K::Inventor: return {{R::Comprise, +1}, {R::Contain, +1}, {R::Write, -1}};
        case K::Assignee: return {{R::Comprise, +1}, {R::Contain, +1}, {R::Own, -1}};
        case K::Group: return {{R::Comprise, +1}};
        default: break;
      }
      break;
  }
  return {};
}

}  // namespace detail

/// Signed relation steps that carry a `target`-kind embedding into `focal`'s
/// kind. Algebraic rules are offset(target) - offset(focal) with cancelling
/// terms removed, steps ordered by first appearance.
inline TransformRule transform_rule(EntityKind focal, EntityKind target, TransformMode mode) {
  TransformRule rule{focal, target, {}};
  if (focal == target) return rule;
  if (mode == TransformMode::Tabulated) {
    rule.steps = detail::tabulated_steps(focal, target);
    return rule;
  }
  std::vector<TransformStep> raw = detail::patent_offset(target);
  for (auto s : detail::patent_offset(focal)) raw.push_back({s.relation, -s.sign});
  std::array<int, kRelationCount> net{};
  for (auto s : raw) net[index_of(s.relation)] += s.sign;
  for (auto s : raw) {
    int& n = net[index_of(s.relation)];
    if (n != 0) {
      rule.steps.push_back({s.relation, n});
      n = 0;
    }
  }
  return rule;
}

/// Models whose relations are vectors that translate entities.
constexpr bool supports_cross_kind(ModelKind k) { return is_transe(k); }

/// Adds the rule's signed relation vectors to `v` in place.
inline void apply_rule(const ModelParams& params, const TransformRule& rule, std::span<double> v) {
  if (rule.steps.empty()) return;
  if (!supports_cross_kind(params.kind)) {
    throw Error(ErrorCode::UnsupportedModel,
                std::string(to_string(params.kind)) +
                    " relations are not translation vectors; cross-kind transformation is undefined");
  }
  for (const auto& step : rule.steps) {
    auto r = params.relation(step.relation);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += step.sign * r[i];
  }
}

/// The target's embedding carried into `focal_kind`.
inline std::vector<double> transform(const ModelParams& params, const EntityRef& target,
                                     EntityKind focal_kind,
                                     TransformMode mode = TransformMode::Algebraic) {
  auto row = params.entity(target.ordinal);
  std::vector<double> v(row.begin(), row.end());
  apply_rule(params, transform_rule(focal_kind, target.kind, mode), v);
  return v;
}

inline double knowledge_proximity(const ModelParams& params, const EntityRef& focal,
                                  const EntityRef& target,
                                  TransformMode mode = TransformMode::Algebraic) {
  return cosine(params.entity(focal.ordinal), transform(params, target, focal.kind, mode));
}

struct NeighborHit {
  EntityRef entity;
  double proximity;
};

/// Top-k entities by proximity to `focal`, focal excluded, descending with
/// ties broken by ordinal. An empty `kinds` admits every kind.
inline std::vector<NeighborHit> nearest_neighbors(const ModelParams& params,
                                                  const TripleStore& vocab, Ordinal focal,
                                                  std::size_t k,
                                                  const std::set<EntityKind>& kinds = {},
                                                  TransformMode mode = TransformMode::Algebraic) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  require_fingerprint(params, vocab);
  const auto& f = vocab.entity(focal);
  auto focal_row = params.entity(focal);

  // Offset per target kind, applied to every row of that kind.
  std::array<std::optional<std::vector<double>>, kEntityKindCount> offsets;
  for (auto kind : kAllEntityKinds) {
    if (!kinds.empty() && !kinds.contains(kind)) continue;
    if (vocab.entities_of(kind).empty()) continue;
    std::vector<double> off(params.row_width(), 0.0);
    apply_rule(params, transform_rule(f.kind, kind, mode), off);
    offsets[index_of(kind)] = std::move(off);
  }

  std::vector<std::pair<double, Ordinal>> scored;
  std::vector<double> buf(params.row_width());
  for (auto kind : kAllEntityKinds) {
    const auto& off = offsets[index_of(kind)];
    if (!off) continue;
    for (auto o : vocab.entities_of(kind)) {
      if (o == focal) continue;
      auto row = params.entity(o);
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = row[i] + (*off)[i];
      scored.emplace_back(cosine(focal_row, buf), o);
    }
  }
  auto before = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    before);
  std::vector<NeighborHit> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({vocab.entity(scored[i].second), scored[i].first});
  return out;
}

using ProximityMatrix = std::vector<std::vector<double>>;

/// Pairwise proximity after carrying every entity into `common_kind`.
inline ProximityMatrix pairwise_matrix(const ModelParams& params,
                                       std::span<const EntityRef> entities,
                                       EntityKind common_kind,
                                       TransformMode mode = TransformMode::Algebraic) {
  if (entities.empty()) throw Error(ErrorCode::InvalidConfig, "entity list is empty");
  std::vector<std::vector<double>> vecs;
  vecs.reserve(entities.size());
  for (const auto& e : entities) vecs.push_back(transform(params, e, common_kind, mode));
  const std::size_t n = entities.size();
  ProximityMatrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = cosine(vecs[i], vecs[i]);
    for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = cosine(vecs[i], vecs[j]);
  }
  return m;
}

}  // namespace patnet

#endif  // PATNET_PROXIMITY_HPP
