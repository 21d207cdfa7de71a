#ifndef PATNET_EXPANSION_HPP
#define PATNET_EXPANSION_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "patnet/error.hpp"
#include "patnet/graph.hpp"
#include "patnet/ingestion.hpp"
#include "patnet/models.hpp"
#include "patnet/proximity.hpp"

namespace patnet {

// ---------------------------------------------------------------------------
// Domain-agent proximity

/// Home groups with the agent's patent count in each.
struct DomainState {
  std::map<std::string, std::size_t> home;

  std::vector<std::string> targets(const GroupUniverse& universe) const {
    std::vector<std::string> out;
    for (const auto& g : universe) {
      if (!home.contains(g)) out.push_back(g);
    }
    return out;
  }
};

using GroupProximityFn = std::function<double(const std::string&, const std::string&)>;

/// Patent-count-weighted mean of phi(home group, j) over the home groups.
inline double domain_agent_proximity(const DomainState& state, const std::string& target,
                                     const GroupProximityFn& phi) {
  if (state.home.empty()) throw Error(ErrorCode::EmptyHome, "home domain is empty");
  if (state.home.contains(target)) {
    throw Error(ErrorCode::TargetInHome, "'" + target + "' already belongs to the home domain");
  }
  double num = 0.0, den = 0.0;
  for (const auto& [group, count] : state.home) {
    num += phi(group, target) * double(count);
    den += double(count);
  }
  return num / den;
}

/// Cosine of two group rows, floored at 0 unless `raw`.
inline double group_proximity(const ModelParams& params, Ordinal g1, Ordinal g2, bool raw = false) {
  const double c = cosine(params.entity(g1), params.entity(g2));
  return raw ? c : std::max(0.0, c);
}

// ---------------------------------------------------------------------------
// Percentiles

/// Rank percentiles (N - r) / (N - 1) with rank 1 = highest proximity; exact
/// ties share their mean rank. Output is aligned with `values`.
inline std::vector<double> rank_percentiles(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw Error(ErrorCode::TooFewTargets, "percentiles need at least two targets");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (double(i + 1) + double(j + 1)) / 2.0;
    const double pct = (double(n) - mean_rank) / double(n - 1);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = pct;
    i = j + 1;
  }
  return out;
}

inline std::map<std::string, double> percentiles(
    std::span<const std::pair<std::string, double>> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (const auto& [g, p] : values) v.push_back(p);
  auto pct = rank_percentiles(v);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < values.size(); ++i) out[values[i].first] = pct[i];
  return out;
}

// ---------------------------------------------------------------------------
// Profiles

struct ExpansionProfile {
  std::string agent;  // "inventor:<id>", "assignee:<id>", or "composite"
  std::vector<double> entries;
};

/// Pairwise group proximities over a universe, computed once per model.
class GroupProximityTable {
 public:
  GroupProximityTable(const ModelParams& params, const TripleStore& vocab,
                      const GroupUniverse& universe, bool raw = false)
      : universe_(universe), n_(universe.size()), phi_(n_ * n_, 0.0) {
    std::vector<Ordinal> ords;
    ords.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      auto o = vocab.find(EntityKind::Group, universe[i]);
      if (!o) throw Error(ErrorCode::UnknownGroup, "'" + universe[i] + "' is not in the vocabulary");
      ords.push_back(*o);
      index_.emplace(universe[i], i);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      phi_[i * n_ + i] = group_proximity(params, ords[i], ords[i], raw);
      for (std::size_t j = i + 1; j < n_; ++j) {
        phi_[i * n_ + j] = phi_[j * n_ + i] = group_proximity(params, ords[i], ords[j], raw);
      }
    }
  }

  std::size_t size() const { return n_; }
  const GroupUniverse& universe() const { return universe_; }
  double operator()(std::size_t i, std::size_t j) const { return phi_[i * n_ + j]; }

  std::size_t index_of(const std::string& group) const {
    auto it = index_.find(group);
    if (it == index_.end()) throw Error(ErrorCode::UnknownGroup, "'" + group + "' is not in the universe");
    return it->second;
  }

 private:
  GroupUniverse universe_;
  std::size_t n_;
  std::vector<double> phi_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Walks the portfolio in order. The first patent seeds the home domain.
/// Every later patent that enters new groups emits, per new group in
/// lexicographic order, that group's percentile among all targets as they
/// stood before the patent. Home counts then grow by one for each of the
/// patent's groups. Steps with fewer than two targets emit nothing.
inline ExpansionProfile build_profile(const GroupProximityTable& phi,
                                      const AgentPortfolio& portfolio) {
  if (portfolio.events.empty()) {
    throw Error(ErrorCode::EmptyPortfolio, "agent '" + portfolio.agent_id + "' has no patents");
  }
  ExpansionProfile profile{std::string(to_string(portfolio.kind)) + ":" + portfolio.agent_id, {}};
  const std::size_t U = phi.size();
  std::vector<std::size_t> counts(U, 0);
  std::vector<double> weighted(U, 0.0);  // sum_i a_i * phi(i, j)
  double total = 0.0;

  auto add_patent = [&](const std::vector<std::size_t>& groups) {
    for (auto i : groups) {
      ++counts[i];
      total += 1.0;
      for (std::size_t j = 0; j < U; ++j) weighted[j] += phi(i, j);
    }
  };
  auto indices_of = [&](const PatentRecord& rec) {
    std::vector<std::size_t> idx;
    for (const auto& g : rec.groups) idx.push_back(phi.index_of(g));
    return idx;
  };

  add_patent(indices_of(portfolio.events.front()));
  std::vector<double> prox;
  std::vector<std::size_t> target_idx;
  for (std::size_t e = 1; e < portfolio.events.size(); ++e) {
    const auto& rec = portfolio.events[e];
    auto groups = indices_of(rec);
    std::vector<std::string> fresh;
    for (const auto& g : rec.groups) {
      if (counts[phi.index_of(g)] == 0) fresh.push_back(g);
    }
    std::sort(fresh.begin(), fresh.end());
    if (!fresh.empty()) {
      prox.clear();
      target_idx.assign(U, U);
      for (std::size_t j = 0; j < U; ++j) {
        if (counts[j] != 0) continue;
        target_idx[j] = prox.size();
        prox.push_back(weighted[j] / total);
      }
      if (prox.size() >= 2) {
        auto pct = rank_percentiles(prox);
        for (const auto& g : fresh) profile.entries.push_back(pct[target_idx[phi.index_of(g)]]);
      }
    }
    add_patent(groups);
  }
  return profile;
}

inline ExpansionProfile build_profile(const ModelParams& params, const TripleStore& vocab,
                                      const AgentPortfolio& portfolio,
                                      const GroupUniverse& universe, bool raw = false) {
  return build_profile(GroupProximityTable(params, vocab, universe, raw), portfolio);
}

inline ExpansionProfile combine(std::span<const ExpansionProfile> profiles) {
  ExpansionProfile out{"composite", {}};
  for (const auto& p : profiles) out.entries.insert(out.entries.end(), p.entries.begin(), p.entries.end());
  return out;
}

/// Samples of F(x) = |{pp >= x}| / n at x = 0, at each distinct entry, and at x = 1.
inline std::vector<std::pair<double, double>> cumulative_distribution(
    const ExpansionProfile& profile) {
  if (profile.entries.empty()) throw Error(ErrorCode::EmptyProfile, profile.agent);
  std::vector<double> sorted = profile.entries;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> xs{0.0};
  for (double v : sorted) {
    if (v > xs.back()) xs.push_back(v);
  }
  if (xs.back() < 1.0) xs.push_back(1.0);
  const double n = double(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(xs.size());
  for (double x : xs) {
    auto at_least = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), x);
    out.emplace_back(x, double(at_least) / n);
  }
  return out;
}

/// Area under F on [0, 1], integrated over the step function: F is constant
/// on each (x_k, x_{k+1}] with value F(x_{k+1}).
inline double auc(const ExpansionProfile& profile) {
  auto cdf = cumulative_distribution(profile);
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < cdf.size(); ++k) {
    area += (cdf[k + 1].first - cdf[k].first) * cdf[k + 1].second;
  }
  return area;
}

/// Share of agents for which each model has the highest AUC; a tie at the
/// maximum splits the agent's credit equally.
inline std::map<std::string, double> explainability(
    const std::map<std::string, std::map<std::string, double>>& per_agent_auc) {
  std::map<std::string, double> out;
  if (per_agent_auc.empty()) return out;
  const auto& first = per_agent_auc.begin()->second;
  for (const auto& [model, _] : first) out[model] = 0.0;
  for (const auto& [agent, by_model] : per_agent_auc) {
    if (by_model.size() != first.size() ||
        !std::equal(by_model.begin(), by_model.end(), first.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error(ErrorCode::InconsistentModelSets, "agent '" + agent + "' has a different model set");
    }
    double best = -1.0;
    for (const auto& [m, v] : by_model) best = std::max(best, v);
    std::size_t winners = 0;
    for (const auto& [m, v] : by_model) winners += v == best ? 1 : 0;
    for (const auto& [m, v] : by_model) {
      if (v == best) out[m] += 1.0 / double(winners);
    }
  }
  for (auto& [m, v] : out) v /= double(per_agent_auc.size());
  return out;
}

// ---------------------------------------------------------------------------
// Study

struct NamedModel {
  std::string name;
  const ModelParams* params;
};

struct StudyOptions {
  std::size_t min_patents = 30;
  bool raw_cosine = false;
};

struct ClassStudy {
  std::size_t agents = 0;             // agents with at least one emitted percentile
  std::map<std::string, ExpansionProfile> combined;  // per model
  std::map<std::string, double> combined_auc;         // per model
  std::map<std::string, double> explainability;       // per model
  std::map<std::string, std::map<std::string, double>> per_agent_auc;
};

struct ExpansionReport {
  std::vector<std::string> models;
  std::map<AgentKind, ClassStudy> classes;
};

/// Builds per-agent profiles under every model, the combined profile per
/// model and agent class, its AUC, and per-class explainability. Agents are
/// processed in agent-id order.
inline ExpansionReport run_study(const TripleStore& vocab, const GroupUniverse& universe,
                                 std::span<const AgentPortfolio> portfolios,
                                 std::span<const NamedModel> models,
                                 const StudyOptions& options = {}) {
  if (models.empty()) throw Error(ErrorCode::InvalidConfig, "no models");
  ExpansionReport report;
  std::vector<GroupProximityTable> tables;
  tables.reserve(models.size());
  for (const auto& m : models) {
    require_fingerprint(*m.params, vocab);
    if (std::find(report.models.begin(), report.models.end(), m.name) != report.models.end()) {
      throw Error(ErrorCode::InvalidConfig, "duplicate model name '" + m.name + "'");
    }
    report.models.push_back(m.name);
    tables.emplace_back(*m.params, vocab, universe, options.raw_cosine);
  }

  std::vector<const AgentPortfolio*> ordered;
  for (const auto& p : portfolios) {
    if (p.events.size() >= options.min_patents) ordered.push_back(&p);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return std::pair(a->kind, a->agent_id) < std::pair(b->kind, b->agent_id);
  });

  for (auto kind : {AgentKind::Inventor, AgentKind::Assignee}) {
    ClassStudy cls;
    std::map<std::string, std::vector<ExpansionProfile>> profiles;
    for (const auto* p : ordered) {
      if (p->kind != kind) continue;
      std::map<std::string, double> aucs;
      for (std::size_t m = 0; m < models.size(); ++m) {
        auto prof = build_profile(tables[m], *p);
        if (prof.entries.empty()) break;
        aucs[models[m].name] = auc(prof);
        profiles[models[m].name].push_back(std::move(prof));
      }
      if (aucs.empty()) continue;
      cls.per_agent_auc[std::string(to_string(kind)) + ":" + p->agent_id] = std::move(aucs);
      ++cls.agents;
    }
    for (const auto& m : models) {
      auto combined = combine(profiles[m.name]);
      if (!combined.entries.empty()) cls.combined_auc[m.name] = auc(combined);
      cls.combined[m.name] = std::move(combined);
    }
    cls.explainability = explainability(cls.per_agent_auc);
    report.classes[kind] = std::move(cls);
  }
  return report;
}

}  // namespace patnet

#endif  // PATNET_EXPANSION_HPP
