#ifndef PATNET_REPORT_HPP
#define PATNET_REPORT_HPP

// Plain-text and CSV/TSV writers for everything the CLI emits. Reals are
// printed with %.17g so files round-trip and diff byte-for-byte.

#include <cstdio>
#include <ostream>
#include <set>
#include <span>
#include <string>

#include "patnet/evaluator.hpp"
#include "patnet/expansion.hpp"
#include "patnet/proximity.hpp"
#include "patnet/trainer.hpp"

namespace patnet {

inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_metrics(std::ostream& out, const std::string& prefix, const Metrics& m) {
  out << prefix << "queries = " << m.queries << '\n';
  out << prefix << "MR = " << fmt_real(m.mr) << '\n';
  out << prefix << "MRR = " << fmt_real(m.mrr) << '\n';
  for (std::size_t k = 0; k < kHitsAt.size(); ++k) {
    out << prefix << "hits@" << kHitsAt[k] << " = " << fmt_real(m.hits[k]) << '\n';
  }
}

/// `key = value` lines in a fixed order.
inline void write_eval_report(std::ostream& out, const EvalReport& r, ModelKind model) {
  out << "# patnet evaluation report\n";
  out << "model = " << to_string(model) << '\n';
  out << "config.K = " << r.config.corruptions_per_side << '\n';
  out << "config.sides = " << to_string(r.config.sides) << '\n';
  out << "config.pool = " << (r.config.pool == Pool::SameKind ? "same-kind" : "all") << '\n';
  out << "config.filtered = " << (r.config.filtered ? "true" : "false") << '\n';
  out << "config.ties = " << to_string(r.config.ties) << '\n';
  out << "config.seed = " << r.config.seed << '\n';
  out << "clamped_queries = " << r.clamped << '\n';
  out << "skipped_queries = " << r.skipped << '\n';
  write_metrics(out, "", r.overall);
  for (const auto& [rel, m] : r.per_relation) {
    write_metrics(out, "relation." + std::string(to_string(rel)) + ".", m);
  }
}

inline void write_train_report(std::ostream& out, const TrainReport& r, bool include_wall_time) {
  const auto& c = r.config;
  out << "# patnet training report\n";
  out << "model = " << to_string(r.kind) << '\n';
  out << "config.dim = " << c.dim << '\n';
  out << "config.epochs = " << c.epochs << '\n';
  out << "config.batch_size = " << c.batch_size << '\n';
  out << "config.negatives = " << c.negatives_per_positive << '\n';
  out << "config.learning_rate = " << fmt_real(c.learning_rate) << '\n';
  out << "config.margin = " << fmt_real(c.margin) << '\n';
  out << "config.loss = " << to_string(c.loss) << '\n';
  out << "config.l2 = " << fmt_real(c.l2_coefficient) << '\n';
  out << "config.normalize_entities = " << (c.normalize_entities ? "true" : "false") << '\n';
  out << "config.seed = " << c.seed << '\n';
  out << "config.threads = " << c.threads << '\n';
  if (include_wall_time) out << "wall_seconds = " << fmt_real(r.wall_seconds) << '\n';
  for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) {
    out << "epoch." << (e + 1) << ".loss = " << fmt_real(r.epoch_loss[e]) << '\n';
  }
}

inline void write_neighbors_tsv(std::ostream& out, std::span<const NeighborHit> hits) {
  out << "rank\tentity\tkind\tproximity\n";
  for (std::size_t i = 0; i < hits.size(); ++i) {
    out << (i + 1) << '\t' << hits[i].entity.label() << '\t' << to_string(hits[i].entity.kind)
        << '\t' << fmt_real(hits[i].proximity) << '\n';
  }
}

inline void write_matrix_tsv(std::ostream& out, std::span<const EntityRef> entities,
                             const ProximityMatrix& m) {
  out << "entity";
  for (const auto& e : entities) out << '\t' << e.label();
  out << '\n';
  for (std::size_t i = 0; i < entities.size(); ++i) {
    out << entities[i].label();
    for (double v : m[i]) out << '\t' << fmt_real(v);
    out << '\n';
  }
}

/// `agent_class,model,agents,combined_entries,combined_auc,explainability`
inline void write_expansion_summary_csv(std::ostream& out, const ExpansionReport& r) {
  out << "agent_class,model,agents,combined_entries,combined_auc,explainability\n";
  for (const auto& [kind, cls] : r.classes) {
    for (const auto& m : r.models) {
      auto auc_it = cls.combined_auc.find(m);
      auto ex_it = cls.explainability.find(m);
      out << to_string(kind) << ',' << m << ',' << cls.agents << ','
          << cls.combined.at(m).entries.size() << ','
          << (auc_it == cls.combined_auc.end() ? "" : fmt_real(auc_it->second)) << ','
          << (ex_it == cls.explainability.end() ? "" : fmt_real(ex_it->second)) << '\n';
    }
  }
}

/// `model,x,proportion` step samples of each combined profile.
inline void write_cdf_csv(std::ostream& out, const ExpansionReport& r, AgentKind kind) {
  out << "model,x,proportion\n";
  auto it = r.classes.find(kind);
  if (it == r.classes.end()) return;
  for (const auto& m : r.models) {
    const auto& prof = it->second.combined.at(m);
    if (prof.entries.empty()) continue;
    for (const auto& [x, f] : cumulative_distribution(prof)) {
      out << m << ',' << fmt_real(x) << ',' << fmt_real(f) << '\n';
    }
  }
}

/// `agent,model,auc` for every agent with a non-empty profile.
inline void write_agent_auc_csv(std::ostream& out, const ExpansionReport& r, AgentKind kind) {
  out << "agent,model,auc\n";
  auto it = r.classes.find(kind);
  if (it == r.classes.end()) return;
  for (const auto& [agent, by_model] : it->second.per_agent_auc) {
    for (const auto& [m, v] : by_model) out << agent << ',' << m << ',' << fmt_real(v) << '\n';
  }
}

inline void write_embeddings_tsv(std::ostream& out, const ModelParams& p, const TripleStore& vocab,
                                 const std::set<EntityKind>& kinds) {
  for (const auto& e : vocab.entities()) {
    if (!kinds.empty() && !kinds.contains(e.kind)) continue;
    out << e.label();
    for (double v : p.entity(e.ordinal)) out << '\t' << fmt_real(v);
    out << '\n';
  }
}

}  // namespace patnet

#endif  // PATNET_REPORT_HPP
