#ifndef PATNET_TRAINER_HPP
#define PATNET_TRAINER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "patnet/error.hpp"
#include "patnet/graph.hpp"
#include "patnet/models.hpp"
#include "patnet/rng.hpp"

namespace patnet {

enum class Loss { MarginRank, Logistic };

constexpr std::string_view to_string(Loss l) { return l == Loss::MarginRank ? "margin" : "logistic"; }

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::size_t negatives_per_positive = 4;
  double learning_rate = 0.01;
  double margin = 1.0;
  Loss loss = Loss::MarginRank;
  double l2_coefficient = 0.0;
  bool normalize_entities = false;
  std::uint64_t seed = 0;
  std::size_t dim = 500;
  /// 1 = reference mode (bit-deterministic). More threads shard each epoch's
  /// batches over private parameter copies that are averaged at epoch end.
  std::size_t threads = 1;
};

inline void validate(const TrainConfig& c) {
  if (c.epochs < 1 || c.batch_size < 1 || c.negatives_per_positive < 1 || c.dim < 1 ||
      c.threads < 1) {
    throw Error(ErrorCode::InvalidConfig,
                "epochs, batch_size, negatives_per_positive, dim and threads must be >= 1");
  }
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning_rate must be finite and non-negative");
  }
  if (!(c.margin >= 0.0) || !(c.l2_coefficient >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "margin and l2_coefficient must be non-negative");
  }
}

/// Margin loss for the translational family, logistic loss with a small L2
/// penalty for the semantic-matching family.
inline TrainConfig default_config(ModelKind kind) {
  TrainConfig c;
  c.dim = 500;
  switch (kind) {
    case ModelKind::TransE_L1:
    case ModelKind::TransE_L2:
      c.loss = Loss::MarginRank;
      c.margin = 1.0;
      c.normalize_entities = true;
      // Sign gradients move every coordinate by the full step.
      c.learning_rate = kind == ModelKind::TransE_L1 ? 0.002 : 0.01;
      break;
    case ModelKind::TransR:
      c.loss = Loss::MarginRank;
      c.margin = 1.0;
      c.learning_rate = 0.001;
      break;
    case ModelKind::RotatE:
      c.loss = Loss::MarginRank;
      c.margin = 1.0;
      c.learning_rate = 0.01;
      break;
    case ModelKind::RESCAL:
      c.loss = Loss::Logistic;
      c.l2_coefficient = 1e-5;
      c.learning_rate = 0.01;
      break;
    case ModelKind::DistMult:
    case ModelKind::ComplEx:
      c.loss = Loss::Logistic;
      c.l2_coefficient = 1e-5;
      c.learning_rate = 0.05;
      break;
  }
  return c;
}

struct TrainReport {
  ModelKind kind = ModelKind::TransE_L2;
  TrainConfig config;
  std::vector<double> epoch_loss;  // mean loss per positive, one entry per epoch
  double wall_seconds = 0.0;
};

namespace detail {

inline double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Sparse gradient accumulator over one batch.
class GradBuffer {
 public:
  GradBuffer(const ModelParams& p)
      : width_(p.row_width()),
        entity_grad_(p.entities.size(), 0.0),
        entity_touched_(p.n_entities, 0) {
    for (auto r : kAllRelations) relation_grad_[index_of(r)].assign(p.relations[index_of(r)].size(), 0.0);
  }

  double* entity(Ordinal o) {
    if (!entity_touched_[o]) {
      entity_touched_[o] = 1;
      touched_.push_back(o);
    }
    return entity_grad_.data() + std::size_t{o} * width_;
  }

  double* relation(RelationKind r) {
    relation_touched_[index_of(r)] = true;
    return relation_grad_[index_of(r)].data();
  }

  const std::vector<Ordinal>& touched() const { return touched_; }

  /// Adds the L2 penalty for every touched block, returning its loss value.
  double add_l2(const ModelParams& p, double lambda) {
    if (lambda == 0.0) return 0.0;
    double loss = 0.0;
    for (auto o : touched_) {
      auto row = p.entity(o);
      double* g = entity_grad_.data() + std::size_t{o} * width_;
      for (std::size_t i = 0; i < width_; ++i) {
        loss += lambda * row[i] * row[i];
        g[i] += 2.0 * lambda * row[i];
      }
    }
    for (auto r : kAllRelations) {
      if (!relation_touched_[index_of(r)]) continue;
      const auto& block = p.relations[index_of(r)];
      auto& g = relation_grad_[index_of(r)];
      for (std::size_t i = 0; i < block.size(); ++i) {
        loss += lambda * block[i] * block[i];
        g[i] += 2.0 * lambda * block[i];
      }
    }
    return loss;
  }

  /// params -= lr * grad over touched blocks, then clears the buffer.
  /// Returns false when any updated value is not finite.
  bool apply(ModelParams& p, double lr, bool normalize) {
    // A zero step is an exact no-op, renormalization included.
    const bool step = lr != 0.0;
    bool finite = true;
    for (auto o : touched_) {
      double* row = p.entities.data() + std::size_t{o} * width_;
      double* g = entity_grad_.data() + std::size_t{o} * width_;
      for (std::size_t i = 0; i < width_; ++i) {
        if (step) row[i] -= lr * g[i];
        g[i] = 0.0;
      }
      if (normalize && step) l2_normalize(std::span<double>(row, width_));
      for (std::size_t i = 0; i < width_; ++i) finite &= std::isfinite(row[i]);
      entity_touched_[o] = 0;
    }
    touched_.clear();
    for (auto r : kAllRelations) {
      if (!relation_touched_[index_of(r)]) continue;
      auto& block = p.relations[index_of(r)];
      auto& g = relation_grad_[index_of(r)];
      for (std::size_t i = 0; i < block.size(); ++i) {
        if (step) block[i] -= lr * g[i];
        g[i] = 0.0;
        finite &= std::isfinite(block[i]);
      }
      relation_touched_[index_of(r)] = false;
    }
    return finite;
  }

 private:
  std::size_t width_;
  std::vector<double> entity_grad_;
  std::vector<char> entity_touched_;
  std::vector<Ordinal> touched_;
  std::array<std::vector<double>, kRelationCount> relation_grad_;
  std::array<bool, kRelationCount> relation_touched_{};
};

/// Same-kind, unfiltered corruption used during training. Falls back to the
/// other side when the requested side has no alternative entity; nullopt
/// when neither side does.
inline std::optional<Triple> draw_training_corrupt(const TripleStore& store, const Triple& t,
                                                   Side side, Rng& rng) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto pool = store.entities_of(slot_kind(t.relation, side));
    if (pool.size() >= 2) {
      const Ordinal original = slot_of(t, side);
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      Ordinal c;
      do {
        c = pool[pick(rng)];
      } while (c == original);
      return replace_slot(t, side, c);
    }
    side = side == Side::Head ? Side::Tail : Side::Head;
  }
  return std::nullopt;
}

struct Worker {
  const TripleStore& store;
  const TrainConfig& cfg;
  ModelParams& params;
  GradBuffer grads;
  std::vector<double> scratch;
  std::uint64_t sample_counter = 0;

  Worker(const TripleStore& s, const TrainConfig& c, ModelParams& p)
      : store(s), cfg(c), params(p), grads(p) {}

  double score_of(const Triple& t) {
    return score_rows(params.kind, params.dim, params.entity(t.head).data(),
                      params.relation(t.relation).data(), params.entity(t.tail).data(), 0.0,
                      nullptr, nullptr, nullptr, nullptr, &scratch);
  }

  void accumulate(const Triple& t, double coeff) {
    score_rows(params.kind, params.dim, params.entity(t.head).data(),
               params.relation(t.relation).data(), params.entity(t.tail).data(), coeff,
               grads.entity(t.head), grads.relation(t.relation), grads.entity(t.tail), nullptr,
               &scratch);
  }

  /// Processes one batch; returns its summed loss.
  double batch(std::span<const std::size_t> indices, Rng& rng, std::size_t epoch,
               std::size_t batch_no) {
    auto triples = store.triples();
    double loss = 0.0;
    for (auto idx : indices) {
      const Triple& pos = triples[idx];
      const double s_pos = score_of(pos);
      double pos_coeff = 0.0;
      if (cfg.loss == Loss::Logistic) {
        loss -= log_sigmoid(s_pos);
        pos_coeff = -sigmoid(-s_pos);
      }
      for (std::size_t k = 0; k < cfg.negatives_per_positive; ++k) {
        const Side side = (sample_counter++ % 2 == 0) ? Side::Head : Side::Tail;
        auto neg = draw_training_corrupt(store, pos, side, rng);
        if (!neg) continue;
        const double s_neg = score_of(*neg);
        if (cfg.loss == Loss::MarginRank) {
          const double hinge = cfg.margin - s_pos + s_neg;
          if (hinge <= 0.0) continue;
          loss += hinge;
          pos_coeff -= 1.0;
          accumulate(*neg, 1.0);
        } else {
          loss -= log_sigmoid(-s_neg);
          accumulate(*neg, sigmoid(s_neg));
        }
      }
      if (pos_coeff != 0.0) accumulate(pos, pos_coeff);
    }
    loss += grads.add_l2(params, cfg.l2_coefficient);
    const bool normalize = cfg.normalize_entities && is_translational(params.kind);
    if (!grads.apply(params, cfg.learning_rate, normalize)) {
      throw Error(ErrorCode::NumericalDivergence, "non-finite parameter at epoch " +
                                                      std::to_string(epoch + 1) + ", batch " +
                                                      std::to_string(batch_no + 1));
    }
    return loss;
  }
};

}  // namespace detail

/// Called after each epoch with its 1-based index and mean loss.
using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mini-batch SGD with negative sampling. Starts from `init` when given,
/// otherwise from init_params(kind, |vocabulary|, config.dim, config.seed).
inline std::pair<ModelParams, TrainReport> train(const TripleStore& store, ModelKind kind,
                                                 const TrainConfig& config,
                                                 std::optional<ModelParams> init = std::nullopt,
                                                 const EpochCallback& on_epoch = {}) {
  validate(config);
  if (store.empty()) throw Error(ErrorCode::EmptyStore, "training store has no triples");
  const auto t0 = std::chrono::steady_clock::now();

  ModelParams params = init ? std::move(*init)
                            : init_params(kind, store.entity_count(), config.dim, config.seed,
                                          store.fingerprint());
  if (params.kind != kind || params.n_entities != store.entity_count()) {
    throw Error(ErrorCode::InvalidConfig, "initial parameters do not match model or vocabulary");
  }
  params.vocab_fingerprint = store.fingerprint();

  TrainReport report;
  report.kind = kind;
  report.config = config;

  const std::size_t n = store.size();
  std::vector<std::size_t> order(n);
  const std::size_t n_batches = (n + config.batch_size - 1) / config.batch_size;

  if (config.threads == 1) {
    detail::Worker worker(store, config, params);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(derive_seed({config.seed, 0x7e1u, epoch}));
      std::shuffle(order.begin(), order.end(), rng);
      double total = 0.0;
      for (std::size_t b = 0; b < n_batches; ++b) {
        const std::size_t lo = b * config.batch_size, hi = std::min(n, lo + config.batch_size);
        total += worker.batch(std::span<const std::size_t>(order).subspan(lo, hi - lo), rng, epoch, b);
      }
      report.epoch_loss.push_back(total / double(n));
      if (on_epoch) on_epoch(epoch + 1, report.epoch_loss.back());
    }
  } else {
    const std::size_t T = std::min(config.threads, n_batches);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng shuffle_rng(derive_seed({config.seed, 0x7e1u, epoch}));
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      std::vector<ModelParams> copies(T, params);
      std::vector<double> totals(T, 0.0);
      std::vector<std::exception_ptr> errors(T);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < T; ++w) {
        pool.emplace_back([&, w] {
          try {
            detail::Worker worker(store, config, copies[w]);
            Rng rng(derive_seed({config.seed, 0x7e2u, epoch, w}));
            for (std::size_t b = w; b < n_batches; b += T) {
              const std::size_t lo = b * config.batch_size,
                                hi = std::min(n, lo + config.batch_size);
              totals[w] += worker.batch(std::span<const std::size_t>(order).subspan(lo, hi - lo),
                                        rng, epoch, b);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      auto average = [&](auto member) {
        auto& dst = member(params);
        for (std::size_t i = 0; i < dst.size(); ++i) {
          double s = 0.0;
          for (auto& c : copies) s += member(c)[i];
          dst[i] = s / double(T);
        }
      };
      average([](ModelParams& p) -> std::vector<double>& { return p.entities; });
      for (auto r : kAllRelations) {
        average([r](ModelParams& p) -> std::vector<double>& { return p.relations[index_of(r)]; });
      }
      if (config.normalize_entities && is_translational(kind)) {
        for (std::size_t e = 0; e < params.n_entities; ++e) {
          l2_normalize(params.entity(static_cast<Ordinal>(e)));
        }
      }
      report.epoch_loss.push_back(std::accumulate(totals.begin(), totals.end(), 0.0) / double(n));
      if (on_epoch) on_epoch(epoch + 1, report.epoch_loss.back());
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(params), std::move(report)};
}

}  // namespace patnet

#endif  // PATNET_TRAINER_HPP
