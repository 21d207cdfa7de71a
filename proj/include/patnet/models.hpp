#ifndef PATNET_MODELS_HPP
#define PATNET_MODELS_HPP

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patnet/error.hpp"
#include "patnet/graph.hpp"
#include "patnet/kinds.hpp"
#include "patnet/rng.hpp"

namespace patnet {

enum class ModelKind : std::uint8_t { TransE_L1, TransE_L2, TransR, RESCAL, DistMult, ComplEx, RotatE };

inline constexpr std::array<ModelKind, 7> kAllModels = {
    ModelKind::TransE_L1, ModelKind::TransE_L2, ModelKind::TransR, ModelKind::RESCAL,
    ModelKind::DistMult,  ModelKind::ComplEx,   ModelKind::RotatE};

constexpr std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::TransE_L1: return "TransE_L1";
    case ModelKind::TransE_L2: return "TransE_L2";
    case ModelKind::TransR: return "TransR";
    case ModelKind::RESCAL: return "RESCAL";
    case ModelKind::DistMult: return "DistMult";
    case ModelKind::ComplEx: return "ComplEx";
    case ModelKind::RotatE: return "RotatE";
  }
  return "?";
}

/// Accepts the canonical names case-insensitively.
inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  auto lower = [](std::string_view v) {
    std::string out(v);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  auto want = lower(s);
  for (auto k : kAllModels) {
    if (lower(to_string(k)) == want) return k;
  }
  return std::nullopt;
}

constexpr bool is_complex(ModelKind k) { return k == ModelKind::ComplEx || k == ModelKind::RotatE; }

constexpr bool is_transe(ModelKind k) {
  return k == ModelKind::TransE_L1 || k == ModelKind::TransE_L2;
}

constexpr bool is_translational(ModelKind k) {
  return is_transe(k) || k == ModelKind::TransR || k == ModelKind::RotatE;
}

/// Reals per entity row. Complex rows are [re_0..re_{d-1} | im_0..im_{d-1}].
constexpr std::size_t entity_width(ModelKind k, std::size_t dim) {
  return is_complex(k) ? 2 * dim : dim;
}

/// Reals per relation block:
///   TransE, DistMult: r (d)        ComplEx: [re | im] (2d)
///   RotatE: phases theta (d)       RESCAL: M (d x d, row-major)
///   TransR: r (d) followed by the projection M (d x d, row-major)
constexpr std::size_t relation_width(ModelKind k, std::size_t dim) {
  switch (k) {
    case ModelKind::TransE_L1:
    case ModelKind::TransE_L2:
    case ModelKind::DistMult:
    case ModelKind::RotatE: return dim;
    case ModelKind::ComplEx: return 2 * dim;
    case ModelKind::RESCAL: return dim * dim;
    case ModelKind::TransR: return dim + dim * dim;
  }
  return dim;
}

struct ModelParams {
  ModelKind kind = ModelKind::TransE_L2;
  std::size_t dim = 0;
  std::size_t n_entities = 0;
  std::vector<double> entities;  // n_entities x entity_width, row-major
  std::array<std::vector<double>, kRelationCount> relations;
  std::uint64_t vocab_fingerprint = 0;

  std::size_t row_width() const { return entity_width(kind, dim); }

  std::span<const double> entity(Ordinal o) const {
    check(o);
    return {entities.data() + std::size_t{o} * row_width(), row_width()};
  }
  std::span<double> entity(Ordinal o) {
    check(o);
    return {entities.data() + std::size_t{o} * row_width(), row_width()};
  }
  std::span<const double> relation(RelationKind r) const { return relations[index_of(r)]; }
  std::span<double> relation(RelationKind r) { return relations[index_of(r)]; }

  void check(Ordinal o) const {
    if (o >= n_entities) throw Error(ErrorCode::UnknownOrdinal, "ordinal " + std::to_string(o));
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline void require_fingerprint(const ModelParams& params, const TripleStore& store) {
  if (params.vocab_fingerprint != store.fingerprint() || params.n_entities != store.entity_count()) {
    throw Error(ErrorCode::FingerprintMismatch,
                "parameters were trained against a different vocabulary");
  }
}

inline void l2_normalize(std::span<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  if (s <= 0.0) return;
  double inv = 1.0 / std::sqrt(s);
  for (double& x : v) x *= inv;
}

/// Uniform(-6/sqrt(d), 6/sqrt(d)) for every real entry, RotatE phases
/// Uniform[-pi, pi), and unit-norm entity rows for translational models.
inline ModelParams init_params(ModelKind kind, std::size_t n_entities, std::size_t dim,
                               std::uint64_t seed, std::uint64_t vocab_fingerprint = 0) {
  if (n_entities < 1 || dim < 1) {
    throw Error(ErrorCode::InvalidConfig, "n_entities and dim must be >= 1");
  }
  ModelParams p;
  p.kind = kind;
  p.dim = dim;
  p.n_entities = n_entities;
  p.vocab_fingerprint = vocab_fingerprint;
  Rng rng(derive_seed({seed, 0x1a1u, static_cast<std::uint64_t>(kind)}));
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> entry(-bound, bound);

  p.entities.resize(n_entities * p.row_width());
  for (auto& x : p.entities) x = entry(rng);
  if (is_translational(kind)) {
    for (std::size_t e = 0; e < n_entities; ++e) {
      l2_normalize(std::span<double>(p.entities.data() + e * p.row_width(), p.row_width()));
    }
  }

  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  for (auto r : kAllRelations) {
    auto& block = p.relations[index_of(r)];
    block.resize(relation_width(kind, dim));
    for (auto& x : block) x = kind == ModelKind::RotatE ? phase(rng) : entry(rng);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Score kernels
//
// Each kernel returns the score and, when gh is non-null, adds
// coeff * d(score)/d(block) into gh / gr / gt. Higher score = more plausible.

struct KernelFlags {
  bool non_differentiable = false;
};

namespace kernel {

inline double transe_l1(std::size_t d, const double* h, const double* r, const double* t,
                        double c, double* gh, double* gr, double* gt, KernelFlags& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = h[i] + r[i] - t[i];
    s += std::abs(x);
    if (!gh) continue;
    if (x == 0.0) {
      f.non_differentiable = true;
      continue;
    }
    const double g = x > 0.0 ? c : -c;
    gh[i] -= g;
    gr[i] -= g;
    gt[i] += g;
  }
  return -s;
}

inline double transe_l2(std::size_t d, const double* h, const double* r, const double* t,
                        double c, double* gh, double* gr, double* gt, KernelFlags& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = h[i] + r[i] - t[i];
    s += x * x;
  }
  const double n = std::sqrt(s);
  if (!gh) return -n;
  if (n == 0.0) {
    f.non_differentiable = true;
    return 0.0;
  }
  const double k = c / n;
  for (std::size_t i = 0; i < d; ++i) {
    const double g = k * (h[i] + r[i] - t[i]);
    gh[i] -= g;
    gr[i] -= g;
    gt[i] += g;
  }
  return -n;
}

// score = -|| M (h - t) + r ||^2
inline double transr(std::size_t d, const double* h, const double* rel, const double* t, double c,
                     double* gh, double* grel, double* gt, std::vector<double>& scratch) {
  const double* r = rel;
  const double* M = rel + d;
  scratch.resize(2 * d);
  double* diff = scratch.data();
  double* u = scratch.data() + d;
  for (std::size_t j = 0; j < d; ++j) diff[j] = h[j] - t[j];
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double* row = M + i * d;
    double acc = r[i];
    for (std::size_t j = 0; j < d; ++j) acc += row[j] * diff[j];
    u[i] = acc;
    s += acc * acc;
  }
  if (!gh) return -s;
  double* gr = grel;
  double* gM = grel + d;
  for (std::size_t i = 0; i < d; ++i) {
    const double gu = -2.0 * c * u[i];
    gr[i] += gu;
    const double* row = M + i * d;
    double* grow = gM + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      grow[j] += gu * diff[j];
      gh[j] += gu * row[j];
      gt[j] -= gu * row[j];
    }
  }
  return -s;
}

// score = h^T M t
inline double rescal(std::size_t d, const double* h, const double* M, const double* t, double c,
                     double* gh, double* gM, double* gt) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double* row = M + i * d;
    double mt = 0.0;
    for (std::size_t j = 0; j < d; ++j) mt += row[j] * t[j];
    s += h[i] * mt;
    if (!gh) continue;
    gh[i] += c * mt;
    const double ch = c * h[i];
    double* grow = gM + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      grow[j] += ch * t[j];
      gt[j] += ch * row[j];
    }
  }
  return s;
}

inline double distmult(std::size_t d, const double* h, const double* r, const double* t, double c,
                       double* gh, double* gr, double* gt) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    s += (h[i] * t[i]) * r[i];  // grouped so swapping h and t is bit-exact
    if (!gh) continue;
    gh[i] += c * r[i] * t[i];
    gr[i] += c * h[i] * t[i];
    gt[i] += c * h[i] * r[i];
  }
  return s;
}

// score = Re(sum_i r_i h_i conj(t_i)), h = a + ib, r = c + id, t = e + if
inline double complex_bilinear(std::size_t d, const double* h, const double* r, const double* t,
                               double k, double* gh, double* gr, double* gt) {
  const double *a = h, *b = h + d, *c = r, *dd = r + d, *e = t, *f = t + d;
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    s += a[i] * c[i] * e[i] - b[i] * dd[i] * e[i] + b[i] * c[i] * f[i] + a[i] * dd[i] * f[i];
    if (!gh) continue;
    gh[i] += k * (c[i] * e[i] + dd[i] * f[i]);
    gh[d + i] += k * (c[i] * f[i] - dd[i] * e[i]);
    gr[i] += k * (a[i] * e[i] + b[i] * f[i]);
    gr[d + i] += k * (a[i] * f[i] - b[i] * e[i]);
    gt[i] += k * (a[i] * c[i] - b[i] * dd[i]);
    gt[d + i] += k * (b[i] * c[i] + a[i] * dd[i]);
  }
  return s;
}

// score = -|| h o (cos theta + i sin theta) - t ||_2 over the 2d reals
inline double rotate(std::size_t d, const double* h, const double* theta, const double* t,
                     double k, double* gh, double* gtheta, double* gt, KernelFlags& f,
                     std::vector<double>& scratch) {
  const double *a = h, *b = h + d, *e = t, *fi = t + d;
  scratch.resize(4 * d);
  double *ure = scratch.data(), *uim = ure + d, *cs = uim + d, *sn = cs + d;
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    cs[i] = std::cos(theta[i]);
    sn[i] = std::sin(theta[i]);
    ure[i] = a[i] * cs[i] - b[i] * sn[i] - e[i];
    uim[i] = a[i] * sn[i] + b[i] * cs[i] - fi[i];
    s += ure[i] * ure[i] + uim[i] * uim[i];
  }
  const double n = std::sqrt(s);
  if (!gh) return -n;
  if (n == 0.0) {
    f.non_differentiable = true;
    return 0.0;
  }
  const double g = -k / n;  // d(score)/du = -u / n
  for (std::size_t i = 0; i < d; ++i) {
    gh[i] += g * (ure[i] * cs[i] + uim[i] * sn[i]);
    gh[d + i] += g * (-ure[i] * sn[i] + uim[i] * cs[i]);
    gt[i] -= g * ure[i];
    gt[d + i] -= g * uim[i];
    gtheta[i] += g * (ure[i] * (-a[i] * sn[i] - b[i] * cs[i]) + uim[i] * (a[i] * cs[i] - b[i] * sn[i]));
  }
  return -n;
}

}  // namespace kernel

/// Evaluates one score directly from rows. When `gh` is non-null, also adds
/// `coeff` times the gradient into gh / gr / gt. `scratch` is reused storage.
inline double score_rows(ModelKind kind, std::size_t d, const double* h, const double* r,
                         const double* t, double coeff = 0.0, double* gh = nullptr,
                         double* gr = nullptr, double* gt = nullptr, KernelFlags* flags = nullptr,
                         std::vector<double>* scratch = nullptr) {
  KernelFlags local_flags;
  KernelFlags& f = flags ? *flags : local_flags;
  thread_local std::vector<double> local_scratch;
  std::vector<double>& buf = scratch ? *scratch : local_scratch;
  switch (kind) {
    case ModelKind::TransE_L1: return kernel::transe_l1(d, h, r, t, coeff, gh, gr, gt, f);
    case ModelKind::TransE_L2: return kernel::transe_l2(d, h, r, t, coeff, gh, gr, gt, f);
    case ModelKind::TransR: return kernel::transr(d, h, r, t, coeff, gh, gr, gt, buf);
    case ModelKind::RESCAL: return kernel::rescal(d, h, r, t, coeff, gh, gr, gt);
    case ModelKind::DistMult: return kernel::distmult(d, h, r, t, coeff, gh, gr, gt);
    case ModelKind::ComplEx: return kernel::complex_bilinear(d, h, r, t, coeff, gh, gr, gt);
    case ModelKind::RotatE: return kernel::rotate(d, h, r, t, coeff, gh, gr, gt, f, buf);
  }
  return 0.0;
}

inline double score(const ModelParams& p, Ordinal h, RelationKind r, Ordinal t) {
  return score_rows(p.kind, p.dim, p.entity(h).data(), p.relation(r).data(), p.entity(t).data());
}

inline double score(const ModelParams& p, const Triple& t) {
  return score(p, t.head, t.relation, t.tail);
}

/// d(score)/d(parameter) for the three blocks a triple touches. Blocks use
/// the same layouts as ModelParams. When head and tail are the same entity
/// the two row gradients are reported separately; their sum is the total.
struct Gradient {
  std::vector<double> head;
  std::vector<double> relation;
  std::vector<double> tail;
  double score = 0.0;
  /// Set where the score has a kink (TransE_L1 zero coordinate, zero
  /// distance for L2-type norms); the affected components hold the zero
  /// subgradient.
  bool non_differentiable = false;
};

inline void grad_into(const ModelParams& p, Ordinal h, RelationKind r, Ordinal t, Gradient& out) {
  const auto w = p.row_width();
  out.head.assign(w, 0.0);
  out.tail.assign(w, 0.0);
  out.relation.assign(relation_width(p.kind, p.dim), 0.0);
  KernelFlags flags;
  out.score = score_rows(p.kind, p.dim, p.entity(h).data(), p.relation(r).data(),
                         p.entity(t).data(), 1.0, out.head.data(), out.relation.data(),
                         out.tail.data(), &flags);
  out.non_differentiable = flags.non_differentiable;
}

inline Gradient grad(const ModelParams& p, Ordinal h, RelationKind r, Ordinal t) {
  Gradient g;
  grad_into(p, h, r, t, g);
  return g;
}

}  // namespace patnet

#endif  // PATNET_MODELS_HPP
