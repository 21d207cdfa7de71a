#ifndef PATNET_ARCHIVE_HPP
#define PATNET_ARCHIVE_HPP

// Embedding archive: a one-line magic, a one-line JSON manifest, the
// vocabulary text (optional) and the binary parameter payload.
//
//   PATNET-ARCHIVE 1\n
//   {"dim":..,"encoding":"f32le",...}\n
//   <vocab_bytes of "<ordinal>\t<kind>:<id>\n" lines>
//   <payload_bytes of little-endian floats>
//
// Payload order: entity rows (row-major), then one block per relation in
// cite, write, own, contain, comprise order. Complex values are interleaved
// (re, im); matrices are row-major.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "patnet/error.hpp"
#include "patnet/graph.hpp"
#include "patnet/ingestion.hpp"
#include "patnet/models.hpp"

namespace patnet {

enum class Encoding { F32, F64 };

constexpr std::string_view to_string(Encoding e) { return e == Encoding::F32 ? "f32le" : "f64le"; }
constexpr std::size_t bytes_per_value(Encoding e) { return e == Encoding::F32 ? 4 : 8; }

inline constexpr std::string_view kArchiveMagic = "PATNET-ARCHIVE 1";

struct ArchiveOptions {
  Encoding encoding = Encoding::F64;
  /// Written verbatim into the manifest. Left empty, the manifest records
  /// "unspecified" so archives stay byte-reproducible.
  std::string created;
};

struct Archive {
  ModelParams params;
  Encoding encoding = Encoding::F64;
  std::string created;
  std::string vocabulary;  // may be empty
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Values of a block in payload order.
inline std::vector<double> to_payload_order(std::span<const double> block, bool complex_layout,
                                            std::size_t width) {
  if (!complex_layout) return {block.begin(), block.end()};
  std::vector<double> out(block.size());
  const std::size_t d = width / 2;
  for (std::size_t row = 0; row < block.size() / width; ++row) {
    const double* src = block.data() + row * width;
    double* dst = out.data() + row * width;
    for (std::size_t i = 0; i < d; ++i) {
      dst[2 * i] = src[i];
      dst[2 * i + 1] = src[d + i];
    }
  }
  return out;
}

inline void from_payload_order(std::span<double> block, bool complex_layout, std::size_t width) {
  if (!complex_layout) return;
  const std::size_t d = width / 2;
  std::vector<double> row_buf(width);
  for (std::size_t row = 0; row < block.size() / width; ++row) {
    double* p = block.data() + row * width;
    for (std::size_t i = 0; i < d; ++i) {
      row_buf[i] = p[2 * i];
      row_buf[d + i] = p[2 * i + 1];
    }
    std::memcpy(p, row_buf.data(), width * sizeof(double));
  }
}

inline void append_values(std::string& out, std::span<const double> values, Encoding enc) {
  for (double v : values) {
    if (enc == Encoding::F32) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    } else {
      auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
  }
}

inline double read_value(const unsigned char* p, Encoding enc) {
  if (enc == Encoding::F32) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{p[b]} << (8 * b);
    return static_cast<double>(std::bit_cast<float>(bits));
  }
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t{p[b]} << (8 * b);
  return std::bit_cast<double>(bits);
}

inline bool relation_is_complex(ModelKind k) { return k == ModelKind::ComplEx; }

inline nlohmann::json relation_shape(ModelKind k, std::size_t d) {
  switch (k) {
    case ModelKind::TransE_L1:
    case ModelKind::TransE_L2:
    case ModelKind::DistMult: return {{"vector", {d}}};
    case ModelKind::ComplEx: return {{"complex_vector", {d}}};
    case ModelKind::RotatE: return {{"phase", {d}}};
    case ModelKind::RESCAL: return {{"matrix", {d, d}}};
    case ModelKind::TransR: return {{"vector", {d}}, {"projection", {d, d}}};
  }
  return {};
}

}  // namespace detail

inline std::string serialize_archive(const ModelParams& p, std::string_view vocabulary,
                                     const ArchiveOptions& opt = {}) {
  const auto enc = opt.encoding;
  std::string payload;
  payload.reserve((p.entities.size() + p.n_entities) * bytes_per_value(enc));
  detail::append_values(payload,
                        detail::to_payload_order(p.entities, is_complex(p.kind), p.row_width()),
                        enc);
  nlohmann::json relations = nlohmann::json::array();
  for (auto r : kAllRelations) {
    const auto& block = p.relations[index_of(r)];
    detail::append_values(
        payload,
        detail::to_payload_order(block, detail::relation_is_complex(p.kind), block.size()), enc);
    relations.push_back({{"name", std::string(to_string(r))},
                         {"shape", detail::relation_shape(p.kind, p.dim)}});
  }

  nlohmann::json manifest = {
      {"format", "patnet-embedding-archive"},
      {"version", 1},
      {"model", std::string(to_string(p.kind))},
      {"dim", p.dim},
      {"entity_count", p.n_entities},
      {"entity_shape", is_complex(p.kind) ? nlohmann::json{{"complex_vector", {p.dim}}}
                                          : nlohmann::json{{"vector", {p.dim}}}},
      {"relations", relations},
      {"encoding", std::string(to_string(enc))},
      {"vocab_checksum", detail::hex64(p.vocab_fingerprint)},
      {"vocab_bytes", vocabulary.size()},
      {"payload_bytes", payload.size()},
      {"created", opt.created.empty() ? std::string("unspecified") : opt.created},
  };
  std::string out;
  out.reserve(payload.size() + vocabulary.size() + 1024);
  out += kArchiveMagic;
  out += '\n';
  out += manifest.dump();
  out += '\n';
  out += vocabulary;
  out += payload;
  return out;
}

inline Archive deserialize_archive(std::string_view bytes) {
  auto fail = [](std::size_t offset, const std::string& why) -> Error {
    return Error(ErrorCode::IoError, "archive byte offset " + std::to_string(offset) + ": " + why);
  };
  auto nl1 = bytes.find('\n');
  if (nl1 == std::string_view::npos || bytes.substr(0, nl1) != kArchiveMagic) {
    throw fail(0, "bad magic");
  }
  auto nl2 = bytes.find('\n', nl1 + 1);
  if (nl2 == std::string_view::npos) throw fail(bytes.size(), "truncated manifest");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
  } catch (const nlohmann::json::exception& e) {
    throw fail(nl1 + 1, std::string("manifest: ") + e.what());
  }

  Archive a;
  try {
    auto kind = parse_model_kind(m.at("model").get<std::string>());
    if (!kind) throw fail(nl1 + 1, "unknown model");
    const std::string enc = m.at("encoding").get<std::string>();
    if (enc == "f32le") {
      a.encoding = Encoding::F32;
    } else if (enc == "f64le") {
      a.encoding = Encoding::F64;
    } else {
      throw fail(nl1 + 1, "unknown encoding " + enc);
    }
    a.params.kind = *kind;
    a.params.dim = m.at("dim").get<std::size_t>();
    a.params.n_entities = m.at("entity_count").get<std::size_t>();
    a.params.vocab_fingerprint =
        std::stoull(m.at("vocab_checksum").get<std::string>(), nullptr, 16);
    a.created = m.at("created").get<std::string>();

    const std::size_t vocab_bytes = m.at("vocab_bytes").get<std::size_t>();
    const std::size_t payload_bytes = m.at("payload_bytes").get<std::size_t>();
    const std::size_t bpv = bytes_per_value(a.encoding);
    const std::size_t values =
        a.params.n_entities * a.params.row_width() +
        kRelationCount * relation_width(a.params.kind, a.params.dim);
    if (payload_bytes != values * bpv) {
      throw fail(nl1 + 1, "payload_bytes disagrees with manifest shapes");
    }
    std::size_t offset = nl2 + 1;
    if (bytes.size() < offset + vocab_bytes) throw fail(bytes.size(), "truncated vocabulary");
    a.vocabulary = std::string(bytes.substr(offset, vocab_bytes));
    offset += vocab_bytes;
    if (bytes.size() != offset + payload_bytes) {
      throw fail(bytes.size(), bytes.size() < offset + payload_bytes
                                   ? "truncated payload, expected " +
                                         std::to_string(offset + payload_bytes) + " bytes"
                                   : "trailing bytes after payload");
    }
    auto read_block = [&](std::vector<double>& block, std::size_t n) {
      block.resize(n);
      auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
      for (std::size_t i = 0; i < n; ++i) block[i] = detail::read_value(p + i * bpv, a.encoding);
      offset += n * bpv;
    };
    read_block(a.params.entities, a.params.n_entities * a.params.row_width());
    detail::from_payload_order(a.params.entities, is_complex(a.params.kind),
                               a.params.row_width());
    for (auto r : kAllRelations) {
      auto& block = a.params.relations[index_of(r)];
      read_block(block, relation_width(a.params.kind, a.params.dim));
      detail::from_payload_order(block, detail::relation_is_complex(a.params.kind), block.size());
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(nl1 + 1, std::string("manifest: ") + e.what());
  }
  return a;
}

inline void write_archive(const std::string& path, const ModelParams& p,
                          std::string_view vocabulary, const ArchiveOptions& opt = {}) {
  auto bytes = serialize_archive(p, vocabulary, opt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline Archive read_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_archive(ss.str());
}

/// 64-bit checkpoint without vocabulary; restore reproduces params bit-exactly.
inline void checkpoint(const ModelParams& p, const std::string& path) {
  write_archive(path, p, {}, ArchiveOptions{Encoding::F64, {}});
}

inline ModelParams restore(const std::string& path) { return read_archive(path).params; }

/// Restores and binds to `store`, failing with FingerprintMismatch when the
/// parameters were trained against another vocabulary.
inline ModelParams restore(const std::string& path, const TripleStore& store) {
  auto p = restore(path);
  require_fingerprint(p, store);
  return p;
}

/// Rebuilds an entity-only store from archived vocabulary text.
inline TripleStore parse_vocabulary(std::string_view text) {
  TripleStore store;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) detail::parse_fail(line_no, "malformed vocabulary line");
    auto ep = parse_endpoint(line.substr(tab + 1), line_no);
    if (std::to_string(store.intern(ep.kind, ep.id)) != line.substr(0, tab)) {
      detail::parse_fail(line_no, "vocabulary ordinals must be contiguous");
    }
  }
  return store;
}

}  // namespace patnet

#endif  // PATNET_ARCHIVE_HPP
