#ifndef PATNET_INGESTION_HPP
#define PATNET_INGESTION_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "patnet/error.hpp"
#include "patnet/graph.hpp"

namespace patnet {

namespace detail {

inline std::vector<std::string_view> split_view(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

[[noreturn]] inline void parse_fail(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + why);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Triple files

/// Counters for records that bulk loading drops rather than rejects.
struct IngestLog {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t self_citations = 0;
  std::size_t missing_endpoints = 0;
};

struct Endpoint {
  EntityKind kind;
  std::string_view id;
};

inline Endpoint parse_endpoint(std::string_view field, std::size_t line_no) {
  auto colon = field.find(':');
  if (colon == std::string_view::npos) {
    detail::parse_fail(line_no, "endpoint '" + std::string(field) + "' lacks '<kind>:'");
  }
  auto kind = parse_entity_kind(field.substr(0, colon));
  if (!kind) {
    detail::parse_fail(line_no, "unknown entity kind '" + std::string(field.substr(0, colon)) + "'");
  }
  return {*kind, field.substr(colon + 1)};
}

namespace detail {

// Ingests one triple line into `store`; entity-header lines are handled by the caller.
inline void ingest_triple_line(TripleStore& store, std::string_view line, std::size_t line_no,
                               IngestLog& log) {
  auto fields = split_view(line, '\t');
  if (fields.size() != 3) {
    parse_fail(line_no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
  }
  auto head = parse_endpoint(fields[0], line_no);
  auto rel = parse_relation(fields[1]);
  if (!rel) parse_fail(line_no, "unknown relation '" + std::string(fields[1]) + "'");
  auto tail = parse_endpoint(fields[2], line_no);

  auto schema = schema_of(*rel);
  if (head.kind != schema.head || tail.kind != schema.tail) {
    throw Error(ErrorCode::SchemaViolation,
                "line " + std::to_string(line_no) + ": " + std::string(to_string(*rel)) +
                    " requires " + std::string(to_string(schema.head)) + " -> " +
                    std::string(to_string(schema.tail)));
  }
  if (head.id.empty() || tail.id.empty()) {
    ++log.missing_endpoints;
    return;
  }
  if (*rel == RelationKind::Cite && head.id == tail.id) {
    ++log.self_citations;
    return;
  }
  Triple t{store.intern(head.kind, head.id), *rel, store.intern(tail.kind, tail.id)};
  if (store.insert_triple(t)) {
    ++log.accepted;
  } else {
    ++log.duplicates;
  }
}

inline constexpr std::string_view kEntityHeader = "#@entity\t";

}  // namespace detail

/// Parses the tab-separated triple format. Lines starting with '#' are
/// comments, except `#@entity` vocabulary lines written by `write_store`,
/// which pin ordinals. Duplicates are folded silently; self-citations and
/// triples with an empty endpoint id are dropped and counted in `log`.
inline TripleStore parse_triples(std::istream& in, IngestLog* log = nullptr) {
  TripleStore store;
  IngestLog local;
  IngestLog& lg = log ? *log : local;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_cr(raw);
    if (line.empty()) continue;
    if (line.starts_with(detail::kEntityHeader)) {
      auto fields = detail::split_view(line.substr(detail::kEntityHeader.size()), '\t');
      if (fields.size() != 2) detail::parse_fail(line_no, "malformed #@entity line");
      Ordinal expected = 0;
      auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), expected);
      if (ec != std::errc{} || p != fields[0].data() + fields[0].size()) {
        detail::parse_fail(line_no, "malformed ordinal");
      }
      auto ep = parse_endpoint(fields[1], line_no);
      if (store.find(ep.kind, ep.id) || store.intern(ep.kind, ep.id) != expected) {
        detail::parse_fail(line_no, "vocabulary ordinals must be unique and contiguous");
      }
      continue;
    }
    if (line.front() == '#') continue;
    ++lg.lines;
    detail::ingest_triple_line(store, line, line_no, lg);
  }
  return store;
}

inline TripleStore parse_triples_file(const std::string& path, IngestLog* log = nullptr) {
  auto in = detail::open_input(path);
  return parse_triples(in, log);
}

inline void write_triples(const TripleStore& vocab, std::span<const Triple> triples,
                          std::ostream& out) {
  for (const auto& t : triples) {
    out << vocab.entity(t.head).label() << '\t' << to_string(t.relation) << '\t'
        << vocab.entity(t.tail).label() << '\n';
  }
}

/// Writes the vocabulary as `#@entity` lines followed by the triples in
/// insertion order. The output is itself a valid triple file.
inline void write_store(const TripleStore& store, std::ostream& out) {
  out << "# patnet store: " << store.entity_count() << " entities, " << store.size()
      << " triples\n";
  for (const auto& e : store.entities()) {
    out << detail::kEntityHeader << e.ordinal << '\t' << e.label() << '\n';
  }
  write_triples(store, store.triples(), out);
}

inline void write_store_file(const TripleStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_store(store, out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

/// Reads triples against an existing vocabulary (e.g. a held-out test file).
inline std::vector<Triple> read_triples_against(const TripleStore& vocab, std::istream& in) {
  std::vector<Triple> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split_view(line, '\t');
    if (fields.size() != 3) detail::parse_fail(line_no, "expected 3 tab-separated fields");
    auto rel = parse_relation(fields[1]);
    if (!rel) detail::parse_fail(line_no, "unknown relation '" + std::string(fields[1]) + "'");
    auto h = vocab.find(fields[0]);
    auto t = vocab.find(fields[2]);
    if (!h || !t) {
      throw Error(ErrorCode::UnknownEntity, "line " + std::to_string(line_no) +
                                                ": endpoint not in vocabulary");
    }
    auto schema = schema_of(*rel);
    if (vocab.kind_of(*h) != schema.head || vocab.kind_of(*t) != schema.tail) {
      throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no));
    }
    out.push_back({*h, *rel, *t});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification codes

/// Group codes look like "H04L": letter, digit, digit, letter, then anything.
inline bool is_group_code(std::string_view code) {
  auto is_upper = [](char c) { return c >= 'A' && c <= 'Z'; };
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  return code.size() >= 4 && is_upper(code[0]) && is_digit(code[1]) && is_digit(code[2]) &&
         is_upper(code[3]);
}

inline std::string subsection_of(std::string_view group) { return std::string(group.substr(0, 3)); }

/// One <subsection, comprise, group> triple per group, the subsection being
/// the 3-character prefix. Entities are interned into `store` on demand; the
/// triples are returned in sorted group order and not inserted.
inline std::vector<Triple> derive_comprise(const std::set<std::string>& groups,
                                           TripleStore& store) {
  for (const auto& g : groups) {
    if (g.size() < 4) throw Error(ErrorCode::MalformedCode, "group code '" + g + "'");
  }
  std::vector<Triple> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    auto sub = store.intern(EntityKind::Subsection, subsection_of(g));
    auto grp = store.intern(EntityKind::Group, g);
    out.push_back({sub, RelationKind::Comprise, grp});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Patent records and portfolios

struct PatentRecord {
  std::string patent_id;
  std::chrono::year_month_day application_date;
  std::vector<std::string> groups;  // sorted, unique
  std::vector<std::string> inventors;
  std::vector<std::string> assignees;
};

inline std::string format_date(const std::chrono::year_month_day& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()),
                unsigned(d.day()));
  return buf;
}

inline std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [](std::string_view f, auto& v) {
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    return ec == std::errc{} && p == f.data() + f.size();
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

inline std::vector<std::string> split_list(std::string_view field) {
  std::vector<std::string> out;
  if (field.empty()) return out;
  for (auto item : detail::split_view(field, ',')) {
    if (!item.empty()) out.emplace_back(item);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// `patent_id \t YYYY-MM-DD \t g1,g2 \t inv1,inv2 \t asg1,...`
inline std::vector<PatentRecord> parse_records(std::istream& in) {
  std::vector<PatentRecord> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split_view(line, '\t');
    if (fields.size() != 5) {
      detail::parse_fail(line_no, "expected 5 tab-separated fields, got " +
                                      std::to_string(fields.size()));
    }
    PatentRecord rec;
    rec.patent_id = std::string(fields[0]);
    if (rec.patent_id.empty()) detail::parse_fail(line_no, "empty patent id");
    auto date = parse_date(fields[1]);
    if (!date) detail::parse_fail(line_no, "bad date '" + std::string(fields[1]) + "'");
    rec.application_date = *date;
    rec.groups = split_list(fields[2]);
    if (rec.groups.empty()) detail::parse_fail(line_no, "empty group set");
    for (const auto& g : rec.groups) {
      if (!is_group_code(g)) detail::parse_fail(line_no, "malformed group code '" + g + "'");
    }
    rec.inventors = split_list(fields[3]);
    rec.assignees = split_list(fields[4]);
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<PatentRecord> parse_records_file(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_records(in);
}

inline void write_records(std::span<const PatentRecord> records, std::ostream& out) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += v[i];
    }
    return s;
  };
  for (const auto& r : records) {
    out << r.patent_id << '\t' << format_date(r.application_date) << '\t' << join(r.groups)
        << '\t' << join(r.inventors) << '\t' << join(r.assignees) << '\n';
  }
}

/// Adds the write/own/contain facts of each record plus the derived comprise
/// facts to `store`, folding duplicates.
inline void add_records(TripleStore& store, std::span<const PatentRecord> records) {
  std::set<std::string> all_groups;
  for (const auto& r : records) all_groups.insert(r.groups.begin(), r.groups.end());
  for (const auto& t : derive_comprise(all_groups, store)) store.insert_triple(t);
  for (const auto& r : records) {
    auto p = store.intern(EntityKind::Patent, r.patent_id);
    for (const auto& g : r.groups) {
      store.insert_triple({store.intern(EntityKind::Group, g), RelationKind::Contain, p});
    }
    for (const auto& i : r.inventors) {
      store.insert_triple({store.intern(EntityKind::Inventor, i), RelationKind::Write, p});
    }
    for (const auto& a : r.assignees) {
      store.insert_triple({store.intern(EntityKind::Assignee, a), RelationKind::Own, p});
    }
  }
}

enum class AgentKind { Inventor, Assignee };

constexpr std::string_view to_string(AgentKind k) {
  return k == AgentKind::Inventor ? "inventor" : "assignee";
}

struct AgentPortfolio {
  AgentKind kind;
  std::string agent_id;
  std::vector<PatentRecord> events;  // ascending (date, patent_id)
};

inline bool event_before(const PatentRecord& a, const PatentRecord& b) {
  if (a.application_date != b.application_date) return a.application_date < b.application_date;
  return a.patent_id < b.patent_id;
}

/// Groups records by agent and keeps agents with at least `min_patents`
/// records. Portfolios come back sorted by agent id.
inline std::vector<AgentPortfolio> build_portfolios(std::span<const PatentRecord> records,
                                                    AgentKind kind, std::size_t min_patents) {
  std::map<std::string, std::vector<PatentRecord>> by_agent;
  for (const auto& r : records) {
    const auto& agents = kind == AgentKind::Inventor ? r.inventors : r.assignees;
    for (const auto& a : agents) by_agent[a].push_back(r);
  }
  std::vector<AgentPortfolio> out;
  for (auto& [agent, events] : by_agent) {
    if (events.size() < min_patents) continue;
    std::sort(events.begin(), events.end(), event_before);
    out.push_back({kind, agent, std::move(events)});
  }
  return out;
}

inline std::vector<AgentPortfolio> load_portfolios(const std::string& path, AgentKind kind,
                                                   std::size_t min_patents) {
  auto records = parse_records_file(path);
  return build_portfolios(records, kind, min_patents);
}

/// Ordered list of admissible group codes, one per line.
using GroupUniverse = std::vector<std::string>;

inline GroupUniverse parse_universe(std::istream& in) {
  GroupUniverse out;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    std::string code(line);
    if (!is_group_code(code)) detail::parse_fail(line_no, "malformed group code '" + code + "'");
    if (!seen.insert(code).second) detail::parse_fail(line_no, "duplicate group '" + code + "'");
    out.push_back(std::move(code));
  }
  return out;
}

inline GroupUniverse load_universe(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_universe(in);
}

/// Patent records implied by a store: groups from contain, inventors from
/// write, assignees from own. Dates are drawn uniformly in [1976, 2019] from
/// `seed`; patents without a contain fact are skipped.
inline std::vector<PatentRecord> records_from_store(const TripleStore& store, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0xda7eu}));
  using namespace std::chrono;
  const auto first = sys_days{year{1976} / January / 1};
  const auto last = sys_days{year{2019} / December / 31};
  std::uniform_int_distribution<int> offset(0, (last - first).count());
  std::vector<PatentRecord> out;
  for (auto p : store.entities_of(EntityKind::Patent)) {
    PatentRecord rec;
    rec.patent_id = store.entity(p).source_id;
    rec.application_date = year_month_day{first + days{offset(rng)}};
    auto names = [&](RelationKind r) {
      std::vector<std::string> v;
      for (auto h : store.heads(p, r)) v.push_back(store.entity(h).source_id);
      std::sort(v.begin(), v.end());
      return v;
    };
    rec.groups = names(RelationKind::Contain);
    rec.inventors = names(RelationKind::Write);
    rec.assignees = names(RelationKind::Own);
    if (rec.groups.empty()) continue;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace patnet

#endif  // PATNET_INGESTION_HPP
