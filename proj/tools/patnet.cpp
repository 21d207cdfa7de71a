// patnet command-line interface.
//
// Exit status: 0 on success, 2 on usage errors, 1 on data errors. Failures
// print a single `error: <Code>: <detail>` line on stderr.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "patnet/patnet.hpp"

namespace {

using namespace patnet;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

// Writes through a temporary stream and commits to `path` ("-" is stdout).
template <class Fn>
void write_output(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  fn(out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::set<EntityKind> parse_kind_filter(const std::vector<std::string>& names) {
  std::set<EntityKind> out;
  for (const auto& n : names) {
    auto k = parse_entity_kind(n);
    if (!k) throw UsageError("unknown entity kind '" + n + "'");
    out.insert(*k);
  }
  return out;
}

EntityKind parse_kind(const std::string& n) {
  auto k = parse_entity_kind(n);
  if (!k) throw UsageError("unknown entity kind '" + n + "'");
  return *k;
}

TransformMode parse_mode(const std::string& s) {
  if (s == "algebraic") return TransformMode::Algebraic;
  if (s == "tabulated") return TransformMode::Tabulated;
  throw UsageError("unknown transform mode '" + s + "'");
}

struct Loaded {
  Archive archive;
  TripleStore vocab;
};

Loaded load_archive(const std::string& path) {
  Loaded l{read_archive(path), {}};
  if (l.archive.vocabulary.empty()) {
    throw Error(ErrorCode::IoError, path + " carries no vocabulary");
  }
  l.vocab = parse_vocabulary(l.archive.vocabulary);
  require_fingerprint(l.archive.params, l.vocab);
  return l;
}

EntityRef resolve(const TripleStore& vocab, const std::string& label) {
  auto o = vocab.find(label);
  if (!o) throw Error(ErrorCode::UnknownEntity, "'" + label + "' is not in the vocabulary");
  return vocab.entity(*o);
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  SyntheticConfig cfg;
  std::string triples_out, records_out, universe_out;
};

void run_generate(const GenerateArgs& a) {
  auto store = generate_synthetic(a.cfg);
  write_output(a.triples_out, [&](std::ostream& o) { write_triples(store, store.triples(), o); });
  if (!a.records_out.empty()) {
    auto records = records_from_store(store, a.cfg.seed);
    write_output(a.records_out, [&](std::ostream& o) { write_records(records, o); });
  }
  if (!a.universe_out.empty()) {
    std::vector<std::string> groups;
    for (auto g : store.entities_of(EntityKind::Group)) groups.push_back(store.entity(g).source_id);
    std::sort(groups.begin(), groups.end());
    write_output(a.universe_out, [&](std::ostream& o) {
      for (const auto& g : groups) o << g << '\n';
    });
  }
}

struct IngestArgs {
  std::vector<std::string> triples;
  std::vector<std::string> records;
  std::string out, test_out;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;
};

void run_ingest(const IngestArgs& a) {
  if (a.triples.empty() && a.records.empty()) {
    throw UsageError("give at least one --triples or --records file");
  }
  TripleStore store;
  IngestLog log;
  for (const auto& path : a.triples) {
    auto in = detail::open_input(path);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      auto line = detail::strip_cr(raw);
      if (line.empty() || line.front() == '#') continue;
      ++log.lines;
      try {
        detail::ingest_triple_line(store, line, line_no, log);
      } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.detail());
      }
    }
  }
  for (const auto& path : a.records) add_records(store, parse_records_file(path));
  if (store.empty()) throw Error(ErrorCode::EmptyStore, "no triples were ingested");

  std::cerr << "ingested " << log.accepted << " triples from " << log.lines << " lines ("
            << log.duplicates << " duplicates, " << log.self_citations << " self-citations, "
            << log.missing_endpoints << " missing endpoints dropped)\n";

  if (a.test_fraction > 0.0) {
    auto parts = split(store, SplitSpec{a.test_fraction, a.seed});
    write_store_file(parts.train, a.out);
    const auto test_path = a.test_out.empty() ? a.out + ".test.tsv" : a.test_out;
    write_output(test_path, [&](std::ostream& o) { write_triples(store, parts.test, o); });
    std::cerr << "split: " << parts.train.size() << " train, " << parts.test.size() << " test\n";
  } else {
    write_store_file(store, a.out);
  }
}

struct TrainArgs {
  std::string store, model, out, report;
  std::optional<std::size_t> dim, epochs, batch_size, negatives, threads;
  std::optional<double> lr, margin, l2;
  std::string loss, normalize;
  bool f64 = false, stamp_time = false, quiet = false;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  auto kind = parse_model_kind(a.model);
  if (!kind) throw UsageError("unknown model '" + a.model + "'");
  auto cfg = default_config(*kind);
  if (a.dim) cfg.dim = *a.dim;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.batch_size) cfg.batch_size = *a.batch_size;
  if (a.negatives) cfg.negatives_per_positive = *a.negatives;
  if (a.threads) cfg.threads = *a.threads;
  if (a.lr) cfg.learning_rate = *a.lr;
  if (a.margin) cfg.margin = *a.margin;
  if (a.l2) cfg.l2_coefficient = *a.l2;
  if (a.loss == "margin") cfg.loss = Loss::MarginRank;
  if (a.loss == "logistic") cfg.loss = Loss::Logistic;
  if (a.normalize == "on") cfg.normalize_entities = true;
  if (a.normalize == "off") cfg.normalize_entities = false;
  cfg.seed = a.seed;
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  auto store = parse_triples_file(a.store);
  EpochCallback progress;
  if (!a.quiet) {
    progress = [&](std::size_t epoch, double loss) {
      if (epoch == 1 || epoch == cfg.epochs || epoch % 10 == 0) {
        std::cerr << "epoch " << epoch << "/" << cfg.epochs << " loss " << loss << '\n';
      }
    };
  }
  auto [params, report] = train(store, *kind, cfg, std::nullopt, progress);

  ArchiveOptions opt;
  opt.encoding = a.f64 ? Encoding::F64 : Encoding::F32;
  if (a.stamp_time) opt.created = utc_now();
  write_archive(a.out, params, store.vocabulary_text(), opt);
  if (!a.report.empty()) {
    write_output(a.report, [&](std::ostream& o) { write_train_report(o, report, a.stamp_time); });
  }
}

struct EvalArgs {
  std::string archive, store, test, out = "-";
  std::size_t k = 100;
  std::string sides = "both", pool = "same-kind", ties = "midpoint";
  bool filtered = false;
  std::uint64_t seed = 0;
};

void run_eval(const EvalArgs& a) {
  auto store = parse_triples_file(a.store);
  auto archive = read_archive(a.archive);
  require_fingerprint(archive.params, store);
  auto in = detail::open_input(a.test);
  auto test = read_triples_against(store, in);

  EvalConfig cfg;
  cfg.corruptions_per_side = a.k;
  cfg.sides = a.sides == "head" ? SideSet::HeadOnly
              : a.sides == "tail" ? SideSet::TailOnly
                                  : SideSet::Both;
  cfg.pool = a.pool == "all" ? Pool::AllEntities : Pool::SameKind;
  cfg.filtered = a.filtered;
  cfg.ties = a.ties == "optimistic"    ? TieMode::Optimistic
             : a.ties == "pessimistic" ? TieMode::Pessimistic
                                       : TieMode::Midpoint;
  cfg.seed = a.seed;
  auto report = evaluate(archive.params, test, store, cfg);
  if (report.clamped > 0) {
    std::cerr << "warning: K=" << a.k << " exceeds the corruption pool for " << report.clamped
              << " queries; those were ranked exhaustively against the full pool\n";
  }
  if (report.skipped > 0) {
    std::cerr << "warning: " << report.skipped << " queries had no corruption and were skipped\n";
  }
  write_output(a.out, [&](std::ostream& o) { write_eval_report(o, report, archive.params.kind); });
}

struct NeighborsArgs {
  std::string archive, focal, mode = "algebraic", out = "-";
  std::size_t k = 10;
  std::vector<std::string> kinds;
  std::uint64_t seed = 0;
};

void run_neighbors(const NeighborsArgs& a) {
  auto mode = parse_mode(a.mode);
  auto kinds = parse_kind_filter(a.kinds);
  auto l = load_archive(a.archive);
  auto focal = resolve(l.vocab, a.focal);
  auto hits = nearest_neighbors(l.archive.params, l.vocab, focal.ordinal, a.k, kinds, mode);
  write_output(a.out, [&](std::ostream& o) { write_neighbors_tsv(o, hits); });
}

struct ProximityArgs {
  std::string archive, entities, kind, mode = "algebraic", out = "-";
  std::uint64_t seed = 0;
};

void run_proximity(const ProximityArgs& a) {
  auto mode = parse_mode(a.mode);
  auto common = parse_kind(a.kind);
  auto l = load_archive(a.archive);
  std::vector<EntityRef> refs;
  auto in = detail::open_input(a.entities);
  std::string raw;
  while (std::getline(in, raw)) {
    auto line = detail::strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    refs.push_back(resolve(l.vocab, std::string(line)));
  }
  if (refs.empty()) throw Error(ErrorCode::ParseError, a.entities + " lists no entities");
  auto m = pairwise_matrix(l.archive.params, refs, common, mode);
  write_output(a.out, [&](std::ostream& o) { write_matrix_tsv(o, refs, m); });
}

struct ExpansionArgs {
  std::vector<std::string> archives, names;
  std::string records, universe, agent_kind = "both", out;
  std::size_t min_patents = 30;
  bool raw_cosine = false;
  std::uint64_t seed = 0;
};

void run_expansion(const ExpansionArgs& a) {
  if (!a.names.empty() && a.names.size() != a.archives.size()) {
    throw UsageError("--name must be given once per archive");
  }
  std::vector<Loaded> loaded;
  loaded.reserve(a.archives.size());
  for (const auto& path : a.archives) loaded.push_back(load_archive(path));
  for (std::size_t i = 1; i < loaded.size(); ++i) {
    if (loaded[i].archive.params.vocab_fingerprint != loaded[0].archive.params.vocab_fingerprint) {
      throw Error(ErrorCode::FingerprintMismatch,
                  a.archives[i] + " was trained on a different vocabulary than " + a.archives[0]);
    }
  }
  std::vector<NamedModel> models;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    auto name = a.names.empty() ? std::filesystem::path(a.archives[i]).stem().string() : a.names[i];
    models.push_back({name, &loaded[i].archive.params});
  }

  auto universe = load_universe(a.universe);
  auto records = parse_records_file(a.records);
  std::vector<AgentKind> kinds;
  if (a.agent_kind != "assignee") kinds.push_back(AgentKind::Inventor);
  if (a.agent_kind != "inventor") kinds.push_back(AgentKind::Assignee);
  std::vector<AgentPortfolio> portfolios;
  for (auto k : kinds) {
    auto p = build_portfolios(records, k, a.min_patents);
    portfolios.insert(portfolios.end(), std::make_move_iterator(p.begin()),
                      std::make_move_iterator(p.end()));
  }

  StudyOptions opt;
  opt.min_patents = a.min_patents;
  opt.raw_cosine = a.raw_cosine;
  auto report = run_study(loaded[0].vocab, universe, portfolios, models, opt);
  for (auto it = report.classes.begin(); it != report.classes.end();) {
    if (std::find(kinds.begin(), kinds.end(), it->first) == kinds.end()) {
      it = report.classes.erase(it);
    } else {
      ++it;
    }
  }

  write_output(a.out + ".summary.csv",
               [&](std::ostream& o) { write_expansion_summary_csv(o, report); });
  for (auto k : kinds) {
    const std::string cls(to_string(k));
    write_output(a.out + "." + cls + ".cdf.csv",
                 [&](std::ostream& o) { write_cdf_csv(o, report, k); });
    write_output(a.out + "." + cls + ".auc.csv",
                 [&](std::ostream& o) { write_agent_auc_csv(o, report, k); });
  }
}

struct ExportArgs {
  std::string archive, out = "-";
  std::vector<std::string> kinds;
  std::uint64_t seed = 0;
};

void run_export(const ExportArgs& a) {
  auto kinds = parse_kind_filter(a.kinds);
  auto l = load_archive(a.archive);
  write_output(a.out, [&](std::ostream& o) { write_embeddings_tsv(o, l.archive.params, l.vocab, kinds); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patnet: patent knowledge-graph embeddings and proximity analysis"};
  app.require_subcommand(1);

  const std::vector<std::string> kind_names = {"patent", "inventor", "assignee", "group", "subsection"};

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic planted-community graph");
  g->add_option("--out", gen.triples_out, "Triple TSV output")->required();
  g->add_option("--records", gen.records_out, "Also write patent records derived from the graph");
  g->add_option("--universe", gen.universe_out, "Also write the list of group codes");
  g->add_option("--communities", gen.cfg.communities)->capture_default_str();
  g->add_option("--patents", gen.cfg.patents_per_community, "Patents per community")->capture_default_str();
  g->add_option("--inventors", gen.cfg.inventors_per_community, "Inventors per community")->capture_default_str();
  g->add_option("--assignees", gen.cfg.assignees_per_community, "Assignees per community")->capture_default_str();
  g->add_option("--intra", gen.cfg.intra_cite_prob, "Within-community citation probability")->capture_default_str();
  g->add_option("--inter", gen.cfg.inter_cite_prob, "Cross-community citation probability")->capture_default_str();
  g->add_option("--seed", gen.cfg.seed)->capture_default_str();

  IngestArgs ing;
  auto* i = app.add_subcommand("ingest", "Build a triple store, optionally holding out a test split");
  i->add_option("--triples", ing.triples, "Triple TSV input (repeatable)");
  i->add_option("--records", ing.records, "Patent-record TSV input (repeatable)");
  i->add_option("--out", ing.out, "Store output")->required();
  i->add_option("--test-fraction", ing.test_fraction, "Hold out this fraction as a test set")
      ->check(CLI::Range(0.0, 1.0));
  i->add_option("--test-out", ing.test_out, "Test triples output (default <out>.test.tsv)");
  i->add_option("--seed", ing.seed);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train an embedding model and write an archive");
  t->add_option("store", tr.store, "Store file")->required();
  t->add_option("--model", tr.model, "TransE_L1, TransE_L2, TransR, RESCAL, DistMult, ComplEx, RotatE")
      ->required();
  t->add_option("--out", tr.out, "Archive output")->required();
  t->add_option("--report", tr.report, "Training report output");
  t->add_option("--dim", tr.dim);
  t->add_option("--epochs", tr.epochs);
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--negatives", tr.negatives, "Corruptions per positive");
  t->add_option("--lr", tr.lr, "Learning rate");
  t->add_option("--margin", tr.margin);
  t->add_option("--l2", tr.l2, "L2 coefficient");
  t->add_option("--loss", tr.loss)->check(CLI::IsMember({"margin", "logistic"}));
  t->add_option("--normalize", tr.normalize, "Renormalize entity rows")->check(CLI::IsMember({"on", "off"}));
  t->add_option("--threads", tr.threads, "Worker threads (1 = reference mode)");
  t->add_flag("--f64", tr.f64, "Store 64-bit values");
  t->add_flag("--stamp-time", tr.stamp_time, "Record the wall-clock creation time");
  t->add_flag("--quiet", tr.quiet, "No progress output");
  t->add_option("--seed", tr.seed);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Entity-prediction evaluation");
  e->add_option("archive", ev.archive)->required();
  e->add_option("store", ev.store)->required();
  e->add_option("--test", ev.test, "Test triple TSV")->required();
  e->add_option("--out", ev.out, "Report output")->capture_default_str();
  e->add_option("-K,--corruptions", ev.k, "Corruptions per side")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--sides", ev.sides)->check(CLI::IsMember({"head", "tail", "both"}))->capture_default_str();
  e->add_option("--pool", ev.pool)->check(CLI::IsMember({"same-kind", "all"}))->capture_default_str();
  e->add_option("--ties", ev.ties)
      ->check(CLI::IsMember({"midpoint", "optimistic", "pessimistic"}))
      ->capture_default_str();
  e->add_flag("--filtered", ev.filtered, "Drop corruptions that are known triples");
  e->add_option("--seed", ev.seed);

  NeighborsArgs nb;
  auto* n = app.add_subcommand("neighbors", "Nearest entities by knowledge proximity");
  n->add_option("archive", nb.archive)->required();
  n->add_option("--focal", nb.focal, "kind:id")->required();
  n->add_option("-k", nb.k)->capture_default_str()->check(CLI::PositiveNumber);
  n->add_option("--kinds", nb.kinds, "Restrict to these kinds")->delimiter(',')->check(CLI::IsMember(kind_names));
  n->add_option("--mode", nb.mode)->check(CLI::IsMember({"algebraic", "tabulated"}))->capture_default_str();
  n->add_option("--out", nb.out)->capture_default_str();
  n->add_option("--seed", nb.seed);

  ProximityArgs px;
  auto* p = app.add_subcommand("proximity", "Pairwise proximity matrix");
  p->add_option("archive", px.archive)->required();
  p->add_option("--entities", px.entities, "File with one kind:id per line")->required();
  p->add_option("--kind", px.kind, "Common kind")->required()->check(CLI::IsMember(kind_names));
  p->add_option("--mode", px.mode)->check(CLI::IsMember({"algebraic", "tabulated"}))->capture_default_str();
  p->add_option("--out", px.out)->capture_default_str();
  p->add_option("--seed", px.seed);

  ExpansionArgs ex;
  auto* x = app.add_subcommand("expansion", "Domain-expansion study over agent portfolios");
  x->add_option("--archive", ex.archives, "Model archive (repeatable)")->required();
  x->add_option("--name", ex.names, "Model name per archive (default: file stem)");
  x->add_option("--records", ex.records, "Patent-record TSV")->required();
  x->add_option("--universe", ex.universe, "Group universe file")->required();
  x->add_option("--agent-kind", ex.agent_kind)
      ->check(CLI::IsMember({"inventor", "assignee", "both"}))
      ->capture_default_str();
  x->add_option("--min-patents", ex.min_patents)->capture_default_str();
  x->add_flag("--raw-cosine", ex.raw_cosine, "Keep negative group cosines");
  x->add_option("--out", ex.out, "Output prefix")->required();
  x->add_option("--seed", ex.seed);

  ExportArgs xp;
  auto* o = app.add_subcommand("export", "Entity embeddings as TSV");
  o->add_option("archive", xp.archive)->required();
  o->add_option("--kinds", xp.kinds)->delimiter(',')->check(CLI::IsMember(kind_names));
  o->add_option("--out", xp.out)->capture_default_str();
  o->add_option("--seed", xp.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: Usage: " << one_line(err.what()) << '\n';
    return 2;
  }

  try {
    if (*g) run_generate(gen);
    if (*i) run_ingest(ing);
    if (*t) run_train(tr);
    if (*e) run_eval(ev);
    if (*n) run_neighbors(nb);
    if (*p) run_proximity(px);
    if (*x) run_expansion(ex);
    if (*o) run_export(xp);
  } catch (const UsageError& err) {
    std::cerr << "error: Usage: " << one_line(err.what()) << '\n';
    return 2;
  } catch (const Error& err) {
    std::cerr << "error: " << one_line(err.what()) << '\n';
    return err.code() == ErrorCode::InvalidConfig ? 2 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: Internal: " << one_line(err.what()) << '\n';
    return 1;
  }
  return 0;
}
