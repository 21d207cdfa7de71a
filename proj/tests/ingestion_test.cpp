#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

using namespace patnet;
using patnet::testing::parse_text;

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

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::vector<PatentRecord> records(const std::string& text) {
  std::istringstream in(text);
  return parse_records(in);
}

}  // namespace

TEST(ParseTriples, MinimalGraph) {
  auto s = parse_text(
      "inventor:i\twrite\tpatent:1\n"
      "assignee:a\town\tpatent:1\n"
      "group:H01L\tcontain\tpatent:1\n"
      "subsection:H01\tcomprise\tgroup:H01L\n");
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.entity_count(), 5u);
}

TEST(ParseTriples, SmallGraphFacts) {
  IngestLog log;
  auto s = parse_text(
      "# Lowrey's patent and its surroundings\n"
      "inventor:4074775\twrite\tpatent:5252504\n"
      "assignee:Micron\town\tpatent:5252504\n"
      "group:H01L\tcontain\tpatent:5252504\n"
      "subsection:H01\tcomprise\tgroup:H01L\n"
      "patent:5252504\tcite\tpatent:4855801\n"
      "patent:5324681\tcite\tpatent:5252504\n"
      "group:H01L\tcontain\tpatent:4855801\n",
      &log);
  EXPECT_EQ(s.size(), 7u);
  EXPECT_EQ(log.lines, 7u);
  EXPECT_EQ(log.accepted, 7u);
}

TEST(ParseTriples, SchemaViolationReportsLine) {
  auto bad = [] { parse_text("inventor:2\twrite\tpatent:1\npatent:1\twrite\tinventor:2\n"); };
  EXPECT_EQ(code_of(bad), ErrorCode::SchemaViolation);
  EXPECT_NE(message_of(bad).find("line 2"), std::string::npos);
}

TEST(ParseTriples, MalformedLinesAreParseErrors) {
  EXPECT_EQ(code_of([] { parse_text("inventor:2\twrite\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_text("robot:2\twrite\tpatent:1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_text("inventor:2\tinvent\tpatent:1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_text("inventor2\twrite\tpatent:1\n"); }), ErrorCode::ParseError);
  auto msg = message_of([] { parse_text("\n\ninventor:2\tWrite\tpatent:1\n"); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ParseTriples, DuplicatesSelfCitesAndMissingEndpoints) {
  IngestLog log;
  auto s = parse_text(
      "patent:1\tcite\tpatent:2\n"
      "patent:1\tcite\tpatent:2\n"
      "patent:3\tcite\tpatent:3\n"
      "assignee:\town\tpatent:1\r\n"
      "inventor:x\twrite\tpatent:2\r\n",
      &log);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(log.lines, 5u);
  EXPECT_EQ(log.accepted, 2u);
  EXPECT_EQ(log.duplicates, 1u);
  EXPECT_EQ(log.self_citations, 1u);
  EXPECT_EQ(log.missing_endpoints, 1u);
  EXPECT_TRUE(s.find("inventor:x").has_value());
}

TEST(ParseTriples, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { parse_triples_file("/nonexistent/triples.tsv"); }), ErrorCode::IoError);
}

TEST(StoreFile, RoundTripPreservesOrdinalsAndTriples) {
  auto s = generate_synthetic({2, 20, 4, 2, 0.2, 0.02, 0.8, 0.1, 9});
  auto parts = split(s, {0.3, 4});
  std::ostringstream out;
  write_store(parts.train, out);
  auto back = parse_text(out.str());
  EXPECT_EQ(back.vocabulary_text(), s.vocabulary_text());
  EXPECT_EQ(back.fingerprint(), s.fingerprint());
  ASSERT_EQ(back.size(), parts.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back.triples()[i], parts.train.triples()[i]);

  std::ostringstream test_out;
  write_triples(s, parts.test, test_out);
  std::istringstream test_in(test_out.str());
  EXPECT_EQ(read_triples_against(back, test_in), parts.test);
}

TEST(StoreFile, ReadAgainstVocabularyRejectsUnknownEntities) {
  auto s = patnet::testing::micro_graph();
  std::istringstream in("inventor:nobody\twrite\tpatent:p1\n");
  EXPECT_EQ(code_of([&] { read_triples_against(s, in); }), ErrorCode::UnknownEntity);
}

TEST(DeriveComprise, PrefixRule) {
  TripleStore s;
  auto one = derive_comprise({"H01L"}, s);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(s.entity(one[0].head).label(), "subsection:H01");
  EXPECT_EQ(s.entity(one[0].tail).label(), "group:H01L");
  EXPECT_EQ(one[0].relation, RelationKind::Comprise);

  TripleStore t;
  auto two = derive_comprise({"H04L", "H04N"}, t);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].head, two[1].head);
  EXPECT_NE(two[0].tail, two[1].tail);
  EXPECT_EQ(t.entities_of(EntityKind::Subsection).size(), 1u);

  // Idempotent.
  EXPECT_EQ(derive_comprise({"H04L", "H04N"}, t), two);

  TripleStore u;
  EXPECT_EQ(code_of([&] { derive_comprise({"X1"}, u); }), ErrorCode::MalformedCode);
}

TEST(GroupCodes, Shape) {
  EXPECT_TRUE(is_group_code("H04L"));
  EXPECT_TRUE(is_group_code("G06F"));
  EXPECT_FALSE(is_group_code("H4L"));
  EXPECT_FALSE(is_group_code("h04L"));
  EXPECT_FALSE(is_group_code("H0AL"));
  EXPECT_EQ(subsection_of("H04L"), "H04");
}

TEST(Records, ParseAndRoundTrip) {
  const std::string text =
      "200\t2001-05-02\tH04L,G06F\tinv2,inv1\tacme\n"
      "100\t1999-12-31\tH04L\t\t\n";
  auto rs = records(text);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].groups, (std::vector<std::string>{"G06F", "H04L"}));
  EXPECT_EQ(rs[0].inventors, (std::vector<std::string>{"inv1", "inv2"}));
  EXPECT_TRUE(rs[1].inventors.empty());
  std::ostringstream out;
  write_records(rs, out);
  auto again = records(out.str());
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0].application_date, rs[0].application_date);
  EXPECT_EQ(format_date(again[1].application_date), "1999-12-31");
}

TEST(Records, Errors) {
  EXPECT_EQ(code_of([] { records("1\t2001-01-01\tH04L\tx\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { records("1\t2001-13-01\tH04L\tx\ty\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { records("1\t2001-02-30\tH04L\tx\ty\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { records("1\t2001-01-01\t\tx\ty\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { records("1\t2001-01-01\tH4\tx\ty\n"); }), ErrorCode::ParseError);
}

TEST(Records, AddRecordsBuildsFactsAndComprise) {
  TripleStore s;
  add_records(s, records("1\t2001-01-01\tH04L,H04N\tinv\tacme\n2\t2002-01-01\tH04L\tinv\t\n"));
  auto st = stats(s);
  EXPECT_EQ(st.relations[index_of(RelationKind::Contain)], 3u);
  EXPECT_EQ(st.relations[index_of(RelationKind::Write)], 2u);
  EXPECT_EQ(st.relations[index_of(RelationKind::Own)], 1u);
  EXPECT_EQ(st.relations[index_of(RelationKind::Comprise)], 2u);
}

TEST(Portfolios, OrderingAndThreshold) {
  auto rs = records(
      "p9\t1999-01-01\tH04L\talice\t\n"
      "p8\t1998-01-01\tH04N\talice\t\n"
      "200\t2005-06-01\tH04L\tbob\t\n"
      "100\t2005-06-01\tG06F\tbob\t\n"
      "300\t2004-01-01\tG06F\tcarol\t\n");
  auto ps = build_portfolios(rs, AgentKind::Inventor, 2);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[0].agent_id, "alice");
  EXPECT_EQ(ps[0].events[0].patent_id, "p8");
  EXPECT_EQ(ps[0].events[1].patent_id, "p9");
  EXPECT_EQ(ps[1].events[0].patent_id, "100");
  EXPECT_EQ(ps[1].events[1].patent_id, "200");
  for (const auto& p : ps) {
    EXPECT_TRUE(std::is_sorted(p.events.begin(), p.events.end(), event_before));
    for (const auto& e : p.events) EXPECT_FALSE(e.groups.empty());
  }
  EXPECT_TRUE(build_portfolios(rs, AgentKind::Assignee, 1).empty());
}

TEST(Portfolios, MinPatentsThirty) {
  std::string text;
  for (int i = 0; i < 29; ++i) text += "a" + std::to_string(i) + "\t2000-01-01\tH04L\tshort\t\n";
  for (int i = 0; i < 30; ++i) text += "b" + std::to_string(i) + "\t2000-01-01\tH04L\tlong\t\n";
  auto ps = build_portfolios(records(text), AgentKind::Inventor, 30);
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].agent_id, "long");
}

TEST(Universe, ParsesAndRejectsDuplicates) {
  std::istringstream ok("# universe\nH04L\nG06F\n");
  EXPECT_EQ(parse_universe(ok), (GroupUniverse{"H04L", "G06F"}));
  std::istringstream dup("H04L\nH04L\n");
  EXPECT_EQ(code_of([&] { parse_universe(dup); }), ErrorCode::ParseError);
  std::istringstream bad("H4L\n");
  EXPECT_EQ(code_of([&] { parse_universe(bad); }), ErrorCode::ParseError);
}

TEST(Records, FromStoreIsDeterministic) {
  auto s = generate_synthetic({2, 10, 3, 2, 0.1, 0.01, 0.8, 0.0, 2});
  auto a = records_from_store(s, 5), b = records_from_store(s, 5);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].application_date, b[i].application_date);
    EXPECT_EQ(a[i].groups, b[i].groups);
    EXPECT_EQ(a[i].inventors.empty(), false);
    EXPECT_EQ(a[i].assignees.size(), 1u);
  }
}
