#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"

using mcsum::ErrorKind;
using mcsum::Matrix;
namespace io = mcsum::io;

namespace {

ErrorKind parse_error(auto&& fn) {
  try {
    fn();
  } catch (const mcsum::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Csv, ParsesHeaderCommentsAndBlankLines) {
  const auto raw = io::parse_csv("# states: a, b\n# a comment\n\n0.25,0.75\n 1 , 0 \n");
  ASSERT_TRUE(raw.labels.has_value());
  EXPECT_EQ(*raw.labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(raw.p, Matrix::from_rows({{0.25, 0.75}, {1, 0}}));
}

TEST(Csv, Errors) {
  EXPECT_EQ(parse_error([] { io::parse_csv("0.5,0.5\n0.5\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_csv("0.5,abc\n0.5,0.5\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_csv("0.5,,0.5\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_csv(""); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_csv("# states: a\n0,1\n1,0\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_csv("nan,1\n1,0\n"); }), ErrorKind::ParseError);
}

TEST(Json, ParsesWithAndWithoutStates) {
  const auto raw = io::parse_json(R"({"states": ["x", "y"], "p": [[0, 1], [0.5, 0.5]]})");
  EXPECT_EQ(*raw.labels, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(raw.p, Matrix::from_rows({{0, 1}, {0.5, 0.5}}));
  EXPECT_FALSE(io::parse_json(R"({"p": [[1]]})").labels.has_value());
}

TEST(Json, Errors) {
  EXPECT_EQ(parse_error([] { io::parse_json("{"); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_json(R"({"q": []})"); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_json(R"({"p": [[1, "a"], [0, 1]]})"); }), ErrorKind::ParseError);
  EXPECT_EQ(parse_error([] { io::parse_json(R"({"p": [[1, 0]]})"); }), ErrorKind::ParseError);
}

TEST(Format, InferredFromExtension) {
  EXPECT_EQ(io::infer_format("a/b.json"), io::Format::Json);
  EXPECT_EQ(io::infer_format("a/b.csv"), io::Format::Csv);
  EXPECT_EQ(io::infer_format("noext"), io::Format::Csv);
}

TEST(RoundTrip, CsvJsonCsvPreservesBits) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto chain = mcsum::random_chain(2 + s % 9, s, s % 2 ? 0.3 : 0.0);
    const std::string csv = io::to_csv(chain.p(), chain.labels());
    const auto from_csv = io::parse_csv(csv);
    EXPECT_EQ(from_csv.p, chain.p());
    const std::string json = io::to_json_text(from_csv.p, *from_csv.labels);
    const auto from_json = io::parse_json(json);
    EXPECT_EQ(from_json.p, chain.p());
    EXPECT_EQ(io::to_csv(from_json.p, *from_json.labels), csv);
  }
}

TEST(RoundTrip, FixtureFilesMatchPrintedEntries) {
  const auto raw = io::read_chain_file(fixtures::data_path("fix8.csv"));
  EXPECT_EQ(raw.p(0, 0), 0.478);
  EXPECT_EQ(raw.p(7, 2), 0.4);
  EXPECT_THROW(io::read_chain_file(fixtures::data_path("missing.csv")), mcsum::Error);
}

TEST(ReportJson, SchemaAndReparse) {
  const auto rep = mcsum::analyze(fixtures::fix8());
  const auto doc = io::report_json(rep);
  const auto text = doc.dump(2);
  const auto back = nlohmann::ordered_json::parse(text);
  EXPECT_EQ(back, doc);
  EXPECT_EQ(back["schema"], "mcsum.report/1");
  EXPECT_EQ(back["m"], 8);
  EXPECT_NEAR(back["kemeny"]["value"].get<double>(), 29.9194, 1e-3);
  EXPECT_EQ(back["stationary"].get<std::vector<double>>(), rep.stationary.pi);
  EXPECT_TRUE(back["doubly_stochastic"].is_null());
  EXPECT_EQ(back["ordering"]["violations"][0]["relation"], "colsum_implies_pi");
  EXPECT_EQ(back["ordering"]["violations"][0]["i"], 1);
  EXPECT_EQ(back["ordering"]["violations"][0]["j"], 2);

  std::vector<std::string> keys;
  for (const auto& [k, v] : back.items()) keys.push_back(k);
  EXPECT_EQ(keys.front(), "schema");
  EXPECT_EQ(keys[1], "m");

  const Matrix h = fixtures::matrix_of(back["h_matrix"]);
  EXPECT_EQ(h, rep.h_matrix);
}

TEST(ReportJson, PermutationIsOneBased) {
  const auto rep = mcsum::analyze(fixtures::load("fix5_original.csv"), {.reorder = true});
  const auto doc = io::report_json(rep);
  EXPECT_EQ(doc["permutation"].get<std::vector<int>>(), (std::vector<int>{5, 1, 2, 4, 3}));
}

TEST(ScanOutput, LogLinesAreJsonObjects) {
  mcsum::ScanConfig cfg;
  cfg.trials = 200;
  const auto r = mcsum::scan(cfg);
  const std::string log = io::counterexample_log(r);
  ASSERT_FALSE(log.empty());
  std::size_t lines = 0, start = 0;
  while (start < log.size()) {
    const auto end = log.find('\n', start);
    const auto obj = nlohmann::json::parse(log.substr(start, end - start));
    EXPECT_EQ(obj["m"], 3);
    EXPECT_TRUE(obj["p"].is_array());
    EXPECT_FALSE(obj["relations"].empty());
    ++lines;
    start = end + 1;
  }
  EXPECT_EQ(lines, r.counterexamples.size());
  EXPECT_NE(io::scan_summary(r).find("relation=colsum_implies_pi"), std::string::npos);
}
