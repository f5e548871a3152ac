// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lirlab/cli.hpp"
#include "test_support.hpp"

namespace lirlab {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// First 20 fixture queries with their judged docs plus 100 distractors.
struct SmallSet {
  testing::TempDir dir;
  std::string corpus = dir.file("corpus.jsonl");
  std::string queries = dir.file("queries.tsv");
  std::string qrels = dir.file("qrels.txt");
  std::string index = dir.file("index.lirx");

  SmallSet() {
    const auto& fx = testing::fixture();
    std::vector<Query> qs(fx.queries.begin(), fx.queries.begin() + 20);
    Qrels qr;
    std::set<std::string> keep;
    for (size_t i = 0; i < 100; ++i) keep.insert(fx.ws->docs()[i].doc_id);
    for (const auto& q : qs) {
      for (const auto& [doc, g] : fx.qrels.for_query(q.query_id)) {
        qr.add(q.query_id, doc, g);
        keep.insert(doc);
      }
    }
    std::vector<Document> docs;
    for (const auto& d : fx.ws->docs()) {
      if (keep.count(d.doc_id)) docs.push_back(d);
    }
    std::ofstream c(corpus), q(queries), r(qrels);
    write_corpus(c, docs);
    write_queries(q, qs);
    write_qrels(r, qr);
  }
};

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, 0);
  auto none = run({});
  EXPECT_EQ(none.code, 1);
  EXPECT_EQ(none.err.rfind("error: Usage:", 0), 0u) << none.err;
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"index", "--corpus", "x"}).code, 1);
  auto bad_method = run({"suggest", "--index", "i", "--corpus", "c", "--query", "q", "--method", "mqr"});
  EXPECT_NE(bad_method.code, 0);
}

TEST(Cli, DataErrors) {
  testing::TempDir dir;
  auto missing = run({"ingest", "--corpus", dir.file("nope.jsonl")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(missing.err.rfind("error: IoError:", 0), 0u) << missing.err;
  {
    std::ofstream f(dir.file("bad.jsonl"));
    f << "{\"doc_id\": \"a\"}\n";
  }
  EXPECT_EQ(run({"ingest", "--corpus", dir.file("bad.jsonl")}).code, 2);
}

TEST(Cli, IngestStats) {
  auto r = run({"ingest", "--corpus", testing::data_path("fixture/corpus.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["documents"], 1000);
  EXPECT_GT(j["vocabulary"].get<size_t>(), 100u);
}

TEST(Cli, IndexIsDeterministic) {
  SmallSet s;
  std::string other = s.dir.file("again.lirx");
  ASSERT_EQ(run({"index", "--corpus", s.corpus, "--out", s.index}).code, 0);
  ASSERT_EQ(run({"index", "--corpus", s.corpus, "--out", other}).code, 0);
  EXPECT_EQ(slurp(s.index), slurp(other));
  std::string seeded = s.dir.file("seeded.lirx");
  ASSERT_EQ(run({"index", "--corpus", s.corpus, "--out", seeded, "--seed", "5"}).code, 0);
  EXPECT_NE(slurp(s.index), slurp(seeded));
}

TEST(Cli, EndToEndPipeline) {
  SmallSet s;
  ASSERT_EQ(run({"index", "--corpus", s.corpus, "--out", s.index}).code, 0);
  const std::vector<std::string> ws{"--index", s.index, "--corpus", s.corpus};
  auto with_ws = [&](std::vector<std::string> args) {
    args.insert(args.begin() + 1, ws.begin(), ws.end());
    return run(args);
  };

  auto dec = with_ws({"decode", "--text", "ninoul rastai"});
  ASSERT_EQ(dec.code, 0) << dec.err;
  auto dj = nlohmann::json::parse(dec.out);
  EXPECT_FALSE(dj["text"].get<std::string>().empty());
  EXPECT_GT(dj["reencode_similarity"].get<double>(), 0.5);
  EXPECT_EQ(with_ws({"decode", "--doc-id", "missing"}).code, 2);
  EXPECT_EQ(with_ws({"decode", "--text", "a", "--doc-id", "d00767"}).code, 1);

  auto tr = with_ws({"traverse", "--queries", s.queries, "--qrels", s.qrels, "--query-id", "q0000", "--steps", "5"});
  ASSERT_EQ(tr.code, 0) << tr.err;
  auto tj = nlohmann::json::parse(tr.out);
  EXPECT_EQ(tj["doc_id"], "d00767");
  EXPECT_EQ(tj["steps"].size(), 5u);

  std::string records = s.dir.file("ds.jsonl");
  auto gen = with_ws({"gen-dataset", "--queries", s.queries, "--qrels", s.qrels, "--k", "10", "--out", records});
  ASSERT_EQ(gen.code, 0) << gen.err;
  auto first = slurp(records);
  EXPECT_FALSE(slurp(records + ".train.jsonl").empty());
  auto summary = nlohmann::json::parse(slurp(records + ".summary.json"));
  EXPECT_EQ(summary["originals"].size(), 20u);
  ASSERT_EQ(with_ws({"gen-dataset", "--queries", s.queries, "--qrels", s.qrels, "--k", "10", "--out", records}).code, 0);
  EXPECT_EQ(slurp(records), first);

  auto rep = run({"report", "--records", records});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_TRUE(nlohmann::json::parse(rep.out).is_object());

  auto sug = with_ws({"suggest", "--method", "rm3", "--query", "ninoul rastai", "--query-id", "q0000", "--qrels",
                      s.qrels, "--n", "3"});
  ASSERT_EQ(sug.code, 0) << sug.err;
  auto sj = nlohmann::json::parse(sug.out);
  EXPECT_EQ(sj["suggestions"].size(), 3u);
  EXPECT_TRUE(sj["suggestions"][0].contains("ndcg"));

  std::string report = s.dir.file("eval.json");
  auto ev = with_ws({"eval", "--queries", s.queries, "--qrels", s.qrels, "--out", report, "--resamples", "50",
                     "--methods", "rm3,plain"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(ev.out, slurp(s.dir.file("eval.csv")));
  auto ej = nlohmann::json::parse(slurp(report));
  EXPECT_EQ(ej["rows"].size(), 3u);
  EXPECT_EQ(ej["queries"], 20);
}

TEST(Cli, SeedFromEnvironment) {
  SmallSet s;
  ASSERT_EQ(run({"index", "--corpus", s.corpus, "--out", s.index}).code, 0);
  auto plain = [&] {
    return run({"suggest", "--index", s.index, "--corpus", s.corpus, "--method", "plain", "--query", "ninoul rastai",
                "--temperature", "0.5"})
        .out;
  };
  auto base = plain();
  ::setenv("LIRLAB_SEED", "17", 1);
  auto seeded = plain();
  ::setenv("LIRLAB_SEED", "nope", 1);
  EXPECT_EQ(run({"ingest", "--corpus", s.corpus}).code, 1);
  ::unsetenv("LIRLAB_SEED");
  EXPECT_EQ(plain(), base);
  EXPECT_NE(seeded, base);
}

TEST(Cli, BinaryRuns) {
  std::string cmd = std::string(LIRLAB_CLI_PATH) + " ingest --corpus " + testing::data_path("fixture/corpus.jsonl") +
                    " > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  std::string bad = std::string(LIRLAB_CLI_PATH) + " ingest --corpus /nonexistent 2> /dev/null";
  int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

}  // namespace
}  // namespace lirlab
