// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "lirlab/evaluation.hpp"
#include "lirlab/suggesters.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

namespace lirlab {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

std::vector<Document> rm3_corpus() {
  std::vector<Document> docs;
  for (const auto& [id, text] : oracle::rm3_docs()) docs.push_back({id, text, std::nullopt});
  return docs;
}

TEST(Stopwords, FixedList) {
  const auto& sw = english_stopwords();
  EXPECT_EQ(sw.size(), 127u);
  EXPECT_TRUE(sw.count("the"));
  EXPECT_FALSE(sw.count("apple"));
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {SuggestMethod::Rm3, SuggestMethod::SamplingQd, SuggestMethod::PrfTraversal, SuggestMethod::Plain}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_EQ(parse_method("sampling"), SuggestMethod::SamplingQd);
  EXPECT_EQ(parse_method("prf"), SuggestMethod::PrfTraversal);
  EXPECT_EQ(code_of([] { parse_method("mqr"); }), ErrorCode::InvalidArgument);
}

TEST(Rm3, MatchesBruteForceDirichlet) {
  auto docs = rm3_corpus();
  TermStats stats(docs);
  std::vector<std::string> fb;
  for (const auto& d : docs) fb.push_back(d.doc_id);
  for (const auto& g : oracle::rm3_goldens()) {
    RM3Config cfg;
    cfg.mu = g.mu;
    auto scores = rm3_term_scores(tokenize(oracle::kRm3Query), fb, stats, cfg);
    std::map<std::string, double> got;
    for (const auto& s : scores) got[s.term] = s.score;
    ASSERT_EQ(got.size(), g.scores.size()) << "mu " << g.mu;
    for (const auto& [term, expected] : g.scores) {
      ASSERT_TRUE(got.count(term)) << term;
      EXPECT_NEAR(got[term], expected, 1e-9) << term << " mu " << g.mu;
      EXPECT_NEAR(got[term], expected, 1e-9 * std::abs(expected)) << term << " mu " << g.mu;
    }
    for (size_t i = 1; i < scores.size(); ++i) {
      EXPECT_TRUE(scores[i - 1].score > scores[i].score ||
                  (scores[i - 1].score == scores[i].score && scores[i - 1].term < scores[i].term));
    }
  }
}

TEST(Rm3, SuggestionsAppendOneTermToQuery) {
  auto docs = rm3_corpus();
  auto idx = build_index(docs, EncoderConfig{});
  TermStats stats(docs);
  Encoder enc;
  Query q{"q1", "apple harvest price"};
  auto set = rm3_suggest(q, idx, enc, stats);
  ASSERT_EQ(set.suggestions.size(), 10u);
  for (const auto& s : set.suggestions) {
    ASSERT_EQ(s.text.rfind(q.text + " ", 0), 0u) << s.text;
    auto extra = s.text.substr(q.text.size() + 1);
    EXPECT_EQ(tokenize(extra).size(), 1u);
    EXPECT_FALSE(english_stopwords().count(extra));
  }
  EXPECT_EQ(set.method, SuggestMethod::Rm3);
  auto again = rm3_suggest(q, idx, enc, stats);
  EXPECT_EQ(again.texts(), set.texts());
}

TEST(Rm3, SingleTokenCorpusHasNoExpansion) {
  auto docs = testing::docs_of({{"d", "bitcoin"}});
  auto idx = build_index(docs, EncoderConfig{});
  TermStats stats(docs);
  EXPECT_TRUE(rm3_suggest({"q", "bitcoin"}, idx, Encoder(), stats).suggestions.empty());
}

TEST(Rm3, Errors) {
  auto docs = rm3_corpus();
  auto idx = build_index(docs, EncoderConfig{});
  TermStats stats(docs);
  EXPECT_EQ(code_of([&] { rm3_suggest({"q", "  "}, idx, Encoder(), stats); }), ErrorCode::EmptyQuery);
  RM3Config bad;
  bad.mu = 0;
  EXPECT_EQ(code_of([&] { rm3_suggest({"q", "apple"}, idx, Encoder(), stats, bad); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { stats.doc("nope"); }), ErrorCode::UnknownDocId);
}

TEST(Sampling, PerturbationsStayInBall) {
  auto q = Encoder().encode("ball center");
  for (double eps : {0.01, 0.05, 0.5}) {
    SamplingConfig cfg{eps, 50, 11};
    for (const auto& p : sample_ball_points(q, cfg)) {
      double d2 = 0.0;
      for (size_t i = 0; i < p.size(); ++i) d2 += (p[i] - q.values[i]) * (p[i] - q.values[i]);
      EXPECT_LE(std::sqrt(d2), eps + 1e-9);
    }
  }
  EXPECT_EQ(code_of([&] { sample_ball_points(q, SamplingConfig{0.0, 1, 0}); }), ErrorCode::InvalidArgument);
}

TEST(Sampling, DegenerateBallIsRoundTrip) {
  const auto& fx = testing::fixture();
  QueryDecoder dec(fx.ws->encoder(), fx.ws->vocab());
  const auto& q = fx.queries[3];
  auto set = sampling_qd_suggest(q, dec, SamplingConfig{1e-9, 10, 5});
  ASSERT_EQ(set.suggestions.size(), 1u);
  EXPECT_EQ(set.suggestions[0].text, dec.decode(fx.ws->encoder().encode(q.text)).text);
}

TEST(Sampling, FixtureGoldensAndDeterminism) {
  const auto& fx = testing::fixture();
  QueryDecoder dec(fx.ws->encoder(), fx.ws->vocab());
  const auto& q = fx.queries[0];
  auto set = sampling_qd_suggest(q, dec, SamplingConfig{0.05, 10, 3});
  EXPECT_EQ(set.texts(), (std::vector<std::string>{"ninoul rastai"}));
  auto wide = sampling_qd_suggest(q, dec, SamplingConfig{0.3, 10, 3});
  EXPECT_EQ(wide.texts(), (std::vector<std::string>{
                              "ninoul rastai", "law ninoul ninoul ninoul ninoul ninoul rastai rastai rastai rastai rastai"}));
  EXPECT_EQ(sampling_qd_suggest(q, dec, SamplingConfig{0.3, 10, 3}).texts(), wide.texts());
  EXPECT_EQ(code_of([&] { sampling_qd_suggest({"q", "?"}, dec, SamplingConfig{}); }), ErrorCode::EmptyQuery);
}

TEST(Prf, PicksUpTokenFromTopResult) {
  auto docs = testing::docs_of({{"a", "coin price zorblax zorblax zorblax zorblax"},
                                {"b", "wallet exchange rate"},
                                {"c", "river valley rain"}});
  auto idx = build_index(docs, EncoderConfig{});
  Encoder enc;
  auto vocab = Vocabulary::from_documents(docs, enc);
  QueryDecoder dec(enc, vocab);
  PrfConfig cfg;
  cfg.fb_docs = 1;
  cfg.k_fracs = {0.7};
  auto set = prf_traversal_suggest({"q", "coin price"}, idx, dec, cfg);
  ASSERT_EQ(set.suggestions.size(), 1u);
  auto tokens = tokenize(set.suggestions[0].text);
  EXPECT_NE(std::find(tokens.begin(), tokens.end(), "zorblax"), tokens.end()) << set.suggestions[0].text;
}

TEST(Prf, CardinalityAndErrors) {
  const auto& fx = testing::fixture();
  QueryDecoder dec(fx.ws->encoder(), fx.ws->vocab());
  PrfConfig one;
  one.fb_docs = 1;
  one.k_fracs = {0.5};
  EXPECT_LE(prf_traversal_suggest(fx.queries[1], fx.ws->index(), dec, one).suggestions.size(), 1u);
  PrfConfig bad;
  bad.k_fracs = {1.0};
  EXPECT_EQ(code_of([&] { prf_traversal_suggest(fx.queries[1], fx.ws->index(), dec, bad); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { prf_traversal_suggest({"q", ""}, fx.ws->index(), dec); }), ErrorCode::EmptyQuery);
}

TEST(Prf, FixtureGolden) {
  const auto& fx = testing::fixture();
  QueryDecoder dec(fx.ws->encoder(), fx.ws->vocab());
  auto set = prf_traversal_suggest(fx.queries[0], fx.ws->index(), dec);
  const std::vector<std::string> expected{
      "baimeabun gotaim keastair ninoul ninoul ninoul ninoul rastai rastai rastai rastai",
      "drosashoux ninoul ninoul ninoul ninoul noudrur rastai rastai rastai rastai shegleastai stuchai",
      "bribrastair kuprai ninoul ninoul ninoul ninoul rastai rastai rastai rastai rastai seabax",
      "bizastaim braiglomim ninoul ninoul ninoul ninoul rastai rastai rastai rastai vadreastal",
      "daivodul ninoul ninoul ninoul ninoul rairai rastai rastai rastai rastai rastai season",
      "daivodul for ninoul ninoul rairai rastai rastai rastai rate season vego zudrai",
      "baimeabun gevealean gotaim in keastair keastair ninoul ninoul ninoul rastai rastai temeapro",
      "bribrastair bribrastair ninoul ninoul ninoul on peasha rastai rastai rastai risai seabax",
      "drosashoux ninoul ninoul ninoul president rapeapi rastai rastai rastai shegleastai shegleastai stuchai",
      "bribrastair bribrastair county in ninoul on peasha program rastai rastai risai seabax",
  };
  EXPECT_EQ(set.texts(), expected);
  EXPECT_EQ(prf_traversal_suggest(fx.queries[0], fx.ws->index(), dec).texts(), expected);
}

TEST(Plain, ZeroTemperatureIsRoundTrip) {
  const auto& fx = testing::fixture();
  DecoderConfig c;
  c.num_samples = 10;
  QueryDecoder sampler(fx.ws->encoder(), fx.ws->vocab(), c);
  auto set = plain_suggest(fx.queries[2], sampler);
  ASSERT_EQ(set.suggestions.size(), 1u);
  EXPECT_EQ(set.suggestions[0].text, sampler.decode(fx.ws->encoder().encode(fx.queries[2].text)).text);
}

TEST(Plain, FixtureGoldenAndSeeding) {
  const auto& fx = testing::fixture();
  SuggestOptions opts;
  auto set = suggest(*fx.ws, fx.queries[0], SuggestMethod::Plain, opts);
  EXPECT_EQ(set.texts(), (std::vector<std::string>{"ninoul rastai",
                                                   "drevunoux gloras klanostai ninoul ninoul ninoul rastea sigoul taitai",
                                                   "bizastaim ninoul rastai"}));
  EXPECT_EQ(suggest(*fx.ws, fx.queries[0], SuggestMethod::Plain, opts).texts(), set.texts());
  opts.seed = 1;
  EXPECT_NE(suggest(*fx.ws, fx.queries[0], SuggestMethod::Plain, opts).texts(), set.texts());
}

TEST(AllMethods, AtMostTenUniqueSuggestions) {
  const auto& fx = testing::fixture();
  SuggestOptions opts;
  opts.plain_temperature = 0.5;
  opts.sampling.epsilon = 0.5;
  for (size_t i = 0; i < 5; ++i) {
    for (auto m : {SuggestMethod::Rm3, SuggestMethod::SamplingQd, SuggestMethod::PrfTraversal, SuggestMethod::Plain}) {
      auto set = suggest(*fx.ws, fx.queries[i], m, opts);
      EXPECT_LE(set.suggestions.size(), kMaxSuggestions);
      auto texts = set.texts();
      EXPECT_EQ(std::set<std::string>(texts.begin(), texts.end()).size(), texts.size());
      EXPECT_EQ(set.query_id, fx.queries[i].query_id);
      EXPECT_LE(suggest(*fx.ws, fx.queries[i], m, opts, 3).suggestions.size(), 3u);
    }
  }
}

TEST(Annotate, FillsMetricsAndJson) {
  const auto& fx = testing::fixture();
  const auto& q = fx.queries[0];
  auto set = suggest(*fx.ws, q, SuggestMethod::Rm3, SuggestOptions{});
  auto j0 = to_json(set);
  EXPECT_FALSE(j0["suggestions"][0].contains("ndcg"));
  auto gold_id = *fx.qrels.gold(q.query_id);
  auto gold = fx.ws->index().embedding(fx.ws->index().require(gold_id));
  annotate(set, fx.ws->index(), fx.ws->encoder(), fx.qrels.for_query(q.query_id), gold);
  for (const auto& s : set.suggestions) {
    ASSERT_TRUE(s.ndcg && s.ip_with_gold);
    auto e = fx.ws->encoder().encode(s.text);
    EXPECT_DOUBLE_EQ(*s.ip_with_gold, inner_product(e, gold));
    EXPECT_DOUBLE_EQ(*s.ndcg, ndcg_at_k(fx.ws->index().search(e, 10), fx.qrels.for_query(q.query_id)));
  }
  auto j = to_json(set);
  EXPECT_EQ(j["method"], "rm3");
  EXPECT_TRUE(j["suggestions"][0].contains("ndcg"));
  EXPECT_EQ(j.begin().key(), "query_id");
}

}  // namespace
}  // namespace lirlab
