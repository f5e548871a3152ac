// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <thread>

#include "lirlab/service.hpp"
#include "test_support.hpp"

namespace lirlab {
namespace {

Service make_service() {
  const auto& fx = testing::fixture();
  return Service(*fx.ws, Service::Options{}, fx.qrels, fx.queries);
}

TEST(Service, SearchReturnsRankedResults) {
  auto svc = make_service();
  auto r = svc.search(R"({"query": "ninoul rastai", "k": 5})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_EQ(r.body["results"].size(), 5u);
  const auto& fx = testing::fixture();
  auto expected = fx.ws->index().search(fx.ws->encoder().encode("ninoul rastai"), 5);
  for (size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.body["results"][i]["doc_id"], expected.entries[i].doc_id);
    EXPECT_FALSE(r.body["results"][i]["text"].get<std::string>().empty());
  }
}

TEST(Service, ErrorStatuses) {
  auto svc = make_service();
  EXPECT_EQ(svc.search("not json").status, 400);
  EXPECT_EQ(svc.search("[1]").status, 400);
  EXPECT_EQ(svc.search(R"({"k": 3})").status, 400);
  EXPECT_EQ(svc.search(R"({"query": 3})").status, 400);
  auto empty = svc.search(R"({"query": "!!"})");
  EXPECT_EQ(empty.status, 422);
  EXPECT_EQ(empty.body["error"], "EmptyQuery");
  EXPECT_EQ(svc.search(R"({"query": "a", "session_id": "nope"})").status, 404);
  EXPECT_EQ(svc.suggest(R"({"query": "a", "method": "mqr"})").status, 422);
  EXPECT_EQ(svc.traverse(R"({"query": "a", "doc_id": "missing"})").status, 404);
  EXPECT_EQ(svc.traverse(R"({"query": "a", "doc_id": "d00001", "steps": 0})").status, 422);
  EXPECT_EQ(svc.decode(R"({})").status, 400);
  EXPECT_EQ(svc.decode(R"({"doc_id": "missing"})").status, 404);
  EXPECT_EQ(svc.decode(R"({"text": ""})").status, 422);
  EXPECT_EQ(svc.doc("missing").status, 404);
  EXPECT_EQ(svc.session_state("missing").status, 404);
  EXPECT_EQ(svc.session_step("missing", "{}").status, 404);
}

TEST(Service, SuggestAnnotatesKnownQueries) {
  auto svc = make_service();
  auto r = svc.suggest(R"({"query": "ninoul rastai", "method": "rm3", "n": 4})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["query_id"], "q0000");
  ASSERT_EQ(r.body["suggestions"].size(), 4u);
  EXPECT_TRUE(r.body["suggestions"][0].contains("ndcg"));
  auto adhoc = svc.suggest(R"({"query": "unjudged words here", "method": "rm3"})");
  ASSERT_EQ(adhoc.status, 200);
  EXPECT_EQ(adhoc.body["query_id"], "adhoc");
  EXPECT_FALSE(adhoc.body["suggestions"][0].contains("ndcg"));
}

TEST(Service, TraverseReturnsStepsAndProjection) {
  auto svc = make_service();
  auto r = svc.traverse(R"({"query": "ninoul rastai", "doc_id": "d00767", "steps": 20})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_EQ(r.body["steps"].size(), 20u);
  EXPECT_EQ(r.body["steps"][0]["kappa"], 1);
  EXPECT_EQ(r.body["steps"][19]["ndcg"], 1.0);
  EXPECT_EQ(r.body["pca"]["path"].size(), 21u);
  EXPECT_EQ(r.body["pca"]["results"].size(), 10u);
  EXPECT_EQ(r.body["pca"]["gold"].size(), 2u);
  EXPECT_EQ(r.body["original"]["ndcg"], 0.0);
  auto last = r.body["pca"]["path"][20];
  EXPECT_NEAR(last[0].get<double>(), r.body["pca"]["gold"][0].get<double>(), 1e-6);
  EXPECT_NEAR(last[1].get<double>(), r.body["pca"]["gold"][1].get<double>(), 1e-6);
}

TEST(Service, DecodeRoundTrip) {
  auto svc = make_service();
  auto r = svc.decode(R"({"text": "ninoul rastai"})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["text"], "ninoul rastai");
  EXPECT_NEAR(r.body["reencode_similarity"].get<double>(), 1.0, 1e-12);
  auto d = svc.decode(R"({"doc_id": "d00000"})");
  ASSERT_EQ(d.status, 200);
  EXPECT_NEAR(d.body["reencode_similarity"].get<double>(), 0.89209891963640142, 1e-6);
  auto doc = svc.doc("d00000");
  EXPECT_EQ(doc.status, 200);
  EXPECT_EQ(doc.body["doc_id"], "d00000");
}

TEST(Service, SessionRecordsHistory) {
  auto svc = make_service();
  auto created = svc.create_session();
  std::string id = created.body["session_id"];
  EXPECT_EQ(svc.create_session().body["session_id"].get<std::string>() == id, false);
  auto s1 = svc.search(json{{"query", "ninoul rastai"}, {"session_id", id}}.dump());
  ASSERT_EQ(s1.status, 200);
  auto sug = svc.suggest(R"({"query": "ninoul rastai", "method": "prf"})");
  ASSERT_EQ(sug.status, 200);
  std::string chosen = sug.body["suggestions"][0]["text"];
  auto s2 = svc.search(json{{"query", chosen}, {"session_id", id}, {"chosen_suggestion", chosen}}.dump());
  ASSERT_EQ(s2.status, 200);
  EXPECT_EQ(svc.session_length(id), 2u);
  auto st = svc.session_state(id);
  ASSERT_EQ(st.body["history"].size(), 2u);
  EXPECT_TRUE(st.body["history"][0]["chosen_suggestion"].is_null());
  EXPECT_EQ(st.body["history"][1]["chosen_suggestion"], chosen);
  EXPECT_EQ(st.body["history"][1]["results"].size(), 10u);
  auto s3 = svc.session_step(id, R"({"query": "tax season"})");
  ASSERT_EQ(s3.status, 200);
  EXPECT_EQ(s3.body["history"].size(), 3u);
  EXPECT_EQ(svc.session_step(id, "oops").status, 400);
}

TEST(Service, HttpEndToEnd) {
  auto svc = make_service();
  httplib::Server server;
  register_routes(server, svc);
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Post("/search", R"({"query": "ninoul rastai", "k": 3})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["results"].size(), 3u);
  auto bad = cli.Post("/search", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto doc = cli.Get("/doc/d00001");
  ASSERT_TRUE(doc);
  EXPECT_EQ(doc->status, 200);
  auto sess = cli.Post("/session", "", "application/json");
  ASSERT_TRUE(sess);
  std::string id = json::parse(sess->body)["session_id"];
  auto step = cli.Post("/session/" + id + "/step", R"({"query": "ninoul"})", "application/json");
  ASSERT_TRUE(step);
  EXPECT_EQ(json::parse(step->body)["history"].size(), 1u);
  auto get = cli.Get("/session/" + id);
  ASSERT_TRUE(get);
  EXPECT_EQ(json::parse(get->body)["history"].size(), 1u);
  auto tr = cli.Post("/traverse", R"({"query": "ninoul rastai", "doc_id": "d00767", "steps": 5})", "application/json");
  ASSERT_TRUE(tr);
  EXPECT_EQ(json::parse(tr->body)["steps"].size(), 5u);
  server.stop();
  t.join();
}

}  // namespace
}  // namespace lirlab
