// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Eigen before httplib: <resolv.h> defines a `_res` macro.
#include "lirlab/pca.hpp"

#include "httplib.h"
#include "json.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/decoder.hpp"
#include "lirlab/evaluation.hpp"
#include "lirlab/suggesters.hpp"
#include "lirlab/traversal.hpp"
#include "lirlab/workspace.hpp"

namespace lirlab {

using json = nlohmann::ordered_json;

struct ApiResponse {
  int status = 200;
  json body;
};

struct SessionStep {
  std::string query;
  std::optional<std::string> chosen_suggestion;
  std::vector<ScoredDoc> results;
};

struct SessionState {
  std::string session_id;
  std::vector<SessionStep> history;
};

/// JSON request handlers over one immutable workspace. Handlers are
/// independent of the transport so they can be driven directly in tests;
/// `serve` binds them to an HTTP listener.
class Service {
 public:
  struct Options {
    SuggestOptions suggest;
    uint64_t seed = 0;
  };

  Service(const Workspace& ws, Options opts, std::optional<Qrels> qrels = std::nullopt,
          std::vector<Query> queries = {})
      : ws_(ws), opts_(std::move(opts)), qrels_(std::move(qrels)), queries_(std::move(queries)) {
    opts_.suggest.seed = opts_.seed;
    for (const auto& q : queries_) query_by_text_.emplace(q.text, q.query_id);
  }

  ApiResponse search(const std::string& body) {
    return guarded([&] {
      auto req = parse(body);
      std::string query = require_string(req, "query");
      size_t k = req.value("k", size_t{10});
      if (req.contains("session_id")) {
        if (!req["session_id"].is_string()) throw BadRequest("session_id must be a string");
        if (!find_session(req["session_id"].get<std::string>())) {
          return not_found("UnknownSession", req["session_id"].get<std::string>());
        }
      }
      auto tokens = tokenize(query);
      if (tokens.empty()) throw Error(ErrorCode::EmptyQuery, "query has no tokens");
      auto result = ws_.index().search(ws_.encoder().encode_tokens(tokens), k);
      if (req.contains("session_id")) {
        std::optional<std::string> chosen;
        if (req.contains("chosen_suggestion") && req["chosen_suggestion"].is_string()) {
          chosen = req["chosen_suggestion"].get<std::string>();
        }
        append_step(req["session_id"].get<std::string>(), {query, chosen, result.entries});
      }
      return ApiResponse{200, json{{"query", query}, {"k", k}, {"results", results_json(result)}}};
    });
  }

  ApiResponse suggest(const std::string& body) {
    return guarded([&] {
      auto req = parse(body);
      std::string text = require_string(req, "query");
      auto method = parse_method(req.value("method", std::string("prf")));
      size_t n = std::min(req.value("n", kMaxSuggestions), kMaxSuggestions);
      Query query{resolve_query_id(req, text), text};
      auto set = lirlab::suggest(ws_, query, method, opts_.suggest, n);
      if (qrels_) {
        auto gold = qrels_->gold(query.query_id);
        if (gold && ws_.index().find(*gold)) {
          annotate(set, ws_.index(), ws_.encoder(), qrels_->for_query(query.query_id),
                   ws_.index().embedding(ws_.index().require(*gold)));
        }
      }
      return ApiResponse{200, to_json(set)};
    });
  }

  ApiResponse traverse(const std::string& body) {
    return guarded([&] {
      auto req = parse(body);
      std::string text = require_string(req, "query");
      std::string doc_id = require_string(req, "doc_id");
      size_t steps = req.value("steps", size_t{20});
      if (steps < 1 || steps > 200) throw Error(ErrorCode::InvalidArgument, "steps must be in [1, 200]");
      if (!ws_.index().find(doc_id)) return not_found("UnknownDocId", doc_id);
      Query query{resolve_query_id(req, text), text};
      if (tokenize(text).empty()) throw Error(ErrorCode::EmptyQuery, "query has no tokens");
      auto labels = qrels_ ? traversal_labels(*qrels_, query.query_id, doc_id) : std::map<std::string, int>{{doc_id, 1}};
      QueryDecoder decoder(ws_.encoder(), ws_.vocab(), opts_.suggest.decoder);
      auto trace = traverse_and_decode(query, doc_id, steps, ws_.index(), decoder, labels);

      auto q = ws_.encoder().encode(text);
      auto gold = ws_.index().embedding(ws_.index().require(doc_id));
      auto path = make_path(q, gold, steps);
      auto original = ws_.index().search(q, 10);
      std::vector<Embedding> pts = path.points;
      for (const auto& e : original.entries) pts.push_back(ws_.index().embedding(ws_.index().require(e.doc_id)));
      pts.push_back(gold);
      auto coords = pca_2d(pts);

      json step_list = json::array();
      for (const auto& s : trace) {
        step_list.push_back({{"kappa", s.kappa},
                             {"text", s.decoding.text},
                             {"reencode_similarity", s.decoding.reencode_similarity},
                             {"ndcg", s.ndcg},
                             {"ip_with_gold", s.ip_with_gold}});
      }
      auto xy = [](const std::array<double, 2>& p) { return json::array({p[0], p[1]}); };
      json path_xy = json::array();
      for (size_t i = 0; i < path.points.size(); ++i) path_xy.push_back(xy(coords[i]));
      json result_xy = json::array();
      for (size_t i = 0; i < original.entries.size(); ++i) {
        result_xy.push_back({{"doc_id", original.entries[i].doc_id}, {"xy", xy(coords[path.points.size() + i])}});
      }
      json body_out{{"query", text},
                    {"doc_id", doc_id},
                    {"steps", step_list},
                    {"original",
                     {{"ndcg", ndcg_at_k(original, labels, 10)}, {"ip_with_gold", inner_product(q, gold)}}},
                    {"pca", {{"path", path_xy}, {"results", result_xy}, {"gold", xy(coords.back())}}}};
      return ApiResponse{200, std::move(body_out)};
    });
  }

  ApiResponse decode(const std::string& body) {
    return guarded([&] {
      auto req = parse(body);
      Embedding z;
      if (req.contains("text")) {
        auto tokens = tokenize(require_string(req, "text"));
        if (tokens.empty()) throw Error(ErrorCode::EmptyText, "text has no tokens");
        z = ws_.encoder().encode_tokens(tokens);
      } else if (req.contains("doc_id")) {
        std::string id = require_string(req, "doc_id");
        const auto* doc = ws_.find_doc(id);
        if (!doc) return not_found("UnknownDocId", id);
        z = ws_.encoder().encode(doc->text);
      } else {
        return bad_request("expected \"text\" or \"doc_id\"");
      }
      QueryDecoder decoder(ws_.encoder(), ws_.vocab(), opts_.suggest.decoder);
      auto d = decoder.decode(z);
      return ApiResponse{200, json{{"text", d.text}, {"reencode_similarity", d.reencode_similarity}}};
    });
  }

  ApiResponse doc(const std::string& id) {
    const auto* d = ws_.find_doc(id);
    if (!d) return not_found("UnknownDocId", id);
    json j{{"doc_id", d->doc_id}, {"text", d->text}};
    if (d->title) j["title"] = *d->title;
    return {200, j};
  }

  ApiResponse create_session() {
    std::lock_guard lock(sessions_mu_);
    std::string id = "s" + std::to_string(++session_counter_);
    sessions_.emplace(id, std::make_shared<Session>(SessionState{id, {}}));
    return {200, json{{"session_id", id}, {"history", json::array()}}};
  }

  /// Runs a search inside a session and records it in the history.
  ApiResponse session_step(const std::string& session_id, const std::string& body) {
    if (!find_session(session_id)) return not_found("UnknownSession", session_id);
    json req;
    try {
      req = json::parse(body);
    } catch (const json::exception& e) {
      return bad_request(e.what());
    }
    if (!req.is_object()) return bad_request("body must be a JSON object");
    req["session_id"] = session_id;
    auto r = search(req.dump());
    if (r.status != 200) return r;
    return session_state(session_id);
  }

  ApiResponse session_state(const std::string& session_id) {
    auto s = find_session(session_id);
    if (!s) return not_found("UnknownSession", session_id);
    std::lock_guard lock(s->mu);
    json hist = json::array();
    for (const auto& step : s->state.history) {
      json results = json::array();
      for (const auto& r : step.results) results.push_back({{"doc_id", r.doc_id}, {"score", r.score}});
      hist.push_back({{"query", step.query},
                      {"chosen_suggestion", step.chosen_suggestion ? json(*step.chosen_suggestion) : json(nullptr)},
                      {"results", results}});
    }
    return {200, json{{"session_id", session_id}, {"history", hist}}};
  }

  size_t session_length(const std::string& session_id) {
    auto s = find_session(session_id);
    if (!s) return 0;
    std::lock_guard lock(s->mu);
    return s->state.history.size();
  }

 private:
  struct Session {
    explicit Session(SessionState st) : state(std::move(st)) {}
    std::mutex mu;
    SessionState state;
  };

  struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  static json parse(const std::string& body) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      throw BadRequest(e.what());
    }
    if (!j.is_object()) throw BadRequest("body must be a JSON object");
    return j;
  }

  static std::string require_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw BadRequest(std::string("missing string field \"") + key + "\"");
    return j[key].get<std::string>();
  }

  static ApiResponse bad_request(const std::string& msg) {
    return {400, json{{"error", "BadRequest"}, {"message", msg}}};
  }

  static ApiResponse not_found(const std::string& code, const std::string& what) {
    return {404, json{{"error", code}, {"message", what}}};
  }

  template <typename Fn>
  ApiResponse guarded(Fn&& fn) {
    try {
      return fn();
    } catch (const BadRequest& e) {
      return bad_request(e.what());
    } catch (const json::exception& e) {
      return bad_request(e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnknownDocId) return not_found(to_string(e.code()), e.what());
      return {422, json{{"error", to_string(e.code())}, {"message", e.what()}}};
    }
  }

  std::string resolve_query_id(const json& req, const std::string& text) const {
    if (req.contains("query_id") && req["query_id"].is_string()) return req["query_id"].get<std::string>();
    auto it = query_by_text_.find(text);
    return it == query_by_text_.end() ? std::string("adhoc") : it->second;
  }

  json results_json(const SearchResult& r) const {
    json out = json::array();
    for (const auto& e : r.entries) {
      const auto* d = ws_.find_doc(e.doc_id);
      json j{{"doc_id", e.doc_id}, {"score", e.score}, {"text", d ? d->text : std::string()}};
      if (d && d->title) j["title"] = *d->title;
      out.push_back(std::move(j));
    }
    return out;
  }

  std::shared_ptr<Session> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  void append_step(const std::string& session_id, SessionStep step) {
    auto s = find_session(session_id);
    if (!s) throw Error(ErrorCode::InvalidArgument, "unknown session " + session_id);
    std::lock_guard lock(s->mu);
    s->state.history.push_back(std::move(step));
  }

  const Workspace& ws_;
  Options opts_;
  std::optional<Qrels> qrels_;
  std::vector<Query> queries_;
  std::map<std::string, std::string> query_by_text_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  uint64_t session_counter_ = 0;
};

/// Registers every endpoint of `service` on `server`. Static UI assets are
/// mounted from ui_dir when given.
inline void register_routes(httplib::Server& server, Service& service, const std::string& ui_dir = {}) {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/search", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.search(req.body));
  });
  server.Post("/suggest", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.suggest(req.body));
  });
  server.Post("/traverse", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.traverse(req.body));
  });
  server.Post("/decode", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.decode(req.body));
  });
  server.Get(R"(/doc/([^/]+))", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.doc(req.matches[1]));
  });
  server.Post("/session", [&, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.create_session());
  });
  server.Get(R"(/session/([^/]+))", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.session_state(req.matches[1]));
  });
  server.Post(R"(/session/([^/]+)/step)", [&, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.session_step(req.matches[1], req.body));
  });
  if (!ui_dir.empty()) server.set_mount_point("/", ui_dir);
}

}  // namespace lirlab
