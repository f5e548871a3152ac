// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lirlab/common.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/decoder.hpp"
#include "lirlab/metrics.hpp"
#include "lirlab/suggesters.hpp"
#include "lirlab/traversal.hpp"
#include "lirlab/workspace.hpp"

namespace lirlab {

/// Knobs for every suggester plus the report protocol.
struct SuggestOptions {
  DecoderConfig decoder;
  RM3Config rm3;
  SamplingConfig sampling;
  PrfConfig prf;
  double plain_temperature = 0.1;
  size_t plain_samples = kMaxSuggestions;
  uint64_t seed = 0;
};

/// Runs one suggester for one query. Randomized methods draw from a seed
/// derived from (options.seed, query_id).
inline SuggestionSet suggest(const Workspace& ws, const Query& query, SuggestMethod method,
                             const SuggestOptions& opts, size_t n = kMaxSuggestions) {
  const uint64_t seed = query_seed(opts.seed, query.query_id);
  SuggestionSet set;
  switch (method) {
    case SuggestMethod::Rm3: {
      RM3Config cfg = opts.rm3;
      cfg.fb_terms = std::min(cfg.fb_terms, n);
      set = rm3_suggest(query, ws.index(), ws.encoder(), ws.term_stats(), cfg);
      break;
    }
    case SuggestMethod::SamplingQd: {
      QueryDecoder decoder(ws.encoder(), ws.vocab(), opts.decoder);
      SamplingConfig cfg = opts.sampling;
      cfg.seed = seed;
      cfg.num_samples = std::min(cfg.num_samples, n);
      set = sampling_qd_suggest(query, decoder, cfg);
      break;
    }
    case SuggestMethod::PrfTraversal: {
      QueryDecoder decoder(ws.encoder(), ws.vocab(), opts.decoder);
      set = prf_traversal_suggest(query, ws.index(), decoder, opts.prf);
      break;
    }
    case SuggestMethod::Plain: {
      DecoderConfig cfg = opts.decoder;
      cfg.sample_temperature = opts.plain_temperature;
      cfg.num_samples = std::min(opts.plain_samples, n);
      cfg.seed = seed;
      QueryDecoder sampler(ws.encoder(), ws.vocab(), cfg);
      set = plain_suggest(query, sampler);
      break;
    }
  }
  if (set.suggestions.size() > n) set.suggestions.resize(n);
  return set;
}

struct MethodRow {
  std::string method;
  std::map<size_t, BootstrapSummary> best_of;  // k -> mean and bootstrap spread
  std::optional<double> self_bleu;
  std::optional<double> perplexity;
  double mean_suggestions = 0.0;
};

struct EvalReport {
  size_t queries = 0;
  size_t resamples = 0;
  uint64_t seed = 0;
  std::vector<MethodRow> rows;  // "original" first, then methods as requested
  std::map<std::string, std::vector<SuggestionSet>> suggestions;

  const MethodRow& row(const std::string& method) const {
    for (const auto& r : rows) {
      if (r.method == method) return r;
    }
    throw Error(ErrorCode::InvalidArgument, "no report row for " + method);
  }
};

struct EvalOptions {
  SuggestOptions suggest;
  std::vector<size_t> ks{1, 3, 5, 10};
  size_t resamples = 1000;
  uint64_t seed = 0;
  unsigned threads = 0;
};

/// Best-of-k nDCG@10 per method over every query that has a gold paragraph,
/// with seeded bootstrap spread, Self-BLEU and n-gram perplexity. Every row
/// and every k resamples the same query indices.
inline EvalReport evaluate(const Workspace& ws, const std::vector<Query>& queries, const Qrels& qrels,
                           const std::vector<SuggestMethod>& methods, const EvalOptions& opts) {
  std::vector<const Query*> judged;
  for (const auto& q : queries) {
    auto gold = qrels.gold(q.query_id);
    if (gold && ws.index().find(*gold)) judged.push_back(&q);
  }
  if (judged.empty()) throw Error(ErrorCode::EmptyInput, "no queries with gold paragraphs");

  NGramLM lm(3, 0.1);
  {
    std::vector<std::vector<Token>> sentences;
    for (const auto& d : ws.docs()) sentences.push_back(tokenize(d.text));
    lm.train(sentences);
  }

  std::vector<double> original(judged.size());
  std::vector<Embedding> gold_emb(judged.size());
  parallel_for(
      judged.size(),
      [&](size_t i) {
        const auto& q = *judged[i];
        gold_emb[i] = ws.index().embedding(ws.index().require(*qrels.gold(q.query_id)));
        original[i] = ndcg_at_k(ws.index().search(ws.encoder().encode(q.text), 10), qrels.for_query(q.query_id), 10);
      },
      opts.threads);

  EvalReport report;
  report.queries = judged.size();
  report.resamples = opts.resamples;
  report.seed = opts.seed;

  auto summarize = [&](const std::string& name, const std::vector<std::map<size_t, double>>& per_query) {
    MethodRow row;
    row.method = name;
    for (size_t k : opts.ks) {
      std::vector<double> v;
      for (const auto& m : per_query) v.push_back(m.at(k));
      row.best_of[k] = bootstrap_mean(v, opts.resamples, opts.seed);
    }
    return row;
  };

  {
    std::vector<std::map<size_t, double>> per_query;
    std::vector<std::string> texts;
    for (size_t i = 0; i < judged.size(); ++i) {
      per_query.push_back(best_of_k({}, original[i], opts.ks));
      texts.push_back(judged[i]->text);
    }
    auto row = summarize("original", per_query);
    row.perplexity = perplexity(texts, lm);
    report.rows.push_back(std::move(row));
  }

  for (auto method : methods) {
    std::vector<SuggestionSet> sets(judged.size());
    parallel_for(
        judged.size(),
        [&](size_t i) {
          const auto& q = *judged[i];
          sets[i] = suggest(ws, q, method, opts.suggest);
          annotate(sets[i], ws.index(), ws.encoder(), qrels.for_query(q.query_id), gold_emb[i]);
        },
        opts.threads);
    std::vector<std::map<size_t, double>> per_query;
    std::vector<std::string> all_texts;
    double bleu_sum = 0.0;
    size_t bleu_n = 0;
    double count = 0.0;
    for (size_t i = 0; i < sets.size(); ++i) {
      std::vector<double> nd;
      for (const auto& s : sets[i].suggestions) nd.push_back(s.ndcg.value_or(0.0));
      per_query.push_back(best_of_k(nd, original[i], opts.ks));
      auto texts = sets[i].texts();
      count += static_cast<double>(texts.size());
      if (texts.size() >= 2) {
        bleu_sum += self_bleu(texts);
        ++bleu_n;
      }
      all_texts.insert(all_texts.end(), texts.begin(), texts.end());
    }
    auto row = summarize(to_string(method), per_query);
    if (bleu_n > 0) row.self_bleu = bleu_sum / static_cast<double>(bleu_n);
    if (!all_texts.empty()) row.perplexity = perplexity(all_texts, lm);
    row.mean_suggestions = count / static_cast<double>(sets.size());
    report.rows.push_back(std::move(row));
    report.suggestions[to_string(method)] = std::move(sets);
  }
  return report;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json best = nlohmann::ordered_json::object();
    for (const auto& [k, b] : row.best_of) {
      best[std::to_string(k)] = {{"mean", b.mean}, {"std", b.std}, {"p2.5", b.p025}, {"p97.5", b.p975}};
    }
    nlohmann::ordered_json j{{"method", row.method}, {"best_of_k", best}};
    j["self_bleu"] = row.self_bleu ? nlohmann::ordered_json(*row.self_bleu) : nlohmann::ordered_json(nullptr);
    j["perplexity"] = row.perplexity ? nlohmann::ordered_json(*row.perplexity) : nlohmann::ordered_json(nullptr);
    j["mean_suggestions"] = row.mean_suggestions;
    rows.push_back(std::move(j));
  }
  return nlohmann::ordered_json{{"queries", r.queries},
                                {"bootstrap_resamples", r.resamples},
                                {"seed", r.seed},
                                {"metric", "best-of-k nDCG@10"},
                                {"rows", rows}};
}

/// One row per method: best-of-k means with bootstrap std.
inline void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "method";
  if (!r.rows.empty()) {
    for (const auto& [k, _] : r.rows.front().best_of) out << ",best_of_" << k << ",std_" << k;
  }
  out << ",self_bleu,perplexity\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  for (const auto& row : r.rows) {
    out << row.method;
    for (const auto& [_, b] : row.best_of) out << ',' << num(b.mean) << ',' << num(b.std);
    out << ',' << (row.self_bleu ? num(*row.self_bleu) : "") << ',' << (row.perplexity ? num(*row.perplexity) : "")
        << '\n';
  }
}

}  // namespace lirlab
