// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lirlab/common.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/decoder.hpp"
#include "lirlab/embedding.hpp"
#include "lirlab/index.hpp"
#include "lirlab/metrics.hpp"

namespace lirlab {

/// Equidistant points on the segment from a query embedding q to a gold
/// paragraph embedding d. raw[i] = q + (i / k)(d - q); points[i] is raw[i]
/// scaled to unit length so it is a valid decoder target.
struct TraversalPath {
  Embedding q;
  Embedding d;
  size_t k = 0;
  std::vector<std::vector<double>> raw;
  std::vector<Embedding> points;
};

inline TraversalPath make_path(const Embedding& q, const Embedding& d, size_t k) {
  if (q.dim() != d.dim()) {
    throw Error(ErrorCode::DimMismatch, std::to_string(q.dim()) + " vs " + std::to_string(d.dim()));
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "traversal needs k >= 1");
  TraversalPath path{q, d, k, {}, {}};
  path.raw.reserve(k + 1);
  path.points.reserve(k + 1);
  for (size_t kappa = 0; kappa <= k; ++kappa) {
    double t = static_cast<double>(kappa) / static_cast<double>(k);
    std::vector<double> v(q.dim());
    for (size_t i = 0; i < v.size(); ++i) v[i] = q.values[i] + t * (d.values[i] - q.values[i]);
    path.raw.push_back(v);
    path.points.push_back(normalized(std::move(v)));
  }
  return path;
}

/// Normalized point at fraction f of the way from q towards d.
inline Embedding interpolate(const Embedding& q, const Embedding& d, double f) {
  if (q.dim() != d.dim()) throw Error(ErrorCode::DimMismatch, "interpolation endpoints differ in dim");
  std::vector<double> v(q.dim());
  for (size_t i = 0; i < v.size(); ++i) v[i] = q.values[i] + f * (d.values[i] - q.values[i]);
  return normalized(std::move(v));
}

struct TraversalStep {
  size_t kappa = 0;
  Decoding decoding;
  double ndcg = 0.0;
  double ip_with_gold = 0.0;
  SearchResult results;
};

/// Relevance labels used to score a traversal: the query's qrels when it has
/// any, otherwise the target paragraph alone with grade 1.
inline std::map<std::string, int> traversal_labels(const Qrels& qrels, const std::string& query_id,
                                                   const std::string& gold_doc_id) {
  auto labels = qrels.for_query(query_id);
  if (labels.empty()) labels[gold_doc_id] = 1;
  return labels;
}

/// Decodes q_kappa for kappa = 1..k and scores each decoding by nDCG@10 and
/// by the inner product of its re-encoding with the gold embedding.
inline std::vector<TraversalStep> traverse_and_decode(const Query& query, const std::string& gold_doc_id, size_t k,
                                                      const IndexSnapshot& index, const QueryDecoder& decoder,
                                                      const std::map<std::string, int>& labels) {
  const Encoder& encoder = decoder.encoder();
  auto gold = index.embedding(index.require(gold_doc_id));
  auto q = encoder.encode(query.text);
  auto path = make_path(q, gold, k);
  std::vector<TraversalStep> steps;
  steps.reserve(k);
  for (size_t kappa = 1; kappa <= k; ++kappa) {
    TraversalStep step;
    step.kappa = kappa;
    step.decoding = decoder.decode(path.points[kappa]);
    auto reencoded = encoder.encode_tokens(step.decoding.tokens);
    step.results = index.search(reencoded, 10);
    step.ndcg = ndcg_at_k(step.results, labels, 10);
    step.ip_with_gold = inner_product(reencoded, gold);
    steps.push_back(std::move(step));
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Reformulation dataset

struct ReformulationRecord {
  std::string query_id;
  std::string original_text;
  std::string reformulation_text;
  size_t kappa = 0;
  double ndcg_before = 0.0;
  double ndcg_after = 0.0;
  double ip_before = 0.0;
  double ip_after = 0.0;

  /// The three conditions a successful reformulation must meet.
  bool successful() const { return ndcg_after == 1.0 && ndcg_after > ndcg_before && ip_after > ip_before; }
};

inline nlohmann::ordered_json to_json(const ReformulationRecord& r) {
  return nlohmann::ordered_json{{"query_id", r.query_id},       {"original_text", r.original_text},
                                {"reformulation_text", r.reformulation_text},
                                {"kappa", r.kappa},             {"ndcg_before", r.ndcg_before},
                                {"ndcg_after", r.ndcg_after},   {"ip_before", r.ip_before},
                                {"ip_after", r.ip_after}};
}

inline ReformulationRecord record_from_json(const nlohmann::json& j) {
  ReformulationRecord r;
  j.at("query_id").get_to(r.query_id);
  j.at("original_text").get_to(r.original_text);
  j.at("reformulation_text").get_to(r.reformulation_text);
  j.at("kappa").get_to(r.kappa);
  j.at("ndcg_before").get_to(r.ndcg_before);
  j.at("ndcg_after").get_to(r.ndcg_after);
  j.at("ip_before").get_to(r.ip_before);
  j.at("ip_after").get_to(r.ip_after);
  return r;
}

/// Input/target pair for training a suggestion model outside this tool.
struct TrainingExample {
  std::string query;
  std::vector<std::string> context;  // top-5 result texts for the original query
  std::string target;
};

inline nlohmann::ordered_json to_json(const TrainingExample& t) {
  return nlohmann::ordered_json{{"query", t.query}, {"context", t.context}, {"target", t.target}};
}

/// Retrieval quality of an original query against its traversal target.
struct OriginalScore {
  std::string query_id;
  double ndcg = 0.0;
  double ip = 0.0;
};

struct DatasetSummary {
  size_t queries = 0;
  size_t traversed = 0;
  size_t missing_gold = 0;
  size_t queries_with_records = 0;
  size_t records = 0;

  double success_fraction() const {
    return traversed == 0 ? 0.0 : static_cast<double>(queries_with_records) / static_cast<double>(traversed);
  }
};

inline nlohmann::ordered_json to_json(const DatasetSummary& s) {
  return nlohmann::ordered_json{{"queries", s.queries},
                                {"traversed", s.traversed},
                                {"missing_gold", s.missing_gold},
                                {"queries_with_records", s.queries_with_records},
                                {"records", s.records},
                                {"success_fraction", s.success_fraction()}};
}

struct DatasetOptions {
  size_t k = 20;
  uint64_t seed = 0;
  DecoderConfig decoder;
  unsigned threads = 0;
};

struct Dataset {
  std::vector<ReformulationRecord> records;  // ascending (query_id, kappa)
  std::vector<TrainingExample> training;     // parallel to records
  std::vector<OriginalScore> originals;      // every traversed query
  DatasetSummary summary;
};

/// Per-query decoder seed: independent of processing order.
inline uint64_t query_seed(uint64_t global_seed, const std::string& query_id) {
  return global_seed ^ stable_hash(query_id);
}

/// Traverses every query towards its gold paragraph and keeps the decodings
/// that pass the success filter. Queries without a gold paragraph are
/// skipped and counted.
inline Dataset generate_dataset(const std::vector<Query>& queries, const Qrels& qrels, const IndexSnapshot& index,
                                const std::vector<Document>& corpus, const Encoder& encoder,
                                const Vocabulary& vocab, const DatasetOptions& opts) {
  std::map<std::string, const Document*> docs;
  for (const auto& d : corpus) docs[d.doc_id] = &d;

  struct PerQuery {
    bool traversed = false;
    OriginalScore original;
    std::vector<ReformulationRecord> records;
    std::vector<std::string> context;
  };
  std::vector<PerQuery> results(queries.size());
  parallel_for(
      queries.size(),
      [&](size_t i) {
        const auto& query = queries[i];
        auto gold_id = qrels.gold(query.query_id);
        if (!gold_id || !index.find(*gold_id)) return;
        auto& out = results[i];
        out.traversed = true;
        DecoderConfig dcfg = opts.decoder;
        dcfg.seed = query_seed(opts.seed, query.query_id);
        QueryDecoder decoder(encoder, vocab, dcfg);

        const auto& labels = qrels.for_query(query.query_id);
        auto gold = index.embedding(index.require(*gold_id));
        auto q = encoder.encode(query.text);
        auto original_results = index.search(q, 10);
        out.original = {query.query_id, ndcg_at_k(original_results, labels, 10), inner_product(q, gold)};
        for (size_t r = 0; r < std::min<size_t>(5, original_results.entries.size()); ++r) {
          auto it = docs.find(original_results.entries[r].doc_id);
          out.context.push_back(it == docs.end() ? std::string() : it->second->text);
        }
        for (const auto& step : traverse_and_decode(query, *gold_id, opts.k, index, decoder, labels)) {
          ReformulationRecord rec{query.query_id, query.text,       step.decoding.text, step.kappa,
                                  out.original.ndcg, step.ndcg,     out.original.ip,    step.ip_with_gold};
          if (rec.successful()) out.records.push_back(std::move(rec));
        }
      },
      opts.threads);

  Dataset ds;
  ds.summary.queries = queries.size();
  std::vector<size_t> order(queries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return queries[a].query_id < queries[b].query_id; });
  for (size_t i : order) {
    auto& r = results[i];
    if (!r.traversed) {
      ++ds.summary.missing_gold;
      continue;
    }
    ++ds.summary.traversed;
    ds.originals.push_back(r.original);
    if (!r.records.empty()) ++ds.summary.queries_with_records;
    for (auto& rec : r.records) {
      ds.training.push_back({rec.original_text, r.context, rec.reformulation_text});
      ds.records.push_back(std::move(rec));
    }
  }
  ds.summary.records = ds.records.size();
  return ds;
}

inline void write_records(std::ostream& out, const std::vector<ReformulationRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline void write_training_view(std::ostream& out, const std::vector<TrainingExample>& examples) {
  for (const auto& t : examples) out << to_json(t).dump() << '\n';
}

inline std::vector<ReformulationRecord> read_records(std::istream& in) {
  std::vector<ReformulationRecord> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Histograms

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<size_t> counts;
};

/// nDCG bins: [0,0.1), ..., [0.9,1.0), [1,1].
inline Histogram ndcg_histogram(const std::vector<double>& values) {
  Histogram h{0.0, 1.0, std::vector<size_t>(11, 0)};
  for (double v : values) {
    size_t bin = v >= 1.0 ? 10 : static_cast<size_t>(std::clamp(std::floor(v * 10.0), 0.0, 9.0));
    ++h.counts[bin];
  }
  return h;
}

/// 20 equal bins over [-1, 1]; the last bin is closed.
inline Histogram ip_histogram(const std::vector<double>& values) {
  Histogram h{-1.0, 1.0, std::vector<size_t>(20, 0)};
  for (double v : values) {
    auto bin = static_cast<size_t>(std::clamp(std::floor((v + 1.0) * 10.0), 0.0, 19.0));
    ++h.counts[bin];
  }
  return h;
}

inline nlohmann::ordered_json to_json(const Histogram& h) {
  return nlohmann::ordered_json{{"lo", h.lo}, {"hi", h.hi}, {"bins", h.counts.size()}, {"counts", h.counts}};
}

struct DatasetHistograms {
  Histogram ndcg_before;
  Histogram ndcg_after;
  Histogram ip_before;
  Histogram ip_after;
};

/// Original queries vs. the best reformulation of each query (highest nDCG,
/// then highest inner product with the gold embedding).
inline DatasetHistograms dataset_histograms(const std::vector<ReformulationRecord>& records,
                                            const std::vector<OriginalScore>& originals) {
  if (originals.empty()) throw Error(ErrorCode::EmptyInput, "no original queries to histogram");
  std::vector<double> nb;
  std::vector<double> ib;
  for (const auto& o : originals) {
    nb.push_back(o.ndcg);
    ib.push_back(o.ip);
  }
  std::map<std::string, const ReformulationRecord*> best;
  for (const auto& r : records) {
    auto& b = best[r.query_id];
    if (!b || r.ndcg_after > b->ndcg_after || (r.ndcg_after == b->ndcg_after && r.ip_after > b->ip_after)) b = &r;
  }
  std::vector<double> na;
  std::vector<double> ia;
  for (const auto& [_, r] : best) {
    na.push_back(r->ndcg_after);
    ia.push_back(r->ip_after);
  }
  return {ndcg_histogram(nb), ndcg_histogram(na), ip_histogram(ib), ip_histogram(ia)};
}

inline nlohmann::ordered_json to_json(const DatasetHistograms& h) {
  return nlohmann::ordered_json{{"ndcg", {{"before", to_json(h.ndcg_before)}, {"best_after", to_json(h.ndcg_after)}}},
                                {"inner_product", {{"before", to_json(h.ip_before)}, {"best_after", to_json(h.ip_after)}}}};
}

}  // namespace lirlab
