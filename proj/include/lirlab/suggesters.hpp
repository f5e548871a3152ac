// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lirlab/common.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/decoder.hpp"
#include "lirlab/embedding.hpp"
#include "lirlab/index.hpp"
#include "lirlab/metrics.hpp"
#include "lirlab/stopwords.hpp"
#include "lirlab/traversal.hpp"

namespace lirlab {

inline constexpr size_t kMaxSuggestions = 10;

enum class SuggestMethod { Rm3, SamplingQd, PrfTraversal, Plain };

inline const char* to_string(SuggestMethod m) {
  switch (m) {
    case SuggestMethod::Rm3: return "rm3";
    case SuggestMethod::SamplingQd: return "sampling_qd";
    case SuggestMethod::PrfTraversal: return "prf_traversal";
    case SuggestMethod::Plain: return "plain";
  }
  return "unknown";
}

/// Accepts both the short CLI names and the canonical names.
inline SuggestMethod parse_method(const std::string& name) {
  if (name == "rm3") return SuggestMethod::Rm3;
  if (name == "sampling" || name == "sampling_qd") return SuggestMethod::SamplingQd;
  if (name == "prf" || name == "prf_traversal") return SuggestMethod::PrfTraversal;
  if (name == "plain") return SuggestMethod::Plain;
  throw Error(ErrorCode::InvalidArgument, "unknown method " + name);
}

struct Suggestion {
  std::string text;
  std::optional<double> ndcg;
  std::optional<double> ip_with_gold;
};

struct SuggestionSet {
  std::string query_id;
  SuggestMethod method = SuggestMethod::Rm3;
  std::vector<Suggestion> suggestions;

  std::vector<std::string> texts() const {
    std::vector<std::string> out;
    for (const auto& s : suggestions) out.push_back(s.text);
    return out;
  }
};

inline nlohmann::ordered_json to_json(const SuggestionSet& s) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& sug : s.suggestions) {
    nlohmann::ordered_json j{{"text", sug.text}};
    if (sug.ndcg) j["ndcg"] = *sug.ndcg;
    if (sug.ip_with_gold) j["ip_with_gold"] = *sug.ip_with_gold;
    list.push_back(std::move(j));
  }
  return nlohmann::ordered_json{{"query_id", s.query_id}, {"method", to_string(s.method)}, {"suggestions", list}};
}

/// Appends texts in order, skipping duplicates, up to the suggestion cap.
inline void add_unique(SuggestionSet& set, const std::vector<std::string>& texts) {
  std::unordered_set<std::string> seen;
  for (const auto& s : set.suggestions) seen.insert(s.text);
  for (const auto& t : texts) {
    if (set.suggestions.size() >= kMaxSuggestions) break;
    if (seen.insert(t).second) set.suggestions.push_back({t, std::nullopt, std::nullopt});
  }
}

// ---------------------------------------------------------------------------
// RM3 term scoring

/// Term frequencies of every document plus the collection model.
class TermStats {
 public:
  struct DocTerms {
    std::unordered_map<Token, uint32_t> tf;
    uint64_t length = 0;
  };

  TermStats() = default;

  explicit TermStats(const std::vector<Document>& docs) {
    for (const auto& d : docs) {
      DocTerms dt;
      for (auto& t : tokenize(d.text)) {
        ++dt.tf[t];
        ++collection_tf_[t];
        ++dt.length;
      }
      collection_length_ += dt.length;
      docs_.emplace(d.doc_id, std::move(dt));
    }
  }

  const DocTerms& doc(const std::string& doc_id) const {
    auto it = docs_.find(doc_id);
    if (it == docs_.end()) throw Error(ErrorCode::UnknownDocId, doc_id);
    return it->second;
  }

  double collection_prob(const Token& t) const {
    auto it = collection_tf_.find(t);
    if (it == collection_tf_.end() || collection_length_ == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(collection_length_);
  }

  /// Dirichlet-smoothed P(w | D) = (tf(w, D) + mu P(w | C)) / (|D| + mu).
  double doc_prob(const Token& t, const DocTerms& d, double mu) const {
    auto it = d.tf.find(t);
    double tf = it == d.tf.end() ? 0.0 : it->second;
    return (tf + mu * collection_prob(t)) / (static_cast<double>(d.length) + mu);
  }

 private:
  std::unordered_map<std::string, DocTerms> docs_;
  std::unordered_map<Token, uint64_t> collection_tf_;
  uint64_t collection_length_ = 0;
};

struct RM3Config {
  double mu = 2500.0;
  size_t fb_docs = 5;
  size_t fb_terms = 10;
  std::set<Token> stopwords = english_stopwords();

  void validate() const {
    if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be > 0");
    if (fb_docs < 1) throw Error(ErrorCode::InvalidArgument, "fb_docs must be >= 1");
    if (fb_terms < 1) throw Error(ErrorCode::InvalidArgument, "fb_terms must be >= 1");
  }
};

struct TermScore {
  Token term;
  double score = 0.0;
};

/// Relevance-model weights rm(w) = sum_D P(w | D) P(Q | D) over the
/// feedback documents, with P(Q | D) = prod_i P(q_i | D). Candidates are the
/// terms occurring in feedback documents, minus stopwords and query terms.
/// Query terms unseen in the collection are left out of P(Q | D).
/// Sorted by descending score, ties by ascending term.
inline std::vector<TermScore> rm3_term_scores(const std::vector<Token>& query_tokens,
                                              const std::vector<std::string>& feedback_doc_ids,
                                              const TermStats& stats, const RM3Config& cfg) {
  cfg.validate();
  std::set<Token> query_terms(query_tokens.begin(), query_tokens.end());
  std::vector<const TermStats::DocTerms*> fb;
  for (const auto& id : feedback_doc_ids) fb.push_back(&stats.doc(id));

  std::vector<double> query_likelihood;
  for (const auto* d : fb) {
    double log_l = 0.0;
    for (const auto& q : query_tokens) {
      if (stats.collection_prob(q) > 0.0) log_l += std::log(stats.doc_prob(q, *d, cfg.mu));
    }
    query_likelihood.push_back(std::exp(log_l));
  }

  std::set<Token> candidates;
  for (const auto* d : fb) {
    for (const auto& [t, _] : d->tf) {
      if (!query_terms.count(t) && !cfg.stopwords.count(t)) candidates.insert(t);
    }
  }
  std::vector<TermScore> out;
  out.reserve(candidates.size());
  for (const auto& t : candidates) {
    double s = 0.0;
    for (size_t i = 0; i < fb.size(); ++i) s += stats.doc_prob(t, *fb[i], cfg.mu) * query_likelihood[i];
    out.push_back({t, s});
  }
  std::sort(out.begin(), out.end(), [](const TermScore& a, const TermScore& b) {
    return a.score != b.score ? a.score > b.score : a.term < b.term;
  });
  return out;
}

/// Original query plus one expansion term per suggestion, best term first.
inline SuggestionSet rm3_suggest(const Query& query, const IndexSnapshot& index, const Encoder& encoder,
                                 const TermStats& stats, const RM3Config& cfg = {}) {
  auto tokens = tokenize(query.text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyQuery, "query has no tokens");
  auto top = index.search(encoder.encode_tokens(tokens), cfg.fb_docs);
  std::vector<std::string> fb;
  for (const auto& e : top.entries) fb.push_back(e.doc_id);
  auto terms = rm3_term_scores(tokens, fb, stats, cfg);
  SuggestionSet set{query.query_id, SuggestMethod::Rm3, {}};
  std::vector<std::string> texts;
  for (size_t i = 0; i < std::min(cfg.fb_terms, terms.size()); ++i) texts.push_back(query.text + " " + terms[i].term);
  add_unique(set, texts);
  return set;
}

// ---------------------------------------------------------------------------
// Sampling + query decoder

struct SamplingConfig {
  double epsilon = 0.05;
  size_t num_samples = 10;
  uint64_t seed = 0;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
    if (num_samples < 1) throw Error(ErrorCode::InvalidArgument, "num_samples must be >= 1");
  }
};

/// Points drawn uniformly from the epsilon-ball around q, before
/// renormalization: direction uniform on the sphere, radius eps * u^(1/dim).
inline std::vector<std::vector<double>> sample_ball_points(const Embedding& q, const SamplingConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<std::vector<double>> out;
  const size_t dim = q.dim();
  for (size_t s = 0; s < cfg.num_samples; ++s) {
    std::vector<double> dir(dim);
    double n2 = 0.0;
    for (auto& x : dir) {
      x = rng.normal();
      n2 += x * x;
    }
    double radius = cfg.epsilon * std::pow(rng.uniform_open_closed(), 1.0 / static_cast<double>(dim));
    double scale = n2 > 0.0 ? radius / std::sqrt(n2) : 0.0;
    std::vector<double> p(dim);
    for (size_t i = 0; i < dim; ++i) p[i] = q.values[i] + dir[i] * scale;
    out.push_back(std::move(p));
  }
  return out;
}

inline SuggestionSet sampling_qd_suggest(const Query& query, const QueryDecoder& decoder, const SamplingConfig& cfg) {
  auto tokens = tokenize(query.text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyQuery, "query has no tokens");
  auto q = decoder.encoder().encode_tokens(tokens);
  std::vector<std::string> texts;
  for (auto& p : sample_ball_points(q, cfg)) texts.push_back(decoder.decode(normalized(std::move(p))).text);
  SuggestionSet set{query.query_id, SuggestMethod::SamplingQd, {}};
  add_unique(set, texts);
  return set;
}

// ---------------------------------------------------------------------------
// Pseudo-relevance-feedback traversal

struct PrfConfig {
  std::vector<double> k_fracs{0.3, 0.5, 0.7};
  size_t fb_docs = 5;

  void validate() const {
    if (fb_docs < 1) throw Error(ErrorCode::InvalidArgument, "fb_docs must be >= 1");
    for (double f : k_fracs) {
      if (!(f > 0.0 && f < 1.0)) throw Error(ErrorCode::InvalidArgument, "k_fracs must lie in (0, 1)");
    }
  }
};

/// Decodes points part of the way from the query towards each of its top
/// results. No relevance labels are used.
inline SuggestionSet prf_traversal_suggest(const Query& query, const IndexSnapshot& index,
                                           const QueryDecoder& decoder, const PrfConfig& cfg = {}) {
  cfg.validate();
  auto tokens = tokenize(query.text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyQuery, "query has no tokens");
  auto q = decoder.encoder().encode_tokens(tokens);
  auto top = index.search(q, cfg.fb_docs);
  std::map<std::string, double> best;
  for (const auto& e : top.entries) {
    auto d = index.embedding(index.require(e.doc_id));
    for (double f : cfg.k_fracs) {
      auto dec = decoder.decode(interpolate(q, d, f));
      auto [it, inserted] = best.emplace(dec.text, dec.reencode_similarity);
      if (!inserted) it->second = std::max(it->second, dec.reencode_similarity);
    }
  }
  std::vector<std::pair<std::string, double>> ranked(best.begin(), best.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  SuggestionSet set{query.query_id, SuggestMethod::PrfTraversal, {}};
  std::vector<std::string> texts;
  for (const auto& [t, _] : ranked) texts.push_back(t);
  add_unique(set, texts);
  return set;
}

// ---------------------------------------------------------------------------
// Plain decoder sampling

/// Sampled decodings of the query's own embedding. The decoder's
/// temperature, seed and sample count govern the output; temperature 0
/// yields the round-trip decoding alone.
inline SuggestionSet plain_suggest(const Query& query, const QueryDecoder& sampler) {
  auto tokens = tokenize(query.text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyQuery, "query has no tokens");
  std::vector<std::string> texts;
  for (auto& d : sampler.decode_samples(sampler.encoder().encode_tokens(tokens))) texts.push_back(d.text);
  SuggestionSet set{query.query_id, SuggestMethod::Plain, {}};
  add_unique(set, texts);
  return set;
}

/// Fills nDCG@10 and the inner product with the gold embedding for every
/// suggestion.
inline void annotate(SuggestionSet& set, const IndexSnapshot& index, const Encoder& encoder,
                     const std::map<std::string, int>& labels, const Embedding& gold) {
  for (auto& s : set.suggestions) {
    auto tokens = tokenize(s.text);
    if (tokens.empty()) {
      s.ndcg = 0.0;
      s.ip_with_gold = 0.0;
      continue;
    }
    auto e = encoder.encode_tokens(tokens);
    s.ndcg = ndcg_at_k(index.search(e, 10), labels, 10);
    s.ip_with_gold = inner_product(e, gold);
  }
}

}  // namespace lirlab
