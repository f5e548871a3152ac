// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "lirlab/common.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/embedding.hpp"
#include "lirlab/index.hpp"

namespace lirlab {

struct DecoderConfig {
  size_t beam_width = 16;
  size_t max_len = 12;
  size_t shortlist_size = 256;
  double sample_temperature = 0.0;
  uint64_t seed = 0;
  size_t num_samples = 1;

  void validate() const {
    if (beam_width < 1 || beam_width > 1024) throw Error(ErrorCode::InvalidArgument, "beam_width must be in [1, 1024]");
    if (max_len < 1 || max_len > 64) throw Error(ErrorCode::InvalidArgument, "max_len must be in [1, 64]");
    if (shortlist_size < 1) throw Error(ErrorCode::InvalidArgument, "shortlist_size must be >= 1");
    if (!(sample_temperature >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
    if (num_samples < 1) throw Error(ErrorCode::InvalidArgument, "num_samples must be >= 1");
  }
};

struct Decoding {
  std::string text;
  double reencode_similarity = 0.0;
  std::vector<Token> tokens;
};

/// Decoder vocabulary: distinct corpus tokens in ascending string order with
/// their precomputed sparse feature vectors. Token ids follow string order,
/// so comparing id sequences compares token sequences lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  Vocabulary(const std::set<Token>& tokens, const Encoder& encoder)
      : tokens_(tokens.begin(), tokens.end()), dim_(encoder.dim()) {
    counts_.reserve(tokens_.size());
    for (const auto& t : tokens_) {
      Token one[] = {t};
      counts_.push_back(encoder.sparse(one));
    }
  }

  static Vocabulary from_documents(const std::vector<Document>& docs, const Encoder& encoder) {
    std::set<Token> tokens;
    for (const auto& d : docs) {
      for (auto& t : tokenize(d.text)) tokens.insert(std::move(t));
    }
    return Vocabulary(tokens, encoder);
  }

  size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  uint32_t dim() const { return dim_; }
  const Token& token(size_t id) const { return tokens_[id]; }
  const SparseCounts& counts(size_t id) const { return counts_[id]; }
  const std::vector<Token>& tokens() const { return tokens_; }

  bool contains(const Token& t) const { return std::binary_search(tokens_.begin(), tokens_.end(), t); }

 private:
  std::vector<Token> tokens_;
  std::vector<SparseCounts> counts_;
  uint32_t dim_ = 0;
};

/// Inverts the shared encoder by beam search over token multisets, scoring
/// each candidate by the inner product of its re-encoding with the target.
///
/// Candidates are multisets: since the encoder is a bag of features every
/// permutation encodes identically, and the representative of a multiset is
/// its lexicographically smallest ordering. At temperature 0 the search is
/// deterministic; above 0 each beam selection is a seeded Gumbel-top-B draw
/// (sampling without replacement from softmax(score / T)).
class QueryDecoder {
 public:
  QueryDecoder(const Encoder& encoder, const Vocabulary& vocab, DecoderConfig cfg = {})
      : encoder_(&encoder), vocab_(&vocab), cfg_(cfg) {
    cfg_.validate();
  }

  const DecoderConfig& config() const { return cfg_; }
  const Encoder& encoder() const { return *encoder_; }
  const Vocabulary& vocabulary() const { return *vocab_; }

  Decoding decode(const Embedding& z) const {
    check_target(z);
    return finish(search(z, nullptr), z);
  }

  /// Up to num_samples distinct decodings, in sampling order.
  std::vector<Decoding> decode_samples(const Embedding& z) const {
    check_target(z);
    std::vector<Decoding> out;
    if (cfg_.sample_temperature == 0.0) {
      out.push_back(finish(search(z, nullptr), z));
      return out;
    }
    std::unordered_set<std::string> seen;
    for (size_t s = 0; s < cfg_.num_samples; ++s) {
      Rng rng(splitmix64(cfg_.seed) ^ splitmix64(s + 1));
      auto d = finish(search(z, &rng), z);
      if (seen.insert(d.text).second) out.push_back(std::move(d));
    }
    return out;
  }

  /// Top shortlist_size vocabulary ids by single-token alignment with z.
  std::vector<uint32_t> shortlist(const Embedding& z) const {
    std::vector<double> score(vocab_->size());
    for (size_t i = 0; i < vocab_->size(); ++i) score[i] = single_token_score(i, z);
    std::vector<uint32_t> ids(vocab_->size());
    std::iota(ids.begin(), ids.end(), 0u);
    size_t c = std::min(cfg_.shortlist_size, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(c), ids.end(),
                      [&](uint32_t a, uint32_t b) { return score[a] != score[b] ? score[a] > score[b] : a < b; });
    ids.resize(c);
    return ids;
  }

  double single_token_score(size_t id, const Embedding& z) const {
    const auto& sc = vocab_->counts(id);
    double dot = 0.0;
    for (auto [c, w] : sc.entries) dot += w * z.values[c];
    int64_t sq = sc.squared_norm();
    return sq > 0 ? dot / std::sqrt(static_cast<double>(sq)) : 0.0;
  }

 private:
  struct Beam {
    std::vector<uint32_t> ids;  // sorted ascending
    std::vector<int32_t> raw;   // dense unnormalized feature vector
    double dot = 0.0;           // raw . z
    int64_t sq = 0;             // |raw|^2
    double score = 0.0;
  };

  struct IdsHash {
    size_t operator()(const std::vector<uint32_t>& v) const {
      uint64_t h = 0x84222325ULL;
      for (uint32_t x : v) h = splitmix64(h ^ x);
      return static_cast<size_t>(h);
    }
  };

  void check_target(const Embedding& z) const {
    if (vocab_->empty()) throw Error(ErrorCode::EmptyVocab, "decoder vocabulary is empty");
    if (z.dim() != vocab_->dim()) {
      throw Error(ErrorCode::DimMismatch, "target dim " + std::to_string(z.dim()) + " vs encoder dim " +
                                              std::to_string(vocab_->dim()));
    }
    if (!z.is_normalized(1e-6)) throw Error(ErrorCode::UnnormalizedTarget, "norm " + std::to_string(z.norm()));
  }

  // Scores within kTieTolerance are ties: {a, b} and {a, a, b, b} encode to
  // the same unit vector but their float scores can differ in the last bits.
  static constexpr double kTieTolerance = 1e-12;

  static bool better(const Beam& a, const Beam& b) {
    if (std::abs(a.score - b.score) > kTieTolerance) return a.score > b.score;
    if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
    return a.ids < b.ids;
  }

  Beam extend(const Beam* parent, uint32_t token, const Embedding& z) const {
    Beam b;
    if (parent) {
      b.ids = parent->ids;
      b.raw = parent->raw;
    } else {
      b.raw.assign(vocab_->dim(), 0);
    }
    b.ids.insert(std::upper_bound(b.ids.begin(), b.ids.end(), token), token);
    for (auto [c, w] : vocab_->counts(token).entries) b.raw[c] += w;
    // Fixed coordinate order keeps the score independent of insertion order.
    for (uint32_t c = 0; c < b.raw.size(); ++c) {
      if (b.raw[c] != 0) {
        b.dot += b.raw[c] * z.values[c];
        b.sq += int64_t{b.raw[c]} * b.raw[c];
      }
    }
    b.score = b.sq > 0 ? b.dot / std::sqrt(static_cast<double>(b.sq)) : 0.0;
    return b;
  }

  Beam search(const Embedding& z, Rng* rng) const {
    const auto shortlist_ids = shortlist(z);
    const double temperature = rng ? cfg_.sample_temperature : 0.0;
    std::vector<double> token_dot(shortlist_ids.size());
    std::vector<int64_t> token_sq(shortlist_ids.size());
    for (size_t j = 0; j < shortlist_ids.size(); ++j) {
      const auto& sc = vocab_->counts(shortlist_ids[j]);
      for (auto [c, w] : sc.entries) token_dot[j] += w * z.values[c];
      token_sq[j] = sc.squared_norm();
    }

    struct Candidate {
      double key;
      uint32_t parent;
      uint32_t slot;  // index into shortlist_ids
    };

    std::vector<Beam> beams;
    Beam best;
    bool have_best = false;

    for (size_t len = 1; len <= cfg_.max_len; ++len) {
      std::vector<Candidate> cands;
      if (len == 1) {
        cands.reserve(shortlist_ids.size());
        for (uint32_t j = 0; j < shortlist_ids.size(); ++j) {
          double s = token_sq[j] > 0 ? token_dot[j] / std::sqrt(static_cast<double>(token_sq[j])) : 0.0;
          cands.push_back({s, 0, j});
        }
      } else {
        cands.reserve(beams.size() * shortlist_ids.size());
        for (uint32_t p = 0; p < beams.size(); ++p) {
          const Beam& b = beams[p];
          for (uint32_t j = 0; j < shortlist_ids.size(); ++j) {
            int64_t cross = 0;
            for (auto [c, w] : vocab_->counts(shortlist_ids[j]).entries) cross += int64_t{b.raw[c]} * w;
            int64_t sq = b.sq + 2 * cross + token_sq[j];
            double s = sq > 0 ? (b.dot + token_dot[j]) / std::sqrt(static_cast<double>(sq)) : 0.0;
            cands.push_back({s, p, j});
          }
        }
      }
      if (temperature > 0.0) {
        for (auto& c : cands) c.key = c.key / temperature + rng->gumbel();
      }
      std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.key != b.key) return a.key > b.key;
        if (a.parent != b.parent) return a.parent < b.parent;
        return a.slot < b.slot;
      });

      // Materialize distinct multisets in key order. Walk a little past the
      // B-th distinct candidate so near-equal keys are resolved exactly.
      std::unordered_set<std::vector<uint32_t>, IdsHash> seen;
      std::vector<std::pair<double, Beam>> pool;
      double cutoff = -std::numeric_limits<double>::infinity();
      for (const auto& c : cands) {
        if (pool.size() >= cfg_.beam_width && c.key < cutoff) break;
        const Beam* parent = len == 1 ? nullptr : &beams[c.parent];
        Beam nb = extend(parent, shortlist_ids[c.slot], z);
        if (!seen.insert(nb.ids).second) continue;
        double key = temperature > 0.0 ? c.key : nb.score;
        pool.emplace_back(key, std::move(nb));
        if (pool.size() == cfg_.beam_width) cutoff = c.key - 1e-9;
      }
      std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second.ids < b.second.ids;
      });
      if (pool.size() > cfg_.beam_width) pool.resize(cfg_.beam_width);

      beams.clear();
      for (auto& [_, b] : pool) {
        if (!have_best || better(b, best)) {
          best = b;
          have_best = true;
        }
        beams.push_back(std::move(b));
      }
      if (beams.empty()) break;
    }
    return best;
  }

  Decoding finish(const Beam& b, const Embedding& z) const {
    Decoding d;
    for (uint32_t id : b.ids) d.tokens.push_back(vocab_->token(id));
    d.text = join_tokens(d.tokens);
    d.reencode_similarity = inner_product(encoder_->encode_tokens(d.tokens), z);
    return d;
  }

  const Encoder* encoder_;
  const Vocabulary* vocab_;
  DecoderConfig cfg_;
};

// ---------------------------------------------------------------------------
// Decoder evaluation

/// Any vector-to-text inverse of the encoder.
using DecodeFn = std::function<std::string(const Embedding&)>;

inline DecodeFn as_decode_fn(const QueryDecoder& decoder) {
  return [&decoder](const Embedding& z) { return decoder.decode(z).text; };
}

/// SQuAD-style F1 over token multisets.
inline double bag_of_words_f1(std::span<const Token> reference, std::span<const Token> candidate) {
  if (reference.empty() && candidate.empty()) return 1.0;
  if (reference.empty() || candidate.empty()) return 0.0;
  std::map<Token, int> ref_counts;
  for (const auto& t : reference) ++ref_counts[t];
  int overlap = 0;
  for (const auto& t : candidate) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(candidate.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

inline double bag_of_words_f1(std::string_view reference, std::string_view candidate) {
  auto a = tokenize(reference);
  auto b = tokenize(candidate);
  return bag_of_words_f1(a, b);
}

struct RoundTripItem {
  std::string query_id;
  std::string decoded;
  double f1 = 0.0;
  double cosine = 0.0;
};

struct RoundTripReport {
  double mean_f1 = 0.0;
  double mean_cosine = 0.0;
  std::vector<RoundTripItem> items;
};

/// decode(encode(q)) for every query; F1 against the query tokens and the
/// cosine between the re-encoding and the original encoding.
inline RoundTripReport round_trip_eval(const std::vector<Query>& queries, const Encoder& encoder,
                                       const DecodeFn& decode) {
  if (queries.empty()) throw Error(ErrorCode::EmptyInput, "no queries");
  RoundTripReport report;
  report.items.resize(queries.size());
  parallel_for(queries.size(), [&](size_t i) {
    const auto& q = queries[i];
    auto z = encoder.encode(q.text);
    std::string decoded = decode(z);
    auto& item = report.items[i];
    item.query_id = q.query_id;
    item.decoded = decoded;
    item.f1 = bag_of_words_f1(q.text, decoded);
    auto dt = tokenize(decoded);
    item.cosine = dt.empty() ? 0.0 : inner_product(encoder.encode_tokens(dt), z);
  });
  for (const auto& item : report.items) {
    report.mean_f1 += item.f1;
    report.mean_cosine += item.cosine;
  }
  report.mean_f1 /= static_cast<double>(queries.size());
  report.mean_cosine /= static_cast<double>(queries.size());
  return report;
}

struct ParagraphToQueryReport {
  std::map<size_t, double> success_at;  // k -> fraction of gold paragraphs
  size_t paragraphs = 0;
};

/// For each distinct gold paragraph d (grade > 0), decodes encode(d.text) and
/// checks whether the decoded query retrieves d within the top k.
inline ParagraphToQueryReport paragraph_to_query_eval(const Qrels& qrels, const std::vector<Document>& corpus,
                                                      const IndexSnapshot& index, const Encoder& encoder,
                                                      const DecodeFn& decode,
                                                      std::vector<size_t> ks = {1, 3, 5}) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : corpus) by_id[d.doc_id] = &d;
  std::set<std::string> golds;
  for (const auto& [qid, docs] : qrels.all()) {
    for (const auto& [did, g] : docs) {
      if (g <= 0) continue;
      if (!by_id.count(did) || !index.find(did)) throw Error(ErrorCode::UnknownDocId, did);
      golds.insert(did);
    }
  }
  ParagraphToQueryReport report;
  report.paragraphs = golds.size();
  for (size_t k : ks) report.success_at[k] = 0.0;
  if (golds.empty()) return report;
  std::sort(ks.begin(), ks.end());
  size_t max_k = ks.back();
  std::vector<std::string> ids(golds.begin(), golds.end());
  std::vector<std::optional<size_t>> ranks(ids.size());
  parallel_for(ids.size(), [&](size_t i) {
    auto z = encoder.encode(by_id.at(ids[i])->text);
    auto tokens = tokenize(decode(z));
    if (tokens.empty()) return;
    ranks[i] = index.rank_of(encoder.encode_tokens(tokens), ids[i], max_k);
  });
  for (size_t k : ks) {
    size_t hits = 0;
    for (const auto& r : ranks) hits += (r && *r <= k) ? 1 : 0;
    report.success_at[k] = static_cast<double>(hits) / static_cast<double>(ids.size());
  }
  return report;
}

}  // namespace lirlab
