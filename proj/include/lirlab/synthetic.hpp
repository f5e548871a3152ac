// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "lirlab/common.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/embedding.hpp"
#include "lirlab/index.hpp"

namespace lirlab {

/// Parameters of a synthetic retrieval world. Documents are grouped into
/// topics of `docs_per_topic`; each topic owns core terms, each document owns
/// signature terms, and each topic owns "query-side" terms that its own
/// documents rarely use but other topics' documents mention. Queries built
/// from query-side terms suffer vocabulary mismatch against their gold
/// paragraph, which is what reformulation has to repair.
struct SyntheticConfig {
  size_t num_docs = 1000;
  size_t num_queries = 200;
  size_t docs_per_topic = 10;
  uint64_t seed = 42;
  double hard_fraction = 0.55;
  double medium_fraction = 0.25;
  EncoderConfig encoder;
};

struct SyntheticCorpus {
  std::vector<Document> docs;
  std::vector<Query> queries;
  Qrels qrels;
};

namespace detail {

inline const std::vector<std::string>& synthetic_function_words() {
  static const std::vector<std::string> words{"the", "of", "and", "a",  "in",   "is",   "to",  "for",
                                              "with", "on", "as", "by", "from", "that", "at", "its"};
  return words;
}

inline const std::vector<std::string>& synthetic_generic_words() {
  static const std::vector<std::string> words{
      "price",   "cost",     "city",     "state",    "area",     "water",      "system",   "history",
      "company", "market",   "energy",   "health",   "food",     "music",      "school",   "river",
      "island",  "car",      "engine",   "county",   "law",      "court",      "cell",     "protein",
      "rate",    "average",  "salary",   "weather",  "population", "distance", "year",     "number",
      "type",    "name",     "definition", "meaning", "symptoms", "treatment", "cause",    "effect",
      "process", "example",  "size",     "weight",   "length",   "age",        "color",    "language",
      "team",    "game",     "season",   "film",     "book",     "song",       "album",    "war",
      "king",    "president", "church",  "university", "hospital", "bank",     "tax",      "insurance",
      "loan",    "credit",   "phone",    "computer", "software", "program",    "network",  "server",
      "plant",   "animal",   "species",  "tree",     "flower",   "soil",       "rock",     "mineral",
      "ocean",   "lake",     "mountain", "valley"};
  return words;
}

/// Pronounceable pseudo-words, distinct from each other and from the
/// generic and function word lists.
class WordForge {
 public:
  explicit WordForge(Rng& rng) : rng_(rng) {
    for (const auto& w : synthetic_function_words()) used_.insert(w);
    for (const auto& w : synthetic_generic_words()) used_.insert(w);
  }

  std::string next() {
    static const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                    "br", "dr", "kl", "pr", "st", "tr", "sh", "ch", "gl", "sk"};
    static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
    static const char* kCodas[] = {"", "", "", "n", "r", "s", "l", "x", "m"};
    for (;;) {
      size_t syllables = 2 + rng_.below(2);
      std::string w;
      for (size_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng_.below(std::size(kOnsets))];
        w += kVowels[rng_.below(std::size(kVowels))];
      }
      w += kCodas[rng_.below(std::size(kCodas))];
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.below(v.size())];
}

template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

inline std::string make_id(char prefix, size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, n);
  return buf;
}

}  // namespace detail

/// Deterministically generates a corpus, queries and single-gold qrels.
/// Query difficulty is verified against the real encoder: "hard" queries
/// are resampled until the gold paragraph falls outside the top 10.
inline SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg) {
  using namespace detail;
  if (cfg.num_docs == 0 || cfg.docs_per_topic == 0) throw Error(ErrorCode::InvalidArgument, "empty synthetic world");
  Rng rng(cfg.seed);
  WordForge forge(rng);
  const auto& function_words = synthetic_function_words();
  const auto& generic_words = synthetic_generic_words();

  const size_t num_topics = (cfg.num_docs + cfg.docs_per_topic - 1) / cfg.docs_per_topic;
  struct Topic {
    std::vector<std::string> core;
    std::vector<std::string> query_side;
  };
  std::vector<Topic> topics(num_topics);
  for (auto& t : topics) {
    for (int i = 0; i < 6; ++i) t.core.push_back(forge.next());
    for (int i = 0; i < 3; ++i) t.query_side.push_back(forge.next());
  }

  struct DocInfo {
    size_t topic;
    std::vector<std::string> signature;
    std::vector<std::string> core_used;
  };
  SyntheticCorpus out;
  std::vector<DocInfo> info(cfg.num_docs);
  for (size_t i = 0; i < cfg.num_docs; ++i) {
    auto& di = info[i];
    di.topic = i / cfg.docs_per_topic;
    const auto& topic = topics[di.topic];
    di.signature = {forge.next(), forge.next()};
    std::vector<std::string> words;
    for (int r = 0; r < 3; ++r) words.push_back(di.signature[0]);
    for (int r = 0; r < 2; ++r) words.push_back(di.signature[1]);
    std::vector<std::string> core = topic.core;
    shuffle(rng, core);
    size_t n_core = 3 + rng.below(3);
    di.core_used.assign(core.begin(), core.begin() + static_cast<std::ptrdiff_t>(n_core));
    for (const auto& c : di.core_used) words.push_back(c);
    words.push_back(di.core_used.front());
    for (int g = 0; g < 5; ++g) words.push_back(pick(rng, generic_words));
    for (int f = 0; f < 8; ++f) words.push_back(pick(rng, function_words));
    // Mentions of other topics' query-side vocabulary create the mismatch.
    for (int m = 0; m < 3; ++m) {
      size_t other = rng.below(num_topics);
      if (other == di.topic) other = (other + 1) % num_topics;
      words.push_back(pick(rng, topics[other].query_side));
    }
    shuffle(rng, words);
    std::string text;
    for (const auto& w : words) {
      if (!text.empty()) text.push_back(' ');
      text += w;
    }
    if (!text.empty()) text[0] = static_cast<char>(text[0] - 'a' + 'A');
    text.push_back('.');
    Document doc{make_id('d', i, 5), text, std::nullopt};
    doc.title = di.core_used.front() + " " + di.signature[0];
    out.docs.push_back(std::move(doc));
  }

  auto index = build_index(out.docs, cfg.encoder);
  Encoder encoder(cfg.encoder);

  std::vector<size_t> gold_order(cfg.num_docs);
  for (size_t i = 0; i < cfg.num_docs; ++i) gold_order[i] = i;
  shuffle(rng, gold_order);

  const auto n_hard = static_cast<size_t>(cfg.hard_fraction * static_cast<double>(cfg.num_queries) + 0.5);
  const auto n_medium = static_cast<size_t>(cfg.medium_fraction * static_cast<double>(cfg.num_queries) + 0.5);
  for (size_t qi = 0; qi < cfg.num_queries; ++qi) {
    size_t gold = gold_order[qi % gold_order.size()];
    const auto& di = info[gold];
    const auto& topic = topics[di.topic];
    const std::string& gold_id = out.docs[gold].doc_id;
    std::string text;
    if (qi < n_hard) {
      for (int attempt = 0; attempt < 32; ++attempt) {
        std::vector<std::string> qs = topic.query_side;
        shuffle(rng, qs);
        std::vector<std::string> words{qs[0], qs[1]};
        if (rng.below(2) == 0) words.push_back(pick(rng, generic_words));
        text = words[0];
        for (size_t w = 1; w < words.size(); ++w) text += " " + words[w];
        if (!index.rank_of(encoder.encode(text), gold_id, 10)) break;
      }
    } else if (qi < n_hard + n_medium) {
      std::vector<std::string> core = di.core_used;
      shuffle(rng, core);
      text = core[0] + " " + core[1] + " " + pick(rng, generic_words);
    } else {
      text = pick(rng, di.core_used) + " " + di.signature[0] + " " + pick(rng, generic_words);
    }
    std::string qid = make_id('q', qi, 4);
    out.queries.push_back({qid, text});
    out.qrels.add(qid, gold_id, 1);
  }
  // Interleave difficulty classes so any prefix of the query list is mixed.
  std::vector<size_t> perm(out.queries.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  shuffle(rng, perm);
  std::vector<Query> mixed;
  Qrels mixed_qrels;
  for (size_t i = 0; i < perm.size(); ++i) {
    auto q = out.queries[perm[i]];
    auto gold = *out.qrels.gold(q.query_id);
    q.query_id = make_id('q', i, 4);
    mixed_qrels.add(q.query_id, gold, 1);
    mixed.push_back(std::move(q));
  }
  out.queries = std::move(mixed);
  out.qrels = std::move(mixed_qrels);
  return out;
}

}  // namespace lirlab
