// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lirlab/common.hpp"
#include "lirlab/embedding.hpp"
#include "lirlab/index.hpp"

namespace lirlab {

// ---------------------------------------------------------------------------
// nDCG

/// Graded-gain nDCG: DCG = sum_i (2^g_i - 1) / log2(i + 1) over the top k,
/// normalized by the ideal ordering of all judged docs at the same depth.
/// Unjudged docs have grade 0; returns 0 when nothing relevant is judged.
inline double ndcg_at_k(const SearchResult& ranking, const std::map<std::string, int>& labels,
                        size_t k = 10) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  double dcg = 0.0;
  size_t depth = std::min(k, ranking.entries.size());
  for (size_t i = 0; i < depth; ++i) {
    auto it = labels.find(ranking.entries[i].doc_id);
    int g = it == labels.end() ? 0 : it->second;
    if (g > 0) dcg += (std::exp2(g) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<int> grades;
  for (const auto& [_, g] : labels) {
    if (g > 0) grades.push_back(g);
  }
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double idcg = 0.0;
  for (size_t i = 0; i < std::min(k, grades.size()); ++i) {
    idcg += (std::exp2(grades[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

inline const std::vector<size_t>& default_best_of_ks() {
  static const std::vector<size_t> ks{1, 3, 5, 10};
  return ks;
}

/// Max of the original query's nDCG and the first k suggestion nDCGs.
inline std::map<size_t, double> best_of_k(std::span<const double> suggestion_ndcgs, double original_ndcg,
                                          std::span<const size_t> ks) {
  std::map<size_t, double> out;
  for (size_t k : ks) {
    double best = original_ndcg;
    for (size_t i = 0; i < std::min(k, suggestion_ndcgs.size()); ++i) {
      best = std::max(best, suggestion_ndcgs[i]);
    }
    out[k] = best;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BLEU

namespace detail {

using NgramCounts = std::map<std::vector<Token>, int>;

inline NgramCounts ngram_counts(const std::vector<Token>& tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<Token>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace detail

/// Sentence BLEU-4 with uniform weights, "method 1" smoothing (a zero
/// n-gram match count becomes 0.1) and the closest-reference brevity
/// penalty. A hypothesis without any unigram match scores exactly 0.
inline double sentence_bleu(const std::vector<std::vector<Token>>& references,
                            const std::vector<Token>& hypothesis) {
  constexpr size_t kMaxOrder = 4;
  constexpr double kEpsilon = 0.1;
  if (hypothesis.empty() || references.empty()) return 0.0;
  std::array<double, kMaxOrder> log_p{};
  for (size_t n = 1; n <= kMaxOrder; ++n) {
    auto hyp = detail::ngram_counts(hypothesis, n);
    std::map<std::vector<Token>, int> max_ref;
    for (const auto& ref : references) {
      for (const auto& [g, c] : detail::ngram_counts(ref, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    int matched = 0;
    int total = 0;
    for (const auto& [g, c] : hyp) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    double denom = std::max(1, total);
    if (n == 1 && matched == 0) return 0.0;
    log_p[n - 1] = std::log(matched == 0 ? kEpsilon / denom : matched / denom);
  }
  const double hyp_len = static_cast<double>(hypothesis.size());
  size_t ref_len = references.front().size();
  for (const auto& ref : references) {
    auto diff = [&](size_t r) { return std::abs(static_cast<double>(r) - hyp_len); };
    if (diff(ref.size()) < diff(ref_len) || (diff(ref.size()) == diff(ref_len) && ref.size() < ref_len)) {
      ref_len = ref.size();
    }
  }
  double bp = hyp_len > static_cast<double>(ref_len) ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / hyp_len);
  double sum = 0.0;
  for (double lp : log_p) sum += lp / kMaxOrder;
  return bp * std::exp(sum);
}

/// Mean BLEU of each suggestion against all the others, scaled to [0, 100].
inline double self_bleu(std::span<const std::string> suggestions) {
  if (suggestions.size() < 2) {
    throw Error(ErrorCode::TooFewSuggestions, "self-BLEU needs at least 2 suggestions");
  }
  std::vector<std::vector<Token>> tokenized;
  tokenized.reserve(suggestions.size());
  for (const auto& s : suggestions) tokenized.push_back(tokenize(s));
  double total = 0.0;
  for (size_t i = 0; i < tokenized.size(); ++i) {
    std::vector<std::vector<Token>> refs;
    for (size_t j = 0; j < tokenized.size(); ++j) {
      if (j != i) refs.push_back(tokenized[j]);
    }
    total += sentence_bleu(refs, tokenized[i]);
  }
  return 100.0 * total / static_cast<double>(tokenized.size());
}

// ---------------------------------------------------------------------------
// Perplexity proxy

/// Add-delta smoothed n-gram model over a closed vocabulary plus <unk>.
/// P(w | ctx) = (c(ctx, w) + delta) / (c(ctx) + delta * (|V| + 1)).
class NGramLM {
 public:
  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kBos = "<s>";

  explicit NGramLM(size_t order = 3, double delta = 0.1) : order_(order), delta_(delta) {
    if (order_ < 1) throw Error(ErrorCode::InvalidArgument, "order must be >= 1");
    if (!(delta_ > 0.0 && delta_ <= 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must be in (0, 1]");
  }

  /// Model with a fixed vocabulary and no counts: uniform over vocab + <unk>.
  static NGramLM uniform(const std::set<Token>& vocabulary, size_t order = 3, double delta = 0.1) {
    NGramLM lm(order, delta);
    lm.vocab_.insert(vocabulary.begin(), vocabulary.end());
    lm.vocab_.erase(kUnk);
    return lm;
  }

  /// Adds sentences; the vocabulary grows with every new token.
  void train(const std::vector<std::vector<Token>>& sentences) {
    for (const auto& s : sentences) {
      for (const auto& t : s) vocab_.insert(t);
    }
    for (const auto& s : sentences) {
      auto ctx = initial_context();
      for (const auto& t : s) {
        ++joint_[key(ctx, t)];
        ++context_[key(ctx)];
        advance(ctx, t);
      }
    }
  }

  size_t order() const { return order_; }
  double delta() const { return delta_; }

  /// Vocabulary size including <unk>.
  size_t vocab_size() const { return vocab_.size() + 1; }

  bool in_vocab(const Token& t) const { return vocab_.count(t) > 0; }

  double prob(std::span<const Token> context, const Token& token) const {
    const Token& w = in_vocab(token) ? token : unk();
    std::vector<Token> ctx = initial_context();
    for (const auto& c : context) advance(ctx, in_vocab(c) || c == kBos ? c : unk());
    double cw = lookup(joint_, key(ctx, w));
    double c = lookup(context_, key(ctx));
    return (cw + delta_) / (c + delta_ * static_cast<double>(vocab_size()));
  }

  /// Sum of log P(token_i | previous order-1 tokens) with <s> padding.
  double log_prob(const std::vector<Token>& tokens) const {
    double lp = 0.0;
    for (size_t i = 0; i < tokens.size(); ++i) {
      size_t from = i >= order_ - 1 ? i - (order_ - 1) : 0;
      lp += std::log(prob(std::span<const Token>(tokens).subspan(from, i - from), tokens[i]));
    }
    return lp;
  }

 private:
  static const Token& unk() {
    static const Token u = kUnk;
    return u;
  }

  std::vector<Token> initial_context() const { return std::vector<Token>(order_ - 1, kBos); }

  void advance(std::vector<Token>& ctx, const Token& t) const {
    if (ctx.empty()) return;
    ctx.erase(ctx.begin());
    ctx.push_back(in_vocab(t) ? t : t == kBos ? t : unk());
  }

  static std::string key(const std::vector<Token>& ctx, const Token& w = {}) {
    std::string k;
    for (const auto& c : ctx) {
      k += c;
      k.push_back('\x1f');
    }
    k += w;
    return k;
  }

  static double lookup(const std::unordered_map<std::string, uint64_t>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : static_cast<double>(it->second);
  }

  size_t order_;
  double delta_;
  std::set<Token> vocab_;
  std::unordered_map<std::string, uint64_t> joint_;
  std::unordered_map<std::string, uint64_t> context_;
};

/// exp(-(1/N) sum log P) for one text.
inline double text_perplexity(std::string_view text, const NGramLM& lm) {
  auto tokens = tokenize(text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyText, "cannot score empty text");
  return std::exp(-lm.log_prob(tokens) / static_cast<double>(tokens.size()));
}

/// Mean per-token perplexity over texts.
inline double perplexity(std::span<const std::string> texts, const NGramLM& lm) {
  if (texts.empty()) throw Error(ErrorCode::EmptyInput, "no texts to score");
  double total = 0.0;
  for (const auto& t : texts) total += text_perplexity(t, lm);
  return total / static_cast<double>(texts.size());
}

// ---------------------------------------------------------------------------
// Bootstrap

struct BootstrapSummary {
  double mean = 0.0;
  double std = 0.0;
  double p025 = 0.0;
  double p975 = 0.0;
};

/// Linear-interpolated percentile of sorted values, q in [0, 100].
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

/// Resamples the per-query values with replacement; reports the sample mean
/// and the population std plus 2.5/97.5 percentiles of the resampled means.
inline BootstrapSummary bootstrap_mean(std::span<const double> values, size_t resamples, uint64_t seed) {
  BootstrapSummary out;
  if (values.empty() || resamples == 0) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (size_t i = 0; i < values.size(); ++i) s += values[rng.below(values.size())];
    m = s / static_cast<double>(values.size());
  }
  double mm = 0.0;
  for (double m : means) mm += m;
  mm /= static_cast<double>(resamples);
  double var = 0.0;
  for (double m : means) var += (m - mm) * (m - mm);
  out.std = std::sqrt(var / static_cast<double>(resamples));
  std::sort(means.begin(), means.end());
  out.p025 = percentile_sorted(means, 2.5);
  out.p975 = percentile_sorted(means, 97.5);
  return out;
}

}  // namespace lirlab
