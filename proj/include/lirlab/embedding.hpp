// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lirlab/common.hpp"

namespace lirlab {

using Token = std::string;

/// Lowercases ASCII letters and splits on every ASCII character that is not
/// a letter or digit. Bytes >= 0x80 (UTF-8 sequences) are kept inside words.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  Token current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')) {
      current.push_back(ch);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

struct EncoderConfig {
  uint32_t dim = 256;
  uint64_t seed = 0;
  uint32_t ngram_order = 3;
  bool use_word_unigrams = true;

  void validate() const {
    if (dim < 8) throw Error(ErrorCode::InvalidArgument, "encoder dim must be >= 8");
    if (ngram_order < 1) throw Error(ErrorCode::InvalidArgument, "ngram_order must be >= 1");
  }

  bool operator==(const EncoderConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = nlohmann::json{{"dim", c.dim},
                     {"seed", c.seed},
                     {"ngram_order", c.ngram_order},
                     {"use_word_unigrams", c.use_word_unigrams}};
}

inline void from_json(const nlohmann::json& j, EncoderConfig& c) {
  j.at("dim").get_to(c.dim);
  j.at("seed").get_to(c.seed);
  j.at("ngram_order").get_to(c.ngram_order);
  j.at("use_word_unigrams").get_to(c.use_word_unigrams);
}

/// A point in the shared query/document space.
struct Embedding {
  std::vector<double> values;

  Embedding() = default;
  explicit Embedding(std::vector<double> v) : values(std::move(v)) {}

  size_t dim() const { return values.size(); }

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }

  bool is_normalized(double tol = 1e-6) const { return std::abs(norm() - 1.0) <= tol; }

  bool operator==(const Embedding&) const = default;
};

inline double inner_product(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double inner_product(const Embedding& a, const Embedding& b) {
  return inner_product(std::span<const double>(a.values), std::span<const double>(b.values));
}

/// Scales to unit length. A zero vector is returned unchanged.
inline Embedding normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  if (s > 0.0) {
    double n = std::sqrt(s);
    for (double& x : v) x /= n;
  }
  return Embedding(std::move(v));
}

/// Signed, unnormalized feature counts of a text: coordinate -> integer
/// weight. Integer accumulation makes encodings exact and additive over
/// tokens, which the decoder relies on.
struct SparseCounts {
  std::vector<std::pair<uint32_t, int32_t>> entries;  // ascending coordinate, nonzero weight

  int64_t squared_norm() const {
    int64_t s = 0;
    for (auto [_, w] : entries) s += int64_t{w} * w;
    return s;
  }
};

/// Seeded signed-hash bag-of-features encoder shared by queries and documents.
///
/// Features of a token: the word unigram "w:<token>" (optional) and the
/// character n-grams of "#<token>#" prefixed with "c:", taken over UTF-8 code
/// points. A padded token shorter than n contributes itself as one n-gram.
/// Each feature f adds sign(h2(f)) * tf(f) to coordinate h1(f) mod dim.
class Encoder {
 public:
  Encoder() : Encoder(EncoderConfig{}) {}

  explicit Encoder(EncoderConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    sign_seed_ = cfg_.seed ^ 0x9e3779b97f4a7c15ULL;
  }

  const EncoderConfig& config() const { return cfg_; }
  uint32_t dim() const { return cfg_.dim; }

  /// Feature multiset of a token sequence, keyed and iterated in sorted order.
  std::map<std::string, int64_t> features(std::span<const Token> tokens) const {
    std::map<std::string, int64_t> tf;
    for (const auto& t : tokens) add_token_features(t, tf);
    return tf;
  }

  uint32_t coordinate(std::string_view feature) const {
    return static_cast<uint32_t>(stable_hash(cfg_.seed, feature) % cfg_.dim);
  }

  int sign(std::string_view feature) const {
    return (stable_hash(sign_seed_, feature) >> 63) ? -1 : 1;
  }

  /// Unnormalized integer vector of a token sequence.
  std::vector<int64_t> raw(std::span<const Token> tokens) const {
    std::vector<int64_t> v(cfg_.dim, 0);
    for (const auto& [f, count] : features(tokens)) v[coordinate(f)] += sign(f) * count;
    return v;
  }

  SparseCounts sparse(std::span<const Token> tokens) const {
    auto v = raw(tokens);
    SparseCounts out;
    for (uint32_t i = 0; i < v.size(); ++i) {
      if (v[i] != 0) out.entries.emplace_back(i, static_cast<int32_t>(v[i]));
    }
    return out;
  }

  Embedding encode_tokens(std::span<const Token> tokens) const {
    if (tokens.empty()) throw Error(ErrorCode::EmptyText, "text has no tokens");
    auto v = raw(tokens);
    int64_t sq = 0;
    for (int64_t x : v) sq += x * x;
    std::vector<double> out(cfg_.dim, 0.0);
    if (sq == 0) return Embedding(std::move(out));
    double n = std::sqrt(static_cast<double>(sq));
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]) / n;
    return Embedding(std::move(out));
  }

  Embedding encode(std::string_view text) const {
    auto tokens = tokenize(text);
    return encode_tokens(tokens);
  }

 private:
  static std::vector<std::string> code_points(std::string_view s) {
    std::vector<std::string> cps;
    for (size_t i = 0; i < s.size();) {
      auto c = static_cast<unsigned char>(s[i]);
      size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 1;
      len = std::min(len, s.size() - i);
      cps.emplace_back(s.substr(i, len));
      i += len;
    }
    return cps;
  }

  void add_token_features(const Token& token, std::map<std::string, int64_t>& tf) const {
    if (cfg_.use_word_unigrams) tf["w:" + token] += 1;
    auto cps = code_points(token);
    cps.insert(cps.begin(), "#");
    cps.emplace_back("#");
    const size_t n = cfg_.ngram_order;
    if (cps.size() <= n) {
      std::string g = "c:";
      for (const auto& cp : cps) g += cp;
      tf[g] += 1;
      return;
    }
    for (size_t i = 0; i + n <= cps.size(); ++i) {
      std::string g = "c:";
      for (size_t j = i; j < i + n; ++j) g += cps[j];
      tf[g] += 1;
    }
  }

  EncoderConfig cfg_;
  uint64_t sign_seed_ = 0;
};

}  // namespace lirlab
