// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lirlab/common.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/embedding.hpp"

namespace lirlab {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

struct SearchResult {
  std::vector<ScoredDoc> entries;  // descending score, ties by ascending doc_id
  size_t k = 0;
};

/// Immutable document matrix for exact maximum-inner-product search.
/// Rows are stored as f32 in ascending doc_id order.
class IndexSnapshot {
 public:
  static constexpr char kMagic[4] = {'L', 'I', 'R', 'X'};
  static constexpr uint32_t kFormatVersion = 1;

  IndexSnapshot() = default;

  IndexSnapshot(std::vector<std::string> doc_ids, std::vector<float> matrix, EncoderConfig cfg)
      : doc_ids_(std::move(doc_ids)), matrix_(std::move(matrix)), cfg_(cfg) {
    if (matrix_.size() != doc_ids_.size() * cfg_.dim) {
      throw Error(ErrorCode::FormatError, "matrix size does not match doc count * dim");
    }
    if (!std::is_sorted(doc_ids_.begin(), doc_ids_.end()) ||
        std::adjacent_find(doc_ids_.begin(), doc_ids_.end()) != doc_ids_.end()) {
      throw Error(ErrorCode::FormatError, "doc ids must be strictly ascending");
    }
  }

  size_t size() const { return doc_ids_.size(); }
  uint32_t dim() const { return cfg_.dim; }
  const EncoderConfig& encoder_config() const { return cfg_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const std::string& doc_id(size_t row) const { return doc_ids_.at(row); }

  std::span<const float> row(size_t i) const {
    return std::span<const float>(matrix_).subspan(i * cfg_.dim, cfg_.dim);
  }

  Embedding embedding(size_t i) const {
    auto r = row(i);
    return Embedding(std::vector<double>(r.begin(), r.end()));
  }

  std::optional<size_t> find(std::string_view doc_id) const {
    auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), doc_id);
    if (it == doc_ids_.end() || *it != doc_id) return std::nullopt;
    return static_cast<size_t>(it - doc_ids_.begin());
  }

  size_t require(std::string_view doc_id) const {
    auto r = find(doc_id);
    if (!r) throw Error(ErrorCode::UnknownDocId, std::string(doc_id));
    return *r;
  }

  /// Inner product of every row with q, summed in coordinate order.
  std::vector<double> scores(const Embedding& q) const {
    check_dim(q);
    std::vector<double> out(size());
    for (size_t i = 0; i < size(); ++i) {
      const float* r = matrix_.data() + i * cfg_.dim;
      double s = 0.0;
      for (uint32_t j = 0; j < cfg_.dim; ++j) s += static_cast<double>(r[j]) * q.values[j];
      out[i] = s;
    }
    return out;
  }

  SearchResult search(const Embedding& q, size_t k) const {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    auto s = scores(q);
    std::vector<size_t> order(size());
    std::iota(order.begin(), order.end(), size_t{0});
    size_t depth = std::min(k, order.size());
    // Row order is doc_id order, so the index is the tie-breaker.
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(depth), order.end(),
                      [&](size_t a, size_t b) { return s[a] != s[b] ? s[a] > s[b] : a < b; });
    SearchResult result;
    result.k = k;
    result.entries.reserve(depth);
    for (size_t i = 0; i < depth; ++i) result.entries.push_back({doc_ids_[order[i]], s[order[i]]});
    return result;
  }

  /// 1-based rank of doc_id if it falls within the top max_k.
  std::optional<size_t> rank_of(const Embedding& q, std::string_view doc_id, size_t max_k) const {
    size_t target = require(doc_id);
    auto s = scores(q);
    size_t rank = 1;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] > s[target] || (s[i] == s[target] && i < target)) ++rank;
    }
    if (rank > max_k) return std::nullopt;
    return rank;
  }

  // -------------------------------------------------------------------------
  // Persistence. Layout (all integers little-endian):
  //   "LIRX" | version u32 | dim u32 | doc count u64 | cfg json len u32 | cfg json
  //   | per doc: id len u32 + UTF-8 bytes | f32 row-major matrix

  std::string serialize() const {
    std::string out(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, cfg_.dim);
    put_u64(out, size());
    std::string cfg_json = nlohmann::json(cfg_).dump();
    put_u32(out, static_cast<uint32_t>(cfg_json.size()));
    out += cfg_json;
    for (const auto& id : doc_ids_) {
      put_u32(out, static_cast<uint32_t>(id.size()));
      out += id;
    }
    for (float v : matrix_) put_u32(out, std::bit_cast<uint32_t>(v));
    return out;
  }

  static IndexSnapshot deserialize(std::string_view bytes) {
    size_t pos = 0;
    auto need = [&](size_t n) {
      if (bytes.size() - pos < n) throw Error(ErrorCode::FormatError, "truncated index file");
    };
    need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorCode::FormatError, "bad magic");
    pos = 4;
    need(20);
    uint32_t version = get_u32(bytes, pos);
    if (version != kFormatVersion) {
      throw Error(ErrorCode::FormatError, "unsupported version " + std::to_string(version));
    }
    uint32_t dim = get_u32(bytes, pos);
    uint64_t count = get_u64(bytes, pos);
    if (count > bytes.size() / 4) throw Error(ErrorCode::FormatError, "doc count exceeds file size");
    uint32_t cfg_len = get_u32(bytes, pos);
    need(cfg_len);
    EncoderConfig cfg;
    try {
      cfg = nlohmann::json::parse(bytes.substr(pos, cfg_len)).get<EncoderConfig>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, std::string("encoder config: ") + e.what());
    }
    pos += cfg_len;
    if (cfg.dim != dim) throw Error(ErrorCode::FormatError, "header dim disagrees with config");
    std::vector<std::string> ids;
    ids.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
      need(4);
      uint32_t len = get_u32(bytes, pos);
      need(len);
      ids.emplace_back(bytes.substr(pos, len));
      pos += len;
    }
    need(count * dim * 4);
    std::vector<float> matrix(count * dim);
    for (auto& v : matrix) v = std::bit_cast<float>(get_u32(bytes, pos));
    if (pos != bytes.size()) throw Error(ErrorCode::FormatError, "trailing bytes in index file");
    return IndexSnapshot(std::move(ids), std::move(matrix), cfg);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
  }

  static IndexSnapshot load(const std::string& path) {
    auto in = open_input(path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
  }

 private:
  void check_dim(const Embedding& q) const {
    if (q.dim() != cfg_.dim) {
      throw Error(ErrorCode::DimMismatch,
                  "query dim " + std::to_string(q.dim()) + " vs index dim " + std::to_string(cfg_.dim));
    }
  }

  static void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  static void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  static uint32_t get_u32(std::string_view b, size_t& pos) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t{static_cast<unsigned char>(b[pos + i])} << (8 * i);
    pos += 4;
    return v;
  }
  static uint64_t get_u64(std::string_view b, size_t& pos) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t{static_cast<unsigned char>(b[pos + i])} << (8 * i);
    pos += 8;
    return v;
  }

  std::vector<std::string> doc_ids_;
  std::vector<float> matrix_;
  EncoderConfig cfg_;
};

/// Encodes every document with the shared encoder; rows in ascending doc_id.
inline IndexSnapshot build_index(const std::vector<Document>& docs, const EncoderConfig& cfg) {
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents to index");
  Encoder encoder(cfg);
  std::vector<size_t> order(docs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return docs[a].doc_id < docs[b].doc_id; });
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (size_t i : order) ids.push_back(docs[i].doc_id);
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::DuplicateDocId, *std::adjacent_find(ids.begin(), ids.end()));
  }
  std::vector<float> matrix(docs.size() * cfg.dim);
  parallel_for(order.size(), [&](size_t row) {
    const auto& doc = docs[order[row]];
    auto tokens = tokenize(doc.text);
    if (tokens.empty()) throw Error(ErrorCode::EmptyText, doc.doc_id);
    auto e = encoder.encode_tokens(tokens);
    for (uint32_t j = 0; j < cfg.dim; ++j) matrix[row * cfg.dim + j] = static_cast<float>(e.values[j]);
  });
  return IndexSnapshot(std::move(ids), std::move(matrix), cfg);
}

}  // namespace lirlab
