// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lirlab/corpus.hpp"
#include "lirlab/decoder.hpp"
#include "lirlab/embedding.hpp"
#include "lirlab/index.hpp"
#include "lirlab/suggesters.hpp"

namespace lirlab {

/// Everything derived from one corpus and one index snapshot. Immutable once
/// constructed and shared by reference across threads.
class Workspace {
 public:
  Workspace(std::vector<Document> docs, IndexSnapshot index)
      : docs_(std::move(docs)), index_(std::move(index)), encoder_(index_.encoder_config()) {
    for (const auto& d : docs_) by_id_[d.doc_id] = &d;
    if (by_id_.size() != index_.size()) {
      throw Error(ErrorCode::FormatError, "corpus has " + std::to_string(by_id_.size()) + " docs, index has " +
                                              std::to_string(index_.size()));
    }
    for (const auto& id : index_.doc_ids()) {
      if (!by_id_.count(id)) throw Error(ErrorCode::FormatError, "index doc " + id + " missing from corpus");
    }
    vocab_ = Vocabulary::from_documents(docs_, encoder_);
    stats_ = TermStats(docs_);
  }

  static std::unique_ptr<Workspace> build(std::vector<Document> docs, const EncoderConfig& cfg) {
    auto index = build_index(docs, cfg);
    return std::make_unique<Workspace>(std::move(docs), std::move(index));
  }

  static std::unique_ptr<Workspace> open(const std::string& corpus_path, const std::string& index_path) {
    return std::make_unique<Workspace>(ingest_corpus(corpus_path), IndexSnapshot::load(index_path));
  }

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const std::vector<Document>& docs() const { return docs_; }
  const IndexSnapshot& index() const { return index_; }
  const Encoder& encoder() const { return encoder_; }
  const Vocabulary& vocab() const { return vocab_; }
  const TermStats& term_stats() const { return stats_; }

  const Document* find_doc(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : it->second;
  }

  const Document& doc(const std::string& id) const {
    auto* d = find_doc(id);
    if (!d) throw Error(ErrorCode::UnknownDocId, id);
    return *d;
  }

 private:
  std::vector<Document> docs_;
  IndexSnapshot index_;
  Encoder encoder_;
  Vocabulary vocab_;
  TermStats stats_;
  std::map<std::string, const Document*> by_id_;
};

}  // namespace lirlab
