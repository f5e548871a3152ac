// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lirlab/common.hpp"

namespace lirlab {

struct Document {
  std::string doc_id;
  std::string text;
  std::optional<std::string> title;

  bool operator==(const Document&) const = default;
};

struct Query {
  std::string query_id;
  std::string text;

  bool operator==(const Query&) const = default;
};

/// Graded relevance labels, query_id -> doc_id -> grade.
class Qrels {
 public:
  void add(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) throw Error(ErrorCode::ParseError, "negative grade for " + query_id);
    labels_[query_id][doc_id] = grade;
  }

  int grade(const std::string& query_id, const std::string& doc_id) const {
    auto q = labels_.find(query_id);
    if (q == labels_.end()) return 0;
    auto d = q->second.find(doc_id);
    return d == q->second.end() ? 0 : d->second;
  }

  /// Labels for one query; empty when the query is unjudged.
  const std::map<std::string, int>& for_query(const std::string& query_id) const {
    static const std::map<std::string, int> empty;
    auto q = labels_.find(query_id);
    return q == labels_.end() ? empty : q->second;
  }

  /// Highest-graded relevant doc; ties go to the smallest doc_id.
  std::optional<std::string> gold(const std::string& query_id) const {
    std::optional<std::string> best;
    int best_grade = 0;
    for (const auto& [doc, g] : for_query(query_id)) {
      if (g > best_grade) {
        best = doc;
        best_grade = g;
      }
    }
    return best;
  }

  const std::map<std::string, std::map<std::string, int>>& all() const { return labels_; }
  bool empty() const { return labels_.empty(); }

 private:
  std::map<std::string, std::map<std::string, int>> labels_;
};

// ---------------------------------------------------------------------------
// Readers

/// One JSON object per line: {"doc_id": str, "text": str, "title": str?}.
/// Blank lines are skipped.
inline std::vector<Document> read_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Document doc;
    try {
      auto j = nlohmann::json::parse(line);
      doc.doc_id = j.at("doc_id").get<std::string>();
      doc.text = j.at("text").get<std::string>();
      if (j.contains("title") && !j["title"].is_null()) doc.title = j["title"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (doc.text.empty()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty text");
    }
    if (!seen.insert(doc.doc_id).second) throw Error(ErrorCode::DuplicateDocId, doc.doc_id);
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

inline std::vector<Document> ingest_corpus(const std::string& path) {
  auto in = open_input(path);
  return read_corpus(in);
}

/// TSV "query_id<TAB>text".
inline std::vector<Query> read_queries(std::istream& in) {
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(ErrorCode::ParseError, "queries line " + std::to_string(line_no));
    }
    Query q{line.substr(0, tab), line.substr(tab + 1)};
    if (!seen.insert(q.query_id).second) {
      throw Error(ErrorCode::ParseError, "duplicate query_id " + q.query_id);
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

inline std::vector<Query> read_queries(const std::string& path) {
  auto in = open_input(path);
  return read_queries(in);
}

/// TREC qrels: "query_id 0 doc_id grade".
inline Qrels read_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string qid, iter, did;
    int grade = 0;
    if (!(fields >> qid)) continue;
    if (!(fields >> iter >> did >> grade)) {
      throw Error(ErrorCode::ParseError, "qrels line " + std::to_string(line_no));
    }
    qrels.add(qid, did, grade);
  }
  return qrels;
}

inline Qrels read_qrels(const std::string& path) {
  auto in = open_input(path);
  return read_qrels(in);
}

// ---------------------------------------------------------------------------
// Writers

inline void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) {
    nlohmann::json j{{"doc_id", d.doc_id}, {"text", d.text}};
    if (d.title) j["title"] = *d.title;
    out << j.dump() << '\n';
  }
}

inline void write_queries(std::ostream& out, const std::vector<Query>& queries) {
  for (const auto& q : queries) out << q.query_id << '\t' << q.text << '\n';
}

inline void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [qid, docs] : qrels.all()) {
    for (const auto& [did, g] : docs) out << qid << " 0 " << did << ' ' << g << '\n';
  }
}

}  // namespace lirlab
