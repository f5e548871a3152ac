// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

// Builds an in-memory workspace from a corpus, then searches, decodes,
// traverses towards a document and asks for suggestions.
//
//   quickstart data/sample/corpus.jsonl "some query words" [doc_id]

#include <iostream>

#include "lirlab/evaluation.hpp"
#include "lirlab/workspace.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: quickstart CORPUS QUERY [DOC_ID]\n";
    return 1;
  }
  try {
    auto ws = lirlab::Workspace::build(lirlab::ingest_corpus(argv[1]), lirlab::EncoderConfig{});
    lirlab::Query query{"adhoc", argv[2]};

    auto z = ws->encoder().encode(query.text);
    auto hits = ws->index().search(z, 5);
    std::cout << "top 5 for \"" << query.text << "\"\n";
    for (const auto& e : hits.entries) std::cout << "  " << e.doc_id << "  " << e.score << '\n';

    lirlab::QueryDecoder decoder(ws->encoder(), ws->vocab());
    auto round_trip = decoder.decode(z);
    std::cout << "decode(encode(query)) = \"" << round_trip.text << "\" (cos " << round_trip.reencode_similarity
              << ")\n";

    std::string target = argc > 3 ? argv[3] : hits.entries.back().doc_id;
    std::cout << "path towards " << target << '\n';
    auto steps = lirlab::traverse_and_decode(query, target, 10, ws->index(), decoder, {{target, 1}});
    for (const auto& s : steps) {
      std::cout << "  kappa " << s.kappa << "  ndcg " << s.ndcg << "  " << s.decoding.text << '\n';
    }

    auto set = lirlab::suggest(*ws, query, lirlab::SuggestMethod::PrfTraversal, lirlab::SuggestOptions{});
    std::cout << "prf suggestions\n";
    for (const auto& s : set.suggestions) std::cout << "  " << s.text << '\n';
  } catch (const lirlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
