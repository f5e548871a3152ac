// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

// Writes a synthetic corpus, queries and qrels into a directory.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lirlab/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic retrieval fixture"};
  lirlab::SyntheticConfig cfg;
  std::string out_dir;
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--docs", cfg.num_docs, "Documents")->capture_default_str();
  app.add_option("--queries", cfg.num_queries, "Queries")->capture_default_str();
  app.add_option("--docs-per-topic", cfg.docs_per_topic, "Documents per topic")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    auto fx = lirlab::generate_synthetic(cfg);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    std::ofstream corpus(dir / "corpus.jsonl", std::ios::binary);
    lirlab::write_corpus(corpus, fx.docs);
    std::ofstream queries(dir / "queries.tsv", std::ios::binary);
    lirlab::write_queries(queries, fx.queries);
    std::ofstream qrels(dir / "qrels.txt", std::ios::binary);
    lirlab::write_qrels(qrels, fx.qrels);
    std::cout << fx.docs.size() << " docs, " << fx.queries.size() << " queries -> " << out_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
