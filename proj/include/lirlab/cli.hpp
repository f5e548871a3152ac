// Copyright 2026 The lirlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lirlab/service.hpp"

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "lirlab/corpus.hpp"
#include "lirlab/decoder.hpp"
#include "lirlab/evaluation.hpp"
#include "lirlab/index.hpp"
#include "lirlab/suggesters.hpp"
#include "lirlab/traversal.hpp"
#include "lirlab/workspace.hpp"

namespace lirlab {

namespace cli_detail {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  return out;
}

/// Raw little-endian f32 values.
inline Embedding read_vector_file(const std::string& path, uint32_t dim) {
  auto in = open_input(path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != size_t{dim} * 4) {
    throw Error(ErrorCode::DimMismatch, "vector file holds " + std::to_string(bytes.size() / 4) + " values, index dim " +
                                            std::to_string(dim));
  }
  std::vector<double> v(dim);
  for (uint32_t i = 0; i < dim; ++i) {
    uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= uint32_t{static_cast<unsigned char>(bytes[4 * i + b])} << (8 * b);
    v[i] = std::bit_cast<float>(u);
  }
  return Embedding(std::move(v));
}

struct WorkspaceArgs {
  std::string index;
  std::string corpus;

  void add(CLI::App* cmd) {
    cmd->add_option("--index", index, "Index file built by `index`")->required();
    cmd->add_option("--corpus", corpus, "Corpus JSONL the index was built from")->required();
  }

  std::unique_ptr<Workspace> open() const { return Workspace::open(corpus, index); }
};

struct DecoderArgs {
  DecoderConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--beam", cfg.beam_width, "Beam width")->capture_default_str();
    cmd->add_option("--max-len", cfg.max_len, "Maximum decoded tokens")->capture_default_str();
    cmd->add_option("--shortlist", cfg.shortlist_size, "Candidate tokens per expansion")->capture_default_str();
  }
};

inline std::vector<SuggestMethod> parse_methods(const std::string& csv) {
  std::vector<SuggestMethod> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no methods given");
  return out;
}

}  // namespace cli_detail

/// Entry point of the `lirlab` tool. Exit status: 0 success, 1 usage error,
/// 2 data error. Errors go to `err` as "error: <Code>: <message>".
inline int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Dense-retrieval lab: query decoding, latent traversal and query suggestion"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  if (const char* env = std::getenv("LIRLAB_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "error: InvalidArgument: LIRLAB_SEED is not an unsigned integer\n";
      return kExitUsage;
    }
  }

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a corpus file and print its statistics");
  std::string ingest_corpus_path;
  ingest->add_option("--corpus", ingest_corpus_path, "Corpus JSONL")->required();

  // index
  auto* index_cmd = app.add_subcommand("index", "Encode a corpus into an index file");
  std::string index_corpus, index_out;
  EncoderConfig enc_cfg;
  bool no_word_unigrams = false;
  index_cmd->add_option("--corpus", index_corpus, "Corpus JSONL")->required();
  index_cmd->add_option("--out", index_out, "Output index path")->required();
  index_cmd->add_option("--dim", enc_cfg.dim, "Embedding dimension")->capture_default_str();
  index_cmd->add_option("--ngram-order", enc_cfg.ngram_order, "Character n-gram order")->capture_default_str();
  index_cmd->add_flag("--no-word-unigrams", no_word_unigrams, "Use character n-grams only");
  index_cmd->add_option("--seed", seed, "Encoder hash seed");

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "Decode a vector, text or document into a query");
  WorkspaceArgs decode_ws;
  DecoderArgs decode_args;
  std::optional<std::string> decode_text, decode_doc, decode_vec;
  decode_ws.add(decode_cmd);
  decode_args.add(decode_cmd);
  auto* o_text = decode_cmd->add_option("--text", decode_text, "Text to encode then decode");
  auto* o_doc = decode_cmd->add_option("--doc-id", decode_doc, "Document to encode then decode");
  auto* o_vec = decode_cmd->add_option("--vector-file", decode_vec, "Raw f32 LE vector of index dim");
  o_text->excludes(o_doc)->excludes(o_vec);
  o_doc->excludes(o_vec);

  // traverse
  auto* traverse_cmd = app.add_subcommand("traverse", "Decode queries along the path from a query to a document");
  WorkspaceArgs trav_ws;
  DecoderArgs trav_args;
  std::string trav_queries, trav_qrels, trav_qid;
  std::optional<std::string> trav_doc;
  size_t trav_steps = 20;
  trav_ws.add(traverse_cmd);
  trav_args.add(traverse_cmd);
  traverse_cmd->add_option("--queries", trav_queries, "Queries TSV")->required();
  traverse_cmd->add_option("--qrels", trav_qrels, "TREC qrels");
  traverse_cmd->add_option("--query-id", trav_qid, "Query to traverse from")->required();
  traverse_cmd->add_option("--doc-id", trav_doc, "Target document (default: the query's gold)");
  traverse_cmd->add_option("--steps", trav_steps, "Number of steps k")->capture_default_str();

  // gen-dataset
  auto* gen_cmd = app.add_subcommand("gen-dataset", "Generate the filtered reformulation dataset");
  WorkspaceArgs gen_ws;
  DecoderArgs gen_args;
  std::string gen_queries, gen_qrels, gen_out;
  std::optional<std::string> gen_training, gen_summary;
  size_t gen_k = 20;
  unsigned gen_threads = 0;
  gen_ws.add(gen_cmd);
  gen_args.add(gen_cmd);
  gen_cmd->add_option("--queries", gen_queries, "Queries TSV")->required();
  gen_cmd->add_option("--qrels", gen_qrels, "TREC qrels")->required();
  gen_cmd->add_option("--k", gen_k, "Traversal steps")->capture_default_str();
  gen_cmd->add_option("--seed", seed, "Global seed");
  gen_cmd->add_option("--out", gen_out, "Records JSONL")->required();
  gen_cmd->add_option("--training-out", gen_training, "Training view JSONL (default: <out>.train.jsonl)");
  gen_cmd->add_option("--summary-out", gen_summary, "Summary JSON (default: <out>.summary.json)");
  gen_cmd->add_option("--threads", gen_threads, "Worker threads (0 = all cores)");

  // suggest
  auto* suggest_cmd = app.add_subcommand("suggest", "Suggest reformulations for one query");
  WorkspaceArgs sug_ws;
  DecoderArgs sug_args;
  std::string sug_method = "prf", sug_query;
  std::optional<std::string> sug_qid, sug_qrels;
  size_t sug_n = kMaxSuggestions;
  SuggestOptions sug_opts;
  sug_ws.add(suggest_cmd);
  sug_args.add(suggest_cmd);
  suggest_cmd->add_option("--method", sug_method, "rm3|sampling|prf|plain")->capture_default_str();
  suggest_cmd->add_option("--query", sug_query, "Query text")->required();
  suggest_cmd->add_option("--query-id", sug_qid, "Query id (for seeding and qrels lookup)");
  suggest_cmd->add_option("--qrels", sug_qrels, "TREC qrels; adds nDCG fields when the query is judged");
  suggest_cmd->add_option("--n", sug_n, "Maximum suggestions (<= 10)")->capture_default_str();
  suggest_cmd->add_option("--epsilon", sug_opts.sampling.epsilon, "Sampling ball radius")->capture_default_str();
  suggest_cmd->add_option("--temperature", sug_opts.plain_temperature, "Plain sampling temperature")
      ->capture_default_str();
  suggest_cmd->add_option("--seed", seed, "Global seed");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate suggestion methods with best-of-k nDCG@10");
  WorkspaceArgs eval_ws;
  DecoderArgs eval_args;
  std::string eval_methods = "rm3,sampling,prf,plain", eval_qrels, eval_queries, eval_out;
  std::optional<std::string> eval_csv;
  size_t eval_max_queries = 0;
  EvalOptions eval_opts;
  eval_ws.add(eval_cmd);
  eval_args.add(eval_cmd);
  eval_cmd->add_option("--methods", eval_methods, "Comma-separated methods")->capture_default_str();
  eval_cmd->add_option("--qrels", eval_qrels, "TREC qrels")->required();
  eval_cmd->add_option("--queries", eval_queries, "Queries TSV")->required();
  eval_cmd->add_option("--out", eval_out, "Report JSON")->required();
  eval_cmd->add_option("--csv", eval_csv, "Report CSV (default: <out> with .csv)");
  eval_cmd->add_option("--resamples", eval_opts.resamples, "Bootstrap resamples")->capture_default_str();
  eval_cmd->add_option("--max-queries", eval_max_queries, "Evaluate only the first N queries (0 = all)");
  eval_cmd->add_option("--epsilon", eval_opts.suggest.sampling.epsilon, "Sampling ball radius")->capture_default_str();
  eval_cmd->add_option("--temperature", eval_opts.suggest.plain_temperature, "Plain sampling temperature")
      ->capture_default_str();
  eval_cmd->add_option("--threads", eval_opts.threads, "Worker threads (0 = all cores)");
  eval_cmd->add_option("--seed", seed, "Global seed");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API over HTTP");
  WorkspaceArgs serve_ws;
  DecoderArgs serve_args;
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1";
  std::optional<std::string> serve_qrels, serve_queries, serve_ui;
  serve_ws.add(serve_cmd);
  serve_args.add(serve_cmd);
  serve_cmd->add_option("--port", serve_port, "Port")->capture_default_str();
  serve_cmd->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--qrels", serve_qrels, "TREC qrels; enables nDCG fields");
  serve_cmd->add_option("--queries", serve_queries, "Queries TSV; maps query text to ids");
  serve_cmd->add_option("--ui-dir", serve_ui, "Static UI assets to serve at /");
  serve_cmd->add_option("--seed", seed, "Global seed");

  // report
  auto* report_cmd = app.add_subcommand("report", "Histogram a generated dataset");
  std::string rep_records, rep_out;
  std::optional<std::string> rep_summary;
  report_cmd->add_option("--records", rep_records, "Records JSONL from gen-dataset")->required();
  report_cmd->add_option("--summary", rep_summary, "Summary JSON (default: <records>.summary.json)");
  report_cmd->add_option("--out", rep_out, "Histogram JSON (default: stdout)");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: Usage: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      auto docs = ingest_corpus(ingest_corpus_path);
      std::set<Token> vocab;
      size_t tokens = 0;
      for (const auto& d : docs) {
        for (auto& t : tokenize(d.text)) {
          ++tokens;
          vocab.insert(std::move(t));
        }
      }
      out << json{{"documents", docs.size()}, {"tokens", tokens}, {"vocabulary", vocab.size()}}.dump() << '\n';
    } else if (index_cmd->parsed()) {
      enc_cfg.seed = seed;
      enc_cfg.use_word_unigrams = !no_word_unigrams;
      auto idx = build_index(ingest_corpus(index_corpus), enc_cfg);
      idx.save(index_out);
      out << json{{"documents", idx.size()}, {"dim", idx.dim()}, {"encoder", nlohmann::json(enc_cfg)}, {"out", index_out}}
                 .dump()
          << '\n';
    } else if (decode_cmd->parsed()) {
      auto ws = decode_ws.open();
      Embedding z;
      if (decode_text) {
        z = ws->encoder().encode(*decode_text);
      } else if (decode_doc) {
        z = ws->encoder().encode(ws->doc(*decode_doc).text);
      } else if (decode_vec) {
        z = read_vector_file(*decode_vec, ws->index().dim());
      } else {
        err << "error: Usage: decode needs one of --text, --doc-id, --vector-file\n";
        return kExitUsage;
      }
      QueryDecoder decoder(ws->encoder(), ws->vocab(), decode_args.cfg);
      auto d = decoder.decode(z);
      out << json{{"text", d.text}, {"reencode_similarity", d.reencode_similarity}}.dump() << '\n';
    } else if (traverse_cmd->parsed()) {
      auto ws = trav_ws.open();
      auto queries = read_queries(trav_queries);
      auto qrels = trav_qrels.empty() ? Qrels{} : read_qrels(trav_qrels);
      auto it = std::find_if(queries.begin(), queries.end(), [&](const Query& q) { return q.query_id == trav_qid; });
      if (it == queries.end()) throw Error(ErrorCode::InvalidArgument, "unknown query id " + trav_qid);
      std::string target;
      if (trav_doc) {
        target = *trav_doc;
      } else {
        auto gold = qrels.gold(trav_qid);
        if (!gold) throw Error(ErrorCode::MissingGold, trav_qid);
        target = *gold;
      }
      QueryDecoder decoder(ws->encoder(), ws->vocab(), trav_args.cfg);
      auto labels = traversal_labels(qrels, trav_qid, target);
      auto steps = traverse_and_decode(*it, target, trav_steps, ws->index(), decoder, labels);
      auto q = ws->encoder().encode(it->text);
      auto gold = ws->index().embedding(ws->index().require(target));
      json list = json::array();
      for (const auto& s : steps) {
        list.push_back({{"kappa", s.kappa},
                        {"text", s.decoding.text},
                        {"reencode_similarity", s.decoding.reencode_similarity},
                        {"ndcg", s.ndcg},
                        {"ip_with_gold", s.ip_with_gold}});
      }
      out << json{{"query_id", trav_qid},
                  {"query", it->text},
                  {"doc_id", target},
                  {"original",
                   {{"ndcg", ndcg_at_k(ws->index().search(q, 10), labels, 10)},
                    {"ip_with_gold", inner_product(q, gold)}}},
                  {"steps", list}}
                 .dump()
          << '\n';
    } else if (gen_cmd->parsed()) {
      auto ws = gen_ws.open();
      auto queries = read_queries(gen_queries);
      auto qrels = read_qrels(gen_qrels);
      DatasetOptions opts;
      opts.k = gen_k;
      opts.seed = seed;
      opts.decoder = gen_args.cfg;
      opts.threads = gen_threads;
      auto ds = generate_dataset(queries, qrels, ws->index(), ws->docs(), ws->encoder(), ws->vocab(), opts);
      {
        auto f = open_output(gen_out);
        write_records(f, ds.records);
      }
      {
        auto f = open_output(gen_training.value_or(gen_out + ".train.jsonl"));
        write_training_view(f, ds.training);
      }
      json originals = json::array();
      for (const auto& o : ds.originals) originals.push_back({{"query_id", o.query_id}, {"ndcg", o.ndcg}, {"ip", o.ip}});
      json summary = to_json(ds.summary);
      summary["k"] = gen_k;
      summary["seed"] = seed;
      {
        auto f = open_output(gen_summary.value_or(gen_out + ".summary.json"));
        json full = summary;
        full["originals"] = originals;
        f << full.dump() << '\n';
      }
      out << summary.dump() << '\n';
    } else if (suggest_cmd->parsed()) {
      auto ws = sug_ws.open();
      sug_opts.decoder = sug_args.cfg;
      sug_opts.seed = seed;
      Query query{sug_qid.value_or("adhoc"), sug_query};
      auto set = suggest(*ws, query, parse_method(sug_method), sug_opts, std::min(sug_n, kMaxSuggestions));
      if (sug_qrels) {
        auto qrels = read_qrels(*sug_qrels);
        auto gold = qrels.gold(query.query_id);
        if (gold) {
          annotate(set, ws->index(), ws->encoder(), qrels.for_query(query.query_id),
                   ws->index().embedding(ws->index().require(*gold)));
        }
      }
      out << to_json(set).dump() << '\n';
    } else if (eval_cmd->parsed()) {
      auto ws = eval_ws.open();
      auto queries = read_queries(eval_queries);
      if (eval_max_queries > 0 && queries.size() > eval_max_queries) queries.resize(eval_max_queries);
      auto qrels = read_qrels(eval_qrels);
      eval_opts.seed = seed;
      eval_opts.suggest.seed = seed;
      eval_opts.suggest.decoder = eval_args.cfg;
      auto report = evaluate(*ws, queries, qrels, parse_methods(eval_methods), eval_opts);
      auto j = to_json(report);
      {
        auto f = open_output(eval_out);
        f << j.dump(2) << '\n';
      }
      std::string csv_path = eval_csv.value_or([&] {
        auto dot = eval_out.rfind('.');
        auto slash = eval_out.rfind('/');
        bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
        return (has_ext ? eval_out.substr(0, dot) : eval_out) + ".csv";
      }());
      {
        auto f = open_output(csv_path);
        write_report_csv(f, report);
      }
      write_report_csv(out, report);
    } else if (serve_cmd->parsed()) {
      auto ws = serve_ws.open();
      Service::Options opts;
      opts.seed = seed;
      opts.suggest.decoder = serve_args.cfg;
      std::optional<Qrels> qrels;
      if (serve_qrels) qrels = read_qrels(*serve_qrels);
      std::vector<Query> queries;
      if (serve_queries) queries = read_queries(*serve_queries);
      Service service(*ws, opts, std::move(qrels), std::move(queries));
      httplib::Server server;
      register_routes(server, service, serve_ui.value_or(""));
      err << "listening on " << serve_host << ':' << serve_port << '\n';
      if (!server.listen(serve_host, serve_port)) {
        throw Error(ErrorCode::IoError, "cannot listen on " + serve_host + ":" + std::to_string(serve_port));
      }
    } else if (report_cmd->parsed()) {
      auto in = open_input(rep_records);
      auto records = read_records(in);
      auto sin = open_input(rep_summary.value_or(rep_records + ".summary.json"));
      auto summary = nlohmann::json::parse(sin);
      std::vector<OriginalScore> originals;
      for (const auto& o : summary.at("originals")) {
        originals.push_back({o.at("query_id").get<std::string>(), o.at("ndcg").get<double>(), o.at("ip").get<double>()});
      }
      auto hist = to_json(dataset_histograms(records, originals));
      if (rep_out.empty()) {
        out << hist.dump() << '\n';
      } else {
        auto f = open_output(rep_out);
        f << hist.dump() << '\n';
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: ParseError: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace lirlab
