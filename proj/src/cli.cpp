// Copyright 2026 The GraphMoco Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "graphmoco/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "graphmoco/corpus.hpp"
#include "graphmoco/error.hpp"
#include "graphmoco/eval.hpp"
#include "graphmoco/index.hpp"
#include "graphmoco/trainer.hpp"

namespace graphmoco {
namespace {

constexpr int kUsageExit = 2;

// Rewrites `--config FILE` into ordinary flags placed ahead of the explicit
// ones, so the take-last policy lets explicit flags override the file.
std::vector<std::string> ExpandConfig(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty() || args.size() < 2) return args;
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, path + ": " + e.what());
  }
  if (!doc.is_object()) Fail(ErrorCode::kParse, path + ": config must be a JSON object");
  const std::string& command = args[1];
  nlohmann::json flat = nlohmann::json::object();
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_object()) flat[key] = value;
  }
  if (doc.contains(command) && doc[command].is_object()) {
    for (const auto& [key, value] : doc[command].items()) flat[key] = value;
  }
  std::vector<std::string> injected;
  auto scalar = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  for (const auto& [key, value] : flat.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back("--" + key);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) joined += (joined.empty() ? "" : ",") + scalar(item);
      injected.push_back("--" + key);
      injected.push_back(joined);
    } else {
      injected.push_back("--" + key);
      injected.push_back(scalar(value));
    }
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

std::filesystem::path WithSuffix(const std::filesystem::path& path,
                                 const std::string& part) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + "." + part + ".jsonl");
  return out;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

void ConfigureLogging() {
  auto logger = spdlog::get("graphmoco");
  if (!logger) logger = spdlog::stderr_color_mt("graphmoco");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("GRAPHMOCO_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

int CliMain(const std::vector<std::string>& raw_args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Function similarity embeddings from control-flow graphs",
               "graphmoco"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  // synth
  int functions = 0, variants = 0;
  std::uint64_t synth_seed = 0, split_seed = 0;
  std::string synth_out;
  bool do_split = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--functions", functions, "Source functions")->required();
  synth->add_option("--variants", variants, "Variants per function")->required();
  synth->add_option("--seed", synth_seed, "Generator seed")->required();
  synth->add_option("--out", synth_out, "Output JSONL path")->required();
  synth->add_flag("--split", do_split,
                  "Also write 80/10/10 .train/.val/.test files by function");
  synth->add_option("--split-seed", split_seed, "Split seed (default: --seed)");

  // train
  TrainConfig tc;
  std::string train_corpus, train_out, val_corpus, loss_name = "infonce";
  bool no_preshuffle = false, no_two_tuple = false, no_node_norm = false, plain_lr = false;
  auto* train = app.add_subcommand("train", "Train query and key encoders");
  train->add_option("--corpus", train_corpus, "Training corpus JSONL")->required();
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_option("--val", val_corpus, "Validation corpus for Recall@1");
  train->add_option("--epochs", tc.epochs)->capture_default_str();
  train->add_option("--batch", tc.batch_size)->capture_default_str();
  train->add_option("--queue", tc.queue_size)->capture_default_str();
  train->add_option("--tau", tc.temperature)->capture_default_str();
  train->add_option("--momentum", tc.momentum)->capture_default_str();
  train->add_option("--lr", tc.learning_rate)->capture_default_str();
  train->add_option("--wd", tc.weight_decay)->capture_default_str();
  train->add_option("--seed", tc.seed)->capture_default_str();
  train->add_option("--clip", tc.clip_norm, "Global gradient norm clip")->capture_default_str();
  train->add_option("--loss", loss_name)->check(CLI::IsMember({"infonce", "triplet"}))->capture_default_str();
  train->add_option("--margin", tc.triplet_margin, "Triplet margin")->capture_default_str();
  train->add_flag("--no-preshuffle", no_preshuffle);
  train->add_flag("--mask-same-function", tc.mask_same_function);
  train->add_flag("--plain-lr", plain_lr, "Same Adam step size for every array");
  train->add_flag("--allow-self-pairs", tc.allow_self_pairs);
  train->add_flag("--dedup", tc.dedup_functions);
  train->add_option("--val-pool", tc.val_pool)->capture_default_str();
  train->add_option("--token-dim", tc.encoder.token_dim)->capture_default_str();
  train->add_option("--filters", tc.encoder.filters)->capture_default_str();
  train->add_option("--windows", tc.encoder.windows)->delimiter(',')->capture_default_str();
  train->add_option("--hidden", tc.encoder.graph.hidden_dim)->capture_default_str();
  train->add_option("--layers", tc.encoder.graph.layers)->capture_default_str();
  train->add_option("--pair-cap", tc.encoder.graph.two_tuple_node_cap)->capture_default_str();
  train->add_flag("--no-two-tuple", no_two_tuple);
  train->add_flag("--directed", tc.encoder.graph.directed);
  train->add_flag("--no-node-norm", no_node_norm);

  // embed
  std::string embed_ckpt, embed_corpus, embed_out;
  auto* embed = app.add_subcommand("embed", "Build an embedding index");
  embed->add_option("--checkpoint", embed_ckpt)->required();
  embed->add_option("--corpus", embed_corpus)->required();
  embed->add_option("--out", embed_out)->required();

  // search
  std::string search_index, search_fid, search_key, search_ckpt;
  int top = 10;
  auto* search = app.add_subcommand("search", "Query an embedding index");
  search->add_option("--index", search_index)->required();
  auto* fid_opt = search->add_option("--function-id", search_fid,
                                     "Query with this function's first indexed variant");
  auto* key_opt = search->add_option("--key", search_key, "Query with this variant key");
  fid_opt->excludes(key_opt);
  search->add_option("--top", top)->capture_default_str();
  search->add_option("--checkpoint", search_ckpt,
                     "Verify the index was built from this checkpoint");

  // eval
  std::string eval_ckpt, eval_corpus, eval_out, task_name, metric_list = "auc,mrr10,recall1,map";
  EvalRequest req;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a pair or search task");
  eval->add_option("--checkpoint", eval_ckpt)->required();
  eval->add_option("--corpus", eval_corpus)->required();
  eval->add_option("--task", task_name)
      ->required()
      ->check(CLI::IsMember({"arch", "opt", "comp", "xc", "xcxb", "xa", "xm", "search"}));
  eval->add_option("--pool", req.pool)->capture_default_str();
  eval->add_option("--metrics", metric_list)->capture_default_str();
  eval->add_option("--out", eval_out, "Report path (stdout when omitted)");
  eval->add_option("--queries", req.queries, "Query cap (0 = all)")->capture_default_str();
  eval->add_option("--seed", req.seed)->capture_default_str();
  eval->add_flag("--cap-nrel", req.cap_nrel, "Clip N_rel to the AP cutoff");

  try {
    std::vector<std::string> args = ExpandConfig(raw_args);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << "\n";
      const auto subs = app.get_subcommands();
      err << (subs.empty() ? app.help() : subs.front()->help());
      return kUsageExit;
    }

    if (*synth) {
      const Corpus corpus = SynthCorpus(functions, variants, synth_seed);
      SaveCorpus(corpus, synth_out);
      spdlog::info("wrote {} variants of {} functions to {}", corpus.size(),
                   corpus.groups().size(), synth_out);
      if (do_split) {
        const std::uint64_t seed = synth->count("--split-seed") ? split_seed : synth_seed;
        const CorpusSplit split = SplitCorpus(corpus, SplitRatios{}, seed);
        SaveCorpus(split.train, WithSuffix(synth_out, "train"));
        SaveCorpus(split.val, WithSuffix(synth_out, "val"));
        SaveCorpus(split.test, WithSuffix(synth_out, "test"));
        spdlog::info("split into {}/{}/{} functions", split.train.groups().size(),
                     split.val.groups().size(), split.test.groups().size());
      }
    } else if (*train) {
      tc.preshuffle = !no_preshuffle;
      tc.loss = ParseLossKind(loss_name);
      tc.encoder.graph.two_tuple_enabled = !no_two_tuple;
      tc.encoder.graph.node_norm = !no_node_norm;
      tc.fan_in_lr = !plain_lr;
      tc.Validate();
      const Corpus corpus = LoadCorpus(train_corpus);
      Corpus val;
      TrainOptions options;
      options.out_dir = train_out;
      if (!val_corpus.empty()) {
        val = LoadCorpus(val_corpus);
        options.validation = &val;
      }
      const TrainResult result = Train(corpus, tc, options);
      out << "checkpoint " << (std::filesystem::path(train_out) / "checkpoint.gmco").string()
          << " epoch " << result.checkpoint.epoch;
      if (!result.log.empty()) out << " loss " << result.log.back().mean_loss;
      out << "\n";
    } else if (*embed) {
      std::string fingerprint;
      const Checkpoint ckpt = LoadCheckpoint(embed_ckpt, &fingerprint);
      const Corpus corpus = LoadCorpus(embed_corpus);
      const EmbeddingIndex index = BuildIndex(ckpt, fingerprint, corpus);
      SaveIndex(embed_out, index);
      out << "indexed " << index.size() << " variants into " << embed_out << "\n";
    } else if (*search) {
      if (search_fid.empty() && search_key.empty()) {
        err << "error: search needs --function-id or --key\n" << search->help();
        return kUsageExit;
      }
      const EmbeddingIndex index = LoadIndex(search_index);
      if (!search_ckpt.empty()) {
        std::string fingerprint;
        LoadCheckpoint(search_ckpt, &fingerprint);
        if (fingerprint != index.fingerprint) {
          Fail(ErrorCode::kVersionMismatch, "index was not built from " + search_ckpt);
        }
      }
      const std::size_t row =
          search_key.empty() ? index.FindFunction(search_fid) : index.FindKey(search_key);
      const Vector query = index.embeddings.row(static_cast<Eigen::Index>(row)).transpose();
      out << "query " << index.keys[row] << "\n";
      int rank = 1;
      for (const SearchHit& hit : QueryIndex(index, query, top)) {
        out << fmt::format("{:>4}  {:<48}  {:.6f}\n", rank++, hit.key, hit.similarity);
      }
    } else if (*eval) {
      req.task = ParseTaskKind(task_name);
      req.metrics = SplitList(metric_list);
      const Checkpoint ckpt = LoadCheckpoint(eval_ckpt);
      const Corpus corpus = LoadCorpus(eval_corpus);
      const nlohmann::json report = RunSearchEval(ckpt, corpus, req);
      if (eval_out.empty()) {
        out << report.dump(2) << "\n";
      } else {
        std::ofstream file(eval_out);
        if (!file) Fail(ErrorCode::kIo, "cannot write " + eval_out);
        file << report.dump(2) << "\n";
        out << report["metrics"].dump() << "\n";
      }
    }
  } catch (const Error& e) {
    err << "error: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int CliMain(int argc, const char* const* argv) {
  ConfigureLogging();
  std::vector<std::string> args(argv, argv + argc);
  return CliMain(args, std::cout, std::cerr);
}

}  // namespace graphmoco
