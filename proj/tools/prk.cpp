// Copyright 2026-present the prk project
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
//
// Command-line front door: every library module behind one binary.
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prk/composition.hpp"
#include "prk/embedding_store.hpp"
#include "prk/gradcheck.hpp"
#include "prk/lut.hpp"
#include "prk/neighborhood.hpp"
#include "prk/phrase.hpp"
#include "prk/repro.hpp"
#include "prk/trainer.hpp"

namespace {

using nlohmann::ordered_json;

//! Operator mistakes that surface after flag parsing (exit code 2).
struct UsageError : prk::Error {
  using prk::Error::Error;
};

std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

prk::EmbeddingStore open_store(const std::string& path,
                               prk::VectorFormat format) {
  return prk::load_store(path, format);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) {
    throw prk::Error("cannot open output file '" + path + "'");
  }
  return out;
}

//! Phrase flag syntax: three whitespace-separated slots; underscores in
//! a slot stand for spaces inside compound words.
prk::RelationalPhrase parse_phrase_flag(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> parts;
  std::string part;
  while (in >> part) {
    parts.push_back(part);
  }
  if (parts.size() != 3) {
    throw UsageError("--phrase expects exactly three tokens, got '" + text +
                     "'");
  }
  for (std::string& p : parts) {
    for (char& c : p) {
      if (c == '_') c = ' ';
    }
  }
  return prk::triplet_to_phrase(parts[0], parts[1], parts[2]);
}

std::vector<prk::RelationalPhrase> phrases_from_annotations(
    const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw prk::Error("cannot open annotations file '" + path + "'");
  }
  std::vector<prk::HoiAnnotation> annotations = prk::load_annotations(in);
  if (annotations.empty()) {
    throw prk::Error("annotations file '" + path + "' holds no instances");
  }
  std::vector<prk::RelationalPhrase> phrases;
  phrases.reserve(annotations.size());
  for (const prk::HoiAnnotation& ann : annotations) {
    phrases.push_back(prk::annotation_to_phrase(ann));
  }
  return phrases;
}

void emit(const ordered_json& doc, bool json_mode,
          const std::string& human) {
  if (json_mode) {
    std::cout << doc.dump() << '\n';
  } else {
    std::cout << human;
  }
}

// ---- embed ----------------------------------------------------------

struct EmbedArgs {
  std::string model;
  prk::VectorFormat format = prk::VectorFormat::text;
  std::string word;
  bool json = false;
};

int run_embed(const EmbedArgs& args) {
  prk::EmbeddingStore store = open_store(args.model, args.format);
  auto vec = store.lookup(args.word, prk::OovPolicy::mean_of_parts);
  if (!vec.has_value()) {
    throw prk::Error("word '" + args.word + "' is not in the vocabulary");
  }
  ordered_json j;
  j["word"] = args.word;
  j["dimension"] = vec->size();
  j["vector"] = *vec;
  std::string human = args.word;
  for (double v : *vec) {
    human += ' ';
    human += fmt_real(v);
  }
  human += '\n';
  emit(j, args.json, human);
  return 0;
}

// ---- encode / lut build ---------------------------------------------

struct EncodeArgs {
  std::string model;
  prk::VectorFormat format = prk::VectorFormat::text;
  std::string annotations;
  std::string out;
  bool json = false;
};

int run_encode(const EncodeArgs& args) {
  prk::EmbeddingStore store = open_store(args.model, args.format);
  std::vector<prk::RelationalPhrase> phrases =
      phrases_from_annotations(args.annotations);
  prk::LookUpTable lut = prk::build_lut(store, phrases);
  prk::save_lut(args.out, lut);
  ordered_json j;
  j["phrases"] = lut.size();
  j["dimension"] = lut.dimension();
  j["out"] = args.out;
  std::string human = "wrote " + std::to_string(lut.size()) + " phrase " +
                      "embeddings of dimension " +
                      std::to_string(lut.dimension()) + " to " + args.out +
                      "\n";
  emit(j, args.json, human);
  return 0;
}

// ---- neighbors ------------------------------------------------------

struct NeighborsArgs {
  std::string model;
  prk::VectorFormat format = prk::VectorFormat::text;
  std::vector<std::string> words;
  prk::NeighborhoodConfig config;
  std::string out;
  bool json = false;
};

int run_neighbors(const NeighborsArgs& args) {
  prk::EmbeddingStore store = open_store(args.model, args.format);
  prk::NeighborhoodMap map =
      prk::build_neighborhoods(store, args.words, args.config);
  if (!args.out.empty()) {
    prk::save_neighborhoods(args.out, map);
  }
  ordered_json j;
  for (const auto& [query, set] : map) {
    ordered_json entry = ordered_json::array();
    for (const prk::Neighbor& n : set.neighbors) {
      entry.push_back({{"token", n.token}, {"similarity", n.similarity}});
    }
    j[query] = std::move(entry);
  }
  std::ostringstream human;
  prk::save_neighborhoods(human, map);
  emit(j, args.json, human.str());
  return 0;
}

// ---- compose --------------------------------------------------------

struct ComposeArgs {
  std::string phrase;
  std::string neighbors;
  prk::CompositionConfig config;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_compose(const ComposeArgs& args) {
  prk::RelationalPhrase phrase = parse_phrase_flag(args.phrase);
  prk::NeighborhoodMap map = prk::load_neighborhoods(args.neighbors);
  if (args.n == 0) {
    throw UsageError("--n must be positive");
  }
  prk::Rng rng = prk::Rng::stream(args.seed, "compose-cli");
  std::map<std::string, std::size_t> frequencies;
  for (std::size_t i = 0; i < args.n; ++i) {
    prk::RelationalPhrase sample =
        prk::compose(phrase, map, args.config, rng);
    ++frequencies[sample.text()];
  }
  prk::CompositionSupport sup = prk::support(phrase, map);
  ordered_json j;
  j["phrase"] = phrase.text();
  j["samples"] = args.n;
  j["support_size"] = sup.size;
  j["frequencies"] = ordered_json::object();
  for (const auto& [text, count] : frequencies) {
    j["frequencies"][text] = count;
  }
  std::ostringstream human;
  human << "phrase: " << phrase.text() << "\nsamples: " << args.n
        << "\nsupport size: " << sup.size << "\n";
  for (const auto& [text, count] : frequencies) {
    human << count << '\t' << text << '\n';
  }
  emit(j, args.json, human.str());
  return 0;
}

// ---- lut query ------------------------------------------------------

struct LutQueryArgs {
  std::string lut;
  std::string vec;
  std::size_t k = 5;
  bool json = false;
};

int run_lut_query(const LutQueryArgs& args) {
  prk::LookUpTable lut = prk::load_lut(args.lut);
  std::ifstream in(args.vec);
  if (!in.is_open()) {
    throw prk::Error("cannot open vector file '" + args.vec + "'");
  }
  std::vector<double> query;
  double v = 0.0;
  while (in >> v) {
    query.push_back(v);
  }
  if (!in.eof()) {
    throw prk::Error("vector file '" + args.vec +
                     "' holds non-numeric content");
  }
  if (query.size() != lut.dimension()) {
    throw prk::Error("query has " + std::to_string(query.size()) +
                     " components, table expects " +
                     std::to_string(lut.dimension()));
  }
  std::vector<prk::LookUpTable::Match> matches = lut.query(query, args.k);
  ordered_json j = ordered_json::array();
  std::ostringstream human;
  for (const auto& m : matches) {
    j.push_back({{"rank", m.rank},
                 {"phrase", m.phrase.text()},
                 {"confidence", m.similarity}});
    human << m.rank << '\t' << fmt_real(m.similarity) << '\t'
          << m.phrase.text() << '\n';
  }
  emit(j, args.json, human.str());
  return 0;
}

// ---- gradcheck ------------------------------------------------------

struct GradcheckArgs {
  std::string loss = "l1";
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  double tolerance = 1e-5;
  bool json = false;
};

int run_gradcheck_cmd(const GradcheckArgs& args) {
  prk::GradCheckTarget target = prk::gradcheck_target_from_name(args.loss);
  prk::GradCheckReport report =
      prk::run_gradcheck(target, args.trials, args.seed, args.tolerance);
  ordered_json j;
  j["loss"] = args.loss;
  j["trials"] = report.trials;
  j["max_rel_error"] = report.max_rel_error;
  j["tolerance"] = args.tolerance;
  j["pass"] = report.pass;
  std::string human = args.loss + ": max rel error " +
                      fmt_real(report.max_rel_error) + " over " +
                      std::to_string(report.trials) + " trials -> " +
                      (report.pass ? "pass" : "FAIL") + "\n";
  emit(j, args.json, human);
  if (!report.pass) {
    std::cerr << "prk: gradient check failed for loss '" << args.loss
              << "'\n";
    return 1;
  }
  return 0;
}

// ---- train / eval ---------------------------------------------------

struct TrainArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::string csv;
  std::string save_head;
  bool json = false;
};

prk::TrainConfig resolve_config(const std::string& config_path,
                                const std::vector<std::string>& sets) {
  prk::TrainConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in.is_open()) {
      throw prk::Error("cannot open config file '" + config_path + "'");
    }
    config = prk::parse_train_config(in, config);
  }
  for (const std::string& entry : sets) {
    std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--set expects key=value, got '" + entry + "'");
    }
    try {
      prk::apply_config_entry(config, entry.substr(0, eq),
                              entry.substr(eq + 1));
    } catch (const prk::Error& e) {
      throw UsageError(e.what());
    }
  }
  return config;
}

int run_train(const TrainArgs& args) {
  prk::TrainConfig config = resolve_config(args.config_path, args.sets);
  prk::PhraseHead head(1, 1, 1, 1);
  prk::TrainingReport report = prk::run_training(config, &head);
  ordered_json doc = prk::report_to_json(report);
  if (!args.out.empty()) {
    std::ofstream out = open_output(args.out);
    out << doc.dump(2) << '\n';
  }
  if (!args.csv.empty()) {
    std::ofstream out = open_output(args.csv);
    prk::write_loss_curve_csv(out, report.curve);
  }
  if (!args.save_head.empty()) {
    std::ofstream out = open_output(args.save_head);
    out << head.to_json().dump() << '\n';
  }
  std::ostringstream human;
  human << "epochs: " << report.curve.size() << "\nfinal total loss: "
        << fmt_real(report.curve.back().total) << "\ntop1: "
        << fmt_real(report.metrics.top1) << "  top5: "
        << fmt_real(report.metrics.top5) << "\nrare top1: "
        << fmt_real(report.metrics.rare_top1) << "  nonrare top1: "
        << fmt_real(report.metrics.nonrare_top1) << "\n";
  if (!args.out.empty()) {
    human << "report: " << args.out << "\n";
  }
  emit(doc, args.json, human.str());
  return 0;
}

struct EvalArgs {
  std::string head_path;
  std::string config_path;
  std::vector<std::string> sets;
  std::string split = "eval";
  bool json = false;
};

int run_eval(const EvalArgs& args) {
  prk::TrainConfig config = resolve_config(args.config_path, args.sets);
  std::ifstream in(args.head_path);
  if (!in.is_open()) {
    throw prk::Error("cannot open head file '" + args.head_path + "'");
  }
  nlohmann::json head_json = nlohmann::json::parse(in);
  prk::PhraseHead head = prk::PhraseHead::from_json(head_json);
  prk::TrainSetup setup = prk::make_train_setup(config);
  const auto& split = args.split == "train" ? setup.dataset.train
                                            : setup.dataset.eval;
  prk::Metrics metrics = prk::evaluate(head, split, setup.dataset.rare,
                                       setup.lut, setup.phrases);
  ordered_json j = prk::metrics_to_json(metrics);
  std::ostringstream human;
  human << "split: " << args.split << "\ntop1: " << fmt_real(metrics.top1)
        << "  top5: " << fmt_real(metrics.top5) << "\nrare top1: "
        << fmt_real(metrics.rare_top1) << " (" << metrics.rare_total
        << " samples)\nnonrare top1: " << fmt_real(metrics.nonrare_top1)
        << " (" << metrics.nonrare_total << " samples)\n";
  emit(j, args.json, human.str());
  return 0;
}

// ---- repro ----------------------------------------------------------

struct ReproArgs {
  std::uint64_t seed = 7;
  std::string out;
  bool json = false;
};

int run_repro_cmd(const ReproArgs& args) {
  ordered_json doc = prk::run_repro(args.seed);
  if (!args.out.empty()) {
    std::ofstream out = open_output(args.out);
    out << doc.dump() << '\n';
  }
  const auto& cmp = doc["comparisons"];
  std::ostringstream human;
  human << "seed: " << args.seed << "\nmin inter-centroid distance: beta0 "
        << fmt_real(cmp["min_inter_centroid_distance"]["beta0"]
                        .get<double>())
        << ", beta10 "
        << fmt_real(cmp["min_inter_centroid_distance"]["beta10"]
                        .get<double>())
        << "\nrare top1: composition off "
        << fmt_real(cmp["rare_top1"]["composition_off"].get<double>())
        << ", on "
        << fmt_real(cmp["rare_top1"]["composition_on"].get<double>())
        << "\ntop1 by target mode: word2vec "
        << fmt_real(cmp["top1_by_target_mode"]["word2vec"].get<double>())
        << ", random "
        << fmt_real(cmp["top1_by_target_mode"]["random"].get<double>())
        << "\n";
  emit(doc, args.json, human.str());
  return 0;
}

void add_model_flags(CLI::App* cmd, std::string& model,
                     prk::VectorFormat& format) {
  cmd->add_option("--model", model, "embedding model file")->required();
  std::map<std::string, prk::VectorFormat> names{
      {"text", prk::VectorFormat::text}, {"bin", prk::VectorFormat::binary}};
  cmd->add_option("--format", format, "model file format")
      ->transform(CLI::CheckedTransformer(names, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relational phrase embeddings: encode, expand, retrieve"};
  app.require_subcommand(1);

  EmbedArgs embed;
  CLI::App* embed_cmd =
      app.add_subcommand("embed", "print the embedding of a word");
  add_model_flags(embed_cmd, embed.model, embed.format);
  embed_cmd->add_option("--word", embed.word, "word to look up")->required();
  embed_cmd->add_flag("--json", embed.json, "machine-readable output");

  EncodeArgs encode;
  CLI::App* encode_cmd = app.add_subcommand(
      "encode", "encode annotation triples into phrase embeddings");
  add_model_flags(encode_cmd, encode.model, encode.format);
  encode_cmd
      ->add_option("--annotations", encode.annotations,
                   "JSON annotation file")
      ->required();
  encode_cmd->add_option("--out", encode.out, "output table file")
      ->required();
  encode_cmd->add_flag("--json", encode.json, "machine-readable output");

  NeighborsArgs neighbors;
  CLI::App* neighbors_cmd = app.add_subcommand(
      "neighbors", "semantic neighborhoods of the given words");
  add_model_flags(neighbors_cmd, neighbors.model, neighbors.format);
  neighbors_cmd
      ->add_option("--words", neighbors.words, "query words")
      ->required()
      ->delimiter(',');
  neighbors_cmd->add_option("--k", neighbors.config.k, "max neighbors")
      ->check(CLI::PositiveNumber);
  neighbors_cmd
      ->add_option("--tsim", neighbors.config.t_sim,
                   "similarity threshold")
      ->check(CLI::Range(-1.0, 1.0));
  neighbors_cmd->add_option("--out", neighbors.out,
                            "write neighborhood file here");
  neighbors_cmd->add_flag("--json", neighbors.json,
                          "machine-readable output");

  ComposeArgs compose;
  CLI::App* compose_cmd = app.add_subcommand(
      "compose", "sample composed phrases from neighborhoods");
  compose_cmd
      ->add_option("--phrase", compose.phrase,
                   "three tokens; underscores mark spaces inside a slot")
      ->required();
  compose_cmd
      ->add_option("--neighbors", compose.neighbors, "neighborhood file")
      ->required();
  compose_cmd->add_option("--pv", compose.config.p_v,
                          "verb replacement probability")
      ->check(CLI::Range(0.0, 1.0));
  compose_cmd->add_option("--po", compose.config.p_o,
                          "object replacement probability")
      ->check(CLI::Range(0.0, 1.0));
  std::map<std::string, prk::Weighting> weightings{
      {"uniform", prk::Weighting::uniform},
      {"similarity", prk::Weighting::similarity}};
  compose_cmd
      ->add_option("--weighting", compose.config.weighting,
                   "neighbor draw weighting")
      ->transform(CLI::CheckedTransformer(weightings, CLI::ignore_case));
  compose_cmd->add_option("--n", compose.n, "number of samples")
      ->check(CLI::PositiveNumber);
  compose_cmd->add_option("--seed", compose.seed, "RNG seed");
  compose_cmd->add_flag("--json", compose.json, "machine-readable output");

  CLI::App* lut_cmd =
      app.add_subcommand("lut", "build or query the phrase look-up table");
  lut_cmd->require_subcommand(1);

  EncodeArgs lut_build;
  CLI::App* lut_build_cmd =
      lut_cmd->add_subcommand("build", "build a table from annotations");
  add_model_flags(lut_build_cmd, lut_build.model, lut_build.format);
  lut_build_cmd
      ->add_option("--annotations", lut_build.annotations,
                   "JSON annotation file")
      ->required();
  lut_build_cmd->add_option("--out", lut_build.out, "output table file")
      ->required();
  lut_build_cmd->add_flag("--json", lut_build.json,
                          "machine-readable output");

  LutQueryArgs lut_query;
  CLI::App* lut_query_cmd =
      lut_cmd->add_subcommand("query", "rank table entries for a vector");
  lut_query_cmd->add_option("--lut", lut_query.lut, "table file")
      ->required();
  lut_query_cmd
      ->add_option("--vec", lut_query.vec,
                   "file of whitespace-separated vector components")
      ->required();
  lut_query_cmd->add_option("--k", lut_query.k, "matches to return")
      ->check(CLI::PositiveNumber);
  lut_query_cmd->add_flag("--json", lut_query.json,
                          "machine-readable output");

  GradcheckArgs gradcheck;
  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "finite-difference check of analytic gradients");
  gradcheck_cmd
      ->add_option("--loss", gradcheck.loss, "loss to check")
      ->check(CLI::IsMember(
          {"l1", "mse", "kl", "cosine", "triplet", "phrase"}));
  gradcheck_cmd->add_option("--trials", gradcheck.trials, "random trials")
      ->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--seed", gradcheck.seed, "RNG seed");
  gradcheck_cmd
      ->add_option("--tolerance", gradcheck.tolerance,
                   "max relative error accepted")
      ->check(CLI::PositiveNumber);
  gradcheck_cmd->add_flag("--json", gradcheck.json,
                          "machine-readable output");

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train the phrase head on fixture data");
  train_cmd->add_option("--config", train.config_path,
                        "key=value config file");
  train_cmd->add_option("--set", train.sets,
                        "override one config key (key=value); flags win "
                        "over the file");
  train_cmd->add_option("--out", train.out, "write the JSON report here");
  train_cmd->add_option("--csv", train.csv, "write the loss curve as CSV");
  train_cmd->add_option("--save-head", train.save_head,
                        "serialize the trained head to JSON");
  train_cmd->add_flag("--json", train.json, "machine-readable output");

  EvalArgs eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a serialized head");
  eval_cmd->add_option("--head", eval.head_path, "head JSON file")
      ->required();
  eval_cmd->add_option("--config", eval.config_path,
                       "key=value config file");
  eval_cmd->add_option("--set", eval.sets, "override one config key");
  eval_cmd->add_option("--split", eval.split, "which split to score")
      ->check(CLI::IsMember({"eval", "train"}));
  eval_cmd->add_flag("--json", eval.json, "machine-readable output");

  ReproArgs repro;
  CLI::App* repro_cmd = app.add_subcommand(
      "repro", "run the fixture ablation suite end to end");
  repro_cmd->add_option("--seed", repro.seed, "RNG seed");
  repro_cmd->add_option("--out", repro.out, "write the JSON document here");
  repro_cmd->add_flag("--json", repro.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "prk: " << e.what() << '\n';
    return 2;
  }

  try {
    if (embed_cmd->parsed()) return run_embed(embed);
    if (encode_cmd->parsed()) return run_encode(encode);
    if (neighbors_cmd->parsed()) return run_neighbors(neighbors);
    if (compose_cmd->parsed()) return run_compose(compose);
    if (lut_cmd->parsed() && lut_build_cmd->parsed())
      return run_encode(lut_build);
    if (lut_cmd->parsed() && lut_query_cmd->parsed())
      return run_lut_query(lut_query);
    if (gradcheck_cmd->parsed()) return run_gradcheck_cmd(gradcheck);
    if (train_cmd->parsed()) return run_train(train);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (repro_cmd->parsed()) return run_repro_cmd(repro);
  } catch (const UsageError& e) {
    std::cerr << "prk: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "prk: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "prk: no command\n";
  return 2;
}
