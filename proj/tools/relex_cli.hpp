// Copyright 2026 The Relex Authors.
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

// Subcommands of the relex command-line tool. Every command validates its
// paths up front, writes its artifacts, and records a manifest next to the
// primary output holding all flag values and SHA-256 digests of the inputs.

#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relex/relex.hpp"

namespace relex::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

inline constexpr const char *kToolVersion = "1.0.0";

inline std::string sha256_file(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char b[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(b, sizeof(b), "%02x", md[i]);
    hex += b;
  }
  return hex;
}

// Records flags, input digests and outputs of one command run.
class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["tool"] = "relex";
    doc_["version"] = kToolVersion;
    doc_["command"] = std::move(command);
    doc_["flags"] = ordered_json::object();
    doc_["inputs"] = ordered_json::object();
    doc_["outputs"] = ordered_json::array();
  }

  template <class T>
  void flag(const std::string &name, const T &value) {
    doc_["flags"][name] = value;
  }
  void input(const std::string &path) {
    if (!path.empty()) doc_["inputs"][path] = sha256_file(path);
  }
  void output(const std::string &path) { doc_["outputs"].push_back(path); }

  void write(const std::string &path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << doc_.dump(2) << '\n';
    if (!os) throw IoError("write to '" + path + "' failed");
  }

 private:
  ordered_json doc_;
};

inline void require_input(const std::string &path, const char *what) {
  if (path.empty()) return;
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " '" + path + "' does not exist");
}

inline void require_output(const std::string &path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw IoError("output directory '" + parent.string() + "' does not exist");
}

// One line per token: token \t mention_count. The feature vocabulary keeps
// file order as its id order.
inline void write_vocabulary(const std::string &path, const Vocabulary &vocab,
                             const std::map<std::string, std::size_t, std::less<>> &counts) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (const auto &tok : vocab.tokens()) os << tok << '\t' << counts.find(tok)->second << '\n';
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline Vocabulary read_vocabulary(const std::string &path) {
  Vocabulary vocab;
  detail::for_each_tsv_line(path, [&](const std::vector<std::string_view> &f, std::size_t lineno) {
    if (f[0].empty()) throw ParseError(path, lineno, "empty token");
    if (vocab.contains(f[0])) throw ParseError(path, lineno, "duplicate token");
    vocab.add(f[0]);
  });
  return vocab;
}

// Training log: epoch \t mean_hinge \t violations, mirrored to stderr.
class TrainingLog {
 public:
  TrainingLog(const std::string &path, std::string tag) : tag_(std::move(tag)) {
    if (!path.empty()) {
      os_.emplace(path, std::ios::binary);
      if (!*os_) throw IoError("cannot open '" + path + "' for writing");
      *os_ << "epoch\tmean_hinge\tviolations\n";
    }
  }
  void operator()(const EpochStats &s) {
    std::cerr << tag_ << " epoch " << s.epoch << " mean_hinge " << s.mean_hinge << " violations " << s.violations
              << '\n';
    if (os_) *os_ << s.epoch << '\t' << format_double(s.mean_hinge) << '\t' << s.violations << '\n';
  }

 private:
  std::string tag_;
  std::optional<std::ofstream> os_;
};

struct ModelFlags {
  std::size_t dim = 50;
  double margin = 1.0;
  std::optional<double> lr;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;

  void add_to(CLI::App *cmd) {
    cmd->add_option("--dim", dim, "Embedding dimension k")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--margin", margin, "Ranking margin")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--lr", lr, "SGD learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--epochs", epochs, "Passes over the training data")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  ModelConfig to_config(double default_lr) const {
    ModelConfig c;
    c.dim = dim;
    c.margin = margin;
    c.learning_rate = lr.value_or(default_lr);
    c.epochs = epochs;
    c.seed = seed;
    return c;
  }

  void record(Manifest &m, const ModelConfig &c) const {
    m.flag("dim", c.dim);
    m.flag("margin", c.margin);
    m.flag("lr", c.learning_rate);
    m.flag("epochs", c.epochs);
    m.flag("seed", c.seed);
  }
};

struct Options {
  // build-vocab
  std::string mentions, out, vocab_path, relation_map, log;
  std::size_t max_features = 100000;
  // train-m2r
  ModelFlags m2r_flags;
  std::string constraint_mode = "cross-mention";
  double cross_mention_rate = 1.0;
  // train-kb
  ModelFlags kb_flags;
  std::string triples, test_pairs;
  std::optional<double> time_budget;
  // extract
  std::string m2r_path, kb_path, fusion = "m2r+kb", calib_direction = "rank-position";
  std::size_t calib_threshold = 10;
  // eval
  std::string extractions, gold;
  // gen-synth
  SyntheticConfig synth;
  std::string out_dir;
};

inline void cmd_build_vocab(const Options &o) {
  require_input(o.mentions, "mention file");
  require_output(o.out);
  const auto raw = read_mentions(o.mentions);
  const auto vocab = build_feature_vocabulary(raw, o.max_features);
  write_vocabulary(o.out, vocab, feature_counts(raw));
  std::cerr << "build-vocab: " << raw.size() << " mentions, kept " << vocab.size() << " features\n";

  Manifest m("build-vocab");
  m.flag("max_features", o.max_features);
  m.input(o.mentions);
  m.output(o.out);
  m.write(o.out + ".manifest.json");
}

inline ConstraintMode parse_constraint_mode(const std::string &s) {
  if (s == "per-mention") return ConstraintMode::kPerMention;
  if (s == "cross-mention") return ConstraintMode::kCrossMention;
  throw std::invalid_argument("unknown constraint mode '" + s + "'");
}

inline void cmd_train_m2r(const Options &o) {
  require_input(o.mentions, "mention file");
  require_input(o.vocab_path, "vocabulary file");
  require_input(o.relation_map, "relation map");
  require_output(o.out);
  if (!o.log.empty()) require_output(o.log);

  M2RTrainOptions opts;
  opts.model = o.m2r_flags.to_config(ModelConfig{}.learning_rate);
  opts.mode = parse_constraint_mode(o.constraint_mode);
  opts.cross_mention_rate = o.cross_mention_rate;

  auto raw = read_mentions(o.mentions);
  if (!o.relation_map.empty()) raw = remap_relations<RawMention>(raw, read_relation_map(o.relation_map));
  const Vocabulary features =
      o.vocab_path.empty() ? build_feature_vocabulary(raw, o.max_features) : read_vocabulary(o.vocab_path);
  const auto data = encode_mentions(raw, features);
  TrainingLog log(o.log, "train-m2r");
  const auto model = train_m2r(data, features, opts, std::ref(log));
  save_m2r_model(o.out, model);

  Manifest m("train-m2r");
  o.m2r_flags.record(m, opts.model);
  m.flag("constraint_mode", o.constraint_mode);
  m.flag("cross_mention_rate", o.cross_mention_rate);
  m.flag("max_features", o.max_features);
  m.input(o.mentions);
  m.input(o.vocab_path);
  m.input(o.relation_map);
  m.output(o.out);
  if (!o.log.empty()) m.output(o.log);
  m.write(o.out + ".manifest.json");
}

inline void cmd_train_kb(const Options &o) {
  require_input(o.triples, "triple file");
  require_input(o.test_pairs, "test-pair file");
  require_input(o.relation_map, "relation map");
  require_output(o.out);
  if (!o.log.empty()) require_output(o.log);

  KBTrainOptions opts;
  opts.model = o.kb_flags.to_config(kb_default_config().learning_rate);
  opts.time_budget_seconds = o.time_budget;

  auto store = load_triples(o.triples);
  const std::size_t loaded = store.size();
  if (!o.relation_map.empty()) store = remap_relations(store, read_relation_map(o.relation_map));
  if (!o.test_pairs.empty()) store = filter_kb_by_test_pairs(store, read_entity_pairs(o.test_pairs));
  std::cerr << "train-kb: " << loaded << " triples loaded, " << store.size() << " kept after remapping/filtering\n";
  TrainingLog log(o.log, "train-kb");
  const auto model = train_kb(store, opts, std::ref(log));
  save_kb_model(o.out, model);

  Manifest m("train-kb");
  o.kb_flags.record(m, opts.model);
  if (o.time_budget) m.flag("time_budget", *o.time_budget);
  m.input(o.triples);
  m.input(o.test_pairs);
  m.input(o.relation_map);
  m.output(o.out);
  if (!o.log.empty()) m.output(o.log);
  m.write(o.out + ".manifest.json");
}

inline void cmd_extract(const Options &o) {
  require_input(o.m2r_path, "mention model");
  require_input(o.kb_path, "KB model");
  require_input(o.mentions, "mention file");
  require_output(o.out);

  ExtractOptions opts;
  if (o.fusion == "m2r") opts.fusion = Fusion::kMentionOnly;
  else if (o.fusion == "m2r+kb") opts.fusion = Fusion::kMentionPlusKb;
  else throw std::invalid_argument("unknown fusion mode '" + o.fusion + "'");
  if (opts.fusion == Fusion::kMentionPlusKb && o.kb_path.empty())
    throw std::invalid_argument("--fusion m2r+kb needs --kb");
  opts.calibration.threshold = o.calib_threshold;
  if (o.calib_direction == "rank-position") opts.calibration.direction = CalibrationDirection::kRankPosition;
  else if (o.calib_direction == "beaten-count") opts.calibration.direction = CalibrationDirection::kBeatenCount;
  else throw std::invalid_argument("unknown calibration direction '" + o.calib_direction + "'");

  const auto m2r = load_m2r_model(o.m2r_path);
  std::optional<KBModel> kb;
  if (!o.kb_path.empty()) {
    kb = load_kb_model(o.kb_path);
    if (kb->dim() != m2r.dim())
      throw DimensionMismatch("mention model has k=" + std::to_string(m2r.dim()) + " but KB model has k=" +
                              std::to_string(kb->dim()));
  }
  const auto mentions = encode_mentions(read_mentions(o.mentions), m2r.features);
  const auto xs = extract_all(m2r, kb ? &*kb : nullptr, mentions, opts);
  write_extractions(o.out, xs);
  std::cerr << "extract: " << mentions.size() << " mentions, " << xs.size() << " extractions\n";

  Manifest m("extract");
  m.flag("fusion", o.fusion);
  m.flag("calib_threshold", o.calib_threshold);
  m.flag("calib_direction", o.calib_direction);
  m.input(o.m2r_path);
  m.input(o.kb_path);
  m.input(o.mentions);
  m.output(o.out);
  m.write(o.out + ".manifest.json");
}

inline void cmd_eval(const Options &o) {
  require_input(o.extractions, "extraction file");
  require_input(o.gold, "gold file");
  require_output(o.out);
  const auto curve = precision_recall_curve(read_extractions(o.extractions), read_gold(o.gold));
  write_curve(o.out, curve);
  if (!curve.empty())
    std::cerr << "eval: auc@0.1 " << area_under_pr(curve, 0.1) << " auc@1.0 " << area_under_pr(curve, 1.0) << '\n';

  Manifest m("eval");
  m.input(o.extractions);
  m.input(o.gold);
  m.output(o.out);
  m.write(o.out + ".manifest.json");
}

inline void cmd_gen_synth(const Options &o) {
  if (!fs::is_directory(o.out_dir)) throw IoError("output directory '" + o.out_dir + "' does not exist");
  const auto corpus = generate_synthetic(o.synth);
  const fs::path dir(o.out_dir);
  const auto path = [&](const char *name) { return (dir / name).string(); };
  write_mentions(path("train_mentions.tsv"), corpus.train_mentions);
  write_mentions(path("test_mentions.tsv"), corpus.test_mentions);
  write_triples(path("kb.tsv"), corpus.kb);
  write_gold(path("gold.tsv"), corpus.gold);
  write_entity_pairs(path("test_pairs.tsv"), corpus.test_pairs);
  std::cerr << "gen-synth: " << corpus.train_mentions.size() << " train / " << corpus.test_mentions.size()
            << " test mentions, " << corpus.kb.size() << " KB triples, " << corpus.gold.size() << " gold facts\n";

  const auto &s = o.synth;
  Manifest m("gen-synth");
  m.flag("entities", s.num_entities);
  m.flag("relations", s.num_relations);
  m.flag("features", s.num_features);
  m.flag("mentions", s.num_mentions);
  m.flag("noise", s.noise_rate);
  m.flag("seed", s.seed);
  m.flag("na_fraction", s.na_pair_fraction);
  m.flag("test_fraction", s.test_pair_fraction);
  m.flag("max_mentions_per_pair", s.max_mentions_per_pair);
  m.flag("kb_corroboration", s.kb_corroboration);
  m.flag("clusters", s.num_clusters);
  for (auto f : {"train_mentions.tsv", "test_mentions.tsv", "kb.tsv", "gold.tsv", "test_pairs.tsv"})
    m.output(path(f));
  m.write(path("manifest.json"));
}

// Parses argv and runs the selected subcommand. Returns the exit status.
inline int run(int argc, const char *const *argv) {
  CLI::App app{"Embedding-based weakly supervised relation extraction", "relex"};
  app.set_config("--config", "", "Read flag values from a TOML/INI file");
  app.require_subcommand(1);
  Options o;

  auto *bv = app.add_subcommand("build-vocab", "Select the most frequent feature tokens");
  bv->add_option("--mentions", o.mentions, "Mention TSV")->required();
  bv->add_option("--max-features", o.max_features, "Features to keep")->check(CLI::PositiveNumber)->capture_default_str();
  bv->add_option("--out", o.out, "Vocabulary TSV to write")->required();

  auto *tm = app.add_subcommand("train-m2r", "Train the mention-to-relationship scorer");
  tm->add_option("--mentions", o.mentions, "Training mention TSV")->required();
  tm->add_option("--vocab", o.vocab_path, "Feature vocabulary from build-vocab (built inline if absent)");
  tm->add_option("--max-features", o.max_features, "Features to keep when building inline")->capture_default_str();
  tm->add_option("--relation-map", o.relation_map, "old<TAB>new relationship renames");
  tm->add_option("--constraint-mode", o.constraint_mode, "Ranking constraints")
      ->check(CLI::IsMember({"per-mention", "cross-mention"}))
      ->capture_default_str();
  tm->add_option("--cross-mention-rate", o.cross_mention_rate, "Share of negatives drawn from another mention")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  tm->add_option("--out", o.out, "Model file to write")->required();
  tm->add_option("--log", o.log, "Per-epoch training log TSV");
  o.m2r_flags.add_to(tm);

  auto *tk = app.add_subcommand("train-kb", "Train the translation-based KB scorer");
  tk->add_option("--triples", o.triples, "KB triple TSV")->required();
  tk->add_option("--test-pairs", o.test_pairs, "Entity pairs to remove from the KB before training");
  tk->add_option("--relation-map", o.relation_map, "old<TAB>new relationship renames");
  tk->add_option("--time-budget", o.time_budget, "Stop after the epoch that exceeds this many seconds");
  tk->add_option("--out", o.out, "Model file to write")->required();
  tk->add_option("--log", o.log, "Per-epoch training log TSV");
  o.kb_flags.add_to(tk);

  auto *ex = app.add_subcommand("extract", "Score entity pairs of a test mention file");
  ex->add_option("--m2r", o.m2r_path, "Mention model")->required();
  ex->add_option("--kb", o.kb_path, "KB model");
  ex->add_option("--mentions", o.mentions, "Test mention TSV")->required();
  ex->add_option("--fusion", o.fusion, "Scoring mode")->check(CLI::IsMember({"m2r", "m2r+kb"}))->capture_default_str();
  ex->add_option("--calib-threshold", o.calib_threshold, "Top-t cutoff of the calibrated KB score")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ex->add_option("--calib-direction", o.calib_direction, "Rank statistic fed to the cutoff")
      ->check(CLI::IsMember({"rank-position", "beaten-count"}))
      ->capture_default_str();
  ex->add_option("--out", o.out, "Extraction TSV to write")->required();

  auto *ev = app.add_subcommand("eval", "Aggregate precision/recall curve");
  ev->add_option("--extractions", o.extractions, "Extraction TSV")->required();
  ev->add_option("--gold", o.gold, "Gold head<TAB>relation<TAB>tail TSV")->required();
  ev->add_option("--out", o.out, "Curve TSV to write")->required();

  auto *gs = app.add_subcommand("gen-synth", "Generate a synthetic corpus and KB");
  auto &s = o.synth;
  gs->add_option("--out-dir", o.out_dir, "Existing directory for the generated files")->required();
  gs->add_option("--entities", s.num_entities)->capture_default_str();
  gs->add_option("--relations", s.num_relations, "Relationships, NA excluded")->capture_default_str();
  gs->add_option("--features", s.num_features)->capture_default_str();
  gs->add_option("--mentions", s.num_mentions, "Train and test mentions together")->capture_default_str();
  gs->add_option("--noise", s.noise_rate, "Share of mentions expressing a distractor")->capture_default_str();
  gs->add_option("--seed", s.seed)->capture_default_str();
  gs->add_option("--na-fraction", s.na_pair_fraction)->capture_default_str();
  gs->add_option("--test-fraction", s.test_pair_fraction)->capture_default_str();
  gs->add_option("--max-mentions-per-pair", s.max_mentions_per_pair)->capture_default_str();
  gs->add_option("--kb-corroboration", s.kb_corroboration, "Share of relation pairs consistent with the KB")
      ->capture_default_str();
  gs->add_option("--clusters", s.num_clusters, "Entity clusters of the planted KB")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (bv->parsed()) cmd_build_vocab(o);
    else if (tm->parsed()) cmd_train_m2r(o);
    else if (tk->parsed()) cmd_train_kb(o);
    else if (ex->parsed()) cmd_extract(o);
    else if (ev->parsed()) cmd_eval(o);
    else if (gs->parsed()) cmd_gen_synth(o);
  } catch (const std::exception &e) {
    std::cerr << "relex: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace relex::cli
