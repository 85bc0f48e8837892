// Command-line front end: dataset generation, corpus building, victim
// training/serving, attacks and reporting. Every artifact-producing run also
// writes a <output>.manifest.json with the resolved flags for provenance.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rnns/attack.hpp"
#include "rnns/corpus.hpp"
#include "rnns/dataset.hpp"
#include "rnns/http_victim.hpp"
#include "rnns/metrics.hpp"
#include "rnns/util.hpp"

namespace {

using nlohmann::json;
using namespace rnns;

constexpr const char* kToolVersion = "0.1.0";

// Outputs written so far in this run; removed if the run fails later.
std::vector<std::string> g_written;

void commit(const std::string& path, const std::string& content) {
  write_text_file(path, content);
  g_written.push_back(path);
}

void write_manifest(const std::string& subcommand, const json& flags,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    std::uint64_t rng_seed) {
  json manifest = {
      {"tool", "rnns"},          {"version", kToolVersion},
      {"subcommand", subcommand}, {"flags", flags},
      {"inputs", inputs},        {"outputs", outputs},
      {"rng_seed", rng_seed},
  };
  commit(outputs.empty() ? subcommand + ".manifest.json"
                         : outputs.front() + ".manifest.json",
         manifest.dump(2) + "\n");
}

int default_jobs() {
  if (const char* env = std::getenv("RNNS_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

EncoderFingerprint peek_corpus_fingerprint(const std::string& path) {
  const std::string text = read_text_file(path);
  const std::size_t eol = text.find('\n');
  json header = json::parse(text.substr(0, eol));
  if (header.value("format", "") != "rnns-corpus")
    throw std::runtime_error("not a corpus file: " + path);
  EncoderFingerprint fp;
  fp.dimension = header.at("dimension").get<int>();
  fp.hash_seed = header.at("hash_seed").get<std::uint64_t>();
  fp.table_id = header.at("table").get<std::string>();
  return fp;
}

std::unique_ptr<VictimInterface> open_victim(const std::string& spec) {
  if (spec.rfind("toy:", 0) == 0)
    return std::make_unique<ToyVictim>(load_toy(spec.substr(4)));
  if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0)
    return std::make_unique<HttpVictim>(spec);
  throw std::runtime_error(
      "victim must be toy:<model-file> or http://host:port, got: " + spec);
}

// ---------------------------------------------------------------------------

struct CorpusBuildArgs {
  std::string lang;
  std::vector<std::string> inputs;
  std::string out;
  int dim = 64;
  std::uint64_t hash_seed = 1;
  std::string table;
};

int run_corpus_build(const CorpusBuildArgs& a) {
  EncoderConfig cfg;
  cfg.dimension = a.dim;
  cfg.hash_seed = a.hash_seed;
  if (!a.table.empty()) cfg.table_path = a.table;
  Encoder encoder(cfg);
  const Language lang = language_from_string(a.lang);

  // Inputs may be directories of source files or .jsonl dataset files.
  std::vector<std::string> source_roots;
  std::vector<SourceUnit> units;
  for (const std::string& input : a.inputs) {
    if (std::filesystem::is_regular_file(input) &&
        std::filesystem::path(input).extension() == ".jsonl") {
      for (SourceUnit& u : load_dataset(input)) {
        if (u.language != lang) continue;
        units.push_back(std::move(u));
      }
    } else {
      source_roots.push_back(input);
    }
  }

  CorpusBuildStats stats;
  SubstituteCorpus corpus;
  if (!source_roots.empty()) {
    corpus = build_corpus(source_roots, lang, encoder, &stats);
    if (!units.empty()) {
      // Merge names from both input kinds into one corpus.
      std::vector<std::string> names;
      for (const SubstituteRecord& r : corpus.records) names.push_back(r.name);
      CorpusBuildStats extra;
      for (const SubstituteRecord& r :
           corpus_from_units(units, encoder, &extra).records)
        names.push_back(r.name);
      stats.files_seen += extra.files_seen;
      stats.files_skipped += extra.files_skipped;
      corpus = corpus_from_names(names, encoder);
    }
  } else {
    corpus = corpus_from_units(units, encoder, &stats);
  }

  commit(a.out, serialize_corpus(corpus));
  json flags = {{"lang", a.lang},          {"input", a.inputs},
                {"out", a.out},            {"dim", a.dim},
                {"hash-seed", a.hash_seed}, {"table", a.table}};
  write_manifest("corpus-build", flags, a.inputs, {a.out}, a.hash_seed);
  std::cerr << "corpus: " << corpus.records.size() << " substitutes from "
            << stats.files_seen << " inputs (" << stats.files_skipped
            << " skipped)\n";
  return 0;
}

struct VictimTrainArgs {
  std::string data;
  std::string out;
  int classes = 0;
  int epochs = 200;
  double lr = 0.5;
  double weight_decay = 0.01;
  std::uint64_t seed = 1;
  std::uint32_t features = 32768;
};

int run_victim_train(const VictimTrainArgs& a) {
  const auto dataset = load_dataset(a.data);
  ToyTrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.weight_decay = a.weight_decay;
  cfg.seed = a.seed;
  cfg.feature_count = a.features;
  ToyModel model = train_toy(dataset, cfg);
  if (a.classes > 0 && model.classes != a.classes)
    throw std::runtime_error("dataset has " + std::to_string(model.classes) +
                             " classes, expected " + std::to_string(a.classes));
  commit(a.out, serialize_toy(model));
  json flags = {{"data", a.data},       {"out", a.out},
                {"classes", a.classes},  {"epochs", a.epochs},
                {"lr", a.lr},            {"weight-decay", a.weight_decay},
                {"seed", a.seed},        {"features", a.features}};
  write_manifest("victim-train", flags, {a.data}, {a.out}, a.seed);
  std::cerr << "victim: " << model.classes << " classes, train accuracy "
            << model.train_accuracy << ", loss " << model.final_loss << "\n";
  return 0;
}

struct DatagenArgs {
  int classes = 8;
  int per_class = 100;
  std::string lang = "java";
  std::uint64_t seed = 1;
  std::string out;
};

int run_datagen(const DatagenArgs& a) {
  DatagenConfig cfg;
  cfg.classes = a.classes;
  cfg.per_class = a.per_class;
  cfg.language = language_from_string(a.lang);
  cfg.seed = a.seed;
  const auto units = generate_dataset(cfg);
  commit(a.out, serialize_dataset(units));
  json flags = {{"classes", a.classes}, {"per-class", a.per_class},
                {"lang", a.lang},       {"seed", a.seed},
                {"out", a.out}};
  write_manifest("datagen", flags, {}, {a.out}, a.seed);
  std::cerr << "datagen: " << units.size() << " samples\n";
  return 0;
}

struct AttackArgs {
  std::string dataset;
  std::string corpus;
  std::string victim;
  std::string attacker = "rnns";
  int max_itr = 6;
  double alpha = 0.2;
  double epsilon = 0.15;
  int delta = 4;
  int topk = 60;
  std::uint64_t seed = 1;
  bool unlimited = false;
  bool no_uncertainty_in_qt = false;
  bool transcripts = false;
  int jobs = default_jobs();
  std::string table;
  std::string out;
};

int run_attack(const AttackArgs& a) {
  const EncoderFingerprint fp = peek_corpus_fingerprint(a.corpus);
  EncoderConfig ecfg;
  ecfg.dimension = fp.dimension;
  ecfg.hash_seed = fp.hash_seed;
  if (fp.table_id != "builtin") {
    if (a.table.empty())
      throw std::runtime_error(
          "corpus was built with an embedding table; pass --table");
    ecfg.table_path = a.table;
  }
  Encoder encoder(ecfg);
  const SubstituteCorpus corpus = load_corpus(a.corpus, encoder.fingerprint());
  const auto samples = load_dataset(a.dataset);
  auto victim = open_victim(a.victim);

  AttackConfig cfg;
  cfg.max_itr = a.max_itr;
  cfg.alpha = a.alpha;
  cfg.constraints.epsilon = a.epsilon;
  cfg.constraints.delta = a.delta;
  cfg.constraints.k = a.topk;
  cfg.constraints.unlimited = a.unlimited;
  cfg.rng_seed = a.seed;
  cfg.count_uncertainty_queries = !a.no_uncertainty_in_qt;
  cfg.keep_transcripts = a.transcripts;

  const AttackerKind kind = attacker_from_string(a.attacker);
  json config_echo = {{"attacker", a.attacker},
                      {"victim", a.victim},
                      {"dataset", a.dataset},
                      {"corpus", a.corpus},
                      {"max_itr", a.max_itr},
                      {"alpha", a.alpha},
                      {"epsilon", a.epsilon},
                      {"delta", a.delta},
                      {"topk", a.topk},
                      {"unlimited", a.unlimited},
                      {"seed", a.seed},
                      {"count_uncertainty_queries", cfg.count_uncertainty_queries},
                      {"transcripts", a.transcripts},
                      {"var_array_size", cfg.var_array_size},
                      {"var_array_lengths",
                       json::array({cfg.var_array_min_len, cfg.var_array_max_len})},
                      {"constraint_reference", "original_variable"}};
  AttackReport report = attack_dataset_report(samples, *victim, corpus, cfg,
                                              encoder, kind, config_echo,
                                              a.jobs);

  commit(a.out, serialize_report(report));
  json flags = config_echo;
  flags["out"] = a.out;
  flags["jobs"] = a.jobs;
  write_manifest("attack", flags, {a.dataset, a.corpus}, {a.out}, a.seed);
  std::cerr << render_report(report, ReportFormat::Table);
  return 0;
}

int run_report(const std::string& in, const std::string& format) {
  const AttackReport report = load_report(in);
  if (format == "table")
    std::cout << render_report(report, ReportFormat::Table);
  else if (format == "json")
    std::cout << render_report(report, ReportFormat::Json);
  else
    throw std::runtime_error("format must be table or json");
  return 0;
}

int run_export_adversarial(const std::string& in, const std::string& out) {
  const AttackReport report = load_report(in);
  std::vector<SourceUnit> exported;
  for (const AttackResult& r : report.results)
    if (r.success) exported.push_back(r.adversarial_code);
  commit(out, serialize_dataset(exported));
  json flags = {{"in", in}, {"out", out}};
  write_manifest("export-adversarial", flags, {in}, {out}, 0);
  std::cerr << "exported " << exported.size() << " adversarial samples\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rnns: uncertainty-guided identifier-renaming attacks on code "
               "classifiers"};
  app.require_subcommand(1);

  CorpusBuildArgs cb;
  auto* cmd_cb = app.add_subcommand("corpus-build",
                                    "build a substitute corpus from source "
                                    "directories or .jsonl datasets");
  cmd_cb->add_option("--lang", cb.lang, "java|python|c")->required();
  cmd_cb->add_option("--input", cb.inputs, "source dirs/files or .jsonl")
      ->required()
      ->expected(-1);
  cmd_cb->add_option("--out", cb.out, "corpus output path")->required();
  cmd_cb->add_option("--dim", cb.dim, "embedding dimension");
  cmd_cb->add_option("--hash-seed", cb.hash_seed, "encoder hash seed");
  cmd_cb->add_option("--table", cb.table, "embedding table file");

  VictimTrainArgs vt;
  auto* cmd_vt = app.add_subcommand("victim-train", "train the toy victim");
  cmd_vt->add_option("--data", vt.data, "labeled dataset (.jsonl)")->required();
  cmd_vt->add_option("--out", vt.out, "model output path")->required();
  cmd_vt->add_option("--classes", vt.classes, "expected class count");
  cmd_vt->add_option("--epochs", vt.epochs, "training epochs");
  cmd_vt->add_option("--lr", vt.lr, "learning rate");
  cmd_vt->add_option("--weight-decay", vt.weight_decay, "L2 penalty");
  cmd_vt->add_option("--seed", vt.seed, "training seed");
  cmd_vt->add_option("--features", vt.features, "hashed feature count");

  std::string vs_model;
  int vs_port = 8588;
  std::string vs_host = "127.0.0.1";
  auto* cmd_vs = app.add_subcommand("victim-serve",
                                    "serve a toy model over the wire protocol");
  cmd_vs->add_option("--model", vs_model, "model file")->required();
  cmd_vs->add_option("--port", vs_port, "port");
  cmd_vs->add_option("--host", vs_host, "bind host");

  DatagenArgs dg;
  auto* cmd_dg = app.add_subcommand("datagen", "generate a synthetic dataset");
  cmd_dg->add_option("--classes", dg.classes, "number of classes");
  cmd_dg->add_option("--per-class", dg.per_class, "samples per class");
  cmd_dg->add_option("--lang", dg.lang, "java|python|c");
  cmd_dg->add_option("--seed", dg.seed, "generator seed");
  cmd_dg->add_option("--out", dg.out, "dataset output path")->required();

  AttackArgs at;
  auto* cmd_at = app.add_subcommand("attack", "attack a dataset");
  cmd_at->add_option("--dataset", at.dataset, "dataset (.jsonl)")->required();
  cmd_at->add_option("--corpus", at.corpus, "substitute corpus")->required();
  cmd_at->add_option("--victim", at.victim, "toy:<model> or http://host:port")
      ->required();
  cmd_at->add_option("--attacker", at.attacker, "rnns|random");
  cmd_at->add_option("--max-itr", at.max_itr, "rounds per variable");
  cmd_at->add_option("--alpha", at.alpha, "seed smoothing rate");
  cmd_at->add_option("--epsilon", at.epsilon, "similarity budget");
  cmd_at->add_option("--delta", at.delta, "length budget");
  cmd_at->add_option("--topk", at.topk, "candidates per search");
  cmd_at->add_option("--seed", at.seed, "run seed");
  cmd_at->add_flag("--unlimited", at.unlimited, "disable the two constraints");
  cmd_at->add_flag("--no-uncertainty-in-qt", at.no_uncertainty_in_qt,
                   "report QT without uncertainty probes");
  cmd_at->add_flag("--transcripts", at.transcripts,
                   "keep per-query transcripts in the report");
  cmd_at->add_option("--jobs", at.jobs, "parallel samples (env RNNS_JOBS)");
  cmd_at->add_option("--table", at.table, "embedding table file");
  cmd_at->add_option("--out", at.out, "report output path")->required();

  std::string rp_in, rp_format = "table";
  auto* cmd_rp = app.add_subcommand("report", "render a report");
  cmd_rp->add_option("--in", rp_in, "report file")->required();
  cmd_rp->add_option("--format", rp_format, "table|json");

  std::string ex_in, ex_out;
  auto* cmd_ex = app.add_subcommand("export-adversarial",
                                    "export successful adversarial samples");
  cmd_ex->add_option("--in", ex_in, "report file")->required();
  cmd_ex->add_option("--out", ex_out, "dataset output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_cb->parsed()) return run_corpus_build(cb);
    if (cmd_vt->parsed()) return run_victim_train(vt);
    if (cmd_vs->parsed()) {
      serve_victim(load_toy(vs_model), vs_host, vs_port);
      return 0;
    }
    if (cmd_dg->parsed()) return run_datagen(dg);
    if (cmd_at->parsed()) return run_attack(at);
    if (cmd_rp->parsed()) return run_report(rp_in, rp_format);
    if (cmd_ex->parsed()) return run_export_adversarial(ex_in, ex_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const std::string& path : g_written) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
    return 1;
  }
  return 0;
}
