#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include <json.hpp>

#include "fixture.hpp"
#include "rnns/attack.hpp"
#include "rnns/util.hpp"

using namespace rnns;
using nlohmann::json;

namespace {

const std::string kGoldenPath =
    std::string(RNNS_SOURCE_DIR) + "/tests/data/golden/attack_transcript.json";

// Victim scripted by identifier presence: the distribution of the first
// matching name wins; otherwise the default (uniform unless overridden).
class ScriptedVictim : public VictimInterface {
 public:
  ScriptedVictim(int classes,
                 std::vector<std::pair<std::string, std::vector<double>>> rules,
                 std::vector<double> fallback = {})
      : classes_(classes), rules_(std::move(rules)), fallback_(std::move(fallback)) {
    if (fallback_.empty())
      fallback_.assign(static_cast<std::size_t>(classes_), 1.0 / classes_);
  }

  Probabilities classify(const SourceUnit& unit) override {
    const auto names = identifier_names(unit);
    for (const auto& [name, probs] : rules_)
      if (names.count(name)) return Probabilities::from_probs(probs);
    return Probabilities::from_probs(fallback_);
  }
  int num_labels() const override { return classes_; }

 private:
  int classes_;
  std::vector<std::pair<std::string, std::vector<double>>> rules_;
  std::vector<double> fallback_;
};

class ConstantVictim : public VictimInterface {
 public:
  explicit ConstantVictim(std::vector<double> probs) : probs_(std::move(probs)) {}
  Probabilities classify(const SourceUnit&) override {
    return Probabilities::from_probs(probs_);
  }
  int num_labels() const override { return static_cast<int>(probs_.size()); }

 private:
  std::vector<double> probs_;
};

AttackConfig unlimited_config() {
  AttackConfig cfg;
  cfg.constraints.unlimited = true;
  return cfg;
}

// Transcript invariants shared by the fixture checks: strictly decreasing
// accepted probabilities and no substitute re-queried per variable.
void check_transcript_discipline(const AttackResult& result) {
  double prob_min = 1.0;
  std::map<std::string, std::set<std::string>> tried;
  for (const TranscriptEntry& e : result.transcript) {
    CHECK(tried[e.variable].insert(e.substitute).second);
    if (e.accepted) {
      CHECK(e.prob_true < prob_min);
      prob_min = e.prob_true;
    }
  }
}

}  // namespace

TEST_CASE("make_var_array is deterministic, distinct, cycling and validated") {
  AttackConfig cfg;
  cfg.rng_seed = 42;
  const auto names = make_var_array(cfg);
  REQUIRE(names.size() == 16);
  CHECK(names == make_var_array(cfg));

  std::set<std::string> unique(names.begin(), names.end());
  CHECK(unique.size() == names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(names[i].size() == 1 + (i % 5));  // lengths cycle 1..5
    CHECK(is_valid_identifier(names[i], Language::Java));
    CHECK(is_valid_identifier(names[i], Language::Python));
    CHECK(is_valid_identifier(names[i], Language::C));
  }

  AttackConfig other = cfg;
  other.rng_seed = 43;
  CHECK(make_var_array(other) != names);

  AttackConfig bad;
  bad.var_array_size = 0;
  CHECK_THROWS_AS(make_var_array(bad), std::invalid_argument);
}

TEST_CASE("make_var_array matches the frozen golden list") {
  AttackConfig cfg;  // rng_seed 1
  const std::vector<std::string> golden = make_var_array(cfg);
  // Frozen once from the documented procedure (seed 1, size 16, lengths
  // cycling 1..5); guards the derivation against regressions.
  const std::string path =
      std::string(RNNS_SOURCE_DIR) + "/tests/data/golden/var_array_seed1.json";
  if (std::getenv("RNNS_REGEN_GOLDEN")) {
    write_text_file(path, json(golden).dump(2) + "\n");
  }
  const auto frozen = json::parse(read_text_file(path)).get<std::vector<std::string>>();
  CHECK(golden == frozen);
}

TEST_CASE("uncertainty of a constant victim is zero") {
  ConstantVictim victim({0.5, 0.3, 0.2});
  SourceUnit unit{"int alphavalue = betavalue;", Language::C, 0};
  AttackConfig cfg;
  const auto var_array = make_var_array(cfg);
  CHECK(uncertainty(unit, "alphavalue", victim, var_array) == 0.0);
}

TEST_CASE("uncertainty hand arithmetic: two mutants at 0.4/0.6 give 0.1") {
  AttackConfig cfg;
  cfg.var_array_size = 2;
  const auto var_array = make_var_array(cfg);
  REQUIRE(var_array.size() == 2);

  // Probing with the first name yields (0.4, 0.6), with the second (0.6,
  // 0.4): per label the population std of {0.4, 0.6} is 0.1, and the mean
  // over both labels stays 0.1.
  ScriptedVictim victim(2, {{var_array[0], {0.4, 0.6}},
                            {var_array[1], {0.6, 0.4}}});
  SourceUnit unit{"int alphavalue = 1;", Language::C, 0};
  std::uint64_t queries = 0;
  const double u =
      uncertainty(unit, "alphavalue", victim, var_array, nullptr, &queries);
  CHECK(u == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(queries == 2);
}

TEST_CASE("uncertainty skips probes that collide with existing identifiers") {
  AttackConfig cfg;
  cfg.var_array_size = 4;
  const auto var_array = make_var_array(cfg);

  // A unit that already contains two probe names: only the other two fire.
  SourceUnit unit{"int alphavalue = " + var_array[0] + " + " + var_array[1] + ";",
                  Language::C, 0};
  ConstantVictim victim({0.5, 0.5});
  std::uint64_t queries = 0;
  uncertainty(unit, "alphavalue", victim, var_array, nullptr, &queries);
  CHECK(queries == 2);

  // All probes colliding yields zero uncertainty and zero queries.
  std::string code = "int alphavalue = " + var_array[0];
  for (std::size_t i = 1; i < var_array.size(); ++i) code += " + " + var_array[i];
  code += ";";
  SourceUnit all{code, Language::C, 0};
  queries = 0;
  CHECK(uncertainty(all, "alphavalue", victim, var_array, nullptr, &queries) ==
        0.0);
  CHECK(queries == 0);
}

TEST_CASE("rank_variables sorts by uncertainty with first-occurrence ties") {
  AttackConfig cfg;
  cfg.var_array_size = 2;
  const auto var_array = make_var_array(cfg);

  // beta reacts to probes, alpha and gamma do not.
  SourceUnit unit{"int alphavar = 1; int betavar = 2; int gammavar = 3;",
                  Language::C, 0};
  ScriptedVictim victim(
      2, {{"betavar", {0.5, 0.5}},  // present until beta itself is renamed
          {var_array[0], {0.9, 0.1}},
          {var_array[1], {0.2, 0.8}}});
  const auto ranked = rank_variables(unit, victim, var_array);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].variable.name == "betavar");
  CHECK(ranked[0].uncertainty > 0.0);
  // alpha and gamma both have zero uncertainty; code order is kept.
  CHECK(ranked[1].variable.name == "alphavar");
  CHECK(ranked[2].variable.name == "gammavar");
  CHECK(ranked[1].uncertainty == 0.0);
}

TEST_CASE("ranking matches an independent recomputation from the probe log") {
  const auto f = rnns_test::small_fixture();
  ToyVictim victim(f.model);
  AttackConfig cfg;
  const auto var_array = make_var_array(cfg);

  std::vector<UncertaintyProbe> log;
  const auto ranked = rank_variables(f.dataset[0], victim, var_array, &log);
  REQUIRE(!ranked.empty());
  REQUIRE(!log.empty());

  // Recompute each variable's uncertainty from the logged distributions.
  std::map<std::string, std::vector<std::vector<double>>> by_var;
  for (const auto& probe : log) by_var[probe.variable].push_back(probe.probs);
  std::map<std::string, double> recomputed;
  for (const auto& [var, dists] : by_var) {
    const std::size_t labels = dists.front().size();
    double sum = 0.0;
    for (std::size_t c = 0; c < labels; ++c) {
      double mean = 0.0;
      for (const auto& d : dists) mean += d[c];
      mean /= static_cast<double>(dists.size());
      double var_acc = 0.0;
      for (const auto& d : dists) var_acc += (d[c] - mean) * (d[c] - mean);
      sum += std::sqrt(var_acc / static_cast<double>(dists.size()));
    }
    recomputed[var] = sum / static_cast<double>(labels);
  }
  for (const auto& rv : ranked) {
    CAPTURE(rv.variable.name);
    CHECK(rv.uncertainty ==
          doctest::Approx(recomputed[rv.variable.name]).epsilon(1e-9));
  }
  for (std::size_t i = 1; i < ranked.size(); ++i)
    CHECK(ranked[i - 1].uncertainty >= ranked[i].uncertainty);
}

TEST_CASE("predict_seed identity case returns E(sub_cur) exactly") {
  const Encoder enc{EncoderConfig{}};
  const EmbeddingVector zero(64, 0.0);
  const auto out = predict_seed("counter", "counter", zero, 0.2, enc);
  CHECK(out.seed == enc.embed("counter"));  // bitwise
  CHECK(out.smoothed_delta == zero);
}

TEST_CASE("predict_seed startup step scales the increment by alpha") {
  const Encoder enc{EncoderConfig{}};
  const EmbeddingVector zero(64, 0.0);
  const auto out = predict_seed("alphaname", "betaname", zero, 0.2, enc);
  const EmbeddingVector pre = enc.embed("alphaname");
  const EmbeddingVector cur = enc.embed("betaname");
  for (std::size_t i = 0; i < cur.size(); ++i) {
    CHECK(out.smoothed_delta[i] ==
          doctest::Approx(0.2 * (cur[i] - pre[i])).epsilon(1e-15));
    CHECK(out.seed[i] ==
          doctest::Approx(cur[i] + out.smoothed_delta[i]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(predict_seed("a", "b", zero, 1.5, enc), std::invalid_argument);
}

TEST_CASE("a multi-step smoothing sequence matches an independent recurrence") {
  const Encoder enc{EncoderConfig{}};
  SplitMix64 rng(17);
  const double alpha = 0.2;

  std::string pre = "seedlinga";
  std::string cur = "seedlingb";
  EmbeddingVector smo(64, 0.0);
  EmbeddingVector smo_ref(64, 0.0);

  for (int step = 0; step < 1000; ++step) {
    const auto out = predict_seed(pre, cur, smo, alpha, enc);
    // Independent recomputation with a different expression ordering.
    const EmbeddingVector e_cur = enc.embed(cur);
    const EmbeddingVector e_pre = enc.embed(pre);
    for (std::size_t i = 0; i < smo_ref.size(); ++i) {
      const double delta = e_cur[i] - e_pre[i];
      smo_ref[i] = smo_ref[i] - alpha * smo_ref[i] + alpha * delta;
      CHECK(std::abs(out.smoothed_delta[i] - smo_ref[i]) <= 1e-12);
      CHECK(std::abs(out.seed[i] - (e_cur[i] + smo_ref[i])) <= 1e-12);
    }
    smo = out.smoothed_delta;
    pre = cur;
    cur = "seedling" + std::to_string(rng.next_below(100000));
  }
}

TEST_CASE("attack succeeds immediately against a flip-on-rename victim") {
  // Label flips whenever variable alphavalue is renamed at all.
  ScriptedVictim victim(2, {{"alphavalue", {0.9, 0.1}}}, {0.1, 0.9});
  SourceUnit unit{"int alphavalue = 3; int betavalue = alphavalue;",
                  Language::C, 0};

  const Encoder enc{EncoderConfig{}};
  const SubstituteCorpus corpus = corpus_from_names(
      {"candidateone", "candidatetwo", "candidatethree"}, enc);
  AttackConfig cfg = unlimited_config();
  const auto var_array = make_var_array(cfg);

  const auto result =
      attack_one(unit, victim, corpus, cfg, enc, var_array, 1);
  CHECK(result.success);
  CHECK(result.replaced.size() == 1);
  CHECK(result.replaced[0].first == "alphavalue");
  CHECK_FALSE(identifier_names(result.adversarial_code).count("alphavalue"));
  CHECK(alpha_equivalent(unit, result.adversarial_code, result.replaced));
  check_transcript_discipline(result);
}

TEST_CASE("identifier-blind victim: failure with the documented budget bound") {
  ConstantVictim victim({0.6, 0.4});
  SourceUnit unit{"int alphavalue = betavalue + gammavalue;", Language::C, 0};
  const Encoder enc{EncoderConfig{}};

  std::vector<std::string> names;
  for (int i = 0; i < 300; ++i) names.push_back("corpusname" + std::to_string(i));
  const SubstituteCorpus corpus = corpus_from_names(names, enc);

  AttackConfig cfg = unlimited_config();
  cfg.max_itr = 2;
  cfg.constraints.k = 10;
  const auto var_array = make_var_array(cfg);

  CountingVictim counted(victim);
  const auto result =
      attack_one(unit, counted, corpus, cfg, enc, var_array, 1);
  CHECK_FALSE(result.success);
  const std::uint64_t n_vars = 3;
  CHECK(result.queries == counted.counter().count());
  CHECK(result.queries <= 1 + result.uncertainty_queries +
                              n_vars * cfg.max_itr * cfg.constraints.k);
  // prob_min starts at 1.0, so exactly the first candidate is accepted and
  // the constant victim never admits a second improvement.
  std::size_t accepts = 0;
  for (const auto& e : result.transcript) accepts += e.accepted ? 1 : 0;
  CHECK(accepts == 1);
  CHECK(result.replaced.size() == 1);
  check_transcript_discipline(result);
}

TEST_CASE("empty search rounds advance without state changes") {
  ConstantVictim victim({0.6, 0.4});
  SourceUnit unit{"int alphavalue = 1;", Language::C, 0};
  const Encoder enc{EncoderConfig{}};
  // Nothing in the corpus is feasible for this variable under constraints.
  const SubstituteCorpus corpus =
      corpus_from_names({"zzzzzzzzzzzzzzzzzzzzzzzzz"}, enc);
  AttackConfig cfg;  // constrained
  const auto var_array = make_var_array(cfg);

  CountingVictim counted(victim);
  const auto result = attack_one(unit, counted, corpus, cfg, enc, var_array, 1);
  CHECK_FALSE(result.success);
  CHECK(result.transcript.empty());
  CHECK(result.queries == 1 + result.uncertainty_queries);
}

TEST_CASE("attack_one on an initially misclassified sample stops at one query") {
  ConstantVictim victim({0.1, 0.9});
  SourceUnit unit{"int alphavalue = 1;", Language::C, 0};  // label 0, predicted 1
  const Encoder enc{EncoderConfig{}};
  const SubstituteCorpus corpus = corpus_from_names({"somename"}, enc);
  AttackConfig cfg;
  const auto var_array = make_var_array(cfg);
  const auto result = attack_one(unit, victim, corpus, cfg, enc, var_array, 1);
  CHECK(result.initially_misclassified);
  CHECK_FALSE(result.success);
  CHECK(result.queries == 1);
}

TEST_CASE("random baseline: deterministic, budgeted, unconstrained") {
  const auto f = rnns_test::small_fixture();
  ToyVictim victim(f.model);
  AttackConfig cfg;
  cfg.max_itr = 2;
  cfg.constraints.k = 15;
  const auto var_array = make_var_array(cfg);

  // Pick an eligible sample.
  std::size_t idx = 0;
  for (; idx < f.dataset.size(); ++idx) {
    if (classify_toy(f.model, f.dataset[idx]).predicted ==
        *f.dataset[idx].label)
      break;
  }
  REQUIRE(idx < f.dataset.size());
  const SourceUnit& unit = f.dataset[idx];

  CountingVictim counted(victim);
  const auto a = attack_random_baseline(unit, counted, f.corpus, cfg,
                                        f.encoder, var_array, 99);
  const auto b = attack_random_baseline(unit, victim, f.corpus, cfg, f.encoder,
                                        var_array, 99);
  CHECK(a.queries == counted.counter().count());
  CHECK(a.transcript.size() == b.transcript.size());
  for (std::size_t i = 0; i < a.transcript.size(); ++i) {
    CHECK(a.transcript[i].substitute == b.transcript[i].substitute);
    CHECK(a.transcript[i].prob_true == b.transcript[i].prob_true);
  }
  // A different stream seed draws a different candidate sequence.
  const auto c = attack_random_baseline(unit, victim, f.corpus, cfg, f.encoder,
                                        var_array, 100);
  bool same_sequence = c.transcript.size() == a.transcript.size();
  if (same_sequence) {
    for (std::size_t i = 0; i < a.transcript.size(); ++i)
      same_sequence = same_sequence &&
                      c.transcript[i].substitute == a.transcript[i].substitute;
  }
  CHECK_FALSE(same_sequence);

  // Budget: per variable at most max_itr*k candidate queries.
  std::map<std::string, int> per_var;
  for (const auto& e : a.transcript) ++per_var[e.variable];
  for (const auto& [var, n] : per_var)
    CHECK(n <= cfg.max_itr * cfg.constraints.k);
  check_transcript_discipline(a);

  // The baseline ignores the perturbation constraints: expect queried
  // substitutes that the default similarity budget would reject.
  bool violates = false;
  for (const auto& e : a.transcript) {
    const double dissim = 1.0 - cosine(f.encoder.embed(e.substitute),
                                       f.encoder.embed(e.variable));
    const int len_diff = std::abs(static_cast<int>(e.substitute.size()) -
                                  static_cast<int>(e.variable.size()));
    if (dissim >= 0.15 || len_diff >= 4) violates = true;
  }
  CHECK(violates);
}

TEST_CASE("attack_dataset: eligibility, query exactness and determinism") {
  const auto f = rnns_test::small_fixture();
  ToyVictim victim(f.model);
  AttackConfig cfg;
  cfg.rng_seed = 5;
  cfg.keep_transcripts = false;

  const auto once = attack_dataset(f.dataset, victim, f.corpus, cfg, f.encoder,
                                   AttackerKind::Rnns, 1);
  const auto again = attack_dataset(f.dataset, victim, f.corpus, cfg,
                                    f.encoder, AttackerKind::Rnns, 3);
  REQUIRE(once.results.size() == f.dataset.size());
  REQUIRE(once.eligible.size() == f.dataset.size());
  CHECK(once.eligible == again.eligible);
  for (std::size_t i = 0; i < once.results.size(); ++i) {
    const AttackResult& r = once.results[i];
    CHECK(r.queries == again.results[i].queries);
    CHECK(r.success == again.results[i].success);
    CHECK(r.adversarial_code.code == again.results[i].adversarial_code.code);
    if (!once.eligible[i]) {
      CHECK(r.initially_misclassified);
      CHECK(r.queries == 1);
    }
    if (r.success) {
      // Soundness: flip plus lexical alpha-equivalence.
      CHECK(classify_toy(f.model, r.adversarial_code).predicted !=
            *f.dataset[i].label);
      CHECK(alpha_equivalent(f.dataset[i], r.adversarial_code, r.replaced));
    }
  }
}

TEST_CASE("frozen golden transcript reproduces and self-validates") {
  const auto f = rnns_test::small_fixture();
  ToyVictim victim(f.model);
  AttackConfig cfg;
  cfg.rng_seed = 5;
  cfg.keep_transcripts = true;
  const auto var_array = make_var_array(cfg);

  // First eligible sample is the frozen target.
  std::size_t idx = 0;
  while (classify_toy(f.model, f.dataset[idx]).predicted !=
         *f.dataset[idx].label)
    ++idx;
  const SourceUnit& unit = f.dataset[idx];

  CountingVictim counted(victim);
  const auto result =
      attack_one(unit, counted, f.corpus, cfg, f.encoder, var_array, 7);
  CHECK(result.queries == counted.counter().count());

  json dump = {
      {"sample_index", idx},
      {"label", *unit.label},
      {"success", result.success},
      {"queries", result.queries},
      {"uncertainty_queries", result.uncertainty_queries},
      {"initial_prob_true", result.initial_prob_true},
      {"final_prob_true", result.final_prob_true},
      {"replaced", result.replaced},
      {"adversarial_code", result.adversarial_code.code},
  };
  json events = json::array();
  for (const auto& e : result.transcript)
    events.push_back({{"variable", e.variable},
                      {"substitute", e.substitute},
                      {"prob_true", e.prob_true},
                      {"predicted", e.predicted},
                      {"accepted", e.accepted}});
  dump["transcript"] = events;
  json probes = json::array();
  for (const auto& p : result.uncertainty_log)
    probes.push_back({{"variable", p.variable}, {"probe", p.probe}});
  dump["probes"] = probes;

  if (std::getenv("RNNS_REGEN_GOLDEN"))
    write_text_file(kGoldenPath, dump.dump(2) + "\n");

  const json golden = json::parse(read_text_file(kGoldenPath));
  CHECK(dump == golden);

  // Independent re-validation of the frozen transcript.
  double prob_min = 1.0;
  std::map<std::string, std::set<std::string>> seen;
  std::size_t accepts = 0;
  for (const auto& e : golden.at("transcript")) {
    CHECK(seen[e.at("variable")].insert(e.at("substitute")).second);
    if (e.at("accepted").get<bool>()) {
      CHECK(e.at("prob_true").get<double>() < prob_min);
      prob_min = e.at("prob_true").get<double>();
      ++accepts;
    }
  }
  CHECK(accepts > 0);
  CHECK(golden.at("queries").get<std::uint64_t>() ==
        1 + golden.at("probes").size() + golden.at("transcript").size());
  const std::uint64_t n_vars = extract_variables(unit).size();
  CHECK(golden.at("queries").get<std::uint64_t>() <=
        1 + golden.at("uncertainty_queries").get<std::uint64_t>() +
            n_vars * cfg.max_itr * cfg.constraints.k);
  if (golden.at("success").get<bool>()) {
    SourceUnit adv{golden.at("adversarial_code").get<std::string>(),
                   unit.language, unit.label};
    std::vector<std::pair<std::string, std::string>> mapping;
    for (const auto& pair : golden.at("replaced"))
      mapping.emplace_back(pair.at(0).get<std::string>(),
                           pair.at(1).get<std::string>());
    CHECK(alpha_equivalent(unit, adv, mapping));
    CHECK(classify_toy(f.model, adv).predicted != *unit.label);
  }
}
