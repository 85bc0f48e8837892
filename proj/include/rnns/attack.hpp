#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rnns/corpus.hpp"
#include "rnns/encoder.hpp"
#include "rnns/nnsearch.hpp"
#include "rnns/victim.hpp"

namespace rnns {

// Attack hyperparameters. The defaults are the published operating point:
// six rounds per variable, smoothing rate 0.2, epsilon 0.15 / delta 4 / k 60,
// sixteen probe names of length one to five.
struct AttackConfig {
  int max_itr = 6;
  double alpha = 0.2;
  SearchConstraints constraints;
  int var_array_size = 16;
  int var_array_min_len = 1;
  int var_array_max_len = 5;
  std::uint64_t rng_seed = 1;
  bool count_uncertainty_queries = true;
  bool keep_transcripts = true;
};

// The fixed probe names used for uncertainty estimation: random lowercase
// strings whose lengths cycle over [min_len, max_len], drawn deterministically
// from rng_seed. All distinct, all valid identifiers in every language.
std::vector<std::string> make_var_array(const AttackConfig& cfg);

// One uncertainty probe: the victim's answer for the unit with `variable`
// renamed to `probe`.
struct UncertaintyProbe {
  std::string variable;
  std::string probe;
  std::vector<double> probs;
  int predicted = 0;
};

// Mean over class labels of the population standard deviation of the label's
// probability across the probe renamings. Renamings that collide with
// existing identifiers (or are invalid for the language) are skipped; if all
// probes are skipped the uncertainty is 0.
double uncertainty(const SourceUnit& unit, const std::string& variable,
                   VictimInterface& victim, std::span<const std::string> var_array,
                   std::vector<UncertaintyProbe>* log = nullptr,
                   std::uint64_t* queries = nullptr);

struct RankedVariable {
  VariableOccurrences variable;
  double uncertainty = 0.0;
};

// Variables sorted by descending uncertainty; ties keep first-occurrence
// order.
std::vector<RankedVariable> rank_variables(
    const SourceUnit& unit, VictimInterface& victim,
    std::span<const std::string> var_array,
    std::vector<UncertaintyProbe>* log = nullptr,
    std::uint64_t* queries = nullptr);

struct SeedPrediction {
  EmbeddingVector seed;            // E(sub_cur) + smoothed delta
  EmbeddingVector smoothed_delta;  // (1-alpha)*old + alpha*(E(cur)-E(pre))
};

// The seed-prediction step. The seed is intentionally not re-normalized:
// cosine ranking is scale-invariant in the seed.
SeedPrediction predict_seed(const std::string& sub_pre,
                            const std::string& sub_cur,
                            const EmbeddingVector& delta_e_smo, double alpha,
                            const Encoder& encoder);

// One candidate query during the substitution loop.
struct TranscriptEntry {
  std::string variable;    // original name of the variable under substitution
  std::string substitute;  // candidate name queried
  double prob_true = 0.0;  // victim probability of the ground-truth label
  int predicted = 0;
  bool accepted = false;   // prob_true hit a new minimum
};

struct AttackResult {
  bool success = false;
  bool initially_misclassified = false;
  SourceUnit adversarial_code;
  std::uint64_t queries = 0;             // total victim queries, initial check included
  std::uint64_t uncertainty_queries = 0; // subset spent on ranking probes
  std::vector<std::pair<std::string, std::string>> replaced;
  std::vector<TranscriptEntry> transcript;
  std::vector<UncertaintyProbe> uncertainty_log;
  double initial_prob_true = 0.0;
  double final_prob_true = 1.0;  // prob_min when the attack stopped
};

enum class AttackerKind { Rnns, RandomBaseline };

AttackerKind attacker_from_string(std::string_view name);
std::string_view to_string(AttackerKind kind);

// The full per-sample attack loop: variables in uncertainty order; per
// variable up to max_itr rounds of seed prediction and constrained top-k
// search; accept a candidate whenever the true-label probability hits a new
// minimum; stop the moment the predicted label flips. Already-queried
// substitutes are never re-queried for the same variable, and candidate
// collisions are checked against the current adversarial code.
//
// `initial` may carry a precomputed classification of the original unit (one
// query, counted); when absent the attack performs that check itself.
// `stream_seed` feeds the random baseline's sampling; the search attacker is
// deterministic and ignores it.
AttackResult attack_one(const SourceUnit& unit, VictimInterface& victim,
                        const SubstituteCorpus& corpus, const AttackConfig& cfg,
                        const Encoder& encoder,
                        std::span<const std::string> var_array,
                        std::uint64_t stream_seed,
                        const Probabilities* initial = nullptr);

// Same outer loop, but candidates are drawn uniformly at random from the
// corpus without the perturbation constraints, with the same per-variable
// candidate budget of max_itr * k queries.
AttackResult attack_random_baseline(const SourceUnit& unit,
                                    VictimInterface& victim,
                                    const SubstituteCorpus& corpus,
                                    const AttackConfig& cfg,
                                    const Encoder& encoder,
                                    std::span<const std::string> var_array,
                                    std::uint64_t stream_seed,
                                    const Probabilities* initial = nullptr);

struct DatasetAttackOutcome {
  std::vector<AttackResult> results;  // one per sample, in dataset order
  std::vector<bool> eligible;         // initially classified correctly
};

// Attacks every sample: classifies it once, skips initially misclassified
// samples, runs the chosen attacker on the rest. Deterministic in
// (dataset, corpus, config); samples may be attacked in parallel.
DatasetAttackOutcome attack_dataset(const std::vector<SourceUnit>& dataset,
                                    VictimInterface& victim,
                                    const SubstituteCorpus& corpus,
                                    const AttackConfig& cfg,
                                    const Encoder& encoder, AttackerKind kind,
                                    int jobs = 1);

}  // namespace rnns
