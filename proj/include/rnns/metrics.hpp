#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnns/attack.hpp"

namespace rnns {

// Population mean and variance (divide by n) of one statistic.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t count = 0;
};

struct ReportSummary {
  std::uint64_t total_samples = 0;
  std::uint64_t eligible = 0;   // initially classified correctly
  std::uint64_t successes = 0;
  std::optional<double> asr;    // successes / eligible
  // Average victim queries per eligible sample; honours the uncertainty
  // counting flag from the config. The failed-only average is exposed too
  // since the canonical averaging population is a documented choice.
  std::optional<double> mean_qt;
  std::optional<double> mean_qt_failed_only;
  // Over successful attacks: |len(substitute) - len(variable)| pooled across
  // replaced pairs, and the per-sample replaced-variable count.
  std::optional<Moments> length_diff;
  std::optional<Moments> replaced_count;
};

struct AttackReport {
  std::string attacker;  // "rnns" | "random"
  nlohmann::json config_echo;
  EncoderFingerprint corpus_fingerprint;
  std::uint64_t corpus_records = 0;  // substitute-set size used for the run
  std::vector<AttackResult> results;
  std::vector<bool> eligible;
  ReportSummary summary;
};

// Pure aggregation over per-sample results; recomputable from transcripts.
// An empty success set yields null perturbation statistics, not zeros.
ReportSummary aggregate_summary(const std::vector<AttackResult>& results,
                                const std::vector<bool>& eligible,
                                bool count_uncertainty_queries);

AttackReport make_report(std::string attacker, nlohmann::json config_echo,
                         const EncoderFingerprint& corpus_fingerprint,
                         std::uint64_t corpus_records,
                         std::vector<AttackResult> results,
                         std::vector<bool> eligible,
                         bool count_uncertainty_queries);

// Runs the chosen attacker over a dataset and aggregates straight into a
// report (the config echo is left to the caller to extend).
AttackReport attack_dataset_report(const std::vector<SourceUnit>& dataset,
                                   VictimInterface& victim,
                                   const SubstituteCorpus& corpus,
                                   const AttackConfig& cfg,
                                   const Encoder& encoder, AttackerKind kind,
                                   nlohmann::json config_echo, int jobs = 1);

enum class ReportFormat { Json, Table };

std::string render_report(const AttackReport& report, ReportFormat format);

std::string serialize_report(const AttackReport& report);
AttackReport parse_report(std::string_view text);
void save_report(const AttackReport& report, const std::string& path);
AttackReport load_report(const std::string& path);

}  // namespace rnns
