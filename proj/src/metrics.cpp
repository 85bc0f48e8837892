#include "rnns/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rnns/util.hpp"

namespace rnns {

namespace {

using nlohmann::json;

Moments moments_of(const std::vector<double>& xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.variance = var / static_cast<double>(xs.size());
  return m;
}

json moments_json(const std::optional<Moments>& m) {
  if (!m) return nullptr;
  return json{{"mean", m->mean}, {"variance", m->variance}, {"count", m->count}};
}

std::optional<Moments> moments_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  Moments m;
  m.mean = j.at("mean").get<double>();
  m.variance = j.at("variance").get<double>();
  m.count = j.at("count").get<std::uint64_t>();
  return m;
}

json optional_double_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::optional<double> optional_double_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json result_to_json(const AttackResult& r) {
  json replaced = json::array();
  for (const auto& [from, to] : r.replaced)
    replaced.push_back(json::array({from, to}));
  json transcript = json::array();
  for (const TranscriptEntry& e : r.transcript)
    transcript.push_back(json{{"variable", e.variable},
                              {"substitute", e.substitute},
                              {"prob_true", e.prob_true},
                              {"predicted", e.predicted},
                              {"accepted", e.accepted}});
  json probes = json::array();
  for (const UncertaintyProbe& p : r.uncertainty_log)
    probes.push_back(json{{"variable", p.variable},
                          {"probe", p.probe},
                          {"probs", p.probs},
                          {"predicted", p.predicted}});
  return json{{"success", r.success},
              {"initially_misclassified", r.initially_misclassified},
              {"adversarial_code", r.adversarial_code.code},
              {"language", std::string(to_string(r.adversarial_code.language))},
              {"label", r.adversarial_code.label ? json(*r.adversarial_code.label)
                                                 : json(nullptr)},
              {"queries", r.queries},
              {"uncertainty_queries", r.uncertainty_queries},
              {"initial_prob_true", r.initial_prob_true},
              {"final_prob_true", r.final_prob_true},
              {"replaced", replaced},
              {"transcript", transcript},
              {"uncertainty_probes", probes}};
}

AttackResult result_from_json(const json& j) {
  AttackResult r;
  r.success = j.at("success").get<bool>();
  r.initially_misclassified = j.at("initially_misclassified").get<bool>();
  r.adversarial_code.code = j.at("adversarial_code").get<std::string>();
  r.adversarial_code.language =
      language_from_string(j.at("language").get<std::string>());
  if (!j.at("label").is_null())
    r.adversarial_code.label = j.at("label").get<int>();
  r.queries = j.at("queries").get<std::uint64_t>();
  r.uncertainty_queries = j.at("uncertainty_queries").get<std::uint64_t>();
  r.initial_prob_true = j.at("initial_prob_true").get<double>();
  r.final_prob_true = j.at("final_prob_true").get<double>();
  for (const json& pair : j.at("replaced"))
    r.replaced.emplace_back(pair.at(0).get<std::string>(),
                            pair.at(1).get<std::string>());
  for (const json& e : j.at("transcript"))
    r.transcript.push_back(TranscriptEntry{
        e.at("variable").get<std::string>(),
        e.at("substitute").get<std::string>(), e.at("prob_true").get<double>(),
        e.at("predicted").get<int>(), e.at("accepted").get<bool>()});
  for (const json& p : j.at("uncertainty_probes"))
    r.uncertainty_log.push_back(UncertaintyProbe{
        p.at("variable").get<std::string>(), p.at("probe").get<std::string>(),
        p.at("probs").get<std::vector<double>>(), p.at("predicted").get<int>()});
  return r;
}

}  // namespace

ReportSummary aggregate_summary(const std::vector<AttackResult>& results,
                                const std::vector<bool>& eligible,
                                bool count_uncertainty_queries) {
  if (results.size() != eligible.size())
    throw std::invalid_argument("results and eligibility flags differ in size");

  ReportSummary s;
  s.total_samples = results.size();

  std::vector<double> qt_all, qt_failed, length_diffs, replaced_counts;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!eligible[i]) continue;
    ++s.eligible;
    const AttackResult& r = results[i];
    const std::uint64_t q = count_uncertainty_queries
                                ? r.queries
                                : r.queries - r.uncertainty_queries;
    qt_all.push_back(static_cast<double>(q));
    if (r.success) {
      ++s.successes;
      for (const auto& [from, to] : r.replaced)
        length_diffs.push_back(std::abs(static_cast<double>(to.size()) -
                                        static_cast<double>(from.size())));
      replaced_counts.push_back(static_cast<double>(r.replaced.size()));
    } else {
      qt_failed.push_back(static_cast<double>(q));
    }
  }

  if (s.eligible > 0) {
    s.asr = static_cast<double>(s.successes) / static_cast<double>(s.eligible);
    s.mean_qt = moments_of(qt_all).mean;
  }
  if (!qt_failed.empty()) s.mean_qt_failed_only = moments_of(qt_failed).mean;
  if (s.successes > 0) {
    s.length_diff = moments_of(length_diffs);
    s.replaced_count = moments_of(replaced_counts);
  }
  return s;
}

AttackReport make_report(std::string attacker, nlohmann::json config_echo,
                         const EncoderFingerprint& corpus_fingerprint,
                         std::uint64_t corpus_records,
                         std::vector<AttackResult> results,
                         std::vector<bool> eligible,
                         bool count_uncertainty_queries) {
  AttackReport report;
  report.attacker = std::move(attacker);
  report.config_echo = std::move(config_echo);
  report.corpus_fingerprint = corpus_fingerprint;
  report.corpus_records = corpus_records;
  report.summary =
      aggregate_summary(results, eligible, count_uncertainty_queries);
  report.results = std::move(results);
  report.eligible = std::move(eligible);
  return report;
}

AttackReport attack_dataset_report(const std::vector<SourceUnit>& dataset,
                                   VictimInterface& victim,
                                   const SubstituteCorpus& corpus,
                                   const AttackConfig& cfg,
                                   const Encoder& encoder, AttackerKind kind,
                                   nlohmann::json config_echo, int jobs) {
  DatasetAttackOutcome outcome =
      attack_dataset(dataset, victim, corpus, cfg, encoder, kind, jobs);
  return make_report(std::string(to_string(kind)), std::move(config_echo),
                     corpus.fingerprint, corpus.records.size(),
                     std::move(outcome.results), std::move(outcome.eligible),
                     cfg.count_uncertainty_queries);
}

std::string serialize_report(const AttackReport& report) {
  json samples = json::array();
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    json r = result_to_json(report.results[i]);
    r["index"] = i;
    r["eligible"] = static_cast<bool>(report.eligible[i]);
    samples.push_back(std::move(r));
  }
  const ReportSummary& s = report.summary;
  json j = {
      {"format", "rnns-report"},
      {"version", 1},
      {"attacker", report.attacker},
      {"config", report.config_echo},
      {"corpus_fingerprint",
       {{"dimension", report.corpus_fingerprint.dimension},
        {"hash_seed", report.corpus_fingerprint.hash_seed},
        {"table", report.corpus_fingerprint.table_id},
        {"records", report.corpus_records}}},
      {"summary",
       {{"total_samples", s.total_samples},
        {"eligible", s.eligible},
        {"successes", s.successes},
        {"asr", optional_double_json(s.asr)},
        {"mean_qt", optional_double_json(s.mean_qt)},
        {"mean_qt_failed_only", optional_double_json(s.mean_qt_failed_only)},
        {"qt_averaged_over", "all_eligible_samples"},
        {"variance_convention", "population"},
        {"length_diff", moments_json(s.length_diff)},
        {"replaced_count", moments_json(s.replaced_count)}}},
      {"samples", samples},
  };
  return j.dump() + "\n";
}

AttackReport parse_report(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bad report file: ") + e.what());
  }
  if (j.value("format", "") != "rnns-report" || j.value("version", 0) != 1)
    throw std::runtime_error("report header missing or unsupported");

  AttackReport report;
  report.attacker = j.at("attacker").get<std::string>();
  report.config_echo = j.at("config");
  const json& fp = j.at("corpus_fingerprint");
  report.corpus_fingerprint.dimension = fp.at("dimension").get<int>();
  report.corpus_fingerprint.hash_seed = fp.at("hash_seed").get<std::uint64_t>();
  report.corpus_fingerprint.table_id = fp.at("table").get<std::string>();
  report.corpus_records = fp.value("records", std::uint64_t{0});

  for (const json& sample : j.at("samples")) {
    report.results.push_back(result_from_json(sample));
    report.eligible.push_back(sample.at("eligible").get<bool>());
  }

  const json& s = j.at("summary");
  report.summary.total_samples = s.at("total_samples").get<std::uint64_t>();
  report.summary.eligible = s.at("eligible").get<std::uint64_t>();
  report.summary.successes = s.at("successes").get<std::uint64_t>();
  report.summary.asr = optional_double_from_json(s.at("asr"));
  report.summary.mean_qt = optional_double_from_json(s.at("mean_qt"));
  report.summary.mean_qt_failed_only =
      optional_double_from_json(s.at("mean_qt_failed_only"));
  report.summary.length_diff = moments_from_json(s.at("length_diff"));
  report.summary.replaced_count = moments_from_json(s.at("replaced_count"));
  return report;
}

std::string render_report(const AttackReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) return serialize_report(report);

  const ReportSummary& s = report.summary;
  std::ostringstream out;
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  auto pm = [](const std::optional<Moments>& m) {
    if (!m) return std::string("-");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f +/- %.2f", m->mean, m->variance);
    return std::string(buf);
  };
  out << "attacker         " << report.attacker << "\n";
  out << "samples          " << s.total_samples << "\n";
  out << "eligible         " << s.eligible << "\n";
  out << "successes        " << s.successes << "\n";
  out << "ASR              "
      << (s.asr ? num(std::optional<double>(*s.asr * 100.0)) + " %" : "-")
      << "\n";
  out << "QT               " << num(s.mean_qt) << "\n";
  out << "QT (failed only) " << num(s.mean_qt_failed_only) << "\n";
  out << "length diff      " << pm(s.length_diff) << "\n";
  out << "replaced count   " << pm(s.replaced_count) << "\n";
  return out.str();
}

void save_report(const AttackReport& report, const std::string& path) {
  write_text_file(path, serialize_report(report));
}

AttackReport load_report(const std::string& path) {
  return parse_report(read_text_file(path));
}

}  // namespace rnns
