#include "rnns/attack.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "rnns/util.hpp"

namespace rnns {

namespace {

// Languages whose keyword sets a probe/substitute name must clear. VarArray
// names are plain lowercase strings, so checking the unit's language at use
// time is what matters; make_var_array pre-filters against all three.
bool valid_everywhere(const std::string& name) {
  return is_valid_identifier(name, Language::Java) &&
         is_valid_identifier(name, Language::Python) &&
         is_valid_identifier(name, Language::C);
}

double population_std(const std::vector<double>& xs) {
  // A constant series has exactly zero spread; skip the arithmetic so no
  // rounding dust leaks into the zero-variance contract.
  if (std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) ==
      xs.end())
    return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / n);
}

struct VariablePlan {
  std::string original;
  EmbeddingVector original_embedding;
};

// Shared state of one per-sample attack, advanced candidate by candidate.
class AttackLoop {
 public:
  AttackLoop(const SourceUnit& unit, VictimInterface& victim,
             const AttackConfig& cfg)
      : victim_(victim), cfg_(cfg), current_(unit) {}

  // Returns false when the attack is already decided (label flipped).
  bool try_candidate(const std::string& var, const std::string& sub_cur,
                     const std::string& candidate) {
    RenameResult renamed = rename(current_, sub_cur, candidate);
    const Probabilities p = victim_.classify(renamed.unit);
    ++result_.queries;
    const double prob_true = p.probs[static_cast<std::size_t>(label_)];
    const bool accepted = prob_true < prob_min_;
    if (cfg_.keep_transcripts)
      result_.transcript.push_back(
          TranscriptEntry{var, candidate, prob_true, p.predicted, accepted});
    if (accepted) {
      current_ = renamed.unit;
      current_names_ = identifier_names(current_);
      prob_min_ = prob_true;
      accepted_candidate_ = true;
    }
    if (p.predicted != label_) {
      // The flipping sample is the adversarial example even when it did not
      // set a new probability minimum.
      result_.success = true;
      final_name_[var] = candidate;
      result_.adversarial_code = std::move(renamed.unit);
      return false;
    }
    if (accepted) final_name_[var] = candidate;
    return true;
  }

  bool accepted_candidate_flag() const { return accepted_candidate_; }
  void clear_accepted_flag() { accepted_candidate_ = false; }

  const SourceUnit& current() const { return current_; }
  const std::unordered_set<std::string>& current_names() const {
    return current_names_;
  }
  double prob_min() const { return prob_min_; }
  int label() const { return label_; }
  AttackResult& result() { return result_; }

  void set_label(int label) { label_ = label; }
  void refresh_names() { current_names_ = identifier_names(current_); }

  AttackResult finish() {
    if (!result_.success) result_.adversarial_code = current_;
    result_.final_prob_true = prob_min_;
    for (const auto& [orig, cur] : final_name_)
      if (orig != cur) result_.replaced.emplace_back(orig, cur);
    std::sort(result_.replaced.begin(), result_.replaced.end());
    return std::move(result_);
  }

  void note_final(const std::string& var, const std::string& name) {
    final_name_[var] = name;
  }

 private:
  VictimInterface& victim_;
  const AttackConfig& cfg_;

  SourceUnit current_;
  std::unordered_set<std::string> current_names_;
  std::unordered_map<std::string, std::string> final_name_;
  double prob_min_ = 1.0;
  int label_ = 0;
  bool accepted_candidate_ = false;
  AttackResult result_;
};

// Common preamble: initial check, uncertainty ranking. Returns false when the
// attack is already over (misclassified input or nothing to rename).
bool attack_prologue(const SourceUnit& unit, VictimInterface& victim,
                     const AttackConfig& cfg,
                     std::span<const std::string> var_array,
                     const Probabilities* initial, AttackLoop& loop,
                     std::vector<RankedVariable>& ranked) {
  if (!unit.label)
    throw std::invalid_argument("attack target has no ground-truth label");
  AttackResult& result = loop.result();

  Probabilities first;
  if (initial) {
    first = *initial;
    result.queries = 1;  // the caller spent one query on the check
  } else {
    first = victim.classify(unit);
    result.queries = 1;
  }
  result.initial_prob_true =
      first.probs[static_cast<std::size_t>(*unit.label)];
  loop.set_label(*unit.label);

  if (first.predicted != *unit.label) {
    result.initially_misclassified = true;
    result.adversarial_code = unit;
    return false;
  }

  std::uint64_t uq = 0;
  ranked = rank_variables(unit, victim, var_array,
                          cfg.keep_transcripts ? &result.uncertainty_log : nullptr,
                          &uq);
  result.uncertainty_queries = uq;
  result.queries += uq;
  if (ranked.empty()) {
    result.adversarial_code = unit;
    return false;
  }
  loop.refresh_names();
  return true;
}

}  // namespace

std::vector<std::string> make_var_array(const AttackConfig& cfg) {
  if (cfg.var_array_size < 1)
    throw std::invalid_argument("var_array_size must be positive");
  if (cfg.var_array_min_len < 1 || cfg.var_array_max_len < cfg.var_array_min_len)
    throw std::invalid_argument("bad var_array length range");

  SplitMix64 rng(mix64(cfg.rng_seed ^ 0x76617261ULL));  // "vara"
  const int span = cfg.var_array_max_len - cfg.var_array_min_len + 1;
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  names.reserve(static_cast<std::size_t>(cfg.var_array_size));
  for (int i = 0; i < cfg.var_array_size; ++i) {
    const int len = cfg.var_array_min_len + (i % span);
    std::string name;
    do {
      name.clear();
      for (int j = 0; j < len; ++j)
        name.push_back(static_cast<char>('a' + rng.next_below(26)));
    } while (seen.count(name) || !valid_everywhere(name));
    seen.insert(name);
    names.push_back(std::move(name));
  }
  return names;
}

double uncertainty(const SourceUnit& unit, const std::string& variable,
                   VictimInterface& victim, std::span<const std::string> var_array,
                   std::vector<UncertaintyProbe>* log, std::uint64_t* queries) {
  const auto present = identifier_names(unit);
  std::vector<std::vector<double>> distributions;
  for (const std::string& probe : var_array) {
    if (probe == variable) continue;
    if (present.count(probe)) continue;
    if (!is_valid_identifier(probe, unit.language)) continue;
    RenameResult mutant = rename(unit, variable, probe);
    const Probabilities p = victim.classify(mutant.unit);
    if (queries) ++*queries;
    if (log) log->push_back(UncertaintyProbe{variable, probe, p.probs, p.predicted});
    distributions.push_back(p.probs);
  }
  if (distributions.empty()) {
    std::fprintf(stderr,
                 "warning: every probe name collides in the unit; "
                 "uncertainty of '%s' defaults to 0\n",
                 variable.c_str());
    return 0.0;
  }

  const std::size_t labels = distributions.front().size();
  double sum = 0.0;
  std::vector<double> column(distributions.size());
  for (std::size_t c = 0; c < labels; ++c) {
    for (std::size_t m = 0; m < distributions.size(); ++m)
      column[m] = distributions[m][c];
    sum += population_std(column);
  }
  return sum / static_cast<double>(labels);
}

std::vector<RankedVariable> rank_variables(const SourceUnit& unit,
                                           VictimInterface& victim,
                                           std::span<const std::string> var_array,
                                           std::vector<UncertaintyProbe>* log,
                                           std::uint64_t* queries) {
  std::vector<RankedVariable> ranked;
  for (VariableOccurrences& var : extract_variables(unit)) {
    const double u = uncertainty(unit, var.name, victim, var_array, log, queries);
    ranked.push_back(RankedVariable{std::move(var), u});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedVariable& a, const RankedVariable& b) {
                     return a.uncertainty > b.uncertainty;
                   });
  return ranked;
}

SeedPrediction predict_seed(const std::string& sub_pre,
                            const std::string& sub_cur,
                            const EmbeddingVector& delta_e_smo, double alpha,
                            const Encoder& encoder) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha must lie in [0, 1]");
  const EmbeddingVector e_cur = encoder.embed(sub_cur);
  const EmbeddingVector e_pre = encoder.embed(sub_pre);
  if (delta_e_smo.size() != e_cur.size())
    throw std::invalid_argument("delta_e_smo dimension mismatch");

  SeedPrediction out;
  out.smoothed_delta.resize(e_cur.size());
  out.seed.resize(e_cur.size());
  for (std::size_t i = 0; i < e_cur.size(); ++i) {
    const double delta_e = e_cur[i] - e_pre[i];
    out.smoothed_delta[i] = (1.0 - alpha) * delta_e_smo[i] + alpha * delta_e;
    out.seed[i] = e_cur[i] + out.smoothed_delta[i];
  }
  return out;
}

AttackerKind attacker_from_string(std::string_view name) {
  if (name == "rnns") return AttackerKind::Rnns;
  if (name == "random") return AttackerKind::RandomBaseline;
  throw std::invalid_argument("unknown attacker: " + std::string(name));
}

std::string_view to_string(AttackerKind kind) {
  return kind == AttackerKind::Rnns ? "rnns" : "random";
}

AttackResult attack_one(const SourceUnit& unit, VictimInterface& victim,
                        const SubstituteCorpus& corpus, const AttackConfig& cfg,
                        const Encoder& encoder,
                        std::span<const std::string> var_array,
                        std::uint64_t /*stream_seed*/,
                        const Probabilities* initial) {
  AttackLoop loop(unit, victim, cfg);
  std::vector<RankedVariable> ranked;
  if (!attack_prologue(unit, victim, cfg, var_array, initial, loop, ranked))
    return loop.finish();

  for (const RankedVariable& rv : ranked) {
    const std::string& var = rv.variable.name;
    const EmbeddingVector var_emb = encoder.embed(var);

    std::string sub_pre = var;
    std::string sub_cur = var;
    EmbeddingVector smoothed(var_emb.size(), 0.0);
    std::unordered_set<std::string> tried;

    for (int round = 0; round < cfg.max_itr; ++round) {
      SeedPrediction seed = predict_seed(sub_pre, sub_cur, smoothed, cfg.alpha,
                                         encoder);
      smoothed = std::move(seed.smoothed_delta);

      // Exclude names already queried for this variable and identifiers
      // occupying the current adversarial code.
      std::unordered_set<std::string> excluded = tried;
      excluded.insert(loop.current_names().begin(), loop.current_names().end());
      const NameFilter filter{&excluded, unit.language};
      const auto candidates = search_topk(seed.seed, corpus, var, var_emb,
                                          cfg.constraints, filter);
      if (candidates.empty()) continue;  // round advances, state unchanged

      for (const SubstituteRecord& cand : candidates) {
        tried.insert(cand.name);
        const std::string before = sub_cur;
        loop.clear_accepted_flag();
        if (!loop.try_candidate(var, sub_cur, cand.name))
          return loop.finish();
        if (loop.accepted_candidate_flag()) {
          sub_pre = before;
          sub_cur = cand.name;
        }
      }
    }
  }
  return loop.finish();
}

AttackResult attack_random_baseline(const SourceUnit& unit,
                                    VictimInterface& victim,
                                    const SubstituteCorpus& corpus,
                                    const AttackConfig& cfg,
                                    const Encoder& encoder,
                                    std::span<const std::string> var_array,
                                    std::uint64_t stream_seed,
                                    const Probabilities* initial) {
  AttackLoop loop(unit, victim, cfg);
  std::vector<RankedVariable> ranked;
  if (!attack_prologue(unit, victim, cfg, var_array, initial, loop, ranked))
    return loop.finish();

  SplitMix64 rng(stream_seed);
  const std::uint64_t budget_per_var =
      static_cast<std::uint64_t>(cfg.max_itr) *
      static_cast<std::uint64_t>(cfg.constraints.k);

  for (const RankedVariable& rv : ranked) {
    const std::string& var = rv.variable.name;
    std::string sub_cur = var;

    // Uniform sampling without replacement: partial Fisher-Yates over the
    // corpus, stopping once the query budget for this variable is spent.
    std::vector<std::uint32_t> order(corpus.records.size());
    std::iota(order.begin(), order.end(), 0u);
    std::uint64_t spent = 0;
    for (std::size_t pos = 0; pos < order.size() && spent < budget_per_var;
         ++pos) {
      const std::size_t pick =
          pos + static_cast<std::size_t>(rng.next_below(order.size() - pos));
      std::swap(order[pos], order[pick]);
      const SubstituteRecord& cand = corpus.records[order[pos]];

      if (cand.name == sub_cur) continue;
      if (!is_valid_identifier(cand.name, unit.language)) continue;
      if (loop.current_names().count(cand.name)) continue;

      ++spent;
      loop.clear_accepted_flag();
      if (!loop.try_candidate(var, sub_cur, cand.name)) return loop.finish();
      if (loop.accepted_candidate_flag()) sub_cur = cand.name;
    }
  }
  return loop.finish();
}

DatasetAttackOutcome attack_dataset(const std::vector<SourceUnit>& dataset,
                                    VictimInterface& victim,
                                    const SubstituteCorpus& corpus,
                                    const AttackConfig& cfg,
                                    const Encoder& encoder, AttackerKind kind,
                                    int jobs) {
  const std::vector<std::string> var_array = make_var_array(cfg);

  DatasetAttackOutcome outcome;
  outcome.results.resize(dataset.size());
  outcome.eligible.assign(dataset.size(), false);

  auto run_one = [&](std::size_t i) {
    const SourceUnit& unit = dataset[i];
    CountingVictim counted(victim);
    const Probabilities first = counted.classify(unit);
    const bool ok = unit.label && first.predicted == *unit.label;
    outcome.eligible[i] = ok;
    const std::uint64_t stream = derive_stream(cfg.rng_seed, i);
    AttackResult res;
    if (!ok) {
      res.initially_misclassified = true;
      res.adversarial_code = unit;
      res.queries = 1;
      res.initial_prob_true =
          unit.label ? first.probs[static_cast<std::size_t>(*unit.label)] : 0.0;
    } else if (kind == AttackerKind::Rnns) {
      res = attack_one(unit, counted, corpus, cfg, encoder, var_array, stream,
                       &first);
    } else {
      res = attack_random_baseline(unit, counted, corpus, cfg, encoder,
                                   var_array, stream, &first);
    }
    assert(res.queries == counted.counter().count());
    outcome.results[i] = std::move(res);
  };

  if (jobs <= 1 || dataset.size() < 2) {
    for (std::size_t i = 0; i < dataset.size(); ++i) run_one(i);
    return outcome;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dataset.size()) return;
      run_one(i);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(jobs, static_cast<int>(dataset.size()));
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return outcome;
}

}  // namespace rnns
