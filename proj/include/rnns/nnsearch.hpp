#pragma once

#include <string_view>
#include <unordered_set>
#include <vector>

#include "rnns/corpus.hpp"

namespace rnns {

// Search constraints around the original variable: similarity budget epsilon,
// length budget delta, result size k. The unlimited flag disables the two
// perturbation constraints (the ablation mode).
struct SearchConstraints {
  double epsilon = 0.15;
  int delta = 4;
  int k = 60;
  bool unlimited = false;
};

// Caller-supplied usability filter for candidate names: the exclusion set
// (already-tried names plus identifiers occupying the unit under attack) and
// the language whose keyword rules apply.
struct NameFilter {
  const std::unordered_set<std::string>* excluded = nullptr;
  Language language = Language::Java;

  bool allows(const std::string& name) const {
    if (excluded && excluded->count(name)) return false;
    return is_valid_identifier(name, language);
  }
};

// Perturbation feasibility of one substitute against the original variable:
// 1 - cos(E(sub), E(var)) < epsilon and |len(sub) - len(var)| < delta, both
// strict. Always true when unlimited.
bool feasible(const SubstituteRecord& sub, std::string_view var_name,
              const EmbeddingVector& var_emb, const SearchConstraints& c);

// Exact constrained top-k: the k feasible, usable records with the highest
// cosine similarity to the seed, sorted descending; ties broken by ascending
// name. Full scan with a k-element heap; may return fewer than k.
std::vector<SubstituteRecord> search_topk(const EmbeddingVector& seed,
                                          const SubstituteCorpus& corpus,
                                          std::string_view var_name,
                                          const EmbeddingVector& var_emb,
                                          const SearchConstraints& c,
                                          const NameFilter& filter);

}  // namespace rnns
