#include "rnns/nnsearch.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace rnns {

namespace {

struct Scored {
  double similarity;
  const SubstituteRecord* record;
};

// Total order: higher similarity first, then ascending name.
bool better(const Scored& a, const Scored& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.record->name < b.record->name;
}

}  // namespace

bool feasible(const SubstituteRecord& sub, std::string_view var_name,
              const EmbeddingVector& var_emb, const SearchConstraints& c) {
  if (c.unlimited) return true;
  if (sub.name == var_name) return false;
  if (!(1.0 - cosine(sub.embedding, var_emb) < c.epsilon)) return false;
  const int diff = std::abs(sub.length - static_cast<int>(var_name.size()));
  return diff < c.delta;
}

std::vector<SubstituteRecord> search_topk(const EmbeddingVector& seed,
                                          const SubstituteCorpus& corpus,
                                          std::string_view var_name,
                                          const EmbeddingVector& var_emb,
                                          const SearchConstraints& c,
                                          const NameFilter& filter) {
  if (c.k < 1) throw std::invalid_argument("search_topk: k must be >= 1");

  // Max-heap under `better` keeps the worst retained candidate on top.
  std::priority_queue<Scored, std::vector<Scored>, decltype(&better)> worst_on_top(
      &better);
  for (const SubstituteRecord& rec : corpus.records) {
    if (!feasible(rec, var_name, var_emb, c)) continue;
    if (!filter.allows(rec.name)) continue;
    Scored cand{cosine(seed, rec.embedding), &rec};
    if (worst_on_top.size() < static_cast<std::size_t>(c.k)) {
      worst_on_top.push(cand);
    } else if (better(cand, worst_on_top.top())) {
      worst_on_top.pop();
      worst_on_top.push(cand);
    }
  }

  std::vector<Scored> kept;
  kept.reserve(worst_on_top.size());
  while (!worst_on_top.empty()) {
    kept.push_back(worst_on_top.top());
    worst_on_top.pop();
  }
  std::sort(kept.begin(), kept.end(), better);

  std::vector<SubstituteRecord> out;
  out.reserve(kept.size());
  for (const Scored& s : kept) out.push_back(*s.record);
  return out;
}

}  // namespace rnns
