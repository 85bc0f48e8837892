#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnns/lexing.hpp"

namespace rnns {

// Dataset file: one JSON record per line, {"code":..., "label":..., "lang":...}.
std::vector<SourceUnit> parse_dataset(std::string_view text);
std::vector<SourceUnit> load_dataset(const std::string& path);
std::string serialize_dataset(const std::vector<SourceUnit>& units);
void save_dataset(const std::vector<SourceUnit>& units, const std::string& path);

// Synthetic labeled dataset generator.
//
// Every class is assigned a marker letter. Class-vocabulary variable names
// are built as <stem><marker> from a fixed pool of long stems shared by all
// classes, so the names of one class recur across its samples (the victim
// can learn them) while names of different classes sharing a stem stay close
// in trigram space (the attack can reach them). Each sample additionally
// declares a couple of sample-unique decoy variables, and its structural
// template is only weakly correlated with the class, so identifier naming
// carries most of the signal.
struct DatagenConfig {
  int classes = 8;
  int per_class = 100;
  Language language = Language::Java;
  std::uint64_t seed = 1;
};

std::vector<SourceUnit> generate_dataset(const DatagenConfig& config);

}  // namespace rnns
