#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rnns/encoder.hpp"
#include "rnns/lexing.hpp"

namespace rnns {

// One candidate substitute: a real variable name with its embedding.
struct SubstituteRecord {
  std::string name;
  int length = 0;  // character count of name
  EmbeddingVector embedding;
};

// The searchable substitute set. Records are unique and sorted by name;
// the fingerprint ties the stored embeddings to the encoder that made them.
struct SubstituteCorpus {
  std::vector<SubstituteRecord> records;
  int dimension = 0;
  EncoderFingerprint fingerprint;
};

struct CorpusBuildStats {
  std::size_t files_seen = 0;
  std::size_t files_skipped = 0;  // unlexable inputs
};

// Name-length filter applied at build time (see corpus file docs).
constexpr int kMinSubstituteLength = 1;
constexpr int kMaxSubstituteLength = 30;

// Builds a corpus from a set of already-extracted names: filters by length,
// deduplicates, sorts and embeds. Throws if nothing survives.
SubstituteCorpus corpus_from_names(const std::vector<std::string>& names,
                                   const Encoder& encoder);

// Union of extract_variables over the given units.
SubstituteCorpus corpus_from_units(const std::vector<SourceUnit>& units,
                                   const Encoder& encoder,
                                   CorpusBuildStats* stats = nullptr);

// Scans directories (or single files) for source files of the language,
// extracts variables and builds the corpus. Unlexable files are skipped and
// counted in stats.
SubstituteCorpus build_corpus(const std::vector<std::string>& roots,
                              Language language, const Encoder& encoder,
                              CorpusBuildStats* stats = nullptr);

// Line-oriented persistence: a JSON header record carrying the dimension and
// encoder fingerprint, then one JSON record per substitute, sorted by name.
std::string serialize_corpus(const SubstituteCorpus& corpus);
void save_corpus(const SubstituteCorpus& corpus, const std::string& path);

// Loading validates the file and rejects dimension/fingerprint mismatches
// against the active encoder.
SubstituteCorpus parse_corpus(std::string_view text,
                              const EncoderFingerprint& active);
SubstituteCorpus load_corpus(const std::string& path,
                             const EncoderFingerprint& active);

}  // namespace rnns
