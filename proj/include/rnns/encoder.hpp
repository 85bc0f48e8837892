#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rnns {

// L2-normalized representation of a variable name. Plain vector<double>
// keeps the numerics transparent; norm invariants are enforced where
// vectors are produced.
using EmbeddingVector = std::vector<double>;

struct EncoderConfig {
  int dimension = 64;  // must be >= 8
  std::uint64_t hash_seed = 1;
  std::optional<std::string> table_path;
};

struct EncoderFingerprint {
  int dimension = 0;
  std::uint64_t hash_seed = 0;
  std::string table_id = "builtin";

  bool operator==(const EncoderFingerprint&) const = default;
};

// Subtoken split: underscores separate, lowercase->uppercase and
// letter<->digit boundaries split, and an uppercase run followed by a
// lowercase letter splits before its last capital (HTMLParser -> html,
// parser). Pieces are lowercased; an all-underscore name falls back to the
// whole name as a single subtoken.
std::vector<std::string> split_subtokens(std::string_view name);

// Hashed character-trigram embedding: every subtoken is padded with '^'/'$'
// markers, its trigrams are hashed (via mix64 chained over the bytes, seeded
// by hash_seed) into unit vectors, and the subtoken vector is the normalized
// mean of those. The name vector is the normalized mean over subtokens.
// Pure and deterministic in (name, dimension, hash_seed).
EmbeddingVector embed_name(std::string_view name, const EncoderConfig& cfg);

double l2_norm(const EmbeddingVector& v);
void l2_normalize(EmbeddingVector& v);

// Cosine similarity, clamped to [-1, 1]. Throws on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Embedding table file: one record per line, name<TAB>v1,v2,...,vd.
// Vectors are re-normalized on load; malformed records and dimension
// mismatches raise errors naming the line.
std::unordered_map<std::string, EmbeddingVector> parse_embedding_table(
    std::string_view text, const EncoderConfig& cfg);
std::unordered_map<std::string, EmbeddingVector> load_embedding_table(
    const std::string& path, const EncoderConfig& cfg);

// Name encoder: precomputed table lookups with embed_name as the fallback
// for absent names.
class Encoder {
 public:
  explicit Encoder(EncoderConfig cfg);

  const EncoderConfig& config() const { return cfg_; }
  EncoderFingerprint fingerprint() const;
  EmbeddingVector embed(std::string_view name) const;

 private:
  EncoderConfig cfg_;
  std::unordered_map<std::string, EmbeddingVector> table_;
  std::string table_id_ = "builtin";
};

}  // namespace rnns
