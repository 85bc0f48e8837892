#include "rnns/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rnns/util.hpp"

namespace rnns {

namespace {

bool lower(char c) { return std::islower(static_cast<unsigned char>(c)); }
bool upper(char c) { return std::isupper(static_cast<unsigned char>(c)); }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }
bool letter(char c) { return std::isalpha(static_cast<unsigned char>(c)); }

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

void check_config(const EncoderConfig& cfg) {
  if (cfg.dimension < 8)
    throw std::invalid_argument("encoder dimension must be >= 8");
}

EmbeddingVector trigram_vector(std::string_view trigram,
                               const EncoderConfig& cfg) {
  SplitMix64 rng(hash_bytes(trigram, cfg.hash_seed));
  EmbeddingVector v(static_cast<std::size_t>(cfg.dimension));
  for (double& x : v) x = rng.next_signed_unit();
  l2_normalize(v);
  return v;
}

}  // namespace

std::vector<std::string> split_subtokens(std::string_view name) {
  std::vector<std::string> out;
  std::string piece;
  auto flush = [&] {
    if (!piece.empty()) {
      out.push_back(to_lower(piece));
      piece.clear();
    }
  };
  const std::size_t n = name.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = name[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (!piece.empty()) {
      const char p = piece.back();
      const bool camel = lower(p) && upper(c);
      const bool letter_digit = (letter(p) && digit(c)) || (digit(p) && letter(c));
      const bool acronym_end =
          upper(p) && upper(c) && i + 1 < n && lower(name[i + 1]);
      if (camel || letter_digit || acronym_end) flush();
    }
    piece.push_back(c);
  }
  flush();
  if (out.empty()) out.push_back(to_lower(name));  // e.g. "_" or "__"
  return out;
}

double l2_norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void l2_normalize(EmbeddingVector& v) {
  const double n = l2_norm(v);
  if (n < 1e-12) {
    // Degenerate input; pin to the first basis vector rather than emit NaNs.
    std::fill(v.begin(), v.end(), 0.0);
    if (!v.empty()) v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= n;
}

EmbeddingVector embed_name(std::string_view name, const EncoderConfig& cfg) {
  check_config(cfg);
  const std::size_t d = static_cast<std::size_t>(cfg.dimension);
  const auto subtokens = split_subtokens(name);

  EmbeddingVector acc(d, 0.0);
  for (const std::string& sub : subtokens) {
    const std::string padded = "^" + sub + "$";
    EmbeddingVector sv(d, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i, ++count) {
      const EmbeddingVector tv =
          trigram_vector(std::string_view(padded).substr(i, 3), cfg);
      for (std::size_t j = 0; j < d; ++j) sv[j] += tv[j];
    }
    for (double& x : sv) x /= static_cast<double>(count);
    l2_normalize(sv);
    for (std::size_t j = 0; j < d; ++j) acc[j] += sv[j];
  }
  for (double& x : acc) x /= static_cast<double>(subtokens.size());
  l2_normalize(acc);
  return acc;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::unordered_map<std::string, EmbeddingVector> parse_embedding_table(
    std::string_view text, const EncoderConfig& cfg) {
  check_config(cfg);
  std::unordered_map<std::string, EmbeddingVector> table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0)
      throw std::runtime_error("embedding table line " + std::to_string(line_no) +
                               ": expected name<TAB>values");
    std::string name(line.substr(0, tab));
    std::string_view values = line.substr(tab + 1);

    EmbeddingVector v;
    v.reserve(static_cast<std::size_t>(cfg.dimension));
    std::size_t vpos = 0;
    while (vpos <= values.size()) {
      std::size_t comma = values.find(',', vpos);
      std::string_view field = values.substr(
          vpos, comma == std::string_view::npos ? values.size() - vpos
                                                : comma - vpos);
      double x = 0.0;
      auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
      if (ec != std::errc() || end != field.data() + field.size())
        throw std::runtime_error("embedding table line " +
                                 std::to_string(line_no) + ": bad value '" +
                                 std::string(field) + "'");
      v.push_back(x);
      if (comma == std::string_view::npos) break;
      vpos = comma + 1;
    }
    if (v.size() != static_cast<std::size_t>(cfg.dimension))
      throw std::runtime_error(
          "embedding table line " + std::to_string(line_no) + ": expected " +
          std::to_string(cfg.dimension) + " values, got " +
          std::to_string(v.size()));
    l2_normalize(v);
    if (!table.emplace(std::move(name), std::move(v)).second)
      throw std::runtime_error("embedding table line " + std::to_string(line_no) +
                               ": duplicate name");
  }
  return table;
}

std::unordered_map<std::string, EmbeddingVector> load_embedding_table(
    const std::string& path, const EncoderConfig& cfg) {
  return parse_embedding_table(read_text_file(path), cfg);
}

Encoder::Encoder(EncoderConfig cfg) : cfg_(std::move(cfg)) {
  check_config(cfg_);
  if (cfg_.table_path) {
    const std::string text = read_text_file(*cfg_.table_path);
    table_ = parse_embedding_table(text, cfg_);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash_bytes(text, 0xF00Du)));
    table_id_ = buf;
  }
}

EncoderFingerprint Encoder::fingerprint() const {
  return EncoderFingerprint{cfg_.dimension, cfg_.hash_seed, table_id_};
}

EmbeddingVector Encoder::embed(std::string_view name) const {
  if (!table_.empty()) {
    auto it = table_.find(std::string(name));
    if (it != table_.end()) return it->second;
  }
  return embed_name(name, cfg_);
}

}  // namespace rnns
