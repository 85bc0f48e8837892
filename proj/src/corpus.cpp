#include "rnns/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "rnns/util.hpp"

namespace rnns {

namespace {

using nlohmann::json;

bool has_source_extension(const std::filesystem::path& p, Language lang) {
  const std::string ext = p.extension().string();
  switch (lang) {
    case Language::Java: return ext == ".java";
    case Language::Python: return ext == ".py";
    case Language::C: return ext == ".c" || ext == ".h";
  }
  return false;
}

}  // namespace

SubstituteCorpus corpus_from_names(const std::vector<std::string>& names,
                                   const Encoder& encoder) {
  std::set<std::string> unique;
  for (const std::string& name : names) {
    const int len = static_cast<int>(name.size());
    if (len < kMinSubstituteLength || len > kMaxSubstituteLength) continue;
    unique.insert(name);
  }
  if (unique.empty())
    throw std::runtime_error("corpus build produced no substitutes");

  SubstituteCorpus corpus;
  corpus.dimension = encoder.config().dimension;
  corpus.fingerprint = encoder.fingerprint();
  corpus.records.reserve(unique.size());
  for (const std::string& name : unique) {
    corpus.records.push_back(SubstituteRecord{
        name, static_cast<int>(name.size()), encoder.embed(name)});
  }
  return corpus;
}

SubstituteCorpus corpus_from_units(const std::vector<SourceUnit>& units,
                                   const Encoder& encoder,
                                   CorpusBuildStats* stats) {
  std::vector<std::string> names;
  for (const SourceUnit& unit : units) {
    if (stats) ++stats->files_seen;
    try {
      for (const VariableOccurrences& var : extract_variables(unit))
        names.push_back(var.name);
    } catch (const LexError&) {
      if (stats) ++stats->files_skipped;
    }
  }
  return corpus_from_names(names, encoder);
}

SubstituteCorpus build_corpus(const std::vector<std::string>& roots,
                              Language language, const Encoder& encoder,
                              CorpusBuildStats* stats) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const std::string& root : roots) {
    fs::path p(root);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::recursive_directory_iterator(p)) {
        if (entry.is_regular_file() &&
            has_source_extension(entry.path(), language))
          files.push_back(entry.path());
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw std::runtime_error("corpus input does not exist: " + root);
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<SourceUnit> units;
  units.reserve(files.size());
  for (const fs::path& f : files) {
    std::string code = read_text_file(f.string());
    if (code.empty()) continue;
    units.push_back(SourceUnit{std::move(code), language, std::nullopt});
  }
  if (units.empty())
    throw std::runtime_error("no readable source files found for language " +
                             std::string(to_string(language)));
  return corpus_from_units(units, encoder, stats);
}

std::string serialize_corpus(const SubstituteCorpus& corpus) {
  json header = {
      {"format", "rnns-corpus"},
      {"version", 1},
      {"dimension", corpus.dimension},
      {"hash_seed", corpus.fingerprint.hash_seed},
      {"table", corpus.fingerprint.table_id},
      {"records", corpus.records.size()},
  };
  std::string out = header.dump();
  out.push_back('\n');
  for (const SubstituteRecord& rec : corpus.records) {
    json line = {{"name", rec.name}, {"embedding", rec.embedding}};
    out += line.dump();
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const SubstituteCorpus& corpus, const std::string& path) {
  write_text_file(path, serialize_corpus(corpus));
}

SubstituteCorpus parse_corpus(std::string_view text,
                              const EncoderFingerprint& active) {
  SubstituteCorpus corpus;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t expected_records = 0;

  while (pos < text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (line.empty()) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": " + e.what());
    }

    if (!header_seen) {
      if (rec.value("format", "") != "rnns-corpus" || rec.value("version", 0) != 1)
        throw std::runtime_error("corpus header missing or unsupported");
      corpus.dimension = rec.at("dimension").get<int>();
      corpus.fingerprint.dimension = corpus.dimension;
      corpus.fingerprint.hash_seed = rec.at("hash_seed").get<std::uint64_t>();
      corpus.fingerprint.table_id = rec.at("table").get<std::string>();
      expected_records = rec.at("records").get<std::size_t>();
      if (!(corpus.fingerprint == active))
        throw std::runtime_error(
            "corpus fingerprint mismatch: file was built with a different "
            "encoder configuration");
      header_seen = true;
      continue;
    }

    SubstituteRecord r;
    try {
      r.name = rec.at("name").get<std::string>();
      r.embedding = rec.at("embedding").get<EmbeddingVector>();
    } catch (const json::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    r.length = static_cast<int>(r.name.size());
    if (r.embedding.size() != static_cast<std::size_t>(corpus.dimension))
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": embedding dimension mismatch");
    const double norm = l2_norm(r.embedding);
    if (std::abs(norm - 1.0) > 1e-6)
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": embedding is not unit-norm");
    if (!corpus.records.empty() && !(corpus.records.back().name < r.name))
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": records not sorted by unique name");
    corpus.records.push_back(std::move(r));
  }

  if (!header_seen) throw std::runtime_error("corpus file is empty");
  if (corpus.records.size() != expected_records)
    throw std::runtime_error("corpus record count does not match header");
  return corpus;
}

SubstituteCorpus load_corpus(const std::string& path,
                             const EncoderFingerprint& active) {
  return parse_corpus(read_text_file(path), active);
}

}  // namespace rnns
