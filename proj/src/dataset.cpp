#include "rnns/dataset.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "rnns/util.hpp"

namespace rnns {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Generator vocabulary
// ---------------------------------------------------------------------------

const std::array<const char*, 10> kStemPrefix = {
    "scheduler", "processor", "container", "validator", "generator",
    "allocator", "formatter", "optimizer", "extractor", "publisher"};

const std::array<const char*, 7> kStemSuffix = {
    "delegate", "provider", "resolver", "iterator", "injector", "receiver",
    "combiner"};

// One marker letter per class, appended to the stem.
const char* kClassMarkers = "qzwmrtkdbgvxjyhp";

constexpr int kDecoysPerSample = 2;
constexpr int kDecoyStems = 600;
constexpr int kDecoyStemLength = 14;

std::string class_name(int stem, int cls) {
  std::string name = kStemPrefix[static_cast<std::size_t>(stem) % kStemPrefix.size()];
  name += kStemSuffix[static_cast<std::size_t>(stem) / kStemPrefix.size()];
  name.push_back(kClassMarkers[cls]);
  return name;
}

// Decoy variables carry no class signal but come from a fixed pool of stem
// families (stem + one letter), so independently generated datasets still
// share near-neighbor names.
std::string decoy_stem(int index) {
  SplitMix64 rng(mix64(0x6465636f79ULL ^ static_cast<std::uint64_t>(index)));
  std::string stem;
  for (int i = 0; i < kDecoyStemLength; ++i)
    stem.push_back(static_cast<char>('a' + rng.next_below(26)));
  return stem;
}

std::string decoy_name(SplitMix64& rng, const std::unordered_set<std::string>& used,
                       Language lang) {
  while (true) {
    std::string name = decoy_stem(static_cast<int>(rng.next_below(kDecoyStems)));
    name.push_back(static_cast<char>('a' + rng.next_below(26)));
    if (used.count(name)) continue;
    if (!is_valid_identifier(name, lang)) continue;
    return name;
  }
}

// ---------------------------------------------------------------------------
// Structural templates. $0..$7 are identifier slots, #0..#3 constants.
// ---------------------------------------------------------------------------

struct TemplateSet {
  std::vector<const char*> bodies;
  int slots;  // every template uses exactly this many identifier slots
};

const TemplateSet& templates_for(Language lang) {
  static const TemplateSet java{
      {
          R"(class %CLS% {
    static int run(int $0, int $1) {
        int $2 = $0 * #0 + #1;
        int $3 = $1 - $0;
        for (int $4 = 0; $4 < #2; $4++) {
            $2 += $3 - $4;
        }
        int $5 = $2 * $3;
        int $6 = $5 + #3;
        return $6;
    }
}
)",
          R"(class %CLS% {
    static int run(int $0, int $1) {
        int $2 = #0;
        int $3 = $0 + $1;
        while ($2 < #1) {
            $3 = $3 * #2 - $2;
            $2 += 1;
        }
        int $4 = $3 % #3;
        int $5 = $4 + $2;
        int $6 = $5 - $0;
        return $6;
    }
}
)",
          R"(class %CLS% {
    static int run(int $0, int $1) {
        int $2 = 0;
        for (int $3 = 0; $3 < #0; $3++) {
            for (int $4 = $3; $4 < #1; $4++) {
                $2 += $3 * $4;
            }
        }
        int $5 = $2 + $0 * #2;
        int $6 = $5 - $1 + #3;
        return $6;
    }
}
)",
          R"(class %CLS% {
    static int run(int $0, int $1) {
        int $2 = $0 + #0;
        int $3 = $1 * #1;
        int $4;
        if ($2 > $3) {
            $4 = $2 - $3;
        } else if ($2 < $3 - #2) {
            $4 = $3 + $2;
        } else {
            $4 = #3;
        }
        int $5 = $4 * 2;
        int $6 = $5 + $0;
        return $6;
    }
}
)",
          R"(class %CLS% {
    static int run(int $0, int $1) {
        int[] $2 = new int[#0];
        int $3 = $0;
        for (int $4 = 0; $4 < $2.length; $4++) {
            $2[$4] = $3 + $4 * #1;
            $3 = $2[$4] - $1;
        }
        int $5 = $3 % #2;
        int $6 = $5 + #3;
        return $6;
    }
}
)",
          R"(class %CLS% {
    static int run(int $0, int $1) {
        int $2 = $0 ^ #0;
        int $3 = $1 & #1;
        int $4 = $2 | $3;
        int $5 = $4 << 1;
        do {
            $5 -= #2;
        } while ($5 > #3);
        int $6 = $5 + $2;
        return $6;
    }
}
)",
          R"(class %CLS% {
    static int run(int $0, int $1) {
        boolean $2 = $0 > #0;
        int $3 = $2 ? $0 - $1 : $1 - $0;
        int $4 = $3;
        for (int $5 = #1; $5 > 0; $5--) {
            $4 += $5 % #2;
        }
        int $6 = $4 * #3 + ($2 ? 1 : 0);
        return $6;
    }
}
)",
          R"(class %CLS% {
    static int run(int $0, int $1) {
        int $2 = $0 % #0;
        int $3 = $1 % #1;
        int $4 = 1;
        while ($3 != 0) {
            int $5 = $2 % $3;
            $2 = $3;
            $3 = $5;
            $4 += #2;
        }
        int $6 = $2 * $4 + #3;
        return $6;
    }
}
)",
      },
      7};

  static const TemplateSet python{
      {
          R"(def run($0, $1):
    $2 = $0 * #0 + #1
    $3 = $1 - $0
    for $4 in range(#2):
        $2 += $3 - $4
    $5 = $2 * $3
    $6 = $5 + #3
    return $6
)",
          R"(def run($0, $1):
    $2 = #0
    $3 = $0 + $1
    while $2 < #1:
        $3 = $3 * #2 - $2
        $2 += 1
    $4 = $3 % #3
    $5 = $4 + $2
    $6 = $5 - $0
    return $6
)",
          R"(def run($0, $1):
    $2 = []
    $3 = $0
    for $4 in range(#0):
        $2.append($3 + $4 * #1)
        $3 = $2[-1] - $1
    $5 = $3 % #2
    $6 = $5 + #3
    return $6
)",
          R"(def run($0, $1):
    $2 = $0 + #0
    $3 = $1 * #1
    if $2 > $3:
        $4 = $2 - $3
    elif $2 < $3 - #2:
        $4 = $3 + $2
    else:
        $4 = #3
    $5 = $4 * 2
    $6 = $5 + $0
    return $6
)",
      },
      7};

  static const TemplateSet c{
      {
          R"(int run(int $0, int $1) {
    int $2 = $0 * #0 + #1;
    int $3 = $1 - $0;
    int $4;
    for ($4 = 0; $4 < #2; $4++) {
        $2 += $3 - $4;
    }
    int $5 = $2 * $3;
    int $6 = $5 + #3;
    return $6;
}
)",
          R"(int run(int $0, int $1) {
    int $2 = #0;
    int $3 = $0 + $1;
    while ($2 < #1) {
        $3 = $3 * #2 - $2;
        $2 += 1;
    }
    int $4 = $3 % #3;
    int $5 = $4 + $2;
    int $6 = $5 - $0;
    return $6;
}
)",
          R"(int run(int $0, int $1) {
    int $2[#0];
    int $3 = $0;
    int $4;
    for ($4 = 0; $4 < #0; $4++) {
        $2[$4] = $3 + $4 * #1;
        $3 = $2[$4] - $1;
    }
    int $5 = $3 % #2;
    int $6 = $5 + #3;
    return $6;
}
)",
          R"(int run(int $0, int $1) {
    int $2 = $0 + #0;
    int $3 = $1 * #1;
    int $4;
    if ($2 > $3) {
        $4 = $2 - $3;
    } else if ($2 < $3 - #2) {
        $4 = $3 + $2;
    } else {
        $4 = #3;
    }
    int $5 = $4 * 2;
    int $6 = $5 + $0;
    return $6;
}
)",
      },
      7};

  switch (lang) {
    case Language::Java: return java;
    case Language::Python: return python;
    case Language::C: return c;
  }
  return java;
}

std::string instantiate(const char* body, const std::string& cls_name,
                        const std::vector<std::string>& names,
                        const std::vector<int>& constants) {
  std::string out;
  for (const char* p = body; *p; ++p) {
    if (*p == '$' && p[1] >= '0' && p[1] <= '9') {
      out += names[static_cast<std::size_t>(p[1] - '0')];
      ++p;
    } else if (*p == '#' && p[1] >= '0' && p[1] <= '9') {
      out += std::to_string(constants[static_cast<std::size_t>(p[1] - '0')]);
      ++p;
    } else if (*p == '%' && std::string_view(p).starts_with("%CLS%")) {
      out += cls_name;
      p += 4;
    } else {
      out.push_back(*p);
    }
  }
  return out;
}

}  // namespace

std::vector<SourceUnit> parse_dataset(std::string_view text) {
  std::vector<SourceUnit> units;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (line.empty()) continue;

    try {
      json j = json::parse(line);
      SourceUnit unit;
      unit.code = j.at("code").get<std::string>();
      unit.language = language_from_string(j.at("lang").get<std::string>());
      if (j.contains("label") && !j.at("label").is_null())
        unit.label = j.at("label").get<int>();
      if (unit.code.empty()) throw std::runtime_error("empty code field");
      units.push_back(std::move(unit));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return units;
}

std::vector<SourceUnit> load_dataset(const std::string& path) {
  return parse_dataset(read_text_file(path));
}

std::string serialize_dataset(const std::vector<SourceUnit>& units) {
  std::string out;
  for (const SourceUnit& unit : units) {
    json j = {{"code", unit.code},
              {"label", unit.label ? json(*unit.label) : json(nullptr)},
              {"lang", std::string(to_string(unit.language))}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void save_dataset(const std::vector<SourceUnit>& units, const std::string& path) {
  write_text_file(path, serialize_dataset(units));
}

std::vector<SourceUnit> generate_dataset(const DatagenConfig& config) {
  if (config.classes < 2 || config.classes > 16)
    throw std::invalid_argument("datagen supports 2..16 classes");
  if (config.per_class < 1)
    throw std::invalid_argument("per_class must be positive");

  const TemplateSet& tset = templates_for(config.language);
  const int stem_count =
      static_cast<int>(kStemPrefix.size() * kStemSuffix.size());
  const int class_slots = tset.slots - kDecoysPerSample;

  SplitMix64 rng(mix64(config.seed ^ 0x64617461ULL));  // "data"
  std::vector<SourceUnit> units;
  units.reserve(static_cast<std::size_t>(config.classes) *
                static_cast<std::size_t>(config.per_class));

  for (int cls = 0; cls < config.classes; ++cls) {
    for (int s = 0; s < config.per_class; ++s) {
      // Structural template: weakly class-correlated. Half the samples use
      // the class-aligned template, half a uniformly random one.
      const std::size_t template_count = tset.bodies.size();
      std::size_t t = static_cast<std::size_t>(cls) % template_count;
      if (rng.next_below(2) == 1) t = rng.next_below(template_count);

      // Distinct stems for the class-vocabulary variables.
      std::vector<int> stems;
      while (static_cast<int>(stems.size()) < class_slots) {
        const int stem = static_cast<int>(
            rng.next_below(static_cast<std::uint64_t>(stem_count)));
        if (std::find(stems.begin(), stems.end(), stem) == stems.end())
          stems.push_back(stem);
      }

      std::vector<std::string> names;
      std::unordered_set<std::string> used;
      for (int stem : stems) {
        names.push_back(class_name(stem, cls));
        used.insert(names.back());
      }
      for (int d = 0; d < kDecoysPerSample; ++d) {
        names.push_back(decoy_name(rng, used, config.language));
        used.insert(names.back());
      }
      // Deterministic shuffle of slot assignment.
      for (std::size_t i = names.size(); i > 1; --i)
        std::swap(names[i - 1], names[rng.next_below(i)]);

      std::vector<int> constants;
      for (int k = 0; k < 4; ++k)
        constants.push_back(3 + static_cast<int>(rng.next_below(90)));

      const std::string cls_name =
          "Sample" + std::to_string(units.size());
      SourceUnit unit;
      unit.code = instantiate(tset.bodies[t], cls_name, names, constants);
      unit.language = config.language;
      unit.label = cls;
      units.push_back(std::move(unit));
    }
  }
  return units;
}

}  // namespace rnns
