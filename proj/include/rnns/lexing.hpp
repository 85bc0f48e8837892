#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace rnns {

enum class Language { Java, Python, C };

Language language_from_string(std::string_view name);
std::string_view to_string(Language lang);

// One code sample under attack: text, language tag and (optionally) the
// ground-truth class id.
struct SourceUnit {
  std::string code;
  Language language = Language::Java;
  std::optional<int> label;
};

enum class TokenKind {
  Identifier,
  Keyword,
  Literal,
  String,
  Comment,
  Operator,
  Punctuation,
  Whitespace,
};

// Tokens carry byte spans into the unit's code; spans are contiguous and
// ordered, so concatenating the slices reproduces the input exactly.
struct Token {
  TokenKind kind;
  std::uint32_t begin;
  std::uint32_t end;

  std::string_view text(std::string_view code) const {
    return code.substr(begin, end - begin);
  }
};

struct LexError : std::runtime_error {
  LexError(const std::string& what, std::size_t offset_in)
      : std::runtime_error(what), offset(offset_in) {}
  std::size_t offset;
};

// All whole-token occurrences of one rename-candidate variable.
struct VariableOccurrences {
  std::string name;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> spans;
};

struct RenameResult {
  SourceUnit unit;
  std::size_t occurrences = 0;  // 0 means the old name was not present
};

// Keyword/builtin table for one language. The shipped per-language lists
// live in data/keywords/ and are embedded into the library at build time;
// the same parser also loads user-supplied list files.
class KeywordTable {
 public:
  KeywordTable() = default;
  explicit KeywordTable(std::vector<std::string> words);

  static KeywordTable from_file(const std::string& path);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Parses the keyword list format: UTF-8, one word per line, '#' comments.
std::vector<std::string> parse_keyword_list(std::string_view text);

// Built-in table for a language (embedded copy of data/keywords/<lang>.txt).
const KeywordTable& keywords(Language lang);

std::vector<Token> tokenize(const SourceUnit& unit);

bool is_valid_identifier(std::string_view name, Language lang);

// Lexical variable extraction: identifiers that are not keywords/builtins,
// never appear as a declaration name (immediately after def/class/struct/...)
// and never appear directly before '('. Returned in first-occurrence order.
std::vector<VariableOccurrences> extract_variables(const SourceUnit& unit);

// Names of all identifier tokens present in the unit (variables or not);
// this is the collision set for rename.
std::unordered_set<std::string> identifier_names(const SourceUnit& unit);

// Whole-token rename of old_name to new_name. Strings and comments are never
// touched. Throws std::invalid_argument if new_name is not a valid identifier
// for the unit's language or collides with any identifier already present.
RenameResult rename(const SourceUnit& unit, std::string_view old_name,
                    std::string_view new_name);

// True iff the two token streams are identical except that identifier tokens
// related by the mapping differ accordingly.
bool alpha_equivalent(const SourceUnit& a, const SourceUnit& b,
                      const std::vector<std::pair<std::string, std::string>>& mapping);

}  // namespace rnns
