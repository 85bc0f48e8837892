#include "rnns/lexing.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>

#include "rnns/keywords_data.hpp"
#include "rnns/util.hpp"

namespace rnns {

namespace {

bool is_ident_start(char c, Language lang) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         (lang == Language::Java && c == '$');
}

bool is_ident_char(char c, Language lang) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         (lang == Language::Java && c == '$');
}

bool is_space_char(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Multi-character operators, longest first within each language.
const std::vector<std::string>& multi_char_operators(Language lang) {
  static const std::vector<std::string> c_java = {
      ">>>=", "<<=", ">>=", ">>>", "...", "->", "++", "--", "<<", ">>",
      "<=",   ">=",  "==",  "!=",  "&&", "||", "+=", "-=", "*=", "/=",
      "%=",   "&=",  "|=",  "^=",  "::"};
  static const std::vector<std::string> python = {
      "**=", "//=", ">>=", "<<=", "->", ":=", "**", "//", "<<", ">>",
      "<=",  ">=",  "==",  "!=",  "+=", "-=", "*=", "/=", "%=", "&=",
      "|=",  "^=",  "@="};
  return lang == Language::Python ? python : c_java;
}

bool is_punctuation_char(char c) {
  switch (c) {
    case '(': case ')': case '{': case '}': case '[': case ']':
    case ';': case ',':
      return true;
    default:
      return false;
  }
}

// Accepted python string prefixes (case-insensitive).
bool is_string_prefix(std::string_view s) {
  if (s.size() > 2) return false;
  std::string low;
  for (char c : s) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::unordered_set<std::string> prefixes = {
      "r", "b", "u", "f", "rb", "br", "fr", "rf"};
  return prefixes.count(low) > 0;
}

class Lexer {
 public:
  Lexer(const std::string& code, Language lang) : s_(code), lang_(lang) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (i_ < s_.size()) {
      const std::size_t b = i_;
      const char c = s_[i_];
      if (is_space_char(c)) {
        while (i_ < s_.size() && is_space_char(s_[i_])) ++i_;
        push(out, TokenKind::Whitespace, b);
      } else if (starts_comment()) {
        lex_comment();
        push(out, TokenKind::Comment, b);
      } else if (lang_ == Language::C && c == '#' && at_line_start(out)) {
        // Preprocessor directives are opaque to the attack: treat the whole
        // (possibly backslash-continued) line as a comment-kind token so
        // nothing inside it is ever extracted or renamed.
        lex_preprocessor_line();
        push(out, TokenKind::Comment, b);
      } else if (starts_string()) {
        lex_string(b);
        push(out, TokenKind::String, b);
      } else if (is_ident_start(c, lang_)) {
        while (i_ < s_.size() && is_ident_char(s_[i_], lang_)) ++i_;
        if (lang_ == Language::Python && i_ < s_.size() &&
            (s_[i_] == '"' || s_[i_] == '\'') &&
            is_string_prefix({s_.data() + b, i_ - b})) {
          lex_string(b);
          push(out, TokenKind::String, b);
        } else {
          std::string_view word{s_.data() + b, i_ - b};
          push(out, keywords(lang_).contains(word) ? TokenKind::Keyword
                                                   : TokenKind::Identifier,
               b);
        }
      } else if (is_digit(c) || (c == '.' && i_ + 1 < s_.size() && is_digit(s_[i_ + 1]))) {
        lex_number();
        push(out, TokenKind::Literal, b);
      } else {
        lex_operator_or_punctuation(out, b);
      }
    }
    return out;
  }

 private:
  void push(std::vector<Token>& out, TokenKind kind, std::size_t begin) {
    out.push_back(Token{kind, static_cast<std::uint32_t>(begin),
                        static_cast<std::uint32_t>(i_)});
  }

  bool at_line_start(const std::vector<Token>& out) const {
    if (out.empty()) return true;
    // Only whitespace containing a newline (or file start) may precede '#'.
    const Token& prev = out.back();
    if (prev.kind != TokenKind::Whitespace) return false;
    std::string_view t = prev.text(s_);
    return t.find('\n') != std::string_view::npos || prev.begin == 0;
  }

  bool starts_comment() const {
    const char c = s_[i_];
    if (lang_ == Language::Python) return c == '#';
    if (c != '/' || i_ + 1 >= s_.size()) return false;
    return s_[i_ + 1] == '/' || s_[i_ + 1] == '*';
  }

  void lex_comment() {
    if (lang_ == Language::Python || s_[i_ + 1] == '/') {
      while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      return;
    }
    const std::size_t open = i_;
    i_ += 2;
    while (i_ + 1 < s_.size()) {
      if (s_[i_] == '*' && s_[i_ + 1] == '/') {
        i_ += 2;
        return;
      }
      ++i_;
    }
    throw LexError("unterminated block comment at byte offset " +
                       std::to_string(open),
                   open);
  }

  void lex_preprocessor_line() {
    while (i_ < s_.size()) {
      if (s_[i_] == '\\' && i_ + 1 < s_.size() && s_[i_ + 1] == '\n') {
        i_ += 2;
        continue;
      }
      if (s_[i_] == '\n') return;  // newline stays outside the directive
      ++i_;
    }
  }

  bool starts_string() const {
    const char c = s_[i_];
    if (lang_ == Language::Python) return c == '"' || c == '\'';
    return c == '"' || c == '\'';
  }

  // begin points at the prefix (python) or the quote itself.
  void lex_string(std::size_t begin) {
    const char quote = s_[i_];
    if (lang_ == Language::Python && i_ + 2 < s_.size() &&
        s_[i_ + 1] == quote && s_[i_ + 2] == quote) {
      i_ += 3;
      while (i_ < s_.size()) {
        if (s_[i_] == '\\') {
          i_ = std::min(i_ + 2, s_.size());
          continue;
        }
        if (i_ + 2 < s_.size() && s_[i_] == quote && s_[i_ + 1] == quote &&
            s_[i_ + 2] == quote) {
          i_ += 3;
          return;
        }
        ++i_;
      }
      throw LexError("unterminated string at byte offset " +
                         std::to_string(begin),
                     begin);
    }
    ++i_;
    while (i_ < s_.size()) {
      const char c = s_[i_];
      if (c == '\\' && i_ + 1 < s_.size()) {
        i_ += 2;
        continue;
      }
      if (c == quote) {
        ++i_;
        return;
      }
      if (c == '\n') break;  // single-line string may not span lines
      ++i_;
    }
    throw LexError("unterminated string at byte offset " + std::to_string(begin),
                   begin);
  }

  void lex_number() {
    char prev = 0;
    while (i_ < s_.size()) {
      const char c = s_[i_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        prev = c;
        ++i_;
        continue;
      }
      if ((c == '+' || c == '-') &&
          (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P')) {
        prev = c;
        ++i_;
        continue;
      }
      break;
    }
  }

  void lex_operator_or_punctuation(std::vector<Token>& out, std::size_t b) {
    if (is_punctuation_char(s_[i_])) {
      ++i_;
      push(out, TokenKind::Punctuation, b);
      return;
    }
    for (const std::string& op : multi_char_operators(lang_)) {
      if (s_.compare(i_, op.size(), op) == 0) {
        i_ += op.size();
        push(out, TokenKind::Operator, b);
        return;
      }
    }
    ++i_;
    push(out, TokenKind::Operator, b);
  }

  const std::string& s_;
  Language lang_;
  std::size_t i_ = 0;
};

const std::unordered_set<std::string>& declaration_head_keywords(Language lang) {
  static const std::unordered_set<std::string> java = {"class", "interface",
                                                       "enum"};
  static const std::unordered_set<std::string> python = {"def", "class"};
  static const std::unordered_set<std::string> c = {"struct", "union", "enum"};
  switch (lang) {
    case Language::Java: return java;
    case Language::Python: return python;
    case Language::C: return c;
  }
  return java;
}

bool is_trivia(TokenKind k) {
  return k == TokenKind::Whitespace || k == TokenKind::Comment;
}

}  // namespace

Language language_from_string(std::string_view name) {
  if (name == "java") return Language::Java;
  if (name == "python") return Language::Python;
  if (name == "c") return Language::C;
  throw std::invalid_argument("unsupported language tag: " + std::string(name));
}

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::Java: return "java";
    case Language::Python: return "python";
    case Language::C: return "c";
  }
  return "java";
}

KeywordTable::KeywordTable(std::vector<std::string> words) {
  for (auto& w : words) words_.insert(std::move(w));
}

KeywordTable KeywordTable::from_file(const std::string& path) {
  return KeywordTable(parse_keyword_list(read_text_file(path)));
}

bool KeywordTable::contains(std::string_view word) const {
  return words_.count(std::string(word)) > 0;
}

std::vector<std::string> parse_keyword_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                       : eol - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      std::size_t last = line.find_last_not_of(" \t\r");
      out.emplace_back(line.substr(first, last - first + 1));
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return out;
}

const KeywordTable& keywords(Language lang) {
  static const KeywordTable java{parse_keyword_list(detail::kJavaKeywordData)};
  static const KeywordTable python{
      parse_keyword_list(detail::kPythonKeywordData)};
  static const KeywordTable c{parse_keyword_list(detail::kCKeywordData)};
  switch (lang) {
    case Language::Java: return java;
    case Language::Python: return python;
    case Language::C: return c;
  }
  return java;
}

std::vector<Token> tokenize(const SourceUnit& unit) {
  if (unit.code.empty())
    throw std::invalid_argument("source unit has empty code");
  return Lexer(unit.code, unit.language).run();
}

bool is_valid_identifier(std::string_view name, Language lang) {
  if (name.empty()) return false;
  char c0 = name[0];
  if (!(std::isalpha(static_cast<unsigned char>(c0)) || c0 == '_'))
    return false;
  for (char c : name.substr(1)) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  }
  return !keywords(lang).contains(name);
}

std::vector<VariableOccurrences> extract_variables(const SourceUnit& unit) {
  const auto tokens = tokenize(unit);
  const auto& decl_heads = declaration_head_keywords(unit.language);

  // Significant (non-trivia) token indices for neighbour checks.
  std::vector<std::size_t> sig;
  sig.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t)
    if (!is_trivia(tokens[t].kind)) sig.push_back(t);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>>
      spans;
  std::unordered_set<std::string> banned;

  for (std::size_t p = 0; p < sig.size(); ++p) {
    const Token& tok = tokens[sig[p]];
    if (tok.kind != TokenKind::Identifier) continue;
    std::string name(tok.text(unit.code));
    if (!is_valid_identifier(name, unit.language)) continue;

    // Declared name: identifier directly after a class/def/struct keyword.
    if (p > 0) {
      const Token& prev = tokens[sig[p - 1]];
      if (prev.kind == TokenKind::Keyword &&
          decl_heads.count(std::string(prev.text(unit.code))))
        banned.insert(name);
    }
    // Call or declaration head: identifier directly before '('.
    if (p + 1 < sig.size()) {
      const Token& next = tokens[sig[p + 1]];
      if (next.text(unit.code) == "(") banned.insert(name);
    }

    auto [it, fresh] = spans.try_emplace(name);
    if (fresh) order.push_back(name);
    it->second.emplace_back(tok.begin, tok.end);
  }

  std::vector<VariableOccurrences> out;
  for (const std::string& name : order) {
    if (banned.count(name)) continue;
    out.push_back(VariableOccurrences{name, std::move(spans[name])});
  }
  return out;
}

std::unordered_set<std::string> identifier_names(const SourceUnit& unit) {
  std::unordered_set<std::string> names;
  for (const Token& tok : tokenize(unit))
    if (tok.kind == TokenKind::Identifier)
      names.insert(std::string(tok.text(unit.code)));
  return names;
}

RenameResult rename(const SourceUnit& unit, std::string_view old_name,
                    std::string_view new_name) {
  if (!is_valid_identifier(new_name, unit.language))
    throw std::invalid_argument("substitute '" + std::string(new_name) +
                                "' is not a valid " +
                                std::string(to_string(unit.language)) +
                                " identifier");
  const auto tokens = tokenize(unit);
  for (const Token& tok : tokens) {
    if (tok.kind == TokenKind::Identifier && tok.text(unit.code) == new_name)
      throw std::invalid_argument("substitute '" + std::string(new_name) +
                                  "' collides with an existing identifier");
  }

  RenameResult result;
  result.unit.language = unit.language;
  result.unit.label = unit.label;
  result.unit.code.reserve(unit.code.size());
  for (const Token& tok : tokens) {
    if (tok.kind == TokenKind::Identifier && tok.text(unit.code) == old_name) {
      result.unit.code.append(new_name);
      ++result.occurrences;
    } else {
      result.unit.code.append(tok.text(unit.code));
    }
  }
  return result;
}

bool alpha_equivalent(const SourceUnit& a, const SourceUnit& b,
                      const std::vector<std::pair<std::string, std::string>>& mapping) {
  if (a.language != b.language) return false;
  std::unordered_map<std::string, std::string> map;
  for (const auto& [from, to] : mapping) map[from] = to;

  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].kind != tb[i].kind) return false;
    std::string_view xa = ta[i].text(a.code);
    std::string_view xb = tb[i].text(b.code);
    if (ta[i].kind == TokenKind::Identifier) {
      auto it = map.find(std::string(xa));
      std::string_view expected = it == map.end() ? xa : std::string_view(it->second);
      if (xb != expected) return false;
    } else if (xa != xb) {
      return false;
    }
  }
  return true;
}

}  // namespace rnns
