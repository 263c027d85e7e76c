#include "sqlgen/dialect/lexer.hpp"

#include <array>
#include <cctype>

#include "sqlgen/dialect/parser.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen::sql {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

[[noreturn]] void fail(std::size_t pos, const std::string& msg) {
  throw SqlError(SqlErrorKind::kSyntax, msg, pos);
}

// Operators by decreasing length so the first match is the longest.
constexpr std::array<std::string_view, 27> kOperators = {
    "!~*", "->>", "!~", "~*", "->", "::", "<=", ">=", "<>", "!=", "==", "||", "<<", ">>",
    "=",   "<",   ">",  "+",  "-",  "*",  "/",  "%",  "~",  "&",  "|",  "^",  "!"};

class Lexer {
 public:
  Lexer(std::string_view src, Dialect d) : src_(src), dialect_(d) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      if (i_ >= src_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = TokenKind::kEnd;
    end.pos = end.end = src_.size();
    out.push_back(end);
    return out;
  }

 private:
  unsigned char at(std::size_t k) const { return k < src_.size() ? static_cast<unsigned char>(src_[k]) : 0; }

  void skip_space_and_comments() {
    while (i_ < src_.size()) {
      unsigned char c = at(i_);
      if (std::isspace(c)) {
        ++i_;
      } else if (c == '-' && at(i_ + 1) == '-') {
        while (i_ < src_.size() && src_[i_] != '\n') ++i_;
      } else if (c == '#' && dialect_ == Dialect::kBigQuery) {
        while (i_ < src_.size() && src_[i_] != '\n') ++i_;
      } else if (c == '/' && at(i_ + 1) == '*') {
        auto close = src_.find("*/", i_ + 2);
        if (close == std::string_view::npos) fail(i_, "unterminated block comment");
        i_ = close + 2;
      } else {
        break;
      }
    }
  }

  Token make(TokenKind kind, std::size_t start) {
    Token t;
    t.kind = kind;
    t.pos = start;
    t.end = i_;
    t.text = std::string(src_.substr(start, i_ - start));
    if (kind == TokenKind::kWord) t.upper = util::to_upper(t.text);
    return t;
  }

  // Consumes a quoted run starting at i_ (which holds the opening quote).
  // `doubled` allows the quote to be escaped by repeating it; `backslash`
  // allows \-escapes.
  void consume_quoted(char close, bool doubled, bool backslash) {
    std::size_t start = i_;
    ++i_;
    while (true) {
      if (i_ >= src_.size()) fail(start, "unterminated quoted text");
      char c = src_[i_];
      if (backslash && c == '\\') {
        i_ += 2;
        continue;
      }
      if (c == close) {
        if (doubled && at(i_ + 1) == static_cast<unsigned char>(close)) {
          i_ += 2;
          continue;
        }
        ++i_;
        return;
      }
      ++i_;
    }
  }

  void consume_triple(char q) {
    std::size_t start = i_;
    i_ += 3;
    std::string closing(3, q);
    auto close = src_.find(closing, i_);
    if (close == std::string_view::npos) fail(start, "unterminated triple-quoted string");
    i_ = close + 3;
  }

  Token next() {
    std::size_t start = i_;
    unsigned char c = at(i_);
    const bool bq = dialect_ == Dialect::kBigQuery;

    // BigQuery string prefixes: r'..', b'..', rb'..'
    if (bq && (c == 'r' || c == 'R' || c == 'b' || c == 'B')) {
      std::size_t k = i_ + 1;
      if ((at(k) == 'r' || at(k) == 'R' || at(k) == 'b' || at(k) == 'B') && at(k) != c) ++k;
      if (at(k) == '\'' || at(k) == '"') {
        bool raw = false;
        for (std::size_t p = i_; p < k; ++p) raw = raw || at(p) == 'r' || at(p) == 'R';
        i_ = k;
        lex_bq_string(raw);
        return make(TokenKind::kString, start);
      }
    }
    // PostgreSQL escape strings E'..'
    if (dialect_ == Dialect::kPostgres && (c == 'e' || c == 'E') && at(i_ + 1) == '\'') {
      ++i_;
      consume_quoted('\'', true, true);
      return make(TokenKind::kString, start);
    }
    // Blob literals X'..'
    if ((c == 'x' || c == 'X') && at(i_ + 1) == '\'') {
      ++i_;
      consume_quoted('\'', false, false);
      return make(TokenKind::kBlob, start);
    }
    if (is_ident_start(c)) {
      while (i_ < src_.size() && is_ident_char(at(i_))) ++i_;
      return make(TokenKind::kWord, start);
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(at(i_ + 1)))) {
      lex_number();
      return make(TokenKind::kNumber, start);
    }
    switch (c) {
      case '\'':
        if (bq) {
          lex_bq_string(false);
        } else {
          consume_quoted('\'', true, false);
        }
        return make(TokenKind::kString, start);
      case '"':
        if (bq) {
          lex_bq_string(false);
          return make(TokenKind::kString, start);
        }
        consume_quoted('"', true, false);
        return make(TokenKind::kQuotedIdent, start);
      case '`':
        if (dialect_ == Dialect::kPostgres) fail(i_, "backtick-quoted identifiers are not valid PostgreSQL");
        consume_quoted('`', true, bq);
        return make(TokenKind::kQuotedIdent, start);
      case '[':
        if (dialect_ == Dialect::kSqlite) {
          auto close = src_.find(']', i_ + 1);
          if (close == std::string_view::npos) fail(i_, "unterminated [identifier]");
          i_ = close + 1;
          return make(TokenKind::kQuotedIdent, start);
        }
        ++i_;
        return make(TokenKind::kPunct, start);
      case '(':
      case ')':
      case ',':
      case ';':
      case ']':
      case '.':
        ++i_;
        return make(TokenKind::kPunct, start);
      case '?':
        ++i_;
        while (std::isdigit(at(i_))) ++i_;
        return make(TokenKind::kParam, start);
      case '$':
      case '@':
      case ':':
        if (is_ident_char(at(i_ + 1)) && at(i_ + 1) != '$') {
          ++i_;
          while (is_ident_char(at(i_))) ++i_;
          return make(TokenKind::kParam, start);
        }
        break;
      default:
        break;
    }
    for (auto op : kOperators) {
      if (src_.substr(i_, op.size()) == op) {
        i_ += op.size();
        return make(TokenKind::kOperator, start);
      }
    }
    fail(i_, std::string("unexpected character '") + static_cast<char>(c) + "'");
  }

  void lex_bq_string(bool raw) {
    char q = src_[i_];
    if (at(i_ + 1) == static_cast<unsigned char>(q) && at(i_ + 2) == static_cast<unsigned char>(q)) {
      consume_triple(q);
      return;
    }
    consume_quoted(q, false, !raw);
  }

  void lex_number() {
    if (at(i_) == '0' && (at(i_ + 1) == 'x' || at(i_ + 1) == 'X') && std::isxdigit(at(i_ + 2))) {
      i_ += 2;
      while (std::isxdigit(at(i_))) ++i_;
      return;
    }
    while (std::isdigit(at(i_))) ++i_;
    if (at(i_) == '.' && !(at(i_ + 1) == '.')) {
      ++i_;
      while (std::isdigit(at(i_))) ++i_;
    }
    if ((at(i_) == 'e' || at(i_) == 'E') &&
        (std::isdigit(at(i_ + 1)) || ((at(i_ + 1) == '+' || at(i_ + 1) == '-') && std::isdigit(at(i_ + 2))))) {
      i_ += 2;
      while (std::isdigit(at(i_))) ++i_;
    }
    if (is_ident_start(at(i_))) fail(i_, "malformed number");
  }

  std::string_view src_;
  Dialect dialect_;
  std::size_t i_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view sql, Dialect dialect) { return Lexer(sql, dialect).run(); }

}  // namespace sqlgen::sql
