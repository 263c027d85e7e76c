#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgen/dialect/dialect.hpp"

namespace sqlgen::sql {

enum class TokenKind { kWord, kQuotedIdent, kString, kNumber, kBlob, kOperator, kPunct, kParam, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;   // raw source text
  std::string upper;  // uppercase text for words, empty otherwise
  std::size_t pos = 0;
  std::size_t end = 0;
};

/// Dialect-aware tokenizer. Comments are dropped. The returned vector always
/// ends with a kEnd token. Throws SqlError (syntax) on unterminated quotes or
/// characters that cannot start a token.
std::vector<Token> tokenize(std::string_view sql, Dialect dialect);

}  // namespace sqlgen::sql
