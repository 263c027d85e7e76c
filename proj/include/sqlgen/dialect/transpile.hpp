#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sqlgen/dialect/dialect.hpp"

namespace sqlgen {

class TranspileError : public std::runtime_error {
 public:
  TranspileError(std::string construct, const std::string& message)
      : std::runtime_error(message), construct_(std::move(construct)) {}
  /// The construct no rule covers (usually a catalog keyword, e.g. JULIANDAY).
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

struct TranspileRule {
  std::string_view name;
  std::string_view description;
};

/// The rewrite rules applied by transpile(), for documentation and reporting.
std::span<const TranspileRule> transpile_rules();

/// Rewrites a query from one dialect to another using a finite rule table.
/// The input must parse under `from` (SqlError otherwise). Returns the input
/// unchanged when from == to. The output is guaranteed to parse under `to`;
/// anything no rule covers raises TranspileError.
std::string transpile(std::string_view sql, Dialect from, Dialect to,
                      const KeywordCatalog& catalog = KeywordCatalog::builtin());

/// String literal encoded for `d` ('' doubling, or backslash escapes for BigQuery).
std::string encode_string_literal(std::string_view value, Dialect d);

}  // namespace sqlgen
