#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgen/dialect/dialect.hpp"

namespace sqlgen::sql {

inline constexpr std::size_t kNoPos = std::numeric_limits<std::size_t>::max();

// Child layouts (absent optional slots hold an kEmpty node or are missing;
// Node::child() returns an empty node for out-of-range indices):
//
//   Query        [0] With  [1] body (Select|SetOp|ParenQuery)  [2] OrderBy  [3] Limit
//   With         flag=RECURSIVE; children Cte*
//   Cte          text=name, flag=[NOT] MATERIALIZED; [0] NameList [1] Query
//   SetOp        text=UNION|INTERSECT|EXCEPT, flag=ALL|DISTINCT; [0] [1]
//   ParenQuery   [0] Query
//   Select       flag=DISTINCT|ALL, aux=AS STRUCT|AS VALUE;
//                [0] DistinctOn [1] SelectList [2] From [3] Where [4] GroupBy
//                [5] Having [6] Qualify [7] WindowClause
//   SelectItem   text=alias; [0] expr|Star
//   Star         text=qualifier; [0] StarExcept(Name*) [1] StarReplace(NamedArg*)
//   Join         flag=modifiers (e.g. "LEFT OUTER"); [0] left [1] right [2] On|Using
//   TableRef     text=name; [0] Alias [1] WithOffset
//   DerivedTable flag=LATERAL; [0] Query [1] Alias
//   TableFunction flag=LATERAL; [0] Func [1] Alias [2] WithOffset
//   ParenJoin    [0] table expression [1] Alias
//   Alias        text=name; [0] NameList
//   Limit        flag=COMMA|FETCH, text=ALL; [0] count [1] offset
//   OrderItem    text=ASC|DESC, flag=NULLS FIRST|NULLS LAST; [0] expr
//   Column       text=name, aux=qualifier
//   Literal      text=raw token, flag=string|number|blob
//   TypedLiteral text=type; [0] Literal (or the `literal` placeholder Column)
//   Interval     text=unit, aux=trailing "TO unit"; [0] expr
//   Unary/Binary text=operator
//   Like         text=LIKE|ILIKE|GLOB|REGEXP|SIMILAR TO|MATCH, flag=NOT; [0] [1] [2] escape
//   Between      flag=NOT; [0] [1] [2]
//   InList       flag=NOT; [0] lhs, [1..] items
//   InQuery      flag=NOT; [0] lhs [1] Query
//   InUnnest     flag=NOT; [0] lhs [1] array expr
//   Is           flag=NOT, text=NULL|TRUE|FALSE|UNKNOWN|DISTINCT FROM|""; [0] [1]
//   Case         [0] operand, then When([0] cond [1] result)*, then optional Else([0])
//   Cast         text=CAST|SAFE_CAST|TRY_CAST; [0] expr [1] Type
//   Func         text=name, aux=SAFE, flag=DISTINCT|ALL;
//                [0] ArgList [1] OrderBy [2] Modifier [3] Filter [4] Over
//   Over         text=window name; [0] WindowSpec
//   WindowSpec   text=base window; [0] PartitionBy [1] OrderBy [2] Frame
//   Frame        text=ROWS|RANGE|GROUPS, flag=BETWEEN; FrameBound*
//   FrameBound   text=UNBOUNDED PRECEDING|CURRENT ROW|PRECEDING|...; [0] offset
//   Array        flag=BRACKET|CONSTRUCTOR|SUBQUERY, aux=<type>; items or [0] Query
//   Struct       aux=<types>; items (NamedArg or expr)
//   TableArg     text=MODEL|TABLE, aux=name
//   KwArg        text=FROM|FOR|IN; [0] expr
//   Extract      text=date part; [0] expr
//   Collate      text=collation; [0] expr
//   Quantified   text=ANY|ALL|SOME; [0] Query or expr
enum class NodeKind : std::uint8_t {
  kEmpty,
  kQuery,
  kWith,
  kCte,
  kSetOp,
  kParenQuery,
  kSelect,
  kSelectList,
  kSelectItem,
  kStar,
  kStarExcept,
  kStarReplace,
  kFrom,
  kJoin,
  kOn,
  kUsing,
  kTableRef,
  kDerivedTable,
  kTableFunction,
  kParenJoin,
  kAlias,
  kWithOffset,
  kNameList,
  kName,
  kWhere,
  kGroupBy,
  kHaving,
  kQualify,
  kWindowClause,
  kNamedWindow,
  kOrderBy,
  kOrderItem,
  kLimit,
  kDistinctOn,
  // expressions
  kColumn,
  kLiteral,
  kKeywordLiteral,
  kTypedLiteral,
  kInterval,
  kUnary,
  kBinary,
  kLike,
  kBetween,
  kInList,
  kInQuery,
  kInUnnest,
  kIs,
  kPostfixNull,
  kExists,
  kSubquery,
  kParen,
  kTuple,
  kCase,
  kWhen,
  kElse,
  kCast,
  kPgCast,
  kType,
  kFunc,
  kArgList,
  kModifier,
  kFilter,
  kOver,
  kWindowSpec,
  kPartitionBy,
  kFrame,
  kFrameBound,
  kExtract,
  kDatePart,
  kArray,
  kStruct,
  kNamedArg,
  kSubscript,
  kFieldAccess,
  kTableArg,
  kKwArg,
  kCollate,
  kQuantified,
};

const char* kind_name(NodeKind k);

struct Node {
  NodeKind kind = NodeKind::kEmpty;
  std::string text;
  std::string aux;
  std::string flag;
  std::vector<Node> children;
  std::size_t pos = kNoPos;  // byte offset in the source, kNoPos for synthesized nodes

  Node() = default;
  explicit Node(NodeKind k, std::string t = {}) : kind(k), text(std::move(t)) {}

  bool empty() const { return kind == NodeKind::kEmpty; }
  const Node& child(std::size_t i) const;
  Node& child_mut(std::size_t i);  // grows the child vector with empty nodes as needed
  Node& add(Node n) {
    children.push_back(std::move(n));
    return children.back();
  }
};

/// Structural equality; source positions are ignored.
bool same_tree(const Node& a, const Node& b);

/// Pre-order traversal. Returning false from the visitor skips the subtree.
void walk(const Node& n, const std::function<bool(const Node&)>& visit);
void walk_mut(Node& n, const std::function<bool(Node&)>& visit);

enum class PieceKind : std::uint8_t { kKeyword, kFunction, kIdentifier, kLiteral, kPunct, kType, kOperator };

enum class IdentRole : std::uint8_t {
  kNone,
  kTable,      // table name in FROM / JOIN
  kColumn,     // column name
  kQualifier,  // qualifier of a column or star (table name or alias)
  kAliasDecl,  // declared alias: table/column alias, CTE name, window name
  kAliasRef,   // reference to a declared window name
};

// One lexical element of a rendered statement. Rendering a tree produces a
// flat piece stream; string rendering, keyword extraction, dialect checks and
// template abstraction all consume the same stream.
struct Piece {
  PieceKind kind = PieceKind::kPunct;
  std::string text;
  IdentRole role = IdentRole::kNone;
  bool glue_prev = false;  // no space before this piece
  bool glue_next = false;  // no space after this piece
  std::size_t pos = kNoPos;
};

std::vector<Piece> to_pieces(const Node& root);
std::string join_pieces(const std::vector<Piece>& pieces);
std::string render(const Node& root);

/// Words that can never be bare identifiers or implicit aliases.
bool is_reserved_word(std::string_view upper);

/// Unquotes "x", `x` or [x]; bare identifiers are returned unchanged.
std::string identifier_value(std::string_view raw);

/// Decoded value of a string literal token ('it''s' -> it's). BigQuery
/// strings honour backslash escapes and the r'' prefix.
std::string string_literal_value(std::string_view raw, Dialect d = Dialect::kSqlite);

/// Quotes `name` for `d` when it is not a plain identifier.
std::string quote_identifier(std::string_view name, Dialect d);

/// Single-quoted SQL string literal with '' escaping.
std::string quote_string(std::string_view value);

}  // namespace sqlgen::sql
