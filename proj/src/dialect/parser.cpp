#include "sqlgen/dialect/parser.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "sqlgen/dialect/lexer.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using sql::Node;
using sql::NodeKind;
using sql::Token;
using sql::TokenKind;

SqlError::SqlError(SqlErrorKind kind, std::string message, std::size_t position, std::string keyword)
    : std::runtime_error(std::move(message)), kind_(kind), position_(position), keyword_(std::move(keyword)) {
  if (!keyword_.empty()) all_keywords_.push_back(keyword_);
}

namespace {

const std::unordered_set<std::string_view>& date_parts() {
  static const std::unordered_set<std::string_view> s = {
      "YEAR",   "QUARTER",     "MONTH",       "WEEK",      "DAY",       "HOUR",    "MINUTE",
      "SECOND", "MILLISECOND", "MICROSECOND", "DAYOFWEEK", "DAYOFYEAR", "ISOWEEK", "ISOYEAR",
      "DATE",   "TIME",        "DOW",         "DOY",       "EPOCH",     "DECADE",  "CENTURY"};
  return s;
}

// Functions whose bare-word arguments name a date part (BigQuery style).
const std::unordered_set<std::string_view>& date_part_functions() {
  static const std::unordered_set<std::string_view> s = {
      "DATE_TRUNC",     "TIMESTAMP_TRUNC", "DATETIME_TRUNC", "TIME_TRUNC", "DATE_DIFF", "TIMESTAMP_DIFF",
      "DATETIME_DIFF",  "TIME_DIFF",       "LAST_DAY",       "DATE_ADD",   "DATE_SUB",  "TIMESTAMP_ADD",
      "TIMESTAMP_SUB",  "DATETIME_ADD",    "DATETIME_SUB",   "DATE_BUCKET"};
  return s;
}

const std::unordered_set<std::string_view>& typed_literal_words() {
  static const std::unordered_set<std::string_view> s = {"DATE",    "TIME",       "TIMESTAMP", "DATETIME",
                                                         "JSON",    "NUMERIC",    "BIGNUMERIC"};
  return s;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, Dialect d) : t_(std::move(toks)), d_(d) {}

  Node parse_statement() {
    Node q = query();
    while (punct(";")) ++i_;
    if (cur().kind != TokenKind::kEnd) fail("unexpected '" + cur().text + "'");
    return q;
  }

 private:
  // ---- token helpers -------------------------------------------------
  const Token& cur() const { return t_[i_]; }
  const Token& peek(std::size_t k = 1) const { return t_[std::min(i_ + k, t_.size() - 1)]; }

  bool word(std::string_view up, std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == TokenKind::kWord && t.upper == up;
  }
  bool punct(std::string_view p, std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == TokenKind::kPunct && t.text == p;
  }
  bool op(std::string_view o, std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == TokenKind::kOperator && t.text == o;
  }
  bool accept_word(std::string_view up) {
    if (!word(up)) return false;
    ++i_;
    return true;
  }
  bool accept_punct(std::string_view p) {
    if (!punct(p)) return false;
    ++i_;
    return true;
  }
  void expect_word(std::string_view up) {
    if (!accept_word(up)) fail("expected " + std::string(up));
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    std::string where = t.kind == TokenKind::kEnd ? "end of input" : "'" + t.text + "'";
    throw SqlError(SqlErrorKind::kSyntax, msg + " at " + where + " (offset " + std::to_string(t.pos) + ")", t.pos);
  }

  // Any non-reserved word or quoted identifier.
  bool is_ident(std::size_t k = 0) const {
    const Token& t = peek(k);
    if (t.kind == TokenKind::kQuotedIdent) return true;
    return t.kind == TokenKind::kWord && !sql::is_reserved_word(t.upper);
  }
  std::string ident() {
    if (!is_ident()) fail("expected identifier");
    return t_[i_++].text;
  }
  // After a dot any word is acceptable.
  std::string member_name() {
    const Token& t = cur();
    if (t.kind == TokenKind::kWord || t.kind == TokenKind::kQuotedIdent) {
      ++i_;
      return t.text;
    }
    fail("expected name after '.'");
  }

  bool starts_query(std::size_t k = 0) const { return word("SELECT", k) || word("WITH", k); }

  Node mk(NodeKind k, std::string text = {}) {
    Node n(k, std::move(text));
    n.pos = cur().pos;
    return n;
  }

  // ---- queries -------------------------------------------------------
  Node query() {
    Node q = mk(NodeKind::kQuery);
    q.children.resize(4);
    if (word("WITH")) q.children[0] = with_clause();
    q.children[1] = set_expr();
    if (word("ORDER") && word("BY", 1)) q.children[2] = order_by();
    q.children[3] = limit_clause();
    while (!q.children.empty() && q.children.back().empty()) q.children.pop_back();
    return q;
  }

  Node with_clause() {
    Node w = mk(NodeKind::kWith);
    expect_word("WITH");
    if (accept_word("RECURSIVE")) w.flag = "RECURSIVE";
    do {
      Node cte = mk(NodeKind::kCte);
      cte.text = ident();
      cte.children.resize(2);
      if (punct("(")) cte.children[0] = name_list();
      expect_word("AS");
      if (word("NOT") && word("MATERIALIZED", 1)) {
        i_ += 2;
        cte.flag = "NOT MATERIALIZED";
      } else if (accept_word("MATERIALIZED")) {
        cte.flag = "MATERIALIZED";
      }
      expect_punct("(");
      cte.children[1] = query();
      expect_punct(")");
      w.add(std::move(cte));
    } while (accept_punct(","));
    return w;
  }

  Node name_list() {
    Node l = mk(NodeKind::kNameList);
    expect_punct("(");
    do {
      Node n = mk(NodeKind::kName);
      n.text = ident();
      l.add(std::move(n));
    } while (accept_punct(","));
    expect_punct(")");
    return l;
  }

  Node set_expr() {
    Node left = set_operand();
    while (word("UNION") || word("INTERSECT") || word("EXCEPT")) {
      Node s = mk(NodeKind::kSetOp, cur().upper);
      ++i_;
      if (accept_word("ALL")) {
        s.flag = "ALL";
      } else if (accept_word("DISTINCT")) {
        s.flag = "DISTINCT";
      }
      Node right = set_operand();
      s.add(std::move(left));
      s.add(std::move(right));
      left = std::move(s);
    }
    return left;
  }

  Node set_operand() {
    if (punct("(")) {
      Node p = mk(NodeKind::kParenQuery);
      ++i_;
      p.add(query());
      expect_punct(")");
      return p;
    }
    if (!word("SELECT")) fail("expected SELECT");
    return select();
  }

  Node order_by() {
    Node ob = mk(NodeKind::kOrderBy);
    expect_word("ORDER");
    expect_word("BY");
    do {
      Node item = mk(NodeKind::kOrderItem);
      item.add(expr());
      if (accept_word("ASC")) {
        item.text = "ASC";
      } else if (accept_word("DESC")) {
        item.text = "DESC";
      }
      if (word("NULLS") && (word("FIRST", 1) || word("LAST", 1))) {
        item.flag = "NULLS " + peek(1).upper;
        i_ += 2;
      }
      ob.add(std::move(item));
    } while (accept_punct(","));
    return ob;
  }

  Node limit_clause() {
    Node l = mk(NodeKind::kLimit);
    l.children.resize(2);
    bool any = false;
    if (accept_word("LIMIT")) {
      any = true;
      if (accept_word("ALL")) {
        l.text = "ALL";
      } else {
        Node first = expr();
        if (accept_punct(",")) {
          l.flag = "COMMA";
          l.children[1] = std::move(first);
          l.children[0] = expr();
          return l;
        }
        l.children[0] = std::move(first);
      }
    }
    if (accept_word("OFFSET")) {
      any = true;
      l.children[1] = expr();
      if (!accept_word("ROWS")) accept_word("ROW");
    }
    if (word("FETCH")) {
      any = true;
      ++i_;
      if (!accept_word("FIRST")) expect_word("NEXT");
      l.flag = "FETCH";
      if (word("ROWS") || word("ROW")) {
        Node one = mk(NodeKind::kLiteral, "1");
        one.flag = "number";
        l.children[0] = std::move(one);
      } else {
        l.children[0] = expr();
      }
      if (!accept_word("ROWS")) expect_word("ROW");
      expect_word("ONLY");
    }
    if (!any) return Node();
    while (!l.children.empty() && l.children.back().empty()) l.children.pop_back();
    return l;
  }

  Node select() {
    Node s = mk(NodeKind::kSelect);
    expect_word("SELECT");
    s.children.resize(8);
    if (word("AS") && (word("STRUCT", 1) || word("VALUE", 1))) {
      s.aux = "AS " + peek(1).upper;
      i_ += 2;
    }
    if (accept_word("DISTINCT")) {
      if (accept_word("ON")) {
        Node don = mk(NodeKind::kDistinctOn);
        expect_punct("(");
        do don.add(expr());
        while (accept_punct(","));
        expect_punct(")");
        s.children[0] = std::move(don);
      } else {
        s.flag = "DISTINCT";
      }
    } else if (accept_word("ALL")) {
      s.flag = "ALL";
    }
    Node sl = mk(NodeKind::kSelectList);
    do sl.add(select_item());
    while (accept_punct(","));
    s.children[1] = std::move(sl);
    if (word("FROM")) {
      Node f = mk(NodeKind::kFrom);
      ++i_;
      do f.add(join_expr());
      while (accept_punct(","));
      s.children[2] = std::move(f);
    }
    if (word("WHERE")) s.children[3] = wrap(NodeKind::kWhere);
    if (word("GROUP") && word("BY", 1)) {
      Node g = mk(NodeKind::kGroupBy);
      i_ += 2;
      do g.add(expr());
      while (accept_punct(","));
      s.children[4] = std::move(g);
    }
    if (word("HAVING")) s.children[5] = wrap(NodeKind::kHaving);
    while (true) {
      if (word("QUALIFY") && s.children[6].empty()) {
        s.children[6] = wrap(NodeKind::kQualify);
      } else if (word("WINDOW") && s.children[7].empty()) {
        Node w = mk(NodeKind::kWindowClause);
        ++i_;
        do {
          Node nw = mk(NodeKind::kNamedWindow);
          nw.text = ident();
          expect_word("AS");
          expect_punct("(");
          nw.add(window_spec());
          expect_punct(")");
          w.add(std::move(nw));
        } while (accept_punct(","));
        s.children[7] = std::move(w);
      } else {
        break;
      }
    }
    while (!s.children.empty() && s.children.back().empty()) s.children.pop_back();
    return s;
  }

  // Clause keyword followed by one expression.
  Node wrap(NodeKind k) {
    Node c = mk(k);
    ++i_;
    c.add(expr());
    return c;
  }

  Node select_item() {
    Node e = expr();
    if (e.kind == NodeKind::kStar) {
      star_modifiers(e);
      return e;
    }
    Node item = mk(NodeKind::kSelectItem);
    item.pos = e.pos;
    if (accept_word("AS")) {
      item.text = ident();
    } else if (is_ident()) {
      item.text = ident();
    }
    if (item.text.empty()) return e;
    item.add(std::move(e));
    return item;
  }

  void star_modifiers(Node& star) {
    if (word("EXCEPT") && punct("(", 1)) {
      i_ += 1;
      Node ex = name_list();
      ex.kind = NodeKind::kStarExcept;
      star.children.resize(1);
      star.children[0] = std::move(ex);
    }
    if (word("REPLACE") && punct("(", 1)) {
      i_ += 2;
      Node rep = mk(NodeKind::kStarReplace);
      do {
        Node na = mk(NodeKind::kNamedArg);
        na.add(expr());
        expect_word("AS");
        na.text = ident();
        rep.add(std::move(na));
      } while (accept_punct(","));
      expect_punct(")");
      star.children.resize(2);
      star.children[1] = std::move(rep);
    }
  }

  // ---- FROM ----------------------------------------------------------
  Node join_expr() {
    Node left = table_primary();
    while (true) {
      std::string mods;
      std::size_t save = i_;
      auto add_mod = [&](const char* m) {
        if (!mods.empty()) mods += ' ';
        mods += m;
      };
      if (accept_word("NATURAL")) add_mod("NATURAL");
      if (accept_word("INNER")) {
        add_mod("INNER");
      } else if (accept_word("CROSS")) {
        add_mod("CROSS");
      } else if (word("LEFT") || word("RIGHT") || word("FULL")) {
        add_mod(word("LEFT") ? "LEFT" : word("RIGHT") ? "RIGHT" : "FULL");
        ++i_;
        if (accept_word("OUTER")) add_mod("OUTER");
      }
      if (!word("JOIN")) {
        i_ = save;
        break;
      }
      Node j = mk(NodeKind::kJoin);
      ++i_;
      j.flag = mods;
      j.add(std::move(left));
      j.add(table_primary());
      if (accept_word("ON")) {
        Node on = mk(NodeKind::kOn);
        on.add(expr());
        j.add(std::move(on));
      } else if (word("USING")) {
        ++i_;
        Node u = name_list();
        u.kind = NodeKind::kUsing;
        j.add(std::move(u));
      }
      left = std::move(j);
    }
    return left;
  }

  bool paren_starts_query() const {
    std::size_t k = 0;
    while (punct("(", k)) ++k;
    return starts_query(k);
  }

  Node table_primary() {
    std::string lateral;
    if (accept_word("LATERAL")) lateral = "LATERAL";
    if (punct("(")) {
      if (paren_starts_query()) {
        Node dt = mk(NodeKind::kDerivedTable);
        dt.flag = lateral;
        ++i_;
        dt.add(query());
        expect_punct(")");
        dt.add(opt_alias());
        trim(dt);
        return dt;
      }
      Node pj = mk(NodeKind::kParenJoin);
      ++i_;
      pj.add(join_expr());
      expect_punct(")");
      pj.add(opt_alias());
      trim(pj);
      return pj;
    }
    std::size_t start = cur().pos;
    std::string name = ident();
    while (punct(".")) {
      ++i_;
      name += "." + member_name();
    }
    if (punct("(")) {
      Node tf = mk(NodeKind::kTableFunction);
      tf.pos = start;
      tf.flag = lateral;
      tf.add(call(name, start, {}));
      tf.add(opt_alias());
      tf.add(opt_with_offset());
      trim(tf);
      return tf;
    }
    if (!lateral.empty()) fail("LATERAL must precede a subquery or table function");
    Node tr(NodeKind::kTableRef, name);
    tr.pos = start;
    tr.add(opt_alias());
    tr.add(opt_with_offset());
    trim(tr);
    return tr;
  }

  static void trim(Node& n) {
    while (!n.children.empty() && n.children.back().empty()) n.children.pop_back();
  }

  Node opt_alias() {
    bool has_as = accept_word("AS");
    if (!has_as && !is_ident()) return Node();
    Node a = mk(NodeKind::kAlias);
    a.text = ident();
    if (punct("(")) a.add(name_list());
    return a;
  }

  Node opt_with_offset() {
    if (!(word("WITH") && word("OFFSET", 1))) return Node();
    Node w = mk(NodeKind::kWithOffset);
    i_ += 2;
    Node a = opt_alias();
    if (!a.empty()) w.add(std::move(a));
    return w;
  }

  // ---- expressions ---------------------------------------------------
  Node expr() { return or_expr(); }

  Node binary(std::string op, Node l, Node r) {
    Node b(NodeKind::kBinary, std::move(op));
    b.pos = l.pos;
    b.add(std::move(l));
    b.add(std::move(r));
    return b;
  }

  Node or_expr() {
    Node l = and_expr();
    while (word("OR")) {
      ++i_;
      l = binary("OR", std::move(l), and_expr());
    }
    return l;
  }

  Node and_expr() {
    Node l = not_expr();
    while (word("AND")) {
      ++i_;
      l = binary("AND", std::move(l), not_expr());
    }
    return l;
  }

  Node not_expr() {
    if (word("NOT")) {
      Node u = mk(NodeKind::kUnary, "NOT");
      ++i_;
      u.add(not_expr());
      return u;
    }
    return predicate();
  }

  static bool is_comparison(const Token& t) {
    if (t.kind != TokenKind::kOperator) return false;
    static const std::unordered_set<std::string_view> ops = {"=", "==", "!=", "<>", "<",  ">",
                                                             "<=", ">=", "~",  "~*", "!~", "!~*"};
    return ops.count(t.text) > 0;
  }

  Node predicate() {
    Node l = bitwise();
    while (true) {
      if (is_comparison(cur())) {
        std::string o = cur().text;
        ++i_;
        Node r;
        if ((word("ANY") || word("ALL") || word("SOME")) && punct("(", 1)) {
          r = mk(NodeKind::kQuantified, cur().upper);
          i_ += 2;
          r.add(starts_query() ? query() : expr());
          expect_punct(")");
        } else {
          r = bitwise();
        }
        l = binary(o, std::move(l), std::move(r));
        continue;
      }
      if (word("IS")) {
        Node is = mk(NodeKind::kIs);
        is.pos = l.pos;
        ++i_;
        if (accept_word("NOT")) is.flag = "NOT";
        is.add(std::move(l));
        if (word("NULL") || word("TRUE") || word("FALSE") || word("UNKNOWN")) {
          is.text = cur().upper;
          ++i_;
        } else if (word("DISTINCT") && word("FROM", 1)) {
          is.text = "DISTINCT FROM";
          i_ += 2;
          is.add(bitwise());
        } else {
          is.add(bitwise());
        }
        l = std::move(is);
        continue;
      }
      if (word("ISNULL") || word("NOTNULL")) {
        Node p = mk(NodeKind::kPostfixNull, cur().upper);
        p.pos = l.pos;
        ++i_;
        p.add(std::move(l));
        l = std::move(p);
        continue;
      }
      std::size_t save = i_;
      bool neg = accept_word("NOT");
      if (word("IN")) {
        ++i_;
        l = in_predicate(std::move(l), neg);
        continue;
      }
      if (word("LIKE") || word("ILIKE") || word("GLOB") || word("REGEXP") || word("MATCH") ||
          (word("SIMILAR") && word("TO", 1))) {
        Node lk = mk(NodeKind::kLike, word("SIMILAR") ? "SIMILAR TO" : cur().upper);
        lk.pos = l.pos;
        i_ += word("SIMILAR") ? 2 : 1;
        if (neg) lk.flag = "NOT";
        lk.add(std::move(l));
        lk.add(bitwise());
        if (accept_word("ESCAPE")) lk.add(bitwise());
        l = std::move(lk);
        continue;
      }
      if (word("BETWEEN")) {
        Node b = mk(NodeKind::kBetween);
        b.pos = l.pos;
        ++i_;
        if (neg) b.flag = "NOT";
        b.add(std::move(l));
        b.add(bitwise());
        expect_word("AND");
        b.add(bitwise());
        l = std::move(b);
        continue;
      }
      i_ = save;
      break;
    }
    return l;
  }

  Node in_predicate(Node lhs, bool neg) {
    std::size_t pos = lhs.pos;
    if (word("UNNEST") && punct("(", 1)) {
      Node u(NodeKind::kInUnnest);
      u.pos = pos;
      i_ += 2;
      if (neg) u.flag = "NOT";
      u.add(std::move(lhs));
      u.add(expr());
      expect_punct(")");
      return u;
    }
    expect_punct("(");
    if (starts_query()) {
      Node q(NodeKind::kInQuery);
      q.pos = pos;
      if (neg) q.flag = "NOT";
      q.add(std::move(lhs));
      q.add(query());
      expect_punct(")");
      return q;
    }
    Node l(NodeKind::kInList);
    l.pos = pos;
    if (neg) l.flag = "NOT";
    l.add(std::move(lhs));
    if (!punct(")")) {
      do l.add(expr());
      while (accept_punct(","));
    }
    expect_punct(")");
    return l;
  }

  Node bitwise() {
    Node l = additive();
    while (op("&") || op("|") || op("<<") || op(">>") || op("^") || op("#")) {
      std::string o = cur().text;
      ++i_;
      l = binary(o, std::move(l), additive());
    }
    return l;
  }

  Node additive() {
    Node l = multiplicative();
    while (op("+") || op("-")) {
      std::string o = cur().text;
      ++i_;
      l = binary(o, std::move(l), multiplicative());
    }
    return l;
  }

  Node multiplicative() {
    Node l = concat();
    while (op("*") || op("/") || op("%")) {
      std::string o = cur().text;
      ++i_;
      l = binary(o, std::move(l), concat());
    }
    return l;
  }

  Node concat() {
    Node l = unary();
    while (op("||") || op("->") || op("->>")) {
      std::string o = cur().text;
      ++i_;
      l = binary(o, std::move(l), unary());
    }
    return l;
  }

  Node unary() {
    if (op("-") || op("+") || op("~")) {
      Node u = mk(NodeKind::kUnary, cur().text);
      ++i_;
      u.add(unary());
      return u;
    }
    return postfix();
  }

  Node postfix() {
    Node e = primary();
    while (true) {
      if (op("::")) {
        Node c(NodeKind::kPgCast);
        c.pos = e.pos;
        ++i_;
        c.add(std::move(e));
        c.add(type_name());
        e = std::move(c);
      } else if (punct("[")) {
        Node s(NodeKind::kSubscript);
        s.pos = e.pos;
        ++i_;
        s.add(std::move(e));
        s.add(expr());
        expect_punct("]");
        e = std::move(s);
      } else if (word("COLLATE")) {
        Node c(NodeKind::kCollate);
        c.pos = e.pos;
        ++i_;
        c.text = member_name();
        c.add(std::move(e));
        e = std::move(c);
      } else if (punct(".") && e.kind != NodeKind::kColumn &&
                 (peek(1).kind == TokenKind::kWord || peek(1).kind == TokenKind::kQuotedIdent)) {
        Node f(NodeKind::kFieldAccess);
        f.pos = e.pos;
        ++i_;
        f.text = member_name();
        f.add(std::move(e));
        e = std::move(f);
      } else {
        return e;
      }
    }
  }

  Node literal(const char* flag) {
    Node l = mk(NodeKind::kLiteral, cur().text);
    l.flag = flag;
    ++i_;
    return l;
  }

  Node primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::kNumber:
        return literal("number");
      case TokenKind::kString:
        return literal("string");
      case TokenKind::kBlob:
        return literal("blob");
      case TokenKind::kParam:
        return literal("param");
      case TokenKind::kQuotedIdent:
        return name_chain();
      case TokenKind::kEnd:
        fail("unexpected end of input");
      case TokenKind::kOperator:
        if (t.text == "*") {
          Node s = mk(NodeKind::kStar);
          ++i_;
          return s;
        }
        fail("unexpected operator");
      case TokenKind::kPunct:
        if (t.text == "(") return paren();
        if (t.text == "[") return bracket_array();
        fail("unexpected '" + t.text + "'");
      case TokenKind::kWord:
        break;
    }
    const std::string& w = t.upper;
    if (w == "CASE") return case_expr();
    if ((w == "CAST" || w == "SAFE_CAST") && punct("(", 1)) return cast_expr();
    if (w == "EXISTS" && punct("(", 1)) {
      Node e = mk(NodeKind::kExists);
      i_ += 2;
      e.add(query());
      expect_punct(")");
      return e;
    }
    if (w == "INTERVAL") return interval();
    if (w == "NULL" || w == "TRUE" || w == "FALSE") {
      Node k = mk(NodeKind::kKeywordLiteral, w);
      ++i_;
      return k;
    }
    if ((w == "CURRENT_DATE" || w == "CURRENT_TIME" || w == "CURRENT_TIMESTAMP") && !punct("(", 1)) {
      Node k = mk(NodeKind::kKeywordLiteral, w);
      ++i_;
      return k;
    }
    if (typed_literal_words().count(w) &&
        (peek(1).kind == TokenKind::kString || (peek(1).kind == TokenKind::kWord && peek(1).upper == "LITERAL"))) {
      Node tl = mk(NodeKind::kTypedLiteral, w);
      ++i_;
      if (cur().kind == TokenKind::kString) {
        tl.add(literal("string"));
      } else {
        Node c = mk(NodeKind::kColumn, cur().text);
        ++i_;
        tl.add(std::move(c));
      }
      return tl;
    }
    if (w == "EXTRACT" && punct("(", 1)) {
      Node e = mk(NodeKind::kExtract);
      i_ += 2;
      e.text = util::to_upper(member_name());
      expect_word("FROM");
      e.add(expr());
      expect_punct(")");
      return e;
    }
    if (w == "ARRAY" && (punct("(", 1) || punct("[", 1) || op("<", 1))) return array_expr();
    if (w == "STRUCT" && (punct("(", 1) || op("<", 1))) return struct_expr();
    if (w == "SAFE" && punct(".", 1) && peek(2).kind == TokenKind::kWord && punct("(", 3)) {
      std::size_t start = t.pos;
      i_ += 2;
      std::string name = cur().text;
      ++i_;
      return call(name, start, "SAFE");
    }
    if ((w == "LEFT" || w == "RIGHT" || w == "OFFSET") && punct("(", 1)) {
      std::size_t start = t.pos;
      std::string name = t.text;
      ++i_;
      return call(name, start, {});
    }
    if (sql::is_reserved_word(w)) fail("unexpected keyword " + w);
    return name_chain();
  }

  Node paren() {
    Node p = mk(NodeKind::kParen);
    if (paren_starts_query()) {
      // Either a scalar subquery or a parenthesised set operation.
      p.kind = NodeKind::kSubquery;
      ++i_;
      p.add(query());
      expect_punct(")");
      return p;
    }
    ++i_;
    Node first = expr();
    if (punct(",")) {
      p.kind = NodeKind::kTuple;
      p.add(std::move(first));
      while (accept_punct(",")) p.add(expr());
      expect_punct(")");
      return p;
    }
    expect_punct(")");
    p.add(std::move(first));
    return p;
  }

  Node bracket_array() {
    Node a = mk(NodeKind::kArray);
    a.flag = "BRACKET";
    expect_punct("[");
    if (!punct("]")) {
      do a.add(expr());
      while (accept_punct(","));
    }
    expect_punct("]");
    return a;
  }

  // Text of a `<...>` generic parameter list, starting at '<'.
  std::string generic_args() {
    std::string out;
    int depth = 0;
    do {
      const Token& t = cur();
      if (t.kind == TokenKind::kEnd) fail("unterminated type parameters");
      if (t.kind == TokenKind::kOperator && t.text == "<") {
        ++depth;
        out += "<";
      } else if (t.kind == TokenKind::kOperator && (t.text == ">" || t.text == ">>")) {
        depth -= static_cast<int>(t.text.size());
        out += t.text;
      } else if (t.kind == TokenKind::kPunct && t.text == ",") {
        out += ", ";
      } else {
        if (!out.empty() && out.back() != '<' && out.back() != ' ') out += ' ';
        out += t.kind == TokenKind::kWord ? t.upper : t.text;
      }
      ++i_;
    } while (depth > 0);
    if (depth < 0) fail("unbalanced type parameters");
    return out;
  }

  Node array_expr() {
    Node a = mk(NodeKind::kArray);
    expect_word("ARRAY");
    if (op("<")) a.aux = generic_args();
    if (punct("(") && a.aux.empty()) {
      ++i_;
      a.flag = "SUBQUERY";
      a.add(query());
      expect_punct(")");
      return a;
    }
    a.flag = "CONSTRUCTOR";
    expect_punct("[");
    if (!punct("]")) {
      do a.add(expr());
      while (accept_punct(","));
    }
    expect_punct("]");
    return a;
  }

  Node struct_expr() {
    Node s = mk(NodeKind::kStruct);
    expect_word("STRUCT");
    if (op("<")) s.aux = generic_args();
    expect_punct("(");
    if (!punct(")")) {
      do {
        Node e = expr();
        if (accept_word("AS")) {
          Node na(NodeKind::kNamedArg, ident());
          na.pos = e.pos;
          na.add(std::move(e));
          s.add(std::move(na));
        } else {
          s.add(std::move(e));
        }
      } while (accept_punct(","));
    }
    expect_punct(")");
    return s;
  }

  Node case_expr() {
    Node c = mk(NodeKind::kCase);
    expect_word("CASE");
    c.children.resize(1);
    if (!word("WHEN")) c.children[0] = expr();
    if (!word("WHEN")) fail("expected WHEN");
    while (accept_word("WHEN")) {
      Node w(NodeKind::kWhen);
      w.add(expr());
      expect_word("THEN");
      w.add(expr());
      c.add(std::move(w));
    }
    if (accept_word("ELSE")) {
      Node e(NodeKind::kElse);
      e.add(expr());
      c.add(std::move(e));
    }
    expect_word("END");
    return c;
  }

  Node cast_expr() {
    Node c = mk(NodeKind::kCast, cur().upper);
    i_ += 2;
    c.add(expr());
    expect_word("AS");
    c.add(type_name());
    expect_punct(")");
    return c;
  }

  Node type_name() {
    Node ty = mk(NodeKind::kType);
    if (cur().kind != TokenKind::kWord && cur().kind != TokenKind::kQuotedIdent) fail("expected type name");
    std::string text = cur().kind == TokenKind::kWord ? cur().upper : cur().text;
    ++i_;
    static const std::unordered_set<std::string_view> continuation = {"PRECISION", "VARYING", "VARCHAR"};
    while (cur().kind == TokenKind::kWord && continuation.count(cur().upper)) {
      text += " " + cur().upper;
      ++i_;
    }
    if ((word("WITH") || word("WITHOUT")) && word("TIME", 1) && word("ZONE", 2)) {
      text += " " + cur().upper + " TIME ZONE";
      i_ += 3;
    }
    if (op("<")) text += generic_args();
    if (punct("(")) {
      ++i_;
      text += "(";
      bool first = true;
      while (!punct(")")) {
        if (cur().kind == TokenKind::kEnd) fail("unterminated type parameters");
        if (punct(",")) {
          text += ",";
        } else {
          if (!first && text.back() != ',' && text.back() != '(') text += ' ';
          text += cur().kind == TokenKind::kWord ? cur().upper : cur().text;
        }
        first = false;
        ++i_;
      }
      ++i_;
      text += ")";
    }
    while (punct("[") && punct("]", 1)) {
      text += "[]";
      i_ += 2;
    }
    ty.text = std::move(text);
    return ty;
  }

  Node interval() {
    Node iv = mk(NodeKind::kInterval);
    expect_word("INTERVAL");
    iv.add(unary());
    if (cur().kind == TokenKind::kWord && date_parts().count(cur().upper)) {
      iv.text = cur().upper;
      ++i_;
      if (word("TO") && peek(1).kind == TokenKind::kWord && date_parts().count(peek(1).upper)) {
        iv.aux = peek(1).upper;
        i_ += 2;
      }
    }
    return iv;
  }

  // identifier ( . identifier )* — a column, a qualified star, or a call.
  Node name_chain() {
    std::size_t start = cur().pos;
    std::vector<std::string> parts;
    parts.push_back(ident());
    while (punct(".")) {
      if (op("*", 1)) {
        i_ += 2;
        Node s(NodeKind::kStar, util::join(parts, "."));
        s.pos = start;
        return s;
      }
      ++i_;
      parts.push_back(member_name());
    }
    if (punct("(")) return call(util::join(parts, "."), start, {});
    Node c(NodeKind::kColumn, parts.back());
    c.pos = start;
    parts.pop_back();
    c.aux = util::join(parts, ".");
    return c;
  }

  Node call(const std::string& name, std::size_t start, const std::string& safe_prefix) {
    const bool quoted = !name.empty() && (name.front() == '"' || name.front() == '`' || name.front() == '[');
    Node f(NodeKind::kFunc, quoted ? name : util::to_upper(name));
    f.pos = start;
    f.aux = safe_prefix;
    f.children.resize(5);
    expect_punct("(");
    std::string up = util::to_upper(name);
    if (accept_word("DISTINCT")) {
      f.flag = "DISTINCT";
    } else if (word("ALL") && !punct(")", 1)) {
      ++i_;
      f.flag = "ALL";
    }
    Node args(NodeKind::kArgList);
    bool date_fn = date_part_functions().count(up) > 0;
    if (!punct(")")) {
      while (true) {
        args.add(argument(up, date_fn));
        // SUBSTRING(x FROM a FOR b), POSITION(a IN b), OVERLAY/TRIM style keyword arguments.
        while (word("FROM") || word("FOR") || (word("IN") && up == "POSITION")) {
          Node kw(NodeKind::kKwArg, cur().upper);
          kw.pos = cur().pos;
          ++i_;
          kw.add(bitwise());
          args.add(std::move(kw));
        }
        if (!accept_punct(",")) break;
      }
    }
    f.children[0] = std::move(args);
    if (word("ORDER") && word("BY", 1)) f.children[1] = order_by();
    if ((word("IGNORE") || word("RESPECT")) && word("NULLS", 1)) {
      f.children[2] = Node(NodeKind::kModifier, cur().upper + " NULLS");
      i_ += 2;
    }
    expect_punct(")");
    if (word("FILTER") && punct("(", 1)) {
      Node fl = mk(NodeKind::kFilter);
      i_ += 2;
      expect_word("WHERE");
      fl.add(expr());
      expect_punct(")");
      f.children[3] = std::move(fl);
    }
    if (word("OVER")) {
      Node ov = mk(NodeKind::kOver);
      ++i_;
      if (accept_punct("(")) {
        ov.add(window_spec());
        expect_punct(")");
      } else {
        ov.text = ident();
      }
      f.children[4] = std::move(ov);
    }
    trim(f);
    return f;
  }

  Node argument(const std::string& fn, bool date_fn) {
    if ((word("MODEL") || word("TABLE")) && is_ident(1)) {
      Node ta = mk(NodeKind::kTableArg, cur().upper);
      ++i_;
      std::string name = ident();
      while (punct(".")) {
        ++i_;
        name += "." + member_name();
      }
      ta.aux = std::move(name);
      return ta;
    }
    if (date_fn && cur().kind == TokenKind::kWord && date_parts().count(cur().upper) &&
        (punct(",", 1) || punct(")", 1) || punct("(", 1))) {
      Node dp = mk(NodeKind::kDatePart, cur().upper);
      ++i_;
      if (punct("(")) {
        // WEEK(MONDAY)
        ++i_;
        dp.text += "(" + util::to_upper(member_name()) + ")";
        expect_punct(")");
      }
      return dp;
    }
    if (fn == "POSITION") return bitwise();
    return expr();
  }

  Node window_spec() {
    Node ws = mk(NodeKind::kWindowSpec);
    ws.children.resize(3);
    if (is_ident() && !word("PARTITION") && !word("ORDER") && !word("ROWS") && !word("RANGE") && !word("GROUPS")) {
      ws.text = ident();
    }
    if (word("PARTITION") && word("BY", 1)) {
      Node pb = mk(NodeKind::kPartitionBy);
      i_ += 2;
      do pb.add(expr());
      while (accept_punct(","));
      ws.children[0] = std::move(pb);
    }
    if (word("ORDER") && word("BY", 1)) ws.children[1] = order_by();
    if (word("ROWS") || word("RANGE") || word("GROUPS")) {
      Node fr = mk(NodeKind::kFrame, cur().upper);
      ++i_;
      if (accept_word("BETWEEN")) {
        fr.flag = "BETWEEN";
        fr.add(frame_bound());
        expect_word("AND");
        fr.add(frame_bound());
      } else {
        fr.add(frame_bound());
      }
      ws.children[2] = std::move(fr);
    }
    trim(ws);
    return ws;
  }

  Node frame_bound() {
    Node b = mk(NodeKind::kFrameBound);
    if (word("UNBOUNDED") && (word("PRECEDING", 1) || word("FOLLOWING", 1))) {
      b.text = "UNBOUNDED " + peek(1).upper;
      i_ += 2;
      return b;
    }
    if (word("CURRENT") && word("ROW", 1)) {
      b.text = "CURRENT ROW";
      i_ += 2;
      return b;
    }
    b.add(additive());
    if (!(word("PRECEDING") || word("FOLLOWING"))) fail("expected PRECEDING or FOLLOWING");
    b.text = cur().upper;
    ++i_;
    return b;
  }

  std::vector<Token> t_;
  Dialect d_;
  std::size_t i_ = 0;
};

[[noreturn]] void syntax(const Node& n, const std::string& msg) {
  throw SqlError(SqlErrorKind::kSyntax, msg, n.pos == sql::kNoPos ? 0 : n.pos);
}

void check_syntax(const Node& root, Dialect d) {
  const bool lite = d == Dialect::kSqlite, pg = d == Dialect::kPostgres, bq = d == Dialect::kBigQuery;
  const std::string name(display_name(d));
  sql::walk(root, [&](const Node& n) {
    switch (n.kind) {
      case NodeKind::kPgCast:
        if (!pg) syntax(n, "'::' casts are not valid " + name);
        break;
      case NodeKind::kBinary:
        if (n.text == "==" && !lite) syntax(n, "'==' is not valid " + name);
        if (n.text == "%" && bq) syntax(n, "'%' is not valid BigQuery; use MOD()");
        if ((n.text == "~" || n.text == "~*" || n.text == "!~" || n.text == "!~*") && !pg) {
          syntax(n, "regular-expression operator '" + n.text + "' is not valid " + name);
        }
        if ((n.text == "->" || n.text == "->>") && bq) syntax(n, "'" + n.text + "' is not valid BigQuery");
        if (n.text == "#" && !pg) syntax(n, "'#' is not valid " + name);
        if (n.text == "^" && bq) syntax(n, "'^' is not valid BigQuery");
        break;
      case NodeKind::kLimit:
        if (n.flag == "COMMA" && !lite) syntax(n, "LIMIT offset, count is not valid " + name);
        if (n.flag == "FETCH" && !pg) syntax(n, "FETCH FIRST is not valid " + name);
        if (n.text == "ALL" && !pg) syntax(n, "LIMIT ALL is not valid " + name);
        if (bq && n.child(0).empty() && !n.child(1).empty()) syntax(n, "OFFSET without LIMIT is not valid BigQuery");
        break;
      case NodeKind::kTypedLiteral:
        if (lite) syntax(n, "typed literals are not valid SQLite");
        break;
      case NodeKind::kInterval:
        if (lite) syntax(n, "INTERVAL is not valid SQLite");
        break;
      case NodeKind::kArray:
        if (n.flag == "BRACKET" && !bq) syntax(n, "bracket array literals are not valid " + name);
        if (n.flag != "BRACKET" && lite) syntax(n, "ARRAY is not valid SQLite");
        break;
      case NodeKind::kSubscript:
        if (lite) syntax(n, "subscripts are not valid SQLite");
        break;
      case NodeKind::kStar:
        if (!n.children.empty() && !bq) syntax(n, "SELECT * EXCEPT/REPLACE is not valid " + name);
        break;
      case NodeKind::kSelect:
        if (!n.aux.empty() && !bq) syntax(n, "SELECT " + n.aux + " is not valid " + name);
        break;
      case NodeKind::kFunc:
        if (!n.child(3).empty() && bq) syntax(n, "aggregate FILTER is not valid BigQuery");
        if (!n.child(2).empty() && !bq) syntax(n, n.child(2).text + " is not valid " + name);
        break;
      case NodeKind::kPostfixNull:
        if (bq) syntax(n, n.text + " is not valid BigQuery");
        break;
      case NodeKind::kLike:
        if (n.text == "SIMILAR TO" && !pg) syntax(n, "SIMILAR TO is not valid " + name);
        if (n.text == "MATCH" && !lite) syntax(n, "MATCH is not valid " + name);
        break;
      case NodeKind::kQuantified:
        if (!pg) syntax(n, n.text + " (...) comparisons are not valid " + name);
        break;
      case NodeKind::kIs:
        if (n.text.empty() && !lite) syntax(n, "IS <expression> is only valid SQLite");
        break;
      case NodeKind::kCollate:
        if (bq) syntax(n, "COLLATE is not valid BigQuery expression syntax");
        break;
      case NodeKind::kExtract:
        break;
      default:
        break;
    }
    return true;
  });
}

std::string first_word_upper(const sql::Piece& p) {
  auto sp = p.text.find_first_of(" (<[");
  return util::to_upper(sp == std::string::npos ? p.text : p.text.substr(0, sp));
}

void check_catalog(const Node& root, Dialect d, const KeywordCatalog& catalog) {
  std::vector<std::string> bad;
  std::size_t first_pos = 0;
  auto note = [&](const std::string& kw, std::size_t pos) {
    if (!catalog.is_unsupported(kw, d)) return;
    if (std::find(bad.begin(), bad.end(), kw) != bad.end()) return;
    if (bad.empty()) first_pos = pos == sql::kNoPos ? 0 : pos;
    bad.push_back(kw);
  };
  for (const auto& p : sql::to_pieces(root)) {
    switch (p.kind) {
      case sql::PieceKind::kKeyword:
      case sql::PieceKind::kFunction:
        note(util::to_upper(p.text), p.pos);
        break;
      case sql::PieceKind::kType:
        note(first_word_upper(p), p.pos);
        break;
      case sql::PieceKind::kIdentifier:
        if (p.role == sql::IdentRole::kColumn) {
          auto v = util::to_upper(sql::identifier_value(p.text));
          if (v == "CTID") note(v, p.pos);
        }
        break;
      default:
        break;
    }
  }
  if (bad.empty()) return;
  SqlError err(SqlErrorKind::kUnsupportedKeyword,
               util::join(bad, ", ") + (bad.size() == 1 ? " is" : " are") + " not supported in " +
                   std::string(display_name(d)),
               first_pos, bad.front());
  err.set_keywords(bad);
  throw err;
}

// For statements that are not queries: report unsupported catalog keywords
// first (CREATE MODEL, PRAGMA, SERIAL, ...) and otherwise NonSelect.
[[noreturn]] void reject_statement(const std::vector<Token>& toks, Dialect d, const KeywordCatalog& catalog) {
  std::vector<std::string> bad;
  auto note = [&](const std::string& kw) {
    if (catalog.is_unsupported(kw, d) && std::find(bad.begin(), bad.end(), kw) == bad.end()) bad.push_back(kw);
  };
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind != TokenKind::kWord) continue;
    note(t.upper);
    if (i + 1 < toks.size() && toks[i + 1].kind == TokenKind::kWord) note(t.upper + " " + toks[i + 1].upper);
    if (i + 2 < toks.size() && toks[i + 1].text == "." && toks[i + 2].kind == TokenKind::kWord) {
      note(t.upper + "." + toks[i + 2].upper);
    }
  }
  if (!bad.empty()) {
    SqlError err(SqlErrorKind::kUnsupportedKeyword,
                 util::join(bad, ", ") + (bad.size() == 1 ? " is" : " are") + " not supported in " +
                     std::string(display_name(d)),
                 toks.front().pos, bad.front());
    err.set_keywords(bad);
    throw err;
  }
  const Token& first = toks.front();
  std::string what = first.kind == TokenKind::kWord ? first.upper : first.text;
  throw SqlError(SqlErrorKind::kNonSelect, "only SELECT statements are accepted, got " + what, first.pos, what);
}

}  // namespace

Node parse_select_tree(std::string_view text, Dialect dialect) {
  auto toks = sql::tokenize(text, dialect);
  return Parser(std::move(toks), dialect).parse_statement();
}

void check_dialect(const Node& root, Dialect dialect, const KeywordCatalog& catalog) {
  check_catalog(root, dialect, catalog);
  check_syntax(root, dialect);
}

SqlAst parse_sql(std::string_view text, Dialect dialect, const KeywordCatalog& catalog) {
  auto toks = sql::tokenize(text, dialect);
  if (toks.front().kind == TokenKind::kEnd) throw SqlError(SqlErrorKind::kSyntax, "empty statement", 0);
  const Token& first = toks.front();
  bool query_start = (first.kind == TokenKind::kWord && (first.upper == "SELECT" || first.upper == "WITH")) ||
                     (first.kind == TokenKind::kPunct && first.text == "(");
  if (!query_start) reject_statement(toks, dialect, catalog);
  Node root = Parser(std::move(toks), dialect).parse_statement();
  check_dialect(root, dialect, catalog);
  return SqlAst(std::move(root), dialect);
}

std::vector<std::string> SqlAst::tables() const {
  std::vector<std::string> out;
  for (const auto& p : pieces()) {
    if (p.role != sql::IdentRole::kTable) continue;
    auto v = sql::identifier_value(p.text);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<ColumnRef> SqlAst::columns() const {
  std::vector<ColumnRef> out;
  sql::walk(root_, [&](const Node& n) {
    if (n.kind == NodeKind::kColumn) out.push_back({n.aux, n.text});
    return true;
  });
  return out;
}

std::vector<std::string> SqlAst::aliases() const {
  std::vector<std::string> out;
  for (const auto& p : pieces()) {
    if (p.role == sql::IdentRole::kAliasDecl) out.push_back(sql::identifier_value(p.text));
  }
  return out;
}

std::vector<LiteralRef> SqlAst::literals() const {
  std::vector<LiteralRef> out;
  sql::walk(root_, [&](const Node& n) {
    if (n.kind == NodeKind::kLiteral) out.push_back({n.text, n.pos});
    return true;
  });
  return out;
}

}  // namespace sqlgen
