#include "sqlgen/dialect/ast.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

#include "sqlgen/util/strings.hpp"

namespace sqlgen::sql {

namespace {

const Node& empty_node() {
  static const Node n;
  return n;
}

bool is_plain_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto c0 = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(c0) || c0 == '_')) return false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (!(std::isalnum(c) || c == '_')) return false;
  }
  return true;
}

bool is_quoted(std::string_view s) {
  return !s.empty() && (s.front() == '"' || s.front() == '`' || s.front() == '[');
}

// Renders a node tree into a flat piece stream.
class PieceWriter {
 public:
  std::vector<Piece> out;

  void node(const Node& n) {
    switch (n.kind) {
      case NodeKind::kEmpty:
        return;
      case NodeKind::kQuery:
        query(n);
        return;
      case NodeKind::kSetOp:
        node(n.child(0));
        kw(n.text);
        if (!n.flag.empty()) kw(n.flag);
        node(n.child(1));
        return;
      case NodeKind::kParenQuery:
        open();
        node(n.child(0));
        close();
        return;
      case NodeKind::kSelect:
        select(n);
        return;
      default:
        break;
    }
    if (table_expr(n)) return;
    expr(n);
  }

 private:
  Piece& push(PieceKind k, std::string text, IdentRole role = IdentRole::kNone) {
    Piece p;
    p.kind = k;
    p.text = std::move(text);
    p.role = role;
    out.push_back(std::move(p));
    return out.back();
  }

  void kw(std::string_view text) { push(PieceKind::kKeyword, util::to_upper(text)); }
  void ident(const std::string& text, IdentRole role) { push(PieceKind::kIdentifier, text, role); }

  void fn_name(const std::string& name) {
    push(PieceKind::kFunction, is_quoted(name) ? name : util::to_upper(name));
  }

  // "(" glued to the preceding function name or keyword.
  void call_open() {
    auto& p = push(PieceKind::kPunct, "(");
    p.glue_prev = true;
    p.glue_next = true;
  }
  void open() { push(PieceKind::kPunct, "(").glue_next = true; }
  void close() { push(PieceKind::kPunct, ")").glue_prev = true; }
  void comma() { push(PieceKind::kPunct, ",").glue_prev = true; }
  void dot() {
    auto& p = push(PieceKind::kPunct, ".");
    p.glue_prev = true;
    p.glue_next = true;
  }

  void list(const std::vector<Node>& items, std::size_t from = 0) {
    for (std::size_t i = from; i < items.size(); ++i) {
      if (i > from) comma();
      node(items[i]);
    }
  }

  void names(const Node& list_node, IdentRole role) {
    for (std::size_t i = 0; i < list_node.children.size(); ++i) {
      if (i > 0) comma();
      ident(list_node.children[i].text, role);
    }
  }

  void query(const Node& n) {
    const Node& with = n.child(0);
    if (!with.empty()) {
      kw("WITH");
      if (!with.flag.empty()) kw(with.flag);
      for (std::size_t i = 0; i < with.children.size(); ++i) {
        if (i > 0) comma();
        const Node& cte = with.children[i];
        ident(cte.text, IdentRole::kAliasDecl);
        if (!cte.child(0).empty()) {
          open();
          names(cte.child(0), IdentRole::kAliasDecl);
          close();
        }
        kw("AS");
        if (!cte.flag.empty()) {
          for (const auto& w : util::split_whitespace(cte.flag)) kw(w);
        }
        open();
        node(cte.child(1));
        close();
      }
    }
    node(n.child(1));
    order_by(n.child(2));
    limit(n.child(3));
  }

  void order_by(const Node& ob) {
    if (ob.empty()) return;
    kw("ORDER BY");
    for (std::size_t i = 0; i < ob.children.size(); ++i) {
      if (i > 0) comma();
      const Node& item = ob.children[i];
      node(item.child(0));
      if (!item.text.empty()) kw(item.text);
      if (!item.flag.empty()) kw(item.flag);
    }
  }

  void limit(const Node& l) {
    if (l.empty()) return;
    if (l.text == "ALL") {
      kw("LIMIT");
      kw("ALL");
      if (!l.child(1).empty()) {
        kw("OFFSET");
        node(l.child(1));
      }
      return;
    }
    if (l.flag == "COMMA") {
      kw("LIMIT");
      node(l.child(1));
      comma();
      node(l.child(0));
      return;
    }
    if (l.flag == "FETCH") {
      if (!l.child(1).empty()) {
        kw("OFFSET");
        node(l.child(1));
        kw("ROWS");
      }
      kw("FETCH FIRST");
      node(l.child(0));
      kw("ROWS ONLY");
      return;
    }
    if (!l.child(0).empty()) {
      kw("LIMIT");
      node(l.child(0));
    }
    if (!l.child(1).empty()) {
      kw("OFFSET");
      node(l.child(1));
    }
  }

  void select(const Node& n) {
    kw("SELECT");
    if (!n.aux.empty()) {
      for (const auto& w : util::split_whitespace(n.aux)) kw(w);
    }
    if (!n.flag.empty()) kw(n.flag);
    const Node& don = n.child(0);
    if (!don.empty()) {
      kw("DISTINCT ON");
      open();
      list(don.children);
      close();
    }
    const Node& sl = n.child(1);
    for (std::size_t i = 0; i < sl.children.size(); ++i) {
      if (i > 0) comma();
      select_item(sl.children[i]);
    }
    const Node& from = n.child(2);
    if (!from.empty()) {
      kw("FROM");
      list(from.children);
    }
    clause("WHERE", n.child(3));
    const Node& gb = n.child(4);
    if (!gb.empty()) {
      kw("GROUP BY");
      list(gb.children);
    }
    clause("HAVING", n.child(5));
    clause("QUALIFY", n.child(6));
    const Node& win = n.child(7);
    if (!win.empty()) {
      kw("WINDOW");
      for (std::size_t i = 0; i < win.children.size(); ++i) {
        if (i > 0) comma();
        const Node& nw = win.children[i];
        ident(nw.text, IdentRole::kAliasDecl);
        kw("AS");
        open();
        window_spec(nw.child(0));
        close();
      }
    }
  }

  void clause(std::string_view keyword, const Node& c) {
    if (c.empty()) return;
    kw(keyword);
    node(c.child(0));
  }

  void select_item(const Node& item) {
    if (item.kind != NodeKind::kSelectItem) {
      node(item);
      return;
    }
    node(item.child(0));
    if (!item.text.empty()) {
      kw("AS");
      ident(item.text, IdentRole::kAliasDecl);
    }
  }

  void alias(const Node& a) {
    if (a.empty()) return;
    kw("AS");
    ident(a.text, IdentRole::kAliasDecl);
    if (!a.child(0).empty()) {
      open();
      names(a.child(0), IdentRole::kAliasDecl);
      close();
    }
  }

  void with_offset(const Node& w) {
    if (w.empty()) return;
    kw("WITH OFFSET");
    alias(w.child(0));
  }

  bool table_expr(const Node& n) {
    switch (n.kind) {
      case NodeKind::kJoin: {
        node(n.child(0));
        if (!n.flag.empty()) {
          for (const auto& w : util::split_whitespace(n.flag)) kw(w);
        }
        kw("JOIN");
        node(n.child(1));
        const Node& cond = n.child(2);
        if (cond.kind == NodeKind::kOn) {
          kw("ON");
          node(cond.child(0));
        } else if (cond.kind == NodeKind::kUsing) {
          kw("USING");
          open();
          names(cond, IdentRole::kColumn);
          close();
        }
        return true;
      }
      case NodeKind::kTableRef:
        ident(n.text, IdentRole::kTable);
        alias(n.child(0));
        with_offset(n.child(1));
        return true;
      case NodeKind::kDerivedTable:
        if (!n.flag.empty()) kw(n.flag);
        open();
        node(n.child(0));
        close();
        alias(n.child(1));
        return true;
      case NodeKind::kTableFunction:
        if (!n.flag.empty()) kw(n.flag);
        node(n.child(0));
        alias(n.child(1));
        with_offset(n.child(2));
        return true;
      case NodeKind::kParenJoin:
        open();
        node(n.child(0));
        close();
        alias(n.child(1));
        return true;
      default:
        return false;
    }
  }

  void window_spec(const Node& ws) {
    if (!ws.text.empty()) ident(ws.text, IdentRole::kAliasRef);
    const Node& pb = ws.child(0);
    if (!pb.empty()) {
      kw("PARTITION BY");
      list(pb.children);
    }
    order_by(ws.child(1));
    const Node& fr = ws.child(2);
    if (!fr.empty()) {
      kw(fr.text);
      if (fr.flag == "BETWEEN") {
        kw("BETWEEN");
        frame_bound(fr.child(0));
        kw("AND");
        frame_bound(fr.child(1));
      } else {
        frame_bound(fr.child(0));
      }
    }
  }

  void frame_bound(const Node& b) {
    if (!b.child(0).empty()) node(b.child(0));
    kw(b.text);
  }

  void func(const Node& n) {
    if (!n.aux.empty()) {
      kw(n.aux);
      dot();
    }
    fn_name(n.text);
    call_open();
    if (!n.flag.empty()) kw(n.flag);
    const Node& args = n.child(0);
    for (std::size_t i = 0; i < args.children.size(); ++i) {
      const Node& a = args.children[i];
      if (i > 0 && a.kind != NodeKind::kKwArg) comma();
      node(a);
    }
    order_by(n.child(1));
    if (!n.child(2).empty()) kw(n.child(2).text);
    close();
    const Node& filter = n.child(3);
    if (!filter.empty()) {
      kw("FILTER");
      open();
      kw("WHERE");
      node(filter.child(0));
      close();
    }
    const Node& over = n.child(4);
    if (!over.empty()) {
      kw("OVER");
      if (!over.text.empty()) {
        ident(over.text, IdentRole::kAliasRef);
      } else {
        open();
        window_spec(over.child(0));
        close();
      }
    }
  }

  void binary_op(const std::string& op) {
    bool alpha = !op.empty() && std::isalpha(static_cast<unsigned char>(op[0]));
    push(alpha ? PieceKind::kKeyword : PieceKind::kOperator, alpha ? util::to_upper(op) : op);
  }

  void expr(const Node& n) {
    switch (n.kind) {
      case NodeKind::kStar: {
        if (!n.text.empty()) {
          ident(n.text, IdentRole::kQualifier);
          dot();
        }
        push(PieceKind::kPunct, "*");
        const Node& ex = n.child(0);
        if (!ex.empty()) {
          kw("EXCEPT");
          open();
          names(ex, IdentRole::kColumn);
          close();
        }
        const Node& rep = n.child(1);
        if (!rep.empty()) {
          kw("REPLACE");
          open();
          list(rep.children);
          close();
        }
        return;
      }
      case NodeKind::kColumn:
        if (!n.aux.empty()) {
          ident(n.aux, IdentRole::kQualifier);
          dot();
        }
        ident(n.text, IdentRole::kColumn);
        return;
      case NodeKind::kLiteral:
        push(PieceKind::kLiteral, n.text);
        return;
      case NodeKind::kKeywordLiteral:
        kw(n.text);
        return;
      case NodeKind::kTypedLiteral:
        kw(n.text);
        node(n.child(0));
        return;
      case NodeKind::kInterval:
        kw("INTERVAL");
        node(n.child(0));
        if (!n.text.empty()) kw(n.text);
        if (!n.aux.empty()) {
          kw("TO");
          kw(n.aux);
        }
        return;
      case NodeKind::kUnary:
        if (n.text == "NOT") {
          kw("NOT");
        } else {
          push(PieceKind::kOperator, n.text).glue_next = true;
        }
        node(n.child(0));
        return;
      case NodeKind::kBinary:
        node(n.child(0));
        binary_op(n.text);
        node(n.child(1));
        return;
      case NodeKind::kLike:
        node(n.child(0));
        if (!n.flag.empty()) kw("NOT");
        kw(n.text);
        node(n.child(1));
        if (!n.child(2).empty()) {
          kw("ESCAPE");
          node(n.child(2));
        }
        return;
      case NodeKind::kBetween:
        node(n.child(0));
        if (!n.flag.empty()) kw("NOT");
        kw("BETWEEN");
        node(n.child(1));
        kw("AND");
        node(n.child(2));
        return;
      case NodeKind::kInList:
        node(n.child(0));
        if (!n.flag.empty()) kw("NOT");
        kw("IN");
        open();
        list(n.children, 1);
        close();
        return;
      case NodeKind::kInQuery:
        node(n.child(0));
        if (!n.flag.empty()) kw("NOT");
        kw("IN");
        open();
        node(n.child(1));
        close();
        return;
      case NodeKind::kInUnnest:
        node(n.child(0));
        if (!n.flag.empty()) kw("NOT");
        kw("IN");
        push(PieceKind::kFunction, "UNNEST");
        call_open();
        node(n.child(1));
        close();
        return;
      case NodeKind::kIs:
        node(n.child(0));
        kw("IS");
        if (!n.flag.empty()) kw("NOT");
        if (!n.text.empty()) kw(n.text);
        if (!n.child(1).empty()) node(n.child(1));
        return;
      case NodeKind::kPostfixNull:
        node(n.child(0));
        kw(n.text);
        return;
      case NodeKind::kExists:
        kw("EXISTS");
        open();
        node(n.child(0));
        close();
        return;
      case NodeKind::kSubquery:
      case NodeKind::kParen:
        open();
        node(n.child(0));
        close();
        return;
      case NodeKind::kTuple:
        open();
        list(n.children);
        close();
        return;
      case NodeKind::kCase:
        kw("CASE");
        node(n.child(0));
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          const Node& c = n.children[i];
          if (c.kind == NodeKind::kWhen) {
            kw("WHEN");
            node(c.child(0));
            kw("THEN");
            node(c.child(1));
          } else if (c.kind == NodeKind::kElse) {
            kw("ELSE");
            node(c.child(0));
          }
        }
        kw("END");
        return;
      case NodeKind::kCast:
        kw(n.text);
        call_open();
        node(n.child(0));
        kw("AS");
        node(n.child(1));
        close();
        return;
      case NodeKind::kPgCast: {
        node(n.child(0));
        auto& p = push(PieceKind::kOperator, "::");
        p.glue_prev = true;
        p.glue_next = true;
        node(n.child(1));
        return;
      }
      case NodeKind::kType:
        push(PieceKind::kType, n.text);
        return;
      case NodeKind::kFunc:
        func(n);
        return;
      case NodeKind::kExtract:
        kw("EXTRACT");
        call_open();
        kw(n.text);
        kw("FROM");
        node(n.child(0));
        close();
        return;
      case NodeKind::kDatePart:
        kw(n.text);
        return;
      case NodeKind::kArray:
        if (n.flag == "SUBQUERY") {
          kw("ARRAY");
          call_open();
          node(n.child(0));
          close();
        } else {
          if (n.flag == "CONSTRUCTOR") {
            kw("ARRAY");
            if (!n.aux.empty()) push(PieceKind::kType, n.aux).glue_prev = true;
          }
          auto& p = push(PieceKind::kPunct, "[");
          p.glue_next = true;
          if (n.flag == "CONSTRUCTOR") p.glue_prev = true;
          list(n.children);
          push(PieceKind::kPunct, "]").glue_prev = true;
        }
        return;
      case NodeKind::kStruct:
        kw("STRUCT");
        if (!n.aux.empty()) push(PieceKind::kType, n.aux).glue_prev = true;
        call_open();
        list(n.children);
        close();
        return;
      case NodeKind::kNamedArg:
        node(n.child(0));
        kw("AS");
        ident(n.text, IdentRole::kAliasDecl);
        return;
      case NodeKind::kSubscript: {
        node(n.child(0));
        auto& p = push(PieceKind::kPunct, "[");
        p.glue_prev = true;
        p.glue_next = true;
        node(n.child(1));
        push(PieceKind::kPunct, "]").glue_prev = true;
        return;
      }
      case NodeKind::kFieldAccess:
        node(n.child(0));
        dot();
        ident(n.text, IdentRole::kColumn);
        return;
      case NodeKind::kTableArg:
        kw(n.text);
        ident(n.aux, IdentRole::kTable);
        return;
      case NodeKind::kKwArg:
        kw(n.text);
        node(n.child(0));
        return;
      case NodeKind::kCollate:
        node(n.child(0));
        kw("COLLATE");
        kw(n.text);
        return;
      case NodeKind::kQuantified:
        kw(n.text);
        open();
        node(n.child(0));
        close();
        return;
      case NodeKind::kSelectItem:
        select_item(n);
        return;
      default:
        // Structural nodes that only appear under their parents.
        for (const auto& c : n.children) node(c);
        return;
    }
  }
};

constexpr std::array<std::string_view, 60> kReserved = {
    "SELECT", "FROM",    "WHERE",     "GROUP",  "HAVING",  "ORDER",  "LIMIT",   "OFFSET", "UNION",
    "INTERSECT", "EXCEPT", "JOIN",    "INNER",  "LEFT",    "RIGHT",  "FULL",    "OUTER",  "CROSS",
    "NATURAL", "ON",      "USING",    "AS",     "AND",     "OR",     "NOT",     "IN",     "IS",
    "NULL",    "LIKE",    "ILIKE",    "GLOB",   "REGEXP",  "BETWEEN", "CASE",   "WHEN",   "THEN",
    "ELSE",    "END",     "EXISTS",   "DISTINCT", "ALL",   "WITH",   "QUALIFY", "WINDOW", "LATERAL",
    "CAST",    "TRUE",    "FALSE",    "INTERVAL", "BY",    "ASC",    "DESC",    "OVER",   "PARTITION",
    "FETCH",   "ESCAPE",  "COLLATE",  "SIMILAR", "ISNULL", "NOTNULL"};

}  // namespace

const Node& Node::child(std::size_t i) const { return i < children.size() ? children[i] : empty_node(); }

Node& Node::child_mut(std::size_t i) {
  if (children.size() <= i) children.resize(i + 1);
  return children[i];
}

bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.text != b.text || a.aux != b.aux || a.flag != b.flag) return false;
  // Trailing empty children are insignificant.
  std::size_t na = a.children.size(), nb = b.children.size();
  while (na > 0 && a.children[na - 1].empty()) --na;
  while (nb > 0 && b.children[nb - 1].empty()) --nb;
  if (na != nb) return false;
  for (std::size_t i = 0; i < na; ++i) {
    if (!same_tree(a.children[i], b.children[i])) return false;
  }
  return true;
}

void walk(const Node& n, const std::function<bool(const Node&)>& visit) {
  if (!visit(n)) return;
  for (const auto& c : n.children) walk(c, visit);
}

void walk_mut(Node& n, const std::function<bool(Node&)>& visit) {
  if (!visit(n)) return;
  for (auto& c : n.children) walk_mut(c, visit);
}

std::vector<Piece> to_pieces(const Node& root) {
  PieceWriter w;
  w.node(root);
  return std::move(w.out);
}

std::string join_pieces(const std::vector<Piece>& pieces) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i > 0 && !pieces[i].glue_prev && !pieces[i - 1].glue_next) out += ' ';
    out += pieces[i].text;
  }
  return out;
}

std::string render(const Node& root) { return join_pieces(to_pieces(root)); }

bool is_reserved_word(std::string_view upper) {
  static const std::unordered_set<std::string_view> set(kReserved.begin(), kReserved.end());
  return set.count(upper) > 0;
}

std::string identifier_value(std::string_view raw) {
  if (raw.size() < 2) return std::string(raw);
  char open = raw.front();
  char close = open == '[' ? ']' : open;
  if ((open != '"' && open != '`' && open != '[') || raw.back() != close) return std::string(raw);
  std::string out;
  auto body = raw.substr(1, raw.size() - 2);
  for (std::size_t i = 0; i < body.size(); ++i) {
    out += body[i];
    if (open != '[' && body[i] == close && i + 1 < body.size() && body[i + 1] == close) ++i;
  }
  return out;
}

std::string string_literal_value(std::string_view raw, Dialect d) {
  bool raw_prefix = false;
  bool backslash = d == Dialect::kBigQuery;
  std::size_t k = 0;
  while (k < raw.size() && raw[k] != '\'' && raw[k] != '"') {
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw[k])));
    if (c == 'R') raw_prefix = true;
    if (c == 'E') backslash = true;
    ++k;
  }
  if (k >= raw.size()) return std::string(raw);
  char q = raw[k];
  std::string_view body = raw.substr(k);
  if (body.size() >= 6 && body.substr(0, 3) == std::string(3, q) && body.substr(body.size() - 3) == std::string(3, q)) {
    body = body.substr(3, body.size() - 6);
  } else if (body.size() >= 2 && body.back() == q) {
    body = body.substr(1, body.size() - 2);
  } else {
    return std::string(raw);
  }
  if (raw_prefix) backslash = false;
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (backslash && c == '\\' && i + 1 < body.size()) {
      char n = body[++i];
      switch (n) {
        case 'n':
          out += '\n';
          break;
        case 't':
          out += '\t';
          break;
        case 'r':
          out += '\r';
          break;
        case '0':
          out += '\0';
          break;
        default:
          out += n;
      }
      continue;
    }
    out += c;
    if (c == q && i + 1 < body.size() && body[i + 1] == q) ++i;
  }
  return out;
}

std::string quote_identifier(std::string_view name, Dialect d) {
  if (is_plain_identifier(name) && !is_reserved_word(util::to_upper(name))) return std::string(name);
  char q = d == Dialect::kBigQuery ? '`' : '"';
  std::string out(1, q);
  for (char c : name) {
    if (c == q) out += q;
    out += c;
  }
  out += q;
  return out;
}

std::string quote_string(std::string_view value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

const char* kind_name(NodeKind k) {
  switch (k) {
#define SQLGEN_KIND(x) \
  case NodeKind::k##x: \
    return #x;
    SQLGEN_KIND(Empty)
    SQLGEN_KIND(Query)
    SQLGEN_KIND(With)
    SQLGEN_KIND(Cte)
    SQLGEN_KIND(SetOp)
    SQLGEN_KIND(ParenQuery)
    SQLGEN_KIND(Select)
    SQLGEN_KIND(SelectList)
    SQLGEN_KIND(SelectItem)
    SQLGEN_KIND(Star)
    SQLGEN_KIND(StarExcept)
    SQLGEN_KIND(StarReplace)
    SQLGEN_KIND(From)
    SQLGEN_KIND(Join)
    SQLGEN_KIND(On)
    SQLGEN_KIND(Using)
    SQLGEN_KIND(TableRef)
    SQLGEN_KIND(DerivedTable)
    SQLGEN_KIND(TableFunction)
    SQLGEN_KIND(ParenJoin)
    SQLGEN_KIND(Alias)
    SQLGEN_KIND(WithOffset)
    SQLGEN_KIND(NameList)
    SQLGEN_KIND(Name)
    SQLGEN_KIND(Where)
    SQLGEN_KIND(GroupBy)
    SQLGEN_KIND(Having)
    SQLGEN_KIND(Qualify)
    SQLGEN_KIND(WindowClause)
    SQLGEN_KIND(NamedWindow)
    SQLGEN_KIND(OrderBy)
    SQLGEN_KIND(OrderItem)
    SQLGEN_KIND(Limit)
    SQLGEN_KIND(DistinctOn)
    SQLGEN_KIND(Column)
    SQLGEN_KIND(Literal)
    SQLGEN_KIND(KeywordLiteral)
    SQLGEN_KIND(TypedLiteral)
    SQLGEN_KIND(Interval)
    SQLGEN_KIND(Unary)
    SQLGEN_KIND(Binary)
    SQLGEN_KIND(Like)
    SQLGEN_KIND(Between)
    SQLGEN_KIND(InList)
    SQLGEN_KIND(InQuery)
    SQLGEN_KIND(InUnnest)
    SQLGEN_KIND(Is)
    SQLGEN_KIND(PostfixNull)
    SQLGEN_KIND(Exists)
    SQLGEN_KIND(Subquery)
    SQLGEN_KIND(Paren)
    SQLGEN_KIND(Tuple)
    SQLGEN_KIND(Case)
    SQLGEN_KIND(When)
    SQLGEN_KIND(Else)
    SQLGEN_KIND(Cast)
    SQLGEN_KIND(PgCast)
    SQLGEN_KIND(Type)
    SQLGEN_KIND(Func)
    SQLGEN_KIND(ArgList)
    SQLGEN_KIND(Modifier)
    SQLGEN_KIND(Filter)
    SQLGEN_KIND(Over)
    SQLGEN_KIND(WindowSpec)
    SQLGEN_KIND(PartitionBy)
    SQLGEN_KIND(Frame)
    SQLGEN_KIND(FrameBound)
    SQLGEN_KIND(Extract)
    SQLGEN_KIND(DatePart)
    SQLGEN_KIND(Array)
    SQLGEN_KIND(Struct)
    SQLGEN_KIND(NamedArg)
    SQLGEN_KIND(Subscript)
    SQLGEN_KIND(FieldAccess)
    SQLGEN_KIND(TableArg)
    SQLGEN_KIND(KwArg)
    SQLGEN_KIND(Collate)
    SQLGEN_KIND(Quantified)
#undef SQLGEN_KIND
  }
  return "?";
}

}  // namespace sqlgen::sql
