#!/usr/bin/env python3
"""Reference extraction of value conditions, walking sqlglot's parse tree.

Usage: value_conditions_oracle.py SQL_LIST > value_conditions.jsonl

Input lines are "<dialect>\t<sql>". A value condition is a string or number
literal (optionally signed, parenthesized, cast or typed, e.g. DATE '...')
that is a direct operand of a comparison, LIKE/ILIKE/GLOB, IN list, BETWEEN
or IS DISTINCT FROM. LIMIT/OFFSET are skipped. LIKE patterns lose leading and
trailing '%' wildcards (GLOB: '*').
"""
import json
import sys

import sqlglot
from sqlglot import exp

DIALECT = {"sqlite": "sqlite", "postgresql": "postgres", "bigquery": "bigquery"}
COMPARISONS = (exp.EQ, exp.NEQ, exp.GT, exp.GTE, exp.LT, exp.LTE, exp.NullSafeNEQ, exp.NullSafeEQ)


def literal_of(node):
    if isinstance(node, exp.Literal):
        return (node.this, not node.is_string)
    if isinstance(node, exp.Neg) and isinstance(node.this, exp.Literal) and not node.this.is_string:
        return ("-" + node.this.this, True)
    if isinstance(node, (exp.Paren, exp.Cast, exp.TryCast)):
        return literal_of(node.this)
    if isinstance(node, exp.Anonymous) is False and type(node).__name__ in ("Date", "TsOrDsToDate", "StrToDate"):
        return literal_of(node.this)
    return None


def strip(value, wild):
    return value.strip(wild)


def children(node):
    out = []
    for key in node.arg_types:
        v = node.args.get(key)
        if isinstance(v, list):
            out.extend(x for x in v if isinstance(x, exp.Expression))
        elif isinstance(v, exp.Expression):
            out.append(v)
    return out


def collect(node, out):
    if isinstance(node, (exp.Limit, exp.Offset)):
        return
    operands = []
    wild = None
    if isinstance(node, COMPARISONS):
        operands = [node.this, node.expression]
    elif isinstance(node, (exp.Like, exp.ILike, exp.Glob)):
        operands = [node.this, node.expression]
        wild = "*" if isinstance(node, exp.Glob) else "%"
    elif isinstance(node, exp.Between):
        operands = [node.this, node.args["low"], node.args["high"]]
    elif isinstance(node, exp.In):
        operands = [node.this] + list(node.expressions)
    elif isinstance(node, exp.Is) or isinstance(node, exp.Not):
        pass
    operand_ids = {id(o) for o in operands}
    kids = children(node)
    if operands:
        # source order: operands are the node's own children in order
        kids = operands + [k for k in kids if id(k) not in operand_ids]
    for k in kids:
        if id(k) in operand_ids:
            lit = literal_of(k)
            if lit is not None:
                value, numeric = lit
                if wild and not numeric:
                    value = strip(value, wild)
                out.append(value)
                continue
        collect(k, out)


def main():
    for line in open(sys.argv[1], encoding="utf-8"):
        line = line.rstrip("\n")
        if not line:
            continue
        dialect, sql = line.split("\t", 1)
        tree = sqlglot.parse_one(sql, read=DIALECT[dialect])
        out = []
        collect(tree, out)
        print(json.dumps({"dialect": dialect, "sql": sql, "expected": out}, ensure_ascii=False))


if __name__ == "__main__":
    main()
