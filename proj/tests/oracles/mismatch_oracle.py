#!/usr/bin/env python3
"""Reference labels for the question/SQL mismatch filter.

Usage: mismatch_oracle.py PAIRS_TSV [beta1 beta2] > mismatch_pairs.jsonl

For each (question, sql) pair: the value conditions come from the sqlglot
walk in value_conditions_oracle.py; each string literal l is scored against
the question's word n-grams (n = words in l) with a textbook dynamic
programming edit distance (case-insensitive) and the cosine similarity of
hashed character-trigram vectors (lowercased, whitespace-collapsed, padded
with one space, FNV-1a 64 bucket mod 1024, L2-normalized). Number literals
match only an identical question word. A pair FAILs iff some literal has
d > beta1 or s < beta2.
"""
import json
import math
import os
import string
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import sqlglot  # noqa: E402
from value_conditions_oracle import collect, DIALECT  # noqa: E402

DIMS = 1024


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(text):
    norm = " ".join(text.split())
    norm = "".join(c.lower() if c.isascii() else c for c in norm)
    padded = (" " + norm + " ").encode("utf-8")
    v = [0.0] * DIMS
    for i in range(len(padded) - 2):
        v[fnv1a64(padded[i:i + 3]) % DIMS] += 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def cosine(a, b):
    return sum(x * y for x, y in zip(a, b))


def edit_distance(a, b):
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[len(a)][len(b)]


def lower_ascii(s):
    return "".join(c.lower() if c.isascii() else c for c in s)


def words_of(question):
    out = []
    for w in question.split():
        a, b = 0, len(w)
        while a < b and w[a] in string.punctuation:
            if w[a] in "+-" and a + 1 < b and w[a + 1].isdigit():
                break
            a += 1
        while b > a and w[b - 1] in string.punctuation:
            b -= 1
        if a < b:
            out.append(w[a:b])
    return out


def grams(words, n):
    if not words:
        return []
    if len(words) <= n:
        return [" ".join(words)]
    return [" ".join(words[i:i + n]) for i in range(len(words) - n + 1)]


def is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def score(question, literals, beta1, beta2):
    words = words_of(question)
    rows = []
    ok = True
    for lit, numeric in literals:
        value = " ".join(lit.split())
        if not value:
            rows.append({"literal": lit, "d": 0, "s": 0.0, "pass": True})
            continue
        if numeric:
            hit = value in words
            d, s = (0, 1.0) if hit else (None, 0.0)
        else:
            n = len(value.split())
            lv = embed(value)
            d, s = None, 0.0
            for g in grams(words, n):
                dist = edit_distance(lower_ascii(value), lower_ascii(g))
                d = dist if d is None else min(d, dist)
                s = max(s, cosine(lv, embed(g)))
        passed = d is not None and d <= beta1 and s >= beta2
        ok = ok and passed
        rows.append({"literal": lit, "d": d, "s": round(s, 6), "pass": passed})
    return ok, rows


def literals_of(sql):
    tree = sqlglot.parse_one(sql, read=DIALECT["sqlite"])
    out = []
    collect(tree, out)
    # collect() returns text only; recover the literal kind from the tree
    kinds = {}
    for lit in tree.find_all(sqlglot.exp.Literal):
        kinds.setdefault(lit.this, not lit.is_string)
    return [(v, kinds.get(v, False) or (v.startswith("-") and kinds.get(v[1:], False))) for v in out]


def main():
    beta1 = int(sys.argv[2]) if len(sys.argv) > 2 else 2
    beta2 = float(sys.argv[3]) if len(sys.argv) > 3 else 0.6
    for line in open(sys.argv[1], encoding="utf-8"):
        line = line.rstrip("\n")
        if not line:
            continue
        question, sql = line.split("\t", 1)
        lits = literals_of(sql)
        ok, rows = score(question, lits, beta1, beta2)
        print(json.dumps({"question": question, "sql": sql, "label": "PASS" if ok else "FAIL",
                          "conditions": rows}, ensure_ascii=False))


if __name__ == "__main__":
    main()
