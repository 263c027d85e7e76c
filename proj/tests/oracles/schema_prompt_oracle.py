#!/usr/bin/env python3
"""Independent reference renderer for the schema prompt (see docs/schema_prompt.md).

Builds the fixture database from fixtures/db/fixture.sql with Python's sqlite3,
uses the first row (lowest rowid) of each table as its sample row, and prints
the schema prompt. The output is frozen as fixtures/db/fixture_schema_prompt.txt.
"""
import re
import sqlite3
import sys
from pathlib import Path

PLAIN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def ident(name):
    return name if PLAIN.match(name) else '"' + name.replace('"', '""') + '"'


def literal(v):
    if v is None:
        return "NULL"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bytes):
        hx = v[:16].hex().upper()
        return "X'" + hx + ("...'" if len(v) > 16 else "'")
    s = v.replace("\n", " ").replace("\r", " ").replace("\t", " ")
    b = s.encode("utf-8")
    if len(b) > 80:
        cut = 80
        while cut > 0 and (b[cut] & 0xC0) == 0x80:
            cut -= 1
        s = b[:cut].decode("utf-8") + "..."
    return "'" + s.replace("'", "''") + "'"


def main():
    fixtures = Path(__file__).resolve().parent.parent / "fixtures"
    con = sqlite3.connect(":memory:")
    con.executescript((fixtures / "db" / "fixture.sql").read_text())
    tables = [r[0] for r in con.execute(
        "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%' ORDER BY name")]
    blocks = []
    for t in tables:
        cols = con.execute(f"PRAGMA table_info({ident(t)})").fetchall()
        fks = con.execute(f"PRAGMA foreign_key_list({ident(t)})").fetchall()
        lines = []
        for _cid, name, typ, notnull, _dflt, _pk in cols:
            line = "  " + ident(name)
            if typ:
                line += " " + typ
            if notnull:
                line += " NOT NULL"
            lines.append(line)
        pk = [ident(c[1]) for c in cols if c[5]]
        if pk:
            lines.append("  PRIMARY KEY (" + ", ".join(pk) + ")")
        by_col = {}
        for fk in sorted(fks, key=lambda r: (r[0], r[1])):
            by_col.setdefault(fk[3].lower(), []).append((fk[2], fk[4]))
        for c in cols:
            for ref_table, ref_col in by_col.get(c[1].lower(), []):
                lines.append(f"  FOREIGN KEY ({ident(c[1])}) REFERENCES {ident(ref_table)} ({ident(ref_col)})")
        row = con.execute(f"SELECT * FROM {ident(t)} LIMIT 1").fetchone()
        values = [literal(v) for v in row] if row else ["NULL"] * len(cols)
        blocks.append("CREATE TABLE " + ident(t) + " (\n" + ",\n".join(lines) + "\n);\n"
                      + "-- sample row: (" + ", ".join(values) + ")\n")
    sys.stdout.write("\n".join(blocks))


if __name__ == "__main__":
    main()
