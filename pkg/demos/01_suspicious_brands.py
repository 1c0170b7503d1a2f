"""Walk through translating a domain-dependent query and running it.

Brands ``B``, products per brand ``P`` and reviews ``S(product, user, score)``.
A brand is suspicious when some user gave the same score to every one of its
products.  Asking for the users as well makes the query domain dependent: a
brand without products is "reviewed" by every possible user.

Run with ``python demos/01_suspicious_brands.py``.
"""

from rcq import parse_query, to_text
from rcq.db import SqliteDatabase
from rcq.pipeline import compile_query, run_compiled
from rcq.ranges import is_evaluable, is_safe_range
from rcq.semantics import Structure

per_brand = parse_query("B(b) AND EXISTS u, s. FORALL p. P(b, p) -> S(p, u, s)")
per_user = parse_query("B(b) AND EXISTS s. FORALL p. P(b, p) -> S(p, u, s)")

for name, q in (("per brand", per_brand), ("per user", per_user)):
    print(f"{name}: {to_text(q)}")
    print(f"  safe range: {is_safe_range(q)}, evaluable: {is_evaluable(q)}")

# the translation splits the query into a finite part and a closed test for infinity
c = compile_query(per_user)
print("\nfin:", to_text(c.fin))
print("inf:", to_text(c.inf))

db = Structure.of(
    B={("acme",), ("zeta",), ("nova",)},
    P={("acme", "kettle"), ("acme", "toaster"), ("zeta", "lamp")},
    S={("kettle", "ann", 5), ("toaster", "ann", 5), ("lamp", "bob", 1), ("kettle", "bob", 2)},
)
ans = run_compiled(c, db)
print("\nwith brand nova (no products):", "INFINITE" if ans.infinite else sorted(ans.rows.rows))

db = Structure.of(B={("acme",), ("zeta",)}, P=db.interps["P"], S=db.interps["S"])
ans = run_compiled(c, db)
print("without nova:", sorted(ans.rows.rows))

# the same answer through SQL
fin_sql, inf_sql = c.sql("sqlite")
sqlite = SqliteDatabase()
sqlite.load(db)
print("SQLite says infinite:", bool(sqlite.query(inf_sql)))
print("SQLite rows:", sorted(sqlite.query(fin_sql)))
print("\n" + fin_sql)
