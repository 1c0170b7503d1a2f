"""Why the translation's choices matter: intermediate result sizes.

Cost here is the sum, over every subquery, of its number of rows times its
number of free variables.  It is a machine independent stand-in for run time.

Run with ``python demos/02_counting_and_cost.py``.
"""

from rcq import parse_query, to_text
from rcq.aggregate import cnt
from rcq.bench import example53_costs, susp_ratios
from rcq.semantics import Structure, cost, eval_ranf

# A generator-based translation joins every brand with every (user, score)
# pair before testing the universal quantifier.  Ours does not.
print("n = m | cost VGT- | cost ours | ratio")
for n, vgt, ours in example53_costs((8, 16, 32)):
    print(f"{n:5d} | {vgt:9d} | {ours:9d} | {vgt / ours:5.2f}")

# Counting replaces "no y without a match" by "as many matches as ys".
q = parse_query("Qx(x) AND NOT EXISTS y. Qx(x) AND Qy(y) AND NOT Qxy(x, y)")
s = Structure.of(Qx={(i,) for i in range(10)}, Qy={(i,) for i in range(10)},
                 Qxy={(i, j) for i in range(10) for j in range(10) if (i + j) % 3})
r = cnt(q, s)
print("\nbefore:", to_text(q))
print("after: ", to_text(r))
print("same answers:", eval_ranf(q, s) == eval_ranf(r, s))
print(f"cost {cost(q, s)} -> {cost(r, s)}")

minus, full = susp_ratios(20)
print(f"\nsuspicious brands on Data Golf, n = 20: VGT-/ours- = {minus:.1f}, with counting {full:.2f}")
