"""Checking the translation against brute force on generated inputs.

Data Golf builds a structure for a query so that chosen tuples are answers
and others are not.  The capturability oracle decides finiteness by
evaluating over the active domain plus a few fresh values, which is slow but
obviously correct.

Run with ``python demos/03_data_golf_and_oracle.py``.
"""

from rcq import to_text
from rcq.datagolf import check_dg_assumptions, gen_random_query, golf, training_structure
from rcq.facts import format_facts
from rcq.semantics import Infinite, capture_oracle, eval_ranf
from rcq.translate import Translator

q = gen_random_query(seed=7, size=10)
print("query:", to_text(q))
print("assumptions hold:", bool(check_dg_assumptions(q)))
print(format_facts(golf(q, 2, 1)))

agree = 0
for seed in range(20):
    for profile in ("evaluable", "infinite"):
        q = gen_random_query(seed, 14, profile)
        r = Translator(training_structure(q)).rw(q)
        for gamma in (0, 1):
            s = golf(q, 3, gamma)
            want = capture_oracle(q, s)
            if bool(eval_ranf(r.inf, s)):
                agree += isinstance(want, Infinite)
            else:
                agree += not isinstance(want, Infinite) and eval_ranf(r.fin, s).rows == want.rows
print(f"{agree} of 80 query/structure pairs agree with the oracle")
