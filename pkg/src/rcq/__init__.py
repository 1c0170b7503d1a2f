"""Translation of arbitrary relational calculus queries into safe-range queries and SQL."""

import sys

from .parser import QuerySyntaxError, parse_query
from .printer import to_text
from .syntax import *  # noqa: F401,F403

# Rewrites recurse over query trees whose left-nested disjunctions can be long.
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)
