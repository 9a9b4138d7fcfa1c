"""Testing 'disjoint union of triangles' with a constant number of queries.

Members (t copies of K3) are accepted and long cycles are rejected.  The
number of oracle queries stays fixed as n grows by three orders of magnitude.
"""

from fractions import Fraction

from bdrd.generators import cycle, triangles
from bdrd.relational import OracleHandle
from bdrd.tester import derive_params, epsilon_tester, load_property

eps = Fraction(1, 4)
prop = load_property("disjoint-triangles")
params = derive_params(eps, 4, prop, mode="calibrated")
print(f"eps={eps}: lambda={params.lam} f={params.f} mu={params.mu} "
      f"n in [{params.n_min}, {params.n_max}] s={params.s}")

for n in (1_000, 10_000, 100_000):
    for label, db in (("triangles", triangles(n // 3)), ("cycle", cycle(n))):
        o = OracleHandle(db)
        v = epsilon_tester(o, db.n, eps, prop, seed=1, params=params)
        verdict = "accept" if v.accept else "reject"
        print(f"n={db.n:>7} {label:<9} {verdict:<6} branch={v.branch} queries={v.queries} l1={float(v.l1_min):.3f}")
