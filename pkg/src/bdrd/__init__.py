"""Constant-query property testing for bounded-degree relational databases.

Submodules: ``relational`` (databases and the oracle), ``neighborhoods``
(r-types, histograms, sampling), ``semilinear`` (histogram sets),
``distances`` (exact tiny-instance distances), ``tester`` (parameters and the
tester), ``generators`` and ``harness`` (fixtures and experiments), ``cli``.
"""

from .distances import DistanceResult, EditOp, dist_bdrd, dist_pm, dist_pm_search
from .neighborhoods import TypeRegistry, ball, canonical_code, estimate_frequencies, histogram
from .relational import GRAPH, Database, OracleHandle, Schema, parse_db, serialize_db
from .semilinear import LinearSet, SemilinearSet, contains, min_distribution_distance
from .tester import PropertySpec, TesterParams, Verdict, derive_params, epsilon_tester, load_property

__version__ = "0.1.0"
