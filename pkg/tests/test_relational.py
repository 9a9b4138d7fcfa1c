import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdrd.relational import (
    GRAPH,
    Database,
    DatabaseFormatError,
    OracleContractError,
    OracleHandle,
    Schema,
    degree_of,
    gaifman_graph,
    graph_db,
    induced_subdb,
    oracle_query,
    parse_db,
    read_db,
    serialize_db,
    write_db,
)


@pytest.fixture
def triangle():
    return graph_db(3, [(1, 2), (2, 3), (1, 3)], d=4)


@st.composite
def small_graphs(draw, max_n=7, max_degree=3):
    n = draw(st.integers(0, max_n))
    pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    deg = [0] * (n + 1)
    edges = []
    for a, b in chosen:
        if deg[a] < max_degree and deg[b] < max_degree:
            deg[a] += 1
            deg[b] += 1
            edges.append((a, b))
    return graph_db(n, edges, d=2 * max_degree)


class TestSchema:
    def test_rejects_duplicates_and_bad_arity(self):
        with pytest.raises(ValueError):
            Schema((("E", 2), ("E", 3)))
        with pytest.raises(ValueError):
            Schema((("R", 0),))

    def test_names_and_arity(self):
        s = Schema((("E", 2), ("R", 3)))
        assert s.names == ("E", "R")
        assert s.arity("R") == 3
        assert s.max_arity == 3
        assert len(s) == 2


class TestDatabase:
    def test_tuples_sorted_and_deduplicated(self):
        db = Database(GRAPH, 3, {"E": [(2, 1), (1, 2), (1, 2)]})
        assert db.tuples("E") == [(1, 2), (2, 1)]

    def test_out_of_range_element(self):
        with pytest.raises(ValueError):
            Database(GRAPH, 2, {"E": [(1, 3)]})

    def test_degree_bound_enforced(self):
        # five tuples share element 1
        tuples = [(1, 2), (2, 1), (1, 3), (3, 1), (1, 4)]
        with pytest.raises(ValueError):
            Database(GRAPH, 4, {"E": tuples}, degree_bound=4)

    def test_degree_examples(self, triangle):
        assert degree_of(triangle, 1) == 4
        ternary = Database(Schema((("R", 3),)), 1, {"R": [(1, 1, 1)]})
        assert degree_of(ternary, 1) == 1
        with pytest.raises(IndexError):
            degree_of(graph_db(0, []), 1)

    def test_arrays_read_only(self, triangle):
        with pytest.raises(ValueError):
            triangle.relation("E")[0, 0] = 3

    @given(small_graphs())
    def test_gaifman_degree_bound(self, db):
        g = gaifman_graph(db)
        assert all(deg <= (db.schema.max_arity - 1) * db.d for _, deg in g.degree())


class TestOracle:
    def test_examples(self, triangle):
        o = OracleHandle(triangle)
        assert oracle_query(o, "E", 1, 1) == (1, 2)
        assert o.query("E", 3, 4) == (3, 2)
        assert o.count == 2

    def test_contract_violations_are_distinct_and_uncounted(self, triangle):
        o = OracleHandle(triangle)
        for args in (("E", 1, 5), ("E", 4, 1), ("E", 0, 1), ("F", 1, 1)):
            with pytest.raises(OracleContractError):
                o.query(*args)
        assert o.count == 0

    def test_nothing_when_exhausted(self):
        db = graph_db(3, [(1, 2)], d=4)
        o = OracleHandle(db)
        assert o.query("E", 1, 3) is None
        assert o.query("E", 3, 1) is None

    @given(small_graphs())
    def test_answers_enumerate_containing_tuples(self, db):
        o = OracleHandle(db)
        deg = db.degrees()
        for i in range(1, db.n + 1):
            answers = [o.query("E", i, j) for j in range(1, db.d + 1)]
            found = [t for t in answers if t is not None]
            assert found == [t for t in db.tuples("E") if i in t]
            assert len(found) == deg[i]
            # once Nothing, always Nothing
            assert all(t is None for t in answers[len(found):])

    @given(small_graphs())
    def test_query_all_costs_the_same_as_the_loop(self, db):
        single, batched = OracleHandle(db), OracleHandle(db)
        for i in range(1, db.n + 1):
            answers = []
            for j in range(1, db.d + 1):
                t = single.query("E", i, j)
                if t is None:
                    break
                answers.append(t)
            assert batched.query_all("E", i) == answers
        assert batched.count == single.count


class TestGaifman:
    def test_ternary_tuple_gives_triangle(self):
        db = Database(Schema((("R", 3),)), 3, {"R": [(1, 2, 3)]})
        g = gaifman_graph(db)
        assert set(map(frozenset, g.edges())) == {frozenset(p) for p in [(1, 2), (2, 3), (1, 3)]}


class TestInducedSubdb:
    def test_examples(self, triangle):
        sub, original = induced_subdb(triangle, [1, 2])
        assert sub.tuples("E") == [(1, 2), (2, 1)]
        assert original == [1, 2]
        empty, _ = induced_subdb(triangle, [])
        assert empty.n == 0 and empty.num_tuples == 0
        full, _ = induced_subdb(triangle, [1, 2, 3])
        assert full == triangle

    @given(small_graphs(), st.data())
    def test_monotone(self, db, data):
        big = data.draw(st.sets(st.integers(1, max(db.n, 1)))) if db.n else set()
        small = data.draw(st.sets(st.sampled_from(sorted(big)))) if big else set()
        sub_big, orig_big = induced_subdb(db, big)
        sub_small, orig_small = induced_subdb(db, small)
        lift_big = {tuple(orig_big[x - 1] for x in t) for t in sub_big.tuples("E")}
        lift_small = {tuple(orig_small[x - 1] for x in t) for t in sub_small.tuples("E")}
        assert lift_small <= lift_big


class TestTextFormat:
    def test_canonical_text(self, triangle):
        text = serialize_db(triangle)
        assert text.splitlines()[:4] == ["schema E:2", "degree_bound 4", "domain 3", "rel E"]
        assert serialize_db(parse_db(text)) == text

    @given(small_graphs())
    def test_round_trip(self, db):
        assert parse_db(serialize_db(db)) == db

    def test_rejects_out_of_range(self):
        text = "schema E:2\ndegree_bound 4\ndomain 2\nrel E\n1 3\n"
        with pytest.raises(DatabaseFormatError) as exc:
            parse_db(text)
        assert exc.value.line == 5

    def test_rejects_degree_violation(self):
        body = "\n".join(["1 2", "1 3", "1 4", "1 5", "1 6"])
        with pytest.raises(DatabaseFormatError):
            parse_db(f"schema E:2\ndegree_bound 4\ndomain 6\nrel E\n{body}\n")

    def test_rejects_unsorted(self):
        with pytest.raises(DatabaseFormatError):
            parse_db("schema E:2\ndegree_bound 4\ndomain 2\nrel E\n2 1\n1 2\n")

    def test_file_round_trip(self, tmp_path, triangle):
        path = tmp_path / "t.db"
        write_db(triangle, path)
        assert read_db(path) == triangle


def test_large_database_is_cheap():
    a = np.arange(1, 200_001, dtype=np.int64)
    edges = np.stack([a, a % 200_000 + 1], 1)
    db = Database(GRAPH, 200_000, {"E": np.concatenate([edges, edges[:, ::-1]])}, 4)
    assert int(db.degrees().max()) == 4
    assert OracleHandle(db).query("E", 200_000, 1) == (1, 200_000)
