import numpy as np
import pytest

from _support import SUM_PAIRS, corpus, random_sum
from knotcubes.actions import kappa_axis
from knotcubes.gauss import v2_oracle
from knotcubes.graphing import ConstantFamily
from knotcubes.knots import mirror, perturb, push_into, reach_estimate
from knotcubes.library import standard_knot
from knotcubes.operad import CubeConfig
from knotcubes.quadrisecants import (DegeneracyError, enumerate_alternating_quadrisecants, family_nu2,
                                     is_alternating, segment_transversals, v2)

# frozen from the Gauss-diagram oracle
EXPECTED = {
    "unknot": 0, "trefoil": 1, "left_trefoil": 1, "figure_eight": -1, "granny": 2, "square": 2,
    "sum0_trefoil+figure_eight": 0, "sum1_figure_eight+figure_eight": -2,
    "sum2_left_trefoil+figure_eight": 0, "sum3_trefoil+trefoil": 2,
}


@pytest.fixture(scope="module")
def knots():
    return corpus()


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_count_matches_frozen_value_and_oracle(knots, name):
    f = knots[name]
    assert v2(f) == EXPECTED[name]
    assert v2_oracle(f, directions=3) == EXPECTED[name]


def test_trefoil_has_quadrisecants_with_positive_total():
    e = enumerate_alternating_quadrisecants(standard_knot("trefoil"))
    assert e.quadrisecants
    assert e.v2 == 1
    for q in e.quadrisecants:
        assert q.t[0] < q.t[1] < q.t[2] < q.t[3]
        x1, x2, x3, x4 = q.points
        assert is_alternating(x1, x2, x3, x4)
        assert q.residual <= 1e-10


def test_unknot_has_none():
    assert enumerate_alternating_quadrisecants(standard_knot("unknot")).quadrisecants == []


def test_independent_of_threads_and_pruning():
    f = standard_knot("figure_eight")
    ref = [q.t for q in enumerate_alternating_quadrisecants(f, threads=1).quadrisecants]
    for kw in ({"threads": 4}, {"prune": False}):
        got = [q.t for q in enumerate_alternating_quadrisecants(f, **kw).quadrisecants]
        assert len(got) == len(ref)
        assert np.allclose(got, ref, atol=1e-8)


def test_mirror_keeps_value():
    for name in ("trefoil", "figure_eight"):
        f = standard_knot(name)
        assert v2(mirror(f)) == v2(f) == v2_oracle(mirror(f))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_isotopy_invariance(seed):
    f = standard_knot("trefoil")
    g = perturb(f, seed=seed, magnitude=reach_estimate(f) / 11)
    assert v2(g) == 1


def test_additivity():
    c = CubeConfig.from_intervals([[(-1, 0)], [(0, 1)]])
    f, g = standard_knot("figure_eight"), standard_knot("trefoil")
    assert v2(kappa_axis(c, [f, g])) == v2(f) + v2(g)


def test_random_sums_are_deterministic():
    assert random_sum(0).same_map(random_sum(0))
    assert len(SUM_PAIRS) == 4


def test_alternating_order():
    x = lambda s: np.array([s, 0.0, 0.0])
    assert is_alternating(x(1), x(3), x(0), x(2))
    assert not is_alternating(x(0), x(1), x(2), x(3))
    with pytest.raises(ValueError):
        is_alternating(x(0), x(1), np.array([0.0, 1.0, 0.0]), x(3))


def test_transversal_of_four_segments():
    segs = [((t, -d[0], -d[1]), (t, d[0], d[1])) for t, d in
            [(-1.5, (1, 0)), (-0.5, (0, 1)), (0.5, (1, 1)), (1.5, (1, -1))]]
    lines = segment_transversals(*segs)
    assert any(abs(abs(L["direction"][0]) - 1) < 1e-12 and np.allclose(L["params"], 0.5) for L in lines)


def test_coplanar_segments_are_degenerate():
    segs = [((t, -1, 0), (t, 1, 0)) for t in (-1.5, -0.5, 0.5, 1.5)]
    with pytest.raises(DegeneracyError):
        segment_transversals(*segs)


def test_r4_knot_rejected_by_enumerator():
    with pytest.raises(ValueError):
        enumerate_alternating_quadrisecants(push_into(standard_knot("trefoil"), 4))


def test_constant_families():
    r = family_nu2(ConstantFamily(standard_knot("unknot")), grid=8, stride=4)
    assert r.count == 0 and r.stable
    r = family_nu2(ConstantFamily(standard_knot("trefoil")), grid=8, stride=4, refine=False)
    assert r.count == 0
    assert r.rejected_degenerate > 0
