import json
from fractions import Fraction

import numpy as np
import pytest

from knotcubes.gauss import writhe, gauss_diagram
from knotcubes.knots import (ImmersedKnotPL, KnotError, LongKnotPL, eval_knot, injectivity_proxy,
                             intersecting_segment_pairs, is_embedding_pl, is_embedding_sampled,
                             knot_from_dict, mirror, perturb, push_into, reach_estimate)
from knotcubes.library import KNOT_NAMES, standard_knot

F = Fraction


def _std(n=3):
    z = (F(0),) * (n - 1)
    return LongKnotPL((F(-1), F(1)), ((F(-1),) + z, (F(1),) + z))


def test_standard_outside_unit_interval():
    f = standard_knot("trefoil")
    X = eval_knot(f, np.array([-3.0, -1.0, 1.0, 2.5]))
    assert np.array_equal(X[:, 1:], np.zeros((4, 2)))
    assert np.array_equal(X[:, 0], [-3.0, -1.0, 1.0, 2.5])


def test_nonstandard_endpoints_rejected():
    with pytest.raises(KnotError):
        LongKnotPL((F(-1), F(1)), ((F(-1), F(1), F(0)), (F(1), F(0), F(0))))


@pytest.mark.parametrize("name", [n for n in KNOT_NAMES if n != "immersed_trefoil"])
def test_library_knots_embedded(name):
    f = standard_knot(name)
    assert is_embedding_pl(f)
    assert is_embedding_sampled(f)


def test_trefoil_is_right_handed():
    assert writhe(gauss_diagram(standard_knot("trefoil"), 0.3)) == 3
    assert writhe(gauss_diagram(standard_knot("left_trefoil"), 0.3)) == -3


def test_immersed_trefoil_has_two_double_points():
    g = standard_knot("immersed_trefoil")
    assert isinstance(g, ImmersedKnotPL)
    assert len(g.double_points) == 2
    assert len(intersecting_segment_pairs(g)) == 2
    assert not is_embedding_pl(g)


def test_json_roundtrip():
    for name in ("trefoil", "immersed_trefoil"):
        f = standard_knot(name)
        d = json.loads(json.dumps(f.to_dict()))
        g = knot_from_dict(d)
        assert g.same_map(f)
        assert type(g) is type(f)
    assert standard_knot("trefoil").to_dict()["kind"] == "embedded"
    assert standard_knot("immersed_trefoil").to_dict()["kind"] == "immersed"


def test_self_intersection_detected():
    pts = [(-1, 0, 0), (F(1, 2), 0, 0), (0, F(1, 2), 0), (0, -F(1, 2), 0), (F(3, 4), 0, 0), (1, 0, 0)]
    f = LongKnotPL(tuple(F(t) for t in (-1, -F(1, 2), -F(1, 4), 0, F(1, 4), 1)),
                   tuple(tuple(F(x) for x in p) for p in pts))
    assert not is_embedding_pl(f)


def test_unknot_reach_is_infinite():
    assert reach_estimate(_std()) == float("inf")


def test_perturbation_cap():
    f = standard_knot("trefoil")
    r = reach_estimate(f)
    g = perturb(f, seed=1, magnitude=r / 20)
    assert is_embedding_pl(g)
    with pytest.raises(ValueError):
        perturb(f, seed=1, magnitude=r / 5)


def test_mirror_and_push():
    f = standard_knot("trefoil")
    assert mirror(mirror(f)).same_map(f)
    g = push_into(f, 5)
    assert g.ambient_dim == 5 and is_embedding_pl(g)


def test_injectivity_proxy_catches_collision():
    dom = np.array([[0.0], [1.0]])
    assert not injectivity_proxy(dom, np.array([[0.0, 0.0], [0.0, 0.0]]), 0.5, 1e-3)
    assert injectivity_proxy(dom, np.array([[0.0, 0.0], [1.0, 0.0]]), 0.5, 1e-3)
