import random
from fractions import Fraction

import numpy as np
import pytest

from _support import TOL, axis_case, overlap_case, pec_case
from knotcubes.actions import (disjoint_support_compose, kappa_axis, kappa_overlap, kappa_pec,
                               pec_face_config, scale_knot)
from knotcubes.geometry import CAutElement, DimensionError
from knotcubes.gauss import v2_oracle
from knotcubes.knots import KnotError, is_embedding_pl
from knotcubes.library import standard_knot
from knotcubes.operad import CubeConfig, random_config
from knotcubes.pec import FaceMismatchError, PECFromEC, PECSuspension, check_face, restrict_face
from knotcubes.tubes import (IdentityTube, KnotTube, TubeDomainError, TwistTube, conjugate,
                             knot_from_tube, random_tube_points, tube_from_knot, tube_injective,
                             with_collars)

halves = CubeConfig.from_intervals([[(-1, 0)], [(0, 1)]])


def test_tube_core_roundtrip():
    f = standard_knot("trefoil")
    E = tube_from_knot(f)
    g = knot_from_tube(E)
    ts = np.linspace(-1, 1, 400)
    from knotcubes.knots import eval_knot

    assert np.abs(eval_knot(f, ts) - eval_knot(g, ts)).max() < 1e-12


def test_tube_is_identity_outside_cube():
    E = tube_from_knot(standard_knot("figure_eight"))
    X = random_tube_points(1, 2, 500, seed=1, extent=3)
    out = np.abs(X[:, 0]) >= 1
    assert np.array_equal(E(X)[out], X[out])


def test_tube_injective_and_radius_bounds():
    f = standard_knot("trefoil")
    E = tube_from_knot(f)
    assert tube_injective(E)
    with pytest.raises(ValueError):
        tube_from_knot(f, radius=10.0)


def test_unknot_tube_is_identity():
    assert isinstance(tube_from_knot(standard_knot("unknot")), IdentityTube)


def test_collars_required():
    f = kappa_axis(CubeConfig.from_intervals([[(-1, 1)]]), [standard_knot("trefoil")])
    g = with_collars(f)
    assert is_embedding_pl(g)
    KnotTube(g, 0.001)


def test_twist_rejects_points_outside_disc():
    T = TwistTube(1, 2, 1.0)
    with pytest.raises(TubeDomainError):
        T(np.array([[0.0, 1.5, 0.0]]))


def test_conjugation_places_tube_in_cube():
    E = tube_from_knot(standard_knot("trefoil"))
    L = CAutElement.from_pairs([(Fraction(1, 2), Fraction(1, 2))])
    C = conjugate(L, E)
    X = random_tube_points(1, 2, 400, seed=3)
    outside = X[:, 0] <= 0
    assert np.array_equal(C(X)[outside], X[outside])
    assert np.abs(C(X) - X).max() > 0.01


def test_scale_knot_similarity():
    f = scale_knot(CAutElement.from_pairs([(Fraction(1, 2), Fraction(-1, 2))]), standard_knot("trefoil"))
    assert is_embedding_pl(f)
    assert f.support()[1] <= 0


def test_axis_action_is_connected_sum():
    f = kappa_axis(halves, [standard_knot("trefoil"), standard_knot("trefoil")])
    assert v2_oracle(f) == 2


def test_axis_action_unit_is_exact():
    f = standard_knot("figure_eight")
    assert kappa_axis(CubeConfig.identity(1), [f]).same_map(f)


def test_overlapping_supports_rejected():
    f = standard_knot("trefoil")
    with pytest.raises(KnotError):
        disjoint_support_compose(f, f)


def test_axis_action_rejects_immersed():
    with pytest.raises(KnotError):
        kappa_axis(CubeConfig.identity(1), [standard_knot("immersed_trefoil")])


def test_overlap_action_dimension_check():
    with pytest.raises(DimensionError):
        kappa_overlap(random_config(random.Random(0), 3, 1), [TwistTube(1, 2, 1.0)])


def test_nullary_actions_are_identity():
    X = random_tube_points(1, 2, 50, seed=0)
    assert np.array_equal(kappa_overlap(CubeConfig(2), [], k=2)(X), X)
    with pytest.raises(ValueError):
        kappa_overlap(CubeConfig(2), [])


@pytest.mark.parametrize("seed", range(8))
def test_overlap_axioms(seed):
    gaps = overlap_case(seed)
    assert gaps["identity"] == 0.0
    assert gaps["associativity"] <= TOL and gaps["symmetry"] <= TOL


@pytest.mark.parametrize("seed", range(8))
def test_pec_axioms_and_face(seed):
    gaps = pec_case(seed)
    assert max(gaps.values()) <= TOL


@pytest.mark.parametrize("seed", range(8))
def test_axis_axioms(seed):
    assert all(axis_case(seed).values())


def test_suspension_face_and_bottom():
    g = TwistTube(1, 2, 2.0)
    P = PECSuspension(g)
    assert check_face(P) <= 1e-12
    X = random_tube_points(2, 2, 200, seed=4)
    X[:, 0] = -1.0 - np.abs(X[:, 0])
    assert np.array_equal(P(X), X)


def test_face_mismatch_detected():
    class Liar(PECSuspension):
        def face(self):
            return IdentityTube(1, 2)

    with pytest.raises(FaceMismatchError):
        restrict_face(Liar(TwistTube(1, 2, 2.0)))


def test_face_config_swaps_first_factor():
    c = random_config(random.Random(2), 2, 2)
    d = pec_face_config(c)
    for L, M in zip(c.cubes, d.cubes):
        assert M.factors == L.factors[1:] + L.factors[:1]
    ps = [PECFromEC(TwistTube(2, 2, 1.0)), PECSuspension(TwistTube(1, 2, -1.0))]
    assert check_face(kappa_pec(c, ps)) <= 1e-9
