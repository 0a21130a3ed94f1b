from fractions import Fraction

import numpy as np
import pytest

from _support import TOL, gr1_equivariance_gap
from knotcubes.geometry import DimensionError
from knotcubes.gauss import v2_oracle
from knotcubes.graphing import (KnotLoop, LoopError, P2, SampledTubeLoop, TorusResolutions, axis_resolutions,
                                constant_loop, gr1_loop, gr1_tube, gr_i, gramain_loop, litherland_spin,
                                nested_family, null_homotopy_family, resolution_family)
from knotcubes.knots import is_embedding_pl, push_into
from knotcubes.library import standard_knot
from knotcubes.profiles import bump, smooth_step, smoothing_profiles, wet_blanket
from knotcubes.quadrisecants import v2
from knotcubes.tubes import IdentityTube, TwistTube, random_tube_points


@pytest.fixture(scope="module")
def trefoil():
    return standard_knot("trefoil")


def test_constant_loop_gives_product(trefoil):
    sk = gr1_loop(constant_loop(trefoil))
    assert sk.injective
    T = np.array([[0.3, -0.2], [-2.0, 0.5]])
    from knotcubes.knots import eval_knot

    Y = sk(T)
    assert np.allclose(Y[:, 0], T[:, 0])
    assert np.allclose(Y[:, 1:], eval_knot(trefoil, T[:, 1]))


def test_unknot_loop_is_standard():
    sk = gr1_loop(constant_loop(standard_knot("unknot")))
    assert sk.standard_outside and sk.injective
    std = np.zeros_like(sk.images)
    std[:, :2] = sk.grid
    assert np.array_equal(sk.images, std)


def test_gramain_loop_spins_to_embedded_2knot(trefoil):
    sk = gr1_loop(gramain_loop(trefoil))
    assert sk.ambient_dim == 4 and sk.domain_dim == 2
    assert sk.injective


def test_unbased_loop_rejected(trefoil):
    loop = KnotLoop([(-1.0, standard_knot("unknot")), (1.0, trefoil)], standard_knot("unknot"))
    with pytest.raises(LoopError):
        gr1_loop(loop)


def test_loop_json_roundtrip(trefoil):
    loop = gramain_loop(trefoil, samples=5)
    back = KnotLoop.from_dict(loop.to_dict())
    assert all(a.same_map(b) for (_, a), (_, b) in zip(loop.entries, back.entries))


def test_gr_i_reduces_and_guards(trefoil):
    loop = gramain_loop(trefoil, samples=9)
    a = gr1_loop(loop, samples=16)
    b = gr_i(loop, 1, samples=16)
    assert np.array_equal(a.images, b.images)
    with pytest.raises(DimensionError):
        gr_i(loop, 1, samples=64, cap=1000)


def test_constant_two_parameter_family_is_standard():
    u = standard_knot("unknot")
    fam = nested_family(lambda s1, s2: u, [np.linspace(-1, 1, 3)] * 2, u)
    sk = gr_i(fam, 2, samples=12)
    std = np.zeros_like(sk.images)
    std[:, :3] = sk.grid
    assert np.array_equal(sk.images, std) and sk.injective


def test_tube_loop_must_be_based():
    with pytest.raises(LoopError):
        SampledTubeLoop([(-1.0, TwistTube(1, 2, 1.0)), (1.0, IdentityTube(1, 2))])


def test_constant_tube_loop_gives_product():
    E = TwistTube(1, 2, 1.5)
    loop = SampledTubeLoop([(-1.0, IdentityTube(1, 2)), (-0.5, E), (0.5, E), (1.0, IdentityTube(1, 2))])
    G = gr1_tube(loop)
    X = random_tube_points(2, 2, 200, seed=0, extent=0.5)
    assert np.allclose(G(X)[:, 1:], E(X[:, 1:]))


@pytest.mark.parametrize("seed", range(5))
def test_gr1_equivariance(seed):
    assert gr1_equivariance_gap(seed) <= TOL


def test_P2_at_seam():
    assert np.allclose(P2(1.0, 0.5), [-(0.5 + 2) / 3, 0.0])


def test_litherland_constant_unknot_is_planar():
    sk = litherland_spin(constant_loop(standard_knot("unknot")))
    assert sk.injective
    assert np.abs(sk.images[:, 2:]).max() == 0
    assert sk.meta["boundary_error"] <= 1e-12


def test_litherland_trefoil(trefoil):
    sk = litherland_spin(constant_loop(trefoil))
    assert sk.injective
    assert sk.meta["boundary_error"] <= 1e-12 and sk.meta["seam_error"] <= 1e-9


def test_litherland_needs_closed_loop(trefoil):
    loop = KnotLoop([(-1.0, trefoil), (1.0, standard_knot("figure_eight"))])
    with pytest.raises(LoopError):
        litherland_spin(loop)


def test_axis_resolutions_one_trefoil():
    res = axis_resolutions(standard_knot("immersed_trefoil"))
    vals = {k: v2(f) for k, f in res.items()}
    assert sorted(vals.values()) == [0, 0, 0, 1]
    assert all(v2_oracle(f) == vals[k] for k, f in res.items())
    assert all(is_embedding_pl(f) for f in res.values())


def test_resolution_direction_validated():
    g = standard_knot("immersed_trefoil")
    t = g.tangent(g.double_points[0][0])
    good = axis_resolutions(g)
    assert good
    with pytest.raises(ValueError):
        resolution_family(g, t, np.array([0.0, 0.0, 1.0]))


def test_torus_family_embedded():
    T = TorusResolutions(standard_knot("immersed_trefoil"))
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    assert all(is_embedding_pl(T(a, b)) for a in th for b in th)


def test_null_homotopy_endpoints(trefoil):
    assert null_homotopy_family(trefoil, 0).same_map(push_into(trefoil, 4))
    for t in (1, -1):
        assert null_homotopy_family(trefoil, t).support() is None
    for t in (Fraction(1, 6), Fraction(1, 2), Fraction(-5, 6)):
        assert is_embedding_pl(null_homotopy_family(trefoil, t))
    with pytest.raises(ValueError):
        null_homotopy_family(trefoil, 2)


def test_profiles():
    from scipy.integrate import quad

    assert bump(np.array([1.0, -1.0, 2.0])).max() == 0
    assert abs(quad(lambda x: float(bump(np.array([x]))[0]), -1, 1)[0] - 1) < 1e-9
    xs = np.linspace(-1, 1, 41)
    assert np.allclose(bump(xs), bump(-xs), atol=1e-12, rtol=0)
    assert wet_blanket(np.array([-0.5]))[0] == -0.5
    assert abs(wet_blanket(np.array([1.0]))[0] - 0.5) < 1e-12
    assert abs(wet_blanket(np.array([0.999]))[0] - 0.5) < 1e-9
    assert smooth_step(np.array([-1.0]))[0] == 0 and smooth_step(np.array([1.0]))[0] == 1
    fn, table = smoothing_profiles("wet_blanket", samples=11)
    assert table.shape == (11, 2)
    with pytest.raises(ValueError):
        smoothing_profiles("nope")
