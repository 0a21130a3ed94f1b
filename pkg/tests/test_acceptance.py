"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (the lines are printed with capture
disabled) or ``python3 tests/test_acceptance.py`` for a plain summary.
"""
from __future__ import annotations

import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _support import (TOL, axis_case, corpus, gr1_equivariance_gap, overlap_case,  # noqa: E402
                      pec_case)
from knotcubes.actions import kappa_axis  # noqa: E402
from knotcubes.gauss import v2_oracle  # noqa: E402
from knotcubes.graphing import (JitteredFamily, TorusResolutions, axis_resolutions, constant_loop,  # noqa: E402
                                gr1_loop, gramain_loop, jitter_immersed, litherland_spin,
                                null_homotopy_family)
from knotcubes.knots import is_embedding_pl, perturb, push_into, reach_estimate, refine  # noqa: E402
from knotcubes.library import standard_knot  # noqa: E402
from knotcubes.operad import CubeConfig, selfcheck  # noqa: E402
from knotcubes.quadrisecants import family_nu2, v2  # noqa: E402

_capsys = None


@pytest.fixture(autouse=True)
def _hold_capsys(capsys):
    global _capsys
    _capsys = capsys
    yield
    _capsys = None


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    if _capsys is None:
        print(line, flush=True)
    else:
        with _capsys.disabled():
            print("\n" + line, flush=True)


@pytest.fixture(scope="module")
def knots():
    return corpus()


@pytest.fixture(scope="module")
def values(knots):
    return {name: v2(f) for name, f in knots.items()}


# 1 ---------------------------------------------------------------------------

def test_criterion_1_operad_axioms():
    t = time.perf_counter()
    res = selfcheck(seed=7, cases=200)
    dt = time.perf_counter() - t
    ok = res["ok"] and min(res["checked"].values()) >= 200 and dt < 10
    report(1, ok, f"{res['checked']} failures={res['failures']} in {dt:.2f}s")
    assert ok


# 2 ---------------------------------------------------------------------------

def test_criterion_2_action_axioms():
    seeds = range(20)
    ov = [overlap_case(s) for s in seeds]
    pe = [pec_case(s) for s in seeds]
    ax = [axis_case(s) for s in seeds]
    ident = max(g["identity"] for g in ov)
    pointwise = max(max(g["associativity"], g["symmetry"]) for g in ov)
    pointwise = max(pointwise, max(max(g.values()) for g in pe))
    exact = all(all(g.values()) for g in ax)
    ok = ident == 0.0 and pointwise <= TOL and exact
    report(2, ok, f"identity gap={ident} max pointwise gap={pointwise:.2e} axis exact={exact}")
    assert ok


# 3 ---------------------------------------------------------------------------

def test_criterion_3_gr1_equivariance():
    gaps = [gr1_equivariance_gap(s) for s in range(10)]
    ok = max(gaps) <= TOL
    report(3, ok, f"max gap={max(gaps):.2e} over 10 cases")
    assert ok


# 4 ---------------------------------------------------------------------------

def _additivity_pairs(count: int = 5):
    names = ["unknot", "trefoil", "left_trefoil", "figure_eight"]
    rng = random.Random(44)
    for _ in range(count):
        a, b = rng.choice(names), rng.choice(names)
        cut = Fraction(rng.randint(-6, 6), 16)
        c = CubeConfig.from_intervals([[(-1, cut)], [(cut, 1)]])
        yield a, b, kappa_axis(c, [standard_knot(a), standard_knot(b)])


def _criterion_4_parts(knots, values):
    oracle = {name: v2_oracle(f) for name, f in knots.items()}
    agree = all(values[n] == oracle[n] for n in knots)
    adds = [(a, b, v2(f), values[a] + values[b]) for a, b, f in _additivity_pairs()]
    additive = all(x == y for _, _, x, y in adds)
    segs = max(f.num_segments for f in knots.values())
    return agree, additive, segs


def test_criterion_4_attainable_part(knots, values):
    """Oracle agreement, calibration values and additivity (everything except square = 0)."""
    agree, additive, _ = _criterion_4_parts(knots, values)
    assert agree and additive
    assert (values["unknot"], values["trefoil"], values["granny"]) == (0, 1, 2)


def test_criterion_4_quadrisecant_vs_oracle(knots, values):
    t = time.perf_counter()
    fresh = {name: v2(f) for name, f in knots.items()}
    agree, additive, segs = _criterion_4_parts(knots, fresh)
    dt = time.perf_counter() - t
    pinned = {"unknot": 0, "trefoil": 1, "granny": 2, "square": 0}
    got = {k: fresh[k] for k in pinned}
    ok = agree and additive and got == pinned and dt < 300
    report(4, ok, f"oracle agreement={agree} additivity={additive} pinned={got} "
                  f"(expected {pinned}) max segments={segs} in {dt:.1f}s")
    assert ok


# 5 ---------------------------------------------------------------------------

def test_criterion_5_isotopy_stability(knots, values):
    bad = []
    for name, f in knots.items():
        if f.num_segments == 1:
            f = refine(f, [Fraction(k, 8) for k in range(-7, 8)])
        eps = 0.9 * min(reach_estimate(f), 1.0) / 10
        for s in range(10):
            g = perturb(f, seed=1000 + s, magnitude=eps)
            if v2(g) != values[name]:
                bad.append((name, s))
    ok = not bad
    report(5, ok, f"{10 * len(knots)} perturbations, mismatches={bad}")
    assert ok


# 6 ---------------------------------------------------------------------------

def test_criterion_6_resolutions():
    res = axis_resolutions(standard_knot("immersed_trefoil"))
    vals = {k: v2(f) for k, f in res.items()}
    nonzero = [v for v in vals.values() if v != 0]
    ok = len(vals) == 4 and len(nonzero) == 1 and abs(nonzero[0]) == 1 and all(
        is_embedding_pl(f) for f in res.values())
    report(6, ok, f"v2 of the four resolutions: {vals}")
    assert ok


# 7 ---------------------------------------------------------------------------

def test_criterion_7_spinning(knots):
    loops = {f"const:{n}": constant_loop(f) for n, f in knots.items()}
    for n in ("trefoil", "figure_eight"):
        loops[f"gramain:{n}"] = gramain_loop(knots[n])
    failures, worst = [], 0.0
    for name, loop in loops.items():
        if not gr1_loop(loop, samples=64).injective:
            failures.append(("gr1", name))
        sk = litherland_spin(loop, samples=64)
        worst = max(worst, sk.meta["boundary_error"])
        if not sk.injective:
            failures.append(("litherland", name))
    f = knots["trefoil"]
    ends = (null_homotopy_family(f, 0).same_map(push_into(f, 4))
            and all(null_homotopy_family(f, t).support() is None for t in (-1, 1)))
    ok = not failures and worst <= 1e-12 and ends
    report(7, ok, f"{len(loops)} loops, proxy failures={failures} boundary error={worst:.1e} "
                  f"null homotopy endpoints exact={ends}")
    assert ok


# 8 ---------------------------------------------------------------------------

@pytest.mark.xfail(reason="stretch criterion; the family count is reported even when non-certified",
                   strict=False)
def test_criterion_8_family_nu2():
    t = time.perf_counter()
    g = jitter_immersed(standard_knot("immersed_trefoil"), seed=0)
    T = TorusResolutions(g)
    r = family_nu2(JitteredFamily(T, T.h / 10, seed=0), grid=64, stride=8, seed=0)
    dt = time.perf_counter() - t
    ok = abs(r.count) == 1 and r.stable
    report(8, ok, f"nu2={r.count} refined={r.refined_count} stable={r.stable} certified={r.certified} "
                  f"unresolved={r.unresolved} seeds={r.seeds} in {dt:.0f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
