"""Command-line entry point: ``knotcubes <command> ...``.

Exit codes: 0 success, 1 computational failure, 2 usage or input error.
Every JSON report carries the run configuration, the library version and a
timestamp; apart from the timestamp, equal inputs give equal reports.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .geometry import AffineInc, LittleCube
from .actions import ActionError
from .gauss import ProjectionError, v2_oracle
from .knots import ImmersedKnotPL, KnotError, LongKnotPL, is_embedding_pl, knot_from_dict
from .library import KNOT_NAMES, standard_knot
from .operad import CubeConfig, selfcheck
from .quadrisecants import DegeneracyError, default_threads, enumerate_alternating_quadrisecants

log = logging.getLogger("knotcubes")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    threads: int = 1
    samples: int = 64
    collinearity_tol: float = 1e-10
    delta: float | None = None
    eps: float | None = None
    json: bool = False

    def __post_init__(self):
        for name in ("collinearity_tol", "delta", "eps"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise UsageError(f"{name} must be positive")
        if self.samples < 2 or self.threads < 1:
            raise UsageError("samples must be >= 2 and threads >= 1")


def _report(cfg: RunConfig, command: str, payload: dict) -> dict:
    out = {"command": command, "version": __version__, "config": asdict(cfg),
           "timestamp": datetime.now(timezone.utc).isoformat()}
    out.update(payload)
    return out


def _emit(cfg: RunConfig, report: dict, text: str | None = None) -> None:
    if cfg.json or text is None:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(text)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}")


def _load_knot(args) -> LongKnotPL:
    if getattr(args, "name", None):
        if args.name not in KNOT_NAMES:
            raise UsageError(f"unknown knot {args.name!r}; try 'knot list'")
        return standard_knot(args.name)
    if getattr(args, "input", None):
        return knot_from_dict(_read_json(args.input))
    raise UsageError("give --name or --input")


def _knot_obj(f: LongKnotPL) -> str:
    lines = [f"v {' '.join(f'{float(x):.12g}' for x in p[:3])}" for p in f.points]
    lines.append("l " + " ".join(str(i + 1) for i in range(len(f.points))))
    return "\n".join(lines) + "\n"


def _grid_obj(images, samples: int) -> str:
    # images are row-major over a samples x samples grid; drop coordinates beyond the third
    lines = [f"v {' '.join(f'{x:.9g}' for x in row[:3])}" for row in images]
    for i in range(samples - 1):
        for j in range(samples - 1):
            p = i * samples + j + 1
            lines.append(f"f {p} {p + 1} {p + samples + 1} {p + samples}")
    return "\n".join(lines) + "\n"


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


# --- commands ------------------------------------------------------------------

def cmd_knot(args, cfg):
    if args.action == "list":
        rows = [{"name": n, "kind": "immersed" if isinstance(standard_knot(n), ImmersedKnotPL) else "embedded",
                 "segments": standard_knot(n).num_segments} for n in KNOT_NAMES]
        _emit(cfg, _report(cfg, "knot list", {"knots": rows}),
              "\n".join(f"{r['name']:18s} {r['kind']:9s} {r['segments']} segments" for r in rows))
        return 0
    f = _load_knot(args)
    if args.action == "show":
        d = f.to_dict()
        _emit(cfg, _report(cfg, "knot show", {"knot": d}),
              f"{f.name or 'knot'}: {d['kind']}, R^{f.ambient_dim}, {f.num_segments} segments, support {f.support()}")
        return 0
    if not args.out:
        raise UsageError("knot export needs --out")
    if args.out.endswith(".obj"):
        _write(args.out, _knot_obj(f))
    else:
        _write(args.out, json.dumps(f.to_dict(), indent=2))
    _emit(cfg, _report(cfg, "knot export", {"out": args.out, "kind": f.to_dict()["kind"]}), f"wrote {args.out}")
    return 0


def _halves(count: int) -> CubeConfig:
    step = Fraction(2, count) if count else Fraction(1)
    cubes = [LittleCube((AffineInc(step / 2, -1 + step / 2 + i * step),)) for i in range(count)]
    return CubeConfig(1, tuple(cubes))


def cmd_compose(args, cfg):
    from .actions import kappa_axis

    knots = [knot_from_dict(_read_json(p)) for p in args.inputs]
    c = CubeConfig.from_dict(_read_json(args.config)) if args.config else _halves(len(knots))
    f = kappa_axis(c, knots)
    if args.out:
        _write(args.out, json.dumps(f.to_dict(), indent=2))
    _emit(cfg, _report(cfg, "compose", {"knot": f.to_dict(), "config_cubes": c.to_dict(), "out": args.out}),
          f"composed {len(knots)} knots into {f.num_segments} segments" + (f"; wrote {args.out}" if args.out else ""))
    return 0


def cmd_spin(args, cfg):
    from .graphing import KnotLoop, gr1_loop, gramain_loop, litherland_spin

    if args.loop:
        loop = KnotLoop.from_dict(_read_json(args.loop))
    elif args.gramain:
        loop = gramain_loop(standard_knot(args.gramain))
    else:
        raise UsageError("give --loop or --gramain")
    spin = gr1_loop if args.method == "gr1" else litherland_spin
    sk = spin(loop, samples=cfg.samples, eps=cfg.eps)
    summary = {"method": args.method, "domain_dim": sk.domain_dim, "ambient_dim": sk.ambient_dim,
               "injective": sk.injective, "standard_outside": sk.standard_outside,
               "meta": sk.meta, "out": args.out}
    if args.out:
        if args.out.endswith(".obj"):
            _write(args.out, _grid_obj(sk.images, cfg.samples))
        else:
            _write(args.out, json.dumps(_report(cfg, "spin", {"spun": sk.to_dict()}), sort_keys=True))
    _emit(cfg, _report(cfg, "spin", summary),
          f"{args.method}: R^{sk.domain_dim} -> R^{sk.ambient_dim}, injectivity proxy {'passed' if sk.injective else 'FAILED'}")
    return 0 if sk.injective else 1


def cmd_v2(args, cfg):
    f = _load_knot(args)
    if args.method == "gauss":
        val = v2_oracle(f, seed=cfg.seed, directions=3)
        payload = {"v2": val, "method": "gauss", "quadrisecants": [], "perturbation_seed": cfg.seed,
                   "perturbations": []}
    else:
        e = enumerate_alternating_quadrisecants(f, seed=cfg.seed, threads=cfg.threads)
        payload = {"v2": e.v2, "method": "quadrisecant",
                   "quadrisecants": [q.to_dict() for q in e.quadrisecants],
                   "perturbation_seed": cfg.seed, "perturbations": e.perturbations}
    _emit(cfg, _report(cfg, "v2", payload), f"v2 = {payload['v2']}")
    return 0


def cmd_quadsec(args, cfg):
    f = _load_knot(args)
    e = enumerate_alternating_quadrisecants(f, seed=cfg.seed, threads=cfg.threads, prune=not args.no_prune)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t1", "t2", "t3", "t4", "sign", "residual"])
            for q in e.quadrisecants:
                w.writerow([repr(float(x)) for x in q.t] + [q.sign, repr(float(q.residual))])
    payload = {"count": len(e.quadrisecants), "v2": e.v2, "perturbations": e.perturbations,
               "quadrisecants": [q.to_dict() for q in e.quadrisecants], "csv": args.csv}
    _emit(cfg, _report(cfg, "quadsec enumerate", payload),
          f"{len(e.quadrisecants)} alternating quadrisecants, signed count {e.v2}")
    return 0


def cmd_family(args, cfg):
    from .graphing import ConstantFamily, JitteredFamily, TorusResolutions, jitter_immersed
    from .quadrisecants import family_nu2

    if args.constant:
        fam = ConstantFamily(knot_from_dict(_read_json(args.constant)))
    else:
        g = knot_from_dict(_read_json(args.input)) if args.input else standard_knot("immersed_trefoil")
        if not isinstance(g, ImmersedKnotPL) or len(g.double_points) != 2:
            raise UsageError("the resolution family needs an immersed knot with two double points")
        if not args.no_jitter:
            g = jitter_immersed(g, seed=cfg.seed)
        fam = TorusResolutions(g)
        if not args.no_jitter:
            fam = JitteredFamily(fam, fam.h / 10, seed=cfg.seed)
    r = family_nu2(fam, grid=args.grid, stride=args.stride, seed=cfg.seed, threads=cfg.threads,
                   refine=not args.no_refine)
    _emit(cfg, _report(cfg, "family-nu2", r.to_dict()),
          f"nu2 = {r.count} (stable: {r.stable}, certified: {r.certified})")
    return 0


def cmd_operad(args, cfg):
    res = selfcheck(seed=cfg.seed, cases=args.cases)
    _emit(cfg, _report(cfg, "operad selfcheck", res),
          f"{'ok' if res['ok'] else 'FAILED'}: {res['cases']} cases, failures {res['failures']}")
    return 0 if res["ok"] else 1


def cmd_validate(args, cfg):
    d = _read_json(args.input)
    if "entries" in d:
        from .graphing import KnotLoop

        loop = KnotLoop.from_dict(d)
        checks = {"kind": "loop", "based": loop.is_based(), "closed": loop.is_closed(),
                  "entries_embedded": all(is_embedding_pl(f) for _, f in loop.entries)}
        ok = checks["entries_embedded"]
    else:
        try:
            f = knot_from_dict(d)
        except (KnotError, ValueError) as exc:
            _emit(cfg, _report(cfg, "validate", {"valid": False, "error": str(exc)}), f"invalid: {exc}")
            return 1
        kind = "immersed" if isinstance(f, ImmersedKnotPL) and f.double_points else "embedded"
        emb = True if kind == "immersed" else is_embedding_pl(f)
        checks = {"kind": kind, "embedded": emb, "segments": f.num_segments}
        ok = emb
    _emit(cfg, _report(cfg, "validate", {"valid": ok, **checks}), "valid" if ok else "INVALID")
    return 0 if ok else 1


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $KNOTCUBES_THREADS or 1)")
    common.add_argument("--samples", type=int, default=64)
    common.add_argument("--collinearity-tol", type=float, default=1e-10)
    common.add_argument("--delta", type=float, default=None)
    common.add_argument("--eps", type=float, default=None)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="knotcubes", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("knot", parents=[common], help="library knots")
    k.add_argument("action", choices=["list", "show", "export"])
    k.add_argument("--name")
    k.add_argument("--input")
    k.add_argument("--out")
    k.set_defaults(func=cmd_knot)

    c = sub.add_parser("compose", parents=[common], help="connected sum by the axis action")
    c.add_argument("--inputs", nargs="+", required=True)
    c.add_argument("--config", help="cube configuration JSON (default: equal intervals)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compose)

    s = sub.add_parser("spin", parents=[common], help="graphing or Litherland spinning of a loop")
    s.add_argument("--method", choices=["gr1", "litherland"], required=True)
    s.add_argument("--loop")
    s.add_argument("--gramain", help="use the rotation loop of a library knot")
    s.add_argument("--out")
    s.set_defaults(func=cmd_spin)

    v = sub.add_parser("v2", parents=[common], help="type-2 invariant")
    v.add_argument("--input")
    v.add_argument("--name")
    v.add_argument("--method", choices=["quadrisecant", "gauss"], default="quadrisecant")
    v.set_defaults(func=cmd_v2)

    q = sub.add_parser("quadsec", parents=[common], help="alternating quadrisecants")
    q.add_argument("action", choices=["enumerate"])
    q.add_argument("--input")
    q.add_argument("--name")
    q.add_argument("--csv")
    q.add_argument("--no-prune", action="store_true")
    q.set_defaults(func=cmd_quadsec)

    f = sub.add_parser("family-nu2", parents=[common], help="signed count over the resolution torus in R^4")
    f.add_argument("--input", help="immersed knot JSON (default: immersed_trefoil)")
    f.add_argument("--constant", help="knot JSON for a constant family instead")
    f.add_argument("--grid", type=int, default=64)
    f.add_argument("--stride", type=int, default=8)
    f.add_argument("--no-jitter", action="store_true")
    f.add_argument("--no-refine", action="store_true")
    f.set_defaults(func=cmd_family)

    o = sub.add_parser("operad", parents=[common], help="operad axiom checks")
    o.add_argument("action", choices=["selfcheck"])
    o.add_argument("--cases", type=int, default=200)
    o.set_defaults(func=cmd_operad)

    val = sub.add_parser("validate", parents=[common], help="validate a knot or loop JSON file")
    val.add_argument("--input", required=True)
    val.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(seed=args.seed, threads=args.threads or default_threads(), samples=args.samples,
                        collinearity_tol=args.collinearity_tol, delta=args.delta, eps=args.eps,
                        json=args.json)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"knotcubes: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (DegeneracyError, ProjectionError, KnotError, ActionError) as exc:
        print(f"knotcubes: computation failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"knotcubes: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
