"""Command-line entry point: ``bakerlab <subcommand> [options]``.

Exit codes: 0 success, 2 invalid input or configuration, 3 a mathematical
check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, resolve
from .params import ParamsError

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 2, 3

FAMILY_MAPS = {"fatou": "fatou", "theorem1": "h1", "theorem2": "h2"}


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def artifact(cfg: RunConfig, command: str, result) -> str:
    doc = {"command": command, "config": cfg.to_dict(), "version": __version__,
           "result": result}
    doc = json.loads(json.dumps(doc, default=_json_default))
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


class Runner:
    def __init__(self, cfg: RunConfig, quiet: bool = False):
        self.cfg = cfg
        self.quiet = quiet
        try:
            os.makedirs(cfg.out, exist_ok=True)
        except OSError as e:
            raise UsageError(f"cannot create output directory {cfg.out!r}: {e}")
        if not os.access(cfg.out, os.W_OK):
            raise UsageError(f"output directory {cfg.out!r} is not writable")

    def write(self, name: str, text: str, mode: str = "w"):
        path = os.path.join(self.cfg.out, name)
        with open(path, mode) as fh:
            fh.write(text)
        return path

    def say(self, msg: str):
        if not self.quiet:
            print(msg)


def _map_for(cfg: RunConfig):
    from .maps import named_map
    name = cfg.map or FAMILY_MAPS.get(cfg.family, "h1")
    if name in ("fatou", "h2", "g2"):
        return named_map(name)
    return named_map(name, cfg.params())


def _policy(cfg: RunConfig, m):
    from .dynamics import EscapePolicy, default_policy
    base = default_policy(m)
    thr = cfg.escape_threshold if cfg.escape_threshold is not None else base.threshold
    return EscapePolicy(base.direction, thr, cfg.consecutive, cfg.modulus_cap)


# ---------------------------------------------------------------- commands

def cmd_orbit(r: Runner, args) -> int:
    from .dynamics import iterate, orbit_with_distances
    cfg = r.cfg
    m = _map_for(cfg)
    pol = _policy(cfg, m)
    n = cfg.n_max or 50
    if args.distances:
        rec = orbit_with_distances(m, args.z0, n, pol, cfg.directions)
    else:
        rec = iterate(m, args.z0, n, pol, stop_on_escape=not args.full)
    path = r.write("orbit.csv", rec.to_csv())
    r.say(f"{m.name}: {len(rec.points)} points, terminated={rec.terminated} -> {path}")
    return EXIT_OK


def cmd_classify(r: Runner, args) -> int:
    from .dynamics import koenig_classify
    cfg = r.cfg
    m = _map_for(cfg)
    v = koenig_classify(m, None, cfg.n_max, _policy(cfg, m), eps=cfg.eps,
                        tail_fraction=cfg.tail_fraction, beta_start=cfg.beta_start,
                        min_orbit=cfg.min_orbit, directions=cfg.directions)
    r.write("classify.json", artifact(cfg, "classify", v.to_dict()))
    r.say(v.verdict)
    return EXIT_OK


def cmd_qr_check(r: Runner, args) -> int:
    from .qrcheck import verify_interpolation_bounds
    cfg = r.cfg
    rep = verify_interpolation_bounds(cfg.params(), cfg.grid_density, cfg.span)
    r.write("qr_check.json", artifact(cfg, "qr-check", rep.to_dict()))
    r.say(f"bound_satisfied={str(rep.bound_satisfied).lower()} max_K={rep.max_K:.6g} "
          f"margin={rep.margin:.6g}")
    return EXIT_OK if rep.bound_satisfied else EXIT_CHECK


def cmd_metric(r: Runner, args) -> int:
    from .hypmetric import ladder_csv, w_triple_ladder
    cfg = r.cfg
    p = cfg.params()
    kw = {"delta": cfg.delta, "x2": cfg.x2}
    if cfg.y1 is not None:
        kw["y1"] = cfg.y1
    reps = w_triple_ladder(p, cfg.x_ladder, **kw)
    r.write("metric.csv", ladder_csv(reps))
    r.write("metric.json", artifact(cfg, "metric", [x.to_dict() for x in reps]))
    ok = all(x.in_disk for x in reps)
    r.say(ladder_csv(reps).rstrip())
    return EXIT_OK if ok else EXIT_CHECK


def cmd_distortion(r: Runner, args) -> int:
    from .distortion import M_K
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["K", "x", "M_K"])
    for K in args.K:
        for x in args.x:
            wr.writerow([repr(float(K)), repr(float(x)), repr(M_K(K, x))])
    r.write("distortion.csv", buf.getvalue())
    if not r.quiet:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_render(r: Runner, args) -> int:
    from .render import GridSpec, render_escape, render_siegel
    cfg = r.cfg
    grid = GridSpec(complex(*cfg.center), cfg.width, cfg.height, cfg.px_w, cfg.px_h)
    if cfg.map == "siegel":
        img = render_siegel(cfg.params(), grid, cfg.render_n_max, threads=cfg.threads)
    else:
        m = _map_for(cfg)
        img = render_escape(m, grid, cfg.render_n_max, _policy(cfg, m), threads=cfg.threads)
    name = args.name or "render"
    r.write(name + ".ppm", img.ppm_bytes(), mode="wb")
    side = img.sidecar()
    side["config"] = cfg.to_dict()
    r.write(name + ".json", json.dumps(_clean(side), sort_keys=True, indent=2) + "\n")
    r.say(f"{img.meta['map']}: {grid.px_w}x{grid.px_h} -> {os.path.join(cfg.out, name)}.ppm")
    return EXIT_OK


def cmd_params_search(r: Runner, args) -> int:
    from .qrcheck import SearchExhausted, SearchTargets, search_admissible_params
    cfg = r.cfg
    fam = "theorem2" if cfg.family == "theorem2" else "theorem1"
    base = cfg.params() if cfg.family in ("theorem1", "theorem2") else None
    t = SearchTargets(margin=cfg.margin, grid_density=min(cfg.grid_density, 200),
                      growth_samples=cfg.growth_samples, span=cfg.span, seed=cfg.seed, base=base)
    try:
        p = search_admissible_params(fam, t)
    except SearchExhausted as e:
        r.write("params_search.json", artifact(cfg, "params-search",
                                               {"found": None, "log": t.log}))
        r.say(str(e))
        return EXIT_CHECK
    r.write("params_search.json", artifact(cfg, "params-search",
                                           {"found": p.to_dict(), "log": t.log}))
    r.say(json.dumps(p.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_univalence(r: Runner, args) -> int:
    from .maps import named_map
    from .univalence import (collision_search, critical_points_h1, critical_points_k1,
                             landau_bound_check, non_univalence_witnessed)
    cfg = r.cfg
    p = cfg.params()
    crit = critical_points_k1(p)
    xs = args.x if args.x else [2 * p.L + 10]
    landau = landau_bound_check(p, xs)
    coll = collision_search(named_map("h1", p), critical_points_h1([0]))
    result = {
        "critical_points_k1": [[z.real, z.imag] for z in crit],
        "critical_branches": crit.branches, "failed_branches": crit.failed,
        "landau": landau.to_dict(),
        "collisions": [c.to_dict() for c in coll],
        "non_univalence_witnessed": non_univalence_witnessed(coll),
    }
    r.write("univalence.json", artifact(cfg, "univalence", result))
    ok = landau.all_value_bounds and landau.all_derivative_bounds and len(coll) > 0
    r.say(f"critical points: {len(crit)}, collisions: {len(coll)}, "
          f"landau ok: {str(landau.all_value_bounds and landau.all_derivative_bounds).lower()}")
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "orbit": cmd_orbit, "classify": cmd_classify, "qr-check": cmd_qr_check,
    "metric": cmd_metric, "distortion": cmd_distortion, "render": cmd_render,
    "params-search": cmd_params_search, "univalence": cmd_univalence,
}


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="TOML config file")
    g.add_argument("--out", help="output directory")
    g.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    g.add_argument("--seed", type=int)
    g.add_argument("--family", choices=["theorem1", "theorem2", "fatou"])
    g.add_argument("--map", help="map name (fatou, h1, k1, g1, h2, k2, g2, F; render: siegel)")
    g.add_argument("--alpha", type=float)
    g.add_argument("--m", type=int)
    g.add_argument("--x1", type=float)
    g.add_argument("--L", type=float)
    g.add_argument("--M", type=int)
    g.add_argument("--x0", type=float)
    g.add_argument("--k2-variant", dest="k2_variant", choices=["literal", "rotated"])
    g.add_argument("--n-max", dest="n_max", type=int)
    g.add_argument("--eps", type=float)
    g.add_argument("--grid-density", dest="grid_density", type=int)
    g.add_argument("--quiet", action="store_true")

    ap = argparse.ArgumentParser(prog="bakerlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"bakerlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", parents=[common], help="iterate one orbit, write CSV")
    p.add_argument("--z0", type=parse_complex, required=True)
    p.add_argument("--distances", action="store_true", help="estimate d_n and ratios")
    p.add_argument("--full", action="store_true", help="do not stop at escape")

    sub.add_parser("classify", parents=[common], help="Baker-domain type by König ratios")
    sub.add_parser("qr-check", parents=[common], help="interpolation bounds of F")

    p = sub.add_parser("metric", parents=[common], help="w-triple ladder, write CSV")
    p.add_argument("--x", dest="x_ladder", type=float, nargs="+")
    p.add_argument("--y1", type=float)
    p.add_argument("--x2", type=float)

    p = sub.add_parser("distortion", parents=[common], help="table of M_K(x)")
    p.add_argument("--K", type=float, nargs="+", required=True)
    p.add_argument("--x", type=float, nargs="+", required=True)

    p = sub.add_parser("render", parents=[common], help="escape-time PPM")
    p.add_argument("--center", type=parse_complex)
    p.add_argument("--width", type=float)
    p.add_argument("--height", type=float)
    p.add_argument("--px", type=int, nargs=2, metavar=("W", "H"))
    p.add_argument("--render-n-max", dest="render_n_max", type=int)
    p.add_argument("--name", help="output file stem")

    sub.add_parser("params-search", parents=[common], help="admissible (x1, L) or (M, L)")

    p = sub.add_parser("univalence", parents=[common], help="non-univalence evidence")
    p.add_argument("--x", type=float, nargs="+", help="Landau abscissae (default 2L+10)")
    return ap


OVERRIDE_KEYS = ["out", "threads", "seed", "family", "map", "alpha", "m", "x1", "L", "M", "x0",
                 "k2_variant", "n_max", "eps", "grid_density", "x_ladder", "y1", "x2",
                 "width", "height", "render_n_max"]


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    over = {k: getattr(args, k, None) for k in OVERRIDE_KEYS}
    if getattr(args, "center", None) is not None:
        over["center"] = [args.center.real, args.center.imag]
    if getattr(args, "px", None):
        over["px_w"], over["px_h"] = args.px
    try:
        cfg = resolve(args.config, over)
        if cfg.family in ("theorem1", "theorem2") and args.command != "distortion":
            cfg.params()
        if cfg.threads:
            from .render import set_threads
            set_threads(cfg.threads)
        runner = Runner(cfg, quiet=args.quiet)
        return COMMANDS[args.command](runner, args)
    except (ConfigError, ParamsError, UsageError, OSError) as e:
        print(f"bakerlab: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as e:
        print(f"bakerlab: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
