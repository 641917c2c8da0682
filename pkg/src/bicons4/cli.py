"""Command-line front end: ``bicons4 {list,verify,profile,slice,mesh}``.

Exit codes: 0 success, 1 residual check failed, 2 usage or domain error.
Every option may also come from a JSON file given with ``--config``; options
given on the command line win.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import report
from .biconservative import grid_verify
from .config import DEFAULT, Tolerances
from .errors import BiconsError
from .families import REGISTRY, FamilyId, build_family, get_family, make_profile
from .profiles import ProfileSolution
from .surfaces import SurfacePatch, build_lemma_surface, slice_check, slice_of

EXIT_OK, EXIT_RESIDUAL, EXIT_USAGE = 0, 1, 2
MESH_HEADER = ("s", "t", "u", "x0", "x1", "x2", "x3", "k1", "k2", "k3", "H", "residual")
PARAM_KEYS = ("signature", "c1", "a", "branch", "variant", "init", "step", "s",
              "A", "B", "r", "radius")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    family: str | None = None
    params: dict = field(default_factory=dict)
    grid: tuple = (8, 8, 8)
    tolerances: Tolerances = DEFAULT
    profile_file: str | None = None
    output: str | None = None
    format: str = "json"
    threads: int | None = None
    t: tuple | None = None
    u: tuple | None = None


# -- value parsing ----------------------------------------------------------------

def _pair(text, what):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = str(text).split(":")
    if len(vals) != 2:
        raise UsageError(f"{what} must look like lo:hi, got {text!r}")
    try:
        lo, hi = float(vals[0]), float(vals[1])
    except ValueError:
        raise UsageError(f"{what} must look like lo:hi, got {text!r}") from None
    if not lo < hi:
        raise UsageError(f"{what} needs lo < hi, got {text!r}")
    return lo, hi


def _triple(text):
    vals = list(text) if isinstance(text, (list, tuple)) else str(text).split(",")
    if len(vals) != 3:
        raise UsageError(f"init must be s0,f0,fp0, got {text!r}")
    try:
        return tuple(float(v) for v in vals)
    except ValueError:
        raise UsageError(f"init must be s0,f0,fp0, got {text!r}") from None


def _grid(text, dims):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    elif isinstance(text, int):
        vals = [text] * dims
    else:
        vals = str(text).lower().split("x")
        if len(vals) == 1:
            vals = vals * dims
    try:
        vals = [int(v) for v in vals]
    except ValueError:
        raise UsageError(f"grid must look like {'x'.join(['8'] * dims)}, got {text!r}") from None
    if len(vals) != dims or min(vals) < 2:
        raise UsageError(f"grid needs {dims} sizes, each at least 2; got {text!r}")
    return tuple(vals)


def _number(v, name):
    try:
        return float(v)
    except (TypeError, ValueError):
        raise UsageError(f"--{name} must be a number, got {v!r}") from None


def merged_options(args):
    """Config-file values overridden by explicitly given flags."""
    opts = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        opts.update({k.replace("-", "_"): v for k, v in data.items()})
    opts.update({k: v for k, v in vars(args).items() if v is not None and k not in ("cmd", "config")})
    return opts


def build_config(opts, dims=3) -> RunConfig:
    params = {}
    for key in PARAM_KEYS:
        if opts.get(key) is None:
            continue
        v = opts[key]
        if key == "s":
            v = _pair(v, "--s")
        elif key == "init":
            v = _triple(v)
        elif key in ("signature", "branch", "variant"):
            v = str(v).lower()
        else:
            v = _number(v, key)
        params[key] = v
    try:
        tol = DEFAULT.updated(tau_bic=opts.get("tau_bic"), tau_dist=opts.get("tau_dist"),
                              delta_guard=opts.get("delta_guard"))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    fmt = str(opts.get("format") or "json")
    if fmt not in ("json", "csv", "text"):
        raise UsageError(f"--format must be json or csv, got {fmt!r}")
    threads = opts.get("threads")
    if threads is not None:
        threads = int(threads)
        if threads < 1:
            raise UsageError("--threads must be at least 1")
    return RunConfig(
        family=opts.get("family"), params=params,
        grid=_grid(opts["grid"], dims) if opts.get("grid") is not None else (8,) * dims if dims == 3 else (20, 20),
        tolerances=tol, profile_file=opts.get("profile_file"), output=opts.get("output"),
        format=fmt, threads=threads,
        t=_pair(opts["t"], "--t") if opts.get("t") is not None else None,
        u=_pair(opts["u"], "--u") if opts.get("u") is not None else None)


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_family(cfg):
    if not cfg.family:
        raise UsageError("missing required option --family")
    fam = get_family(cfg.family)
    if fam.id is FamilyId.LEMMA_SURFACE:
        raise UsageError("model surfaces are checked with the slice command")
    return fam


def _patch(cfg):
    fam = _require_family(cfg)
    profile = ProfileSolution.from_csv(cfg.profile_file) if cfg.profile_file else None
    patch = build_family(fam, cfg.params, profile=profile, tol=cfg.tolerances)
    if cfg.t or cfg.u:
        s_dom, t_dom, u_dom = patch.domain
        patch.domain = (s_dom, cfg.t or t_dom, cfg.u or u_dom)
    return fam, patch


# -- commands -----------------------------------------------------------------------

def cmd_list(args):
    fams = list(REGISTRY.values())
    if args.family:
        fams = [get_family(args.family)]
    if args.format == "json":
        sys.stdout.write(report.dumps([f.to_dict() for f in fams]) + "\n")
        return EXIT_OK
    for f in fams:
        params = ", ".join(p.name + ("" if p.required else "?") for p in f.params)
        sigs = "/".join(f.signatures) or "-"
        sys.stdout.write(f"{f.name:14s} {sigs:22s} profile={f.profile:12s} params: {params}\n"
                         f"{'':14s} {f.description}; {f.source}\n")
    return EXIT_OK


def cmd_verify(args):
    cfg = build_config(merged_options(args))
    fam, patch = _patch(cfg)
    summary = grid_verify(patch, cfg.grid, cfg.tolerances, threads=cfg.threads)
    doc = summary.to_dict()
    doc["family"] = fam.name
    doc["params"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.params.items()}
    doc["domain"] = [list(d) for d in patch.domain]
    doc["grid"] = list(cfg.grid)
    _emit(report.dumps(doc) + "\n", cfg.output)
    return EXIT_OK if summary.passed else EXIT_RESIDUAL


def cmd_profile(args):
    cfg = build_config(merged_options(args))
    fam = _require_family(cfg)
    prof = make_profile(fam, cfg.params, cfg.tolerances)
    if prof is None:
        raise UsageError(f"family {fam.name} has no profile function")
    _emit(prof.to_csv(), cfg.output)
    return EXIT_OK


def cmd_slice(args):
    opts = merged_options(args)
    cfg = build_config(opts, dims=2)
    lemma = opts.get("lemma")
    if lemma:
        surf = build_lemma_surface(lemma, **{k: cfg.params[k] for k in ("A", "B", "r") if k in cfg.params})
        label = f"lemma-{lemma}"
    else:
        fam, patch = _patch(cfg)
        if opts.get("at_s") is None:
            raise UsageError("slice of a family needs --at-s")
        s0 = _number(opts["at_s"], "at-s")
        lo, hi = patch.domain[0]
        if not lo <= s0 <= hi:
            raise UsageError(f"--at-s {s0} outside the family's s-interval [{lo}, {hi}]")
        surf = slice_of(patch, s0)
        label = surf.label
    if cfg.t or cfg.u:
        surf = SurfacePatch((cfg.t or surf.domain[0], cfg.u or surf.domain[1]), surf.evaluator,
                            surf.label, surf.params)
    rep = slice_check(surf, cfg.grid[0], cfg.tolerances)
    doc = {"surface": label, "n": cfg.grid[0]}
    doc.update(rep.to_dict())
    if rep.null_frame is not None:
        doc["null_frame"] = {"l": rep.null_frame[0].tolist(), "m": rep.null_frame[1].tolist()}
    _emit(report.dumps(doc) + "\n", cfg.output)
    return EXIT_OK


def cmd_mesh(args):
    cfg = build_config(merged_options(args))
    fam, patch = _patch(cfg)
    summary = grid_verify(patch, cfg.grid, cfg.tolerances, threads=cfg.threads)
    lines = [",".join(MESH_HEADER)]
    for r in summary.points:
        x = patch.position(r.point)
        row = list(r.point) + list(x) + list(r.report.k) + [r.report.H, r.report.residual_norm]
        lines.append(",".join(report.fmt(v) for v in row))
    _emit("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def _family_options(p, grid_default="8x8x8"):
    p.add_argument("--config", help="JSON file with any of these options")
    p.add_argument("--family", help="family name (see `list`)")
    p.add_argument("--signature", help="riemannian or lorentzian")
    p.add_argument("--c1", help="profile constant")
    p.add_argument("--a", help="null-cone shift (nonzero)")
    p.add_argument("--branch", help="x1 branch: minus or plus")
    p.add_argument("--variant", help="rotational ODE: exact or alt-sign")
    p.add_argument("--init", help="initial data s0,f0,fp0")
    p.add_argument("--step", help="RK4 step")
    p.add_argument("--s", help="s-interval lo:hi")
    p.add_argument("--t", help="t-interval lo:hi")
    p.add_argument("--u", help="u-interval lo:hi")
    p.add_argument("--radius", help="de Sitter radius")
    p.add_argument("--profile-file", dest="profile_file", help="CSV profile (s,f,fp,fpp)")
    p.add_argument("--grid", help=f"grid sizes, e.g. {grid_default}")
    p.add_argument("--tau-bic", dest="tau_bic", type=float)
    p.add_argument("--tau-dist", dest="tau_dist", type=float)
    p.add_argument("--delta-guard", dest="delta_guard", type=float)
    p.add_argument("--threads", type=int, help="worker threads (default: BICONS4_THREADS)")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="bicons4", allow_abbrev=False,
        description="Build and verify biconservative hypersurfaces of Minkowski 4-space.")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("list", allow_abbrev=False, help="list the family catalog")
    p.add_argument("family", nargs="?")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_list)
    p = sub.add_parser("verify", allow_abbrev=False, help="grid-verify a family (JSON summary)")
    _family_options(p)
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("profile", allow_abbrev=False, help="write the profile table as CSV")
    _family_options(p)
    p.set_defaults(func=cmd_profile)
    p = sub.add_parser("slice", allow_abbrev=False,
                       help="check a model surface or an s = const slice (JSON)")
    _family_options(p, "20")
    p.add_argument("--lemma", help="model surface case i..xi")
    p.add_argument("--A", dest="A")
    p.add_argument("--B", dest="B")
    p.add_argument("--r", dest="r")
    p.add_argument("--at-s", dest="at_s")
    p.set_defaults(func=cmd_slice)
    p = sub.add_parser("mesh", allow_abbrev=False, help="CSV point cloud with curvatures")
    _family_options(p, "4x4x4")
    p.set_defaults(func=cmd_mesh)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, BiconsError, ValueError) as exc:
        where = getattr(exc, "point", None)
        msg = f"error: {exc}"
        if where is not None and "at " not in msg:
            msg += f" (at {where})"
        sys.stderr.write(msg + "\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
