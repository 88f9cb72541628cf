"""Command-line interface (``sigmadelta2d <command> ...``)."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .bandlimited import (DEFAULT_LAMBDAS, DEFAULT_REGION, LatticeSpec, decay_experiment,
                          eval_test_function, quantize_samples, sample_function, sup_error)
from .filters import FeedbackFilter, finite_difference_filter, first_order_filter, make_sparse_second_order
from .halftone import HalftoneConfig, halftone_image, read_image, write_image
from .metrics import fsim, fsimc
from .optimize import OptimizerConfig, optimize_first_order, optimize_weights
from .quantizer import InitPolicy, quantize_grid
from .schemes import (Direction, SchemeError, SchemeSpec, builtin_schemes, dump_schemes, get_scheme,
                      l1_budget, load_schemes, stability_margin, weight_constant)

log = logging.getLogger("sigmadelta2d")

MANIFEST_NAME = "manifest.json"


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def resolve_scheme(arg: str) -> SchemeSpec:
    """Registry name, ``config.json`` (first scheme) or ``config.json:name``."""
    path, name = arg, ""
    if ".json:" in arg:
        path, name = arg.rsplit(":", 1)
    if not path.endswith(".json"):
        return get_scheme(arg)
    p = Path(path)
    if not p.is_file():
        raise CliError(f"scheme config not found: {p}")
    schemes = load_schemes(p)
    if not name:
        return schemes[0]
    for s in schemes:
        if s.name == name:
            return s
    raise CliError(f"no scheme {name!r} in {p}")


def parse_filter(tok: str) -> FeedbackFilter:
    """``h1`` (first order), ``hK`` (sparse second order), ``dR`` (plain r-th order)."""
    tok = tok.strip()
    try:
        if tok == "h1":
            return first_order_filter()
        if tok.startswith("h"):
            return make_sparse_second_order(int(tok[1:]))
        if tok.startswith("d"):
            return finite_difference_filter(int(tok[1:]))
    except ValueError as exc:
        raise CliError(f"bad filter {tok!r}: {exc}") from None
    raise CliError(f"bad filter {tok!r}; use h1, h<kappa> or d<order>")


def parse_dirs(text: str) -> List[Direction]:
    out = []
    for tok in text.split(","):
        try:
            i, j = (int(x) for x in tok.split(":"))
        except ValueError:
            raise CliError(f"bad direction {tok!r}; expected i:j") from None
        out.append(Direction(i, j))
    return out


def parse_floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"bad number list {text!r}") from None


def fraction_str(x: float) -> str:
    f = Fraction(x).limit_denominator(100_000)
    return str(f) if abs(float(f) - x) < 1e-12 else f"{x:.12g}"


def write_manifest(out_dir: Path, entry: dict) -> Path:
    """Append ``entry`` to ``out_dir/manifest.json``, replacing runs with the same outputs."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_NAME
    runs = []
    if path.is_file():
        try:
            runs = json.loads(path.read_text()).get("runs", [])
        except (ValueError, AttributeError):
            runs = []
    runs = [r for r in runs if r.get("outputs") != entry["outputs"]]
    runs.append(entry)
    path.write_text(json.dumps({"tool": "sigmadelta2d", "runs": runs}, indent=2) + "\n")
    return path


def _manifest(args, command: str, outputs: Sequence[Path], **params) -> dict:
    return {
        "command": command,
        "argv": list(args.argv) if getattr(args, "argv", None) is not None else None,
        "seed": args.seed,
        "outputs": [str(p) for p in outputs],
        "parameters": params,
        "version": __version__,
    }


def _out_dir(args, default: Path) -> Path:
    return Path(args.output) if args.output else default


# ---------------------------------------------------------------------------
# commands


def cmd_halftone(args) -> int:
    scheme = resolve_scheme(args.scheme)
    src = Path(args.input)
    if not src.is_file():
        raise CliError(f"input not found: {src}")
    try:
        img = read_image(src)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read {src}: {exc}") from None
    fmt = args.format.lower()
    if args.out:
        out = Path(args.out)
    else:
        out = _out_dir(args, src.parent) / f"{src.stem}_{scheme.name}.{fmt}"
    cfg = HalftoneConfig(scheme, args.stability_constant, args.seed, args.init, args.threads)
    res = halftone_image(img, cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_image(res.image, out, fmt)
    if res.overflow:
        log.warning("state exceeded 1 in magnitude (max |v| = %.6f)", res.max_abs_state)
    print(f"wrote {out}  scheme={scheme.name}  C={cfg.resolved_constant():g}  "
          f"max|v|={res.max_abs_state:.6f}")
    params = {"scheme": scheme.name, "input": str(src), "stability_constant": cfg.resolved_constant(),
              "init": args.init, "format": fmt}
    if args.score:
        score = fsimc(img, res.image) if img.ndim == 3 else fsim(img, res.image)
        label = "FSIMc" if img.ndim == 3 else "FSIM"
        print(f"{label} {score.score:.4f}")
        params[label.lower()] = score.score
    write_manifest(out.parent, _manifest(args, "halftone", [out], **params))
    return 0


def cmd_quantize_signal(args) -> int:
    scheme = resolve_scheme(args.scheme)
    if args.input:
        y = np.load(args.input)
        if y.ndim != 2:
            raise CliError("input grid must be 2D")
        spec = None
    else:
        spec = LatticeSpec(args.lam, args.extent)
        y = sample_function(eval_test_function, spec)
    if args.input:
        init = InitPolicy.uniform(args.seed) if args.init == "uniform" else InitPolicy.zero()
        res = quantize_grid(y, scheme, init)
        bits, vmax = res.bits, res.max_abs_state
    else:
        bits = quantize_samples(y, scheme, args.scan_rows)
        vmax = float("nan")
    out_dir = _out_dir(args, Path("."))
    out = Path(args.out) if args.out else out_dir / f"bits_{scheme.name}.npy"
    out.parent.mkdir(parents=True, exist_ok=True)
    np.save(out, bits)
    msg = f"wrote {out}  shape={bits.shape}  scheme={scheme.name}"
    params = {"scheme": scheme.name, "input": args.input}
    if spec is not None:
        err = sup_error(y, bits, spec).maximum
        msg += f"  lambda={args.lam:g}  sup_error={err:.4e}"
        params.update(lam=args.lam, extent=args.extent, scan_rows=args.scan_rows, sup_error=err)
    else:
        msg += f"  max|v|={vmax:.6f}"
        params.update(init=args.init)
    print(msg)
    write_manifest(out.parent, _manifest(args, "quantize-signal", [out], **params))
    return 0


def cmd_decay(args) -> int:
    schemes = [resolve_scheme(s) for s in args.schemes.split(",")]
    lambdas = parse_floats(args.lambdas) if args.lambdas else list(DEFAULT_LAMBDAS)
    if not lambdas or any(not (lam > 1 and math.isfinite(lam)) for lam in lambdas):
        raise CliError(f"invalid lambda list {args.lambdas!r}")
    region = tuple(parse_floats(args.region)) if args.region else DEFAULT_REGION
    if len(region) != 4:
        raise CliError("region needs four numbers x1lo,x1hi,x2lo,x2hi")
    report = decay_experiment(schemes, lambdas, region, args.step, workers=args.threads,
                              scan_rows=args.scan_rows)
    out_dir = _out_dir(args, Path("decay_out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "decay.csv", out_dir / "slopes.csv", out_dir / "decay.dat"]
    report.write_csv(paths[0])
    report.write_slopes_csv(paths[1])
    report.write_gnuplot(paths[2])
    for name, slope in report.slopes.items():
        print(f"{name:10s} slope {slope:+.3f}")
    write_manifest(out_dir, _manifest(args, "decay", paths, schemes=[s.name for s in schemes],
                                      lambdas=lambdas, region=list(region), step=args.step,
                                      scan_rows=args.scan_rows))
    return 0


def cmd_optimize(args) -> int:
    if args.dirs is None:
        if args.order != 1:
            raise CliError("--dirs and --filters are required for order > 1")
        try:
            scheme, c = optimize_first_order(args.p, args.s, args.l)
        except SchemeError as exc:
            raise CliError(str(exc)) from None
        if args.name:
            scheme = SchemeSpec(args.name, scheme.order, scheme.entries)
    else:
        dirs = parse_dirs(args.dirs)
        tokens = args.filters.split(",") if args.filters else ["h1" if args.order == 1 else "h3"]
        if len(tokens) == 1:
            tokens = tokens * len(dirs)
        filters = [parse_filter(t) for t in tokens]
        cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed)
        try:
            res = optimize_weights(dirs, filters, args.order, cfg, name=args.name or "optimized")
        except SchemeError as exc:
            raise CliError(str(exc)) from None
        scheme, c = res.scheme, res.weight_constant
    for e in scheme.entries:
        print(f"w[{e.direction.i},{e.direction.j}] = {fraction_str(e.weight)}  ({e.weight:.10f})")
    print(f"C_W = {c:.10f}")
    if args.emit:
        dump_schemes([scheme], args.emit)
        print(f"wrote {args.emit}")
        write_manifest(Path(args.emit).resolve().parent,
                       _manifest(args, "optimize", [Path(args.emit)], order=args.order, dirs=args.dirs,
                                 filters=args.filters, s=args.s, p=args.p, l=args.l))
    return 0


def cmd_schemes(args) -> int:
    if args.action == "list":
        print(f"{'name':10s} {'order':>5s} {'C_W':>12s} {'margin':>9s} {'l1':>9s}")
        for name, s in builtin_schemes().items():
            print(f"{name:10s} {s.order:5d} {weight_constant(s):12.6f} "
                  f"{stability_margin(s):9.4f} {l1_budget(s):9.4f}")
        return 0
    if not args.name:
        raise CliError("schemes show needs a scheme name")
    s = resolve_scheme(args.name)
    print(f"{s.name}  order {s.order}")
    for e in s.entries:
        h = e.filter
        label = f"h^{h.kappa}" if h.kappa is not None else "[" + ", ".join(fraction_str(t) for t in h.taps) + "]"
        print(f"  ({e.direction.i},{e.direction.j})  w = {fraction_str(e.weight):>8s}  h = {label}")
    margin = stability_margin(s)
    print(f"C_W {weight_constant(s):.6f}")
    print(f"stability margin {margin:.2f} (exact {margin:.6f})")
    print(f"l1 budget {l1_budget(s):.6f}")
    return 0


def _score_pair(ref_path: Path, dist_path: Path, mode: str) -> float:
    ref, dist = read_image(ref_path), read_image(dist_path)
    if mode == "fsimc" or (mode == "auto" and ref.ndim == 3 and dist.ndim == 3):
        return fsimc(ref, dist).score
    return fsim(ref, dist).score


def cmd_fsim(args) -> int:
    ref = Path(args.ref)
    dists = [Path(d) for d in args.dist]
    for p in [ref, *dists]:
        if not p.exists():
            raise CliError(f"not found: {p}")
    pairs = []
    if ref.is_dir():
        for d in dists:
            if not d.is_dir():
                raise CliError("with a reference directory, distorted inputs must be directories")
            for f in sorted(d.iterdir()):
                if (ref / f.name).is_file():
                    pairs.append((ref / f.name, f))
    else:
        for d in dists:
            files = sorted(x for x in d.iterdir() if x.is_file()) if d.is_dir() else [d]
            pairs += [(ref, f) for f in files]

    try:
        scores = [(d, _score_pair(r, d, args.mode)) for r, d in pairs]
    except ValueError as exc:
        raise CliError(str(exc)) from None

    if len(scores) == 1 and not args.csv:
        print(f"{scores[0][1]:.4f}")
        return 0
    fh = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["file", "score"])
        for d, s in scores:
            w.writerow([str(d), f"{s:.4f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sigmadelta2d",
                                description="Weighted Sigma-Delta quantization and halftoning.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--output", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("halftone", help="halftone an image")
    h.add_argument("input")
    h.add_argument("-o", "--out")
    h.add_argument("--scheme", default="2nd-SD", help="registry name or JSON config")
    h.add_argument("--stability-constant", type=float, default=None)
    h.add_argument("--init", choices=("uniform", "zero"), default="uniform")
    h.add_argument("--format", choices=("png", "bmp"), default="png")
    h.add_argument("--score", action="store_true", help="print FSIM (gray) or FSIMc (RGB)")
    h.set_defaults(func=cmd_halftone)

    q = sub.add_parser("quantize-signal", help="quantize the bandlimited test signal or a .npy grid")
    q.add_argument("--scheme", default="1st-A")
    q.add_argument("--lam", type=float, default=150.0)
    q.add_argument("--extent", type=float, default=10.0)
    q.add_argument("--input", help=".npy grid to quantize instead of the test signal")
    q.add_argument("--init", choices=("uniform", "zero"), default="zero")
    q.add_argument("--scan-rows", choices=("x1", "x2"), default="x2")
    q.add_argument("-o", "--out")
    q.set_defaults(func=cmd_quantize_signal)

    d = sub.add_parser("decay", help="error decay sweep over oversampling rates")
    d.add_argument("--schemes", default="1st-RbR,1st-A,Opt-4")
    d.add_argument("--lambdas", help="comma separated, default 75,100,...,275")
    d.add_argument("--region", help="x1lo,x1hi,x2lo,x2hi (default 2,8,2,8)")
    d.add_argument("--step", type=float, default=0.01)
    d.add_argument("--scan-rows", choices=("x1", "x2"), default="x2")
    d.set_defaults(func=cmd_decay)

    o = sub.add_parser("optimize", help="optimal weights for a direction set")
    o.add_argument("--order", type=int, default=1)
    o.add_argument("--s", type=int, default=4)
    o.add_argument("--p", type=int, default=1)
    o.add_argument("--l", type=int, default=1)
    o.add_argument("--dirs", help="e.g. 0:1,1:0")
    o.add_argument("--filters", help="e.g. h3,h3 (h1, h<kappa>, d<order>)")
    o.add_argument("--restarts", type=int, default=16)
    o.add_argument("--name")
    o.add_argument("--emit", help="write the scheme as JSON")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("schemes", help="list or show registry schemes")
    s.add_argument("action", choices=("list", "show"), nargs="?", default="list")
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_schemes)

    f = sub.add_parser("fsim", help="FSIM / FSIMc score")
    f.add_argument("ref")
    f.add_argument("dist", nargs="+")
    f.add_argument("--mode", choices=("auto", "fsim", "fsimc"), default="auto")
    f.add_argument("--csv", help="write (file, score) rows here")
    f.set_defaults(func=cmd_fsim)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except (CliError, SchemeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
