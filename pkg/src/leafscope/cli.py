"""`leafscope` command line: curve files, Poisson caches, point
classification and the verification battery."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .bundles import LeafLabel, describe, enumerate_leaf_families, parse_descriptor
from .classify import classify, sample_leaf
from .config import ToleranceConfig
from .curve import CurveSpec
from .errors import CacheError, NumericFailure, RejectionBudgetExceeded
from .linalg import normalize
from .poisson import PoissonCache, build_cache
from .verify import LEVELS, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3
EXIT_AMBIGUOUS = 4
EXIT_VERIFY = 5


def parse_point(text: str, n: int) -> np.ndarray:
    """`re,im;re,im;...` -> unit vector of length n."""
    coords = []
    for chunk in text.strip().strip(";").split(";"):
        re, im = (float(v) for v in chunk.split(","))
        coords.append(complex(re, im))
    if len(coords) != n:
        raise ValueError(f"point has {len(coords)} coordinates, curve needs {n}")
    return normalize(np.array(coords))


def _load_cache(path: str | None, spec: CurveSpec) -> PoissonCache | None:
    if path is None:
        return None
    cache = PoissonCache.load(path)
    if cache.spec.n != spec.n or abs(cache.spec.tau - spec.tau) > 1e-12:
        raise CacheError(f"cache {path} was built for another curve")
    return cache


def cmd_curve_new(args: argparse.Namespace) -> int:
    tol = ToleranceConfig(seed=args.seed)
    spec = CurveSpec.new(complex(args.tau_re, args.tau_im), args.n, complex(args.l_sum_re, args.l_sum_im), tol)
    spec.save(args.out)
    print(f"✅ Curve written: {args.out}")
    _print_curve(spec)
    return EXIT_OK


def _print_curve(spec: CurveSpec) -> None:
    print(f"   n: {spec.n}")
    print(f"   tau: {spec.tau.real:.6f}{spec.tau.imag:+.6f}j")
    print(f"   l_sum: {spec.l_sum.z.real:.6f}{spec.l_sum.z.imag:+.6f}j")
    print("   Omega coset (2w = l_sum):")
    for k, w in enumerate(spec.omega_coset()):
        print(f"     [{k}] {w.z.real:.6f}{w.z.imag:+.6f}j")
    print("   Leaf families:")
    for fam in enumerate_leaf_families(spec):
        d = "-" if fam.d is None else str(fam.d)
        print(f"     {fam.name:<22} d={d:<3} leaf dim={fam.leaf_dim:<3} parameters={fam.parameters}")


def cmd_curve_show(args: argparse.Namespace) -> int:
    _print_curve(CurveSpec.load(args.spec))
    return EXIT_OK


def cmd_poisson_build(args: argparse.Namespace) -> int:
    spec = CurveSpec.load(args.spec)
    cache = build_cache(spec, samples=args.samples, seed=args.seed)
    cache.save(args.out)
    diag = cache.diagnostics
    print(f"✅ Poisson cache written: {args.out}")
    print(f"   forms: {len(cache.forms)} of degree {cache.forms[0].degree}")
    print(f"   null spectrum tail: {np.array2string(np.array(diag['null_spectrum'][-3:]), precision=3)}")
    print(f"   null gap: {diag['null_gap']:.3e}")
    print(f"   seconds: {diag['seconds']}")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    spec = CurveSpec.load(args.spec)
    cache = _load_cache(args.cache, spec)
    if args.point is not None:
        p = parse_point(args.point, spec.n)
    else:
        rng = np.random.default_rng([spec.tolerances.seed if args.seed is None else args.seed, 97])
        p = sample_leaf(parse_descriptor(args.sample_leaf, spec), rng, spec)

    label = classify(p, spec, cache)
    out = label.to_dict()
    out["point"] = [[c.real, c.imag] for c in p.tolist()]
    if args.json:
        print(json.dumps(out, indent=2))
    elif isinstance(label, LeafLabel):
        print(f"leaf: {describe(label.bundle, spec)}")
        if label.witness is not None:
            print(f"witness divisor: {label.witness}")
        if label.secant_count is not None:
            print(f"r-secants: {label.secant_count.value}")
        if label.rank is not None:
            print(f"rank of bracket: {label.rank}")
    else:
        print(f"ambiguous ({label.reason}):")
        for b, res in zip(label.candidates, label.residuals):
            print(f"   {describe(b, spec)}  residual={res:.3e}")
    return EXIT_OK if isinstance(label, LeafLabel) else EXIT_AMBIGUOUS


def cmd_verify(args: argparse.Namespace) -> int:
    spec = CurveSpec.load(args.spec)
    cache = _load_cache(args.cache, spec)
    report = run_verification(spec, cache, args.level)
    if args.report:
        report.save(args.report)
    for c in report.checks:
        residual = "-" if c.residual is None else f"{c.residual:.3e}"
        print(f"{c.name:<24} {c.status:<8} residual={residual:<10} samples={c.samples:<4} {c.seconds:.1f}s {c.detail}")
    print(f"ambiguous: {report.ambiguous_count} of {report.classified_count} (limit {report.ambiguous_limit})")
    if report.passed:
        print("✅ Verification passed")
        return EXIT_OK
    print("❌ Verification failed")
    return EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leafscope")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("curve").add_subparsers(dest="action", required=True)
    new = curve.add_parser("new")
    new.add_argument("--tau-re", type=float, default=0.0)
    new.add_argument("--tau-im", type=float, default=1.0)
    new.add_argument("--n", type=int, required=True)
    new.add_argument("--l-sum-re", type=float, default=0.0)
    new.add_argument("--l-sum-im", type=float, default=0.0)
    new.add_argument("--seed", type=int, default=0)
    new.add_argument("--out", default="spec.json")
    new.set_defaults(func=cmd_curve_new)
    show = curve.add_parser("show")
    show.add_argument("--spec", default="spec.json")
    show.set_defaults(func=cmd_curve_show)

    poisson = sub.add_parser("poisson").add_subparsers(dest="action", required=True)
    build = poisson.add_parser("build")
    build.add_argument("--spec", default="spec.json")
    build.add_argument("--out", default="cache.json")
    build.add_argument("--samples", type=int, default=None)
    build.add_argument("--seed", type=int, default=None)
    build.set_defaults(func=cmd_poisson_build)

    cls = sub.add_parser("classify")
    cls.add_argument("--spec", default="spec.json")
    cls.add_argument("--cache", default=None)
    which = cls.add_mutually_exclusive_group(required=True)
    which.add_argument("--point", help='homogeneous coordinates "re,im;re,im;..."')
    which.add_argument("--sample-leaf", help="sum:D:RE,IM | odd | omega:K | double:K")
    cls.add_argument("--seed", type=int, default=None)
    cls.add_argument("--json", action="store_true")
    cls.set_defaults(func=cmd_classify)

    ver = sub.add_parser("verify")
    ver.add_argument("--spec", default="spec.json")
    ver.add_argument("--cache", default=None)
    ver.add_argument("--level", choices=LEVELS, default="quick")
    ver.add_argument("--report", default=None)
    ver.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    logger.debug("running %s %s", args.command, getattr(args, "action", ""))
    try:
        return args.func(args)
    except (NumericFailure, RejectionBudgetExceeded) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        residual = getattr(exc, "residual", None)
        spectrum = getattr(exc, "spectrum", None)
        if residual is not None:
            print(f"   residual: {residual:.3e}", file=sys.stderr)
        if spectrum:
            print(f"   spectrum: {' '.join(f'{s:.3e}' for s in spectrum)}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, KeyError, CacheError, OSError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
