"""Command-line interface: ``rosenquilt <command> [options]``.

Exit codes: 0 on success, 1 when a verification fails, 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import sys

from .core import DomainError, Params
from .entropy import entropy_birkhoff, entropy_closed_form, entropy_for_alpha
from .maps import endpoint_orbits, expand, verify_orbit_sync
from .natext import DEFAULT_N_MAX, QUILT_TOL, omega_half, quilt
from .region import dumps17
from .simulate import simulate, to_csv, to_svg

FORMATS = {
    "expand": ("json",),
    "orbit": ("json",),
    "domain": ("json", "svg"),
    "quilt": ("json", "svg"),
    "entropy": ("json",),
    "simulate": ("csv", "json", "svg"),
    "verify": ("json",),
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=int, default=3, help="Hecke index q >= 3 (default 3)")
    common.add_argument("--alpha", type=float, default=None, help="parameter alpha in [0, 1/lambda]")
    common.add_argument("--steps", type=int, default=None, help="digits, orbit length or quilting steps")
    common.add_argument("--samples", type=int, default=None, help="sample or point count")
    common.add_argument("--burn-in", type=int, default=1000, help="discarded orbit points (default 1000)")
    common.add_argument("--seed", type=int, default=0, help="PCG64 seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="comparison tolerance")
    common.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="largest explicit cylinder index")
    common.add_argument("--format", choices=("csv", "json", "svg"), default=None, help="output format")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    ap = argparse.ArgumentParser(prog="rosenquilt", description="Alpha-Rosen maps, natural extensions and entropy.")
    sub = ap.add_subparsers(dest="command", required=True)
    e = sub.add_parser("expand", parents=[common], help="digits of a point")
    e.add_argument("x", type=float, help="point of I_alpha")
    sub.add_parser("orbit", parents=[common], help="endpoint orbits and their synchronisation")
    sub.add_parser("domain", parents=[common], help="the alpha = 1/2 domain, or the alpha domain when --alpha is given")
    sub.add_parser("quilt", parents=[common], help="full quilting report")
    en = sub.add_parser("entropy", parents=[common], help="entropy of T_alpha")
    en.add_argument("--method", choices=("auto", "closed-form", "birkhoff"), default="auto")
    sub.add_parser("simulate", parents=[common], help="orbit cloud of the planar map")
    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--quick", action="store_true", help="skip the quilting checks")
    return ap


def _params(args, default_alpha: float | None = 0.5) -> Params:
    alpha = args.alpha if args.alpha is not None else default_alpha
    if alpha is None:
        raise UsageError("--alpha is required")
    return Params(args.q, alpha)


def _positive(name: str, value, allow_zero: bool = False):
    if value is not None and (value < 0 or (value == 0 and not allow_zero)):
        raise UsageError(f"{name} must be positive")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args) -> tuple[str, int]:
    cmd = args.command
    fmt = args.format or FORMATS[cmd][0]
    if fmt not in FORMATS[cmd]:
        raise UsageError(f"{cmd} cannot write {fmt}")
    _positive("--steps", args.steps, allow_zero=True)
    _positive("--samples", args.samples)
    _positive("--burn-in", args.burn_in, allow_zero=True)
    _positive("--n-max", args.n_max)
    _positive("--tol", args.tol)

    if cmd == "expand":
        p = _params(args)
        digits = expand(p, args.x, args.steps if args.steps is not None else 20)
        return dumps17({"q": p.q, "alpha": p.alpha, "x": args.x,
                        "digits": [[d.eps, d.d] for d in digits]}) + "\n", 0

    if cmd == "orbit":
        p = _params(args)
        n = args.steps if args.steps is not None else 2 * p.q + 4
        lo, ro = endpoint_orbits(p, n)
        sync = verify_orbit_sync(p, n, args.tol or 1e-8)
        return dumps17({"q": p.q, "alpha": p.alpha, "l": lo.points, "r": ro.points,
                        "sync": sync.to_dict()}) + "\n", 0

    if cmd in ("domain", "quilt"):
        if cmd == "domain" and args.alpha is None:
            region = omega_half(args.q)
            if fmt == "svg":
                return to_svg(regions=[region]), 0
            return dumps17({"q": args.q, "alpha": 0.5, "measure": region.measure(),
                            "region": region.to_dict()}) + "\n", 0
        p = _params(args)
        rep = quilt(p, args.steps, args.n_max, args.tol or QUILT_TOL)
        if fmt == "svg":
            return to_svg(regions=[rep.omega_alpha, rep.gap]), 0
        if cmd == "domain":
            return dumps17({"q": p.q, "alpha": p.alpha, "method": rep.method, "matched": rep.matched,
                            "measure": rep.omega_alpha.measure(),
                            "region": rep.omega_alpha.to_dict()}) + "\n", 0
        return dumps17(rep.to_dict()) + "\n", 0

    if cmd == "entropy":
        if args.method == "birkhoff":
            p = _params(args)
            res = entropy_birkhoff(p, args.samples or 10_000_000, args.burn_in, args.seed)
        elif args.alpha is None or args.method == "closed-form":
            res = entropy_closed_form(args.q)
            if args.alpha is not None:
                res = type(res)(**{**res.to_dict(), "alpha": args.alpha})
        else:
            p = _params(args)
            rep = quilt(p, args.steps, args.n_max, args.tol or QUILT_TOL)
            if not rep.matched:
                return dumps17({"q": p.q, "alpha": p.alpha, "error": "quilt did not match",
                                "method": rep.method}) + "\n", 1
            res = entropy_for_alpha(p, rep)
        return dumps17(res.to_dict()) + "\n", 0

    if cmd == "simulate":
        p = _params(args)
        cloud = simulate(p, args.samples or 100_000, args.burn_in, args.seed)
        if fmt == "csv":
            return to_csv(cloud), 0
        if fmt == "svg":
            return to_svg(cloud, seed=args.seed), 0
        return dumps17({"q": p.q, "alpha": p.alpha, "seed": cloud.seed, "burn_in": cloud.burn_in,
                        "restarts": cloud.restarts, "x": cloud.x.tolist(), "y": cloud.y.tolist()}) + "\n", 0

    if cmd == "verify":
        from .checks import run_suite

        checks = run_suite(args.seed, args.samples or 100, args.quick)
        ok = all(c.passed for c in checks)
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}", file=sys.stderr)
        return dumps17({"passed": ok, "checks": [c.to_dict() for c in checks]}) + "\n", 0 if ok else 1

    raise UsageError(f"unknown command {cmd}")


def main(argv: list[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, code = _run(args)
    except (UsageError, DomainError) as exc:
        print(f"rosenquilt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"rosenquilt: cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
