"""Command-line front end: ``uamo <subcommand> [options]``.

Exit status is 0 on success, 1 when a verification check fails and 2 on a
configuration error. Heavy modules are imported after ``--threads`` has been
applied to the BLAS/OpenMP environment.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import platform
import sys

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("uamo")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def parse_beta(text: str):
    """``golden``, ``silver``, ``p/q`` or a decimal in ``[0, 1)``."""
    from .torus import as_frequency, golden, rational_frequency, silver

    t = text.strip().lower()
    if t == "golden":
        return golden()
    if t == "silver":
        return silver()
    try:
        if "/" in t:
            p, q = (int(v) for v in t.split("/"))
            return rational_frequency(p, q)
        v = float(t)
    except ValueError as exc:
        raise ConfigError(f"cannot parse frequency {text!r}") from exc
    if not 0.0 <= v < 1.0:
        raise ConfigError("decimal frequency must lie in [0, 1)")
    return as_frequency(v)


def parse_z(text: str) -> complex:
    """Complex literal (``0.6+0.8j``) or ``e:a`` for ``exp(2 pi i a)``."""
    t = text.strip().replace(" ", "")
    try:
        if t.startswith("e:"):
            import cmath

            z = cmath.exp(2j * math.pi * float(t[2:]))
        else:
            z = complex(t)
    except ValueError as exc:
        raise ConfigError(f"cannot parse spectral parameter {text!r}") from exc
    if z == 0 or not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError("z must be finite and nonzero")
    return z


def round12(obj):
    """Round every float in a JSON-like structure to 12 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    return obj


def provenance(args: argparse.Namespace, extra: dict | None = None) -> dict:
    import numpy
    import scipy

    from . import __version__

    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose", "threads")}
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    d = {
        "config": cfg,
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "versions": {"uamo": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
    if extra:
        d["grids"] = extra
    return d


def write_json(path: str | None, data) -> None:
    text = json.dumps(round12(data), indent=2, default=str)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_butterfly(args) -> int:
    from .spectrum import butterfly

    _check(1 <= args.q_max <= 64, "--q-max must be in [1, 64]")
    _check(args.grid >= 8, "--grid (angle bins) must be >= 8")
    _check(args.out is not None, "--out is required for the raster")
    bf = butterfly(args.q_max, args.theta_grid, args.k_grid, args.grid)
    bf.write_pgm(args.out, {"provenance": round12(provenance(args, {"theta_grid": args.theta_grid, "k_grid": args.k_grid}))})
    flagged = sum(e.coarse for e in bf.estimates)
    print(f"wrote {args.out} ({len(bf.beta_axis)} rows x {args.grid} bins, {flagged} rows flagged coarse)")
    return EXIT_OK


def _eps_grid(args):
    import numpy as np

    _check(math.isfinite(args.eps_min) and math.isfinite(args.eps_max), "eps range must be finite")
    _check(args.eps_max >= args.eps_min, "--eps-max must be >= --eps-min")
    _check(args.eps_steps >= 1, "--eps-steps must be >= 1")
    return np.linspace(args.eps_min, args.eps_max, args.eps_steps)


def cmd_lyapunov(args) -> int:
    from .cocycles import lyapunov_profile

    beta = parse_beta(args.beta)
    z = parse_z(args.z)
    eps = _eps_grid(args)
    prof = lyapunov_profile(beta, z, eps, args.iters, args.samples, args.seed)
    prov = provenance(args, {"n_iters": prof.n_iters, "theta_samples": prof.theta_samples})
    if args.out:
        prof.to_csv(args.out, round12(prov))
        print(f"wrote {args.out}")
    else:
        from .cocycles import fmt

        print("eps,L,err,slope")
        for row in zip(prof.eps_grid, prof.L_values, prof.errors, prof.slopes):
            print(",".join(fmt(v) for v in row))
    return EXIT_OK


def cmd_acceleration(args) -> int:
    from .cocycles import acceleration

    beta = parse_beta(args.beta)
    z = parse_z(args.z)
    _check(args.h > 0, "--h must be positive")
    acc = acceleration(beta, z, args.eps0, args.h, n_iters=args.iters, samples=args.samples, seed=args.seed)
    out = {"beta": beta.label(), "z": [z.real, z.imag], "eps0": args.eps0, "omega": acc.omega,
           "omega_rounded": acc.omega_rounded, "resolved": acc.resolved, "h": acc.h, "note": acc.note,
           "provenance": provenance(args)}
    write_json(args.out, out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    from .spectrum import measure_estimate, rational_spectrum, write_measure_csv

    beta = parse_beta(args.beta)
    if args.out and args.out.endswith(".csv"):
        rows = []
        for p, q in beta.convergents:
            if q > args.q_max:
                break
            m, u = measure_estimate(rational_spectrum(p, q, args.grid, args.grid))
            rows.append((p, q, m, u))
        _check(bool(rows), "no convergent below --q-max")
        write_measure_csv(args.out, rows)
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            json.dump(round12(provenance(args, {"theta_grid": args.grid, "k_grid": args.grid})), fh, indent=2)
        print(f"wrote {args.out}")
        return EXIT_OK
    p, q = beta.convergents[-1] if beta.rational else beta.convergent_below(args.q_max)
    est = rational_spectrum(p, q, args.grid, args.grid)
    d = est.to_json()
    d["measure"], d["uncertainty"] = measure_estimate(est)
    d["provenance"] = provenance(args)
    write_json(args.out, d)
    return EXIT_OK


def cmd_ds_scan(args) -> int:
    import numpy as np

    from .cocycles import dominated_splitting_scan
    from .spectrum import distance_to_spectrum, rational_spectrum

    beta = parse_beta(args.beta)
    _check(args.iters is None or args.iters >= 1, "--iters must be positive")
    n_max = args.iters or 1024
    if args.z:
        zs = np.array([parse_z(v) for v in args.z])
    else:
        _check(args.grid >= 1, "--grid must be positive")
        zs = np.exp(2j * np.pi * (np.arange(args.grid) + 0.5) / args.grid)
    res = dominated_splitting_scan(beta, zs, n_max=n_max)
    p, q = beta.convergents[-1] if beta.rational else beta.convergent_below(args.q_max)
    est = rational_spectrum(p, q)
    on = [abs(abs(z) - 1) < 1e-12 and distance_to_spectrum(est, z) == 0.0 for z in zs]
    agree = [(r.verdict.value != "DS") if o else (r.verdict.value == "DS") for r, o in zip(res, on)]
    out = {
        "beta": beta.label(), "reference_spectrum": f"{p}/{q}",
        "consistency": float(np.mean(agree)),
        "undecided_fraction": float(np.mean([r.verdict.value == "UNDECIDED" for r in res])),
        "verdicts": [dict(r.to_json(), in_reference_spectrum=bool(o)) for r, o in zip(res, on)],
        "provenance": provenance(args, {"n_max": n_max}),
    }
    write_json(args.out, out)
    if args.out:
        print(f"wrote {args.out}: consistency {out['consistency']:.12g}, undecided {out['undecided_fraction']:.12g}")
    return EXIT_OK


def cmd_duality(args) -> int:
    from .duality import duality_report

    beta = parse_beta(args.beta)
    try:
        sizes = [int(v) for v in args.L.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --L {args.L!r}") from exc
    _check(all(s >= 2 for s in sizes), "truncation half-sizes must be >= 2")
    reports = [duality_report(beta, args.theta, L) for L in sizes]
    out = {"beta": beta.label(), "theta": args.theta, "reports": [r.to_json() for r in reports],
           "provenance": provenance(args)}
    write_json(args.out, out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .checks import SUITES

    names = list(SUITES) if args.suite == "all" else [args.suite]
    for n in names:
        _check(n in SUITES, f"unknown suite {n!r}; choose from {', '.join(SUITES)} or all")
    results = [SUITES[n]() for n in names]
    for r in results:
        print(r.line())
    if args.out:
        write_json(args.out, {"results": [r.to_json() for r in results], "provenance": provenance(args)})
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uamo", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None, help="cap BLAS/OpenMP worker threads")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, beta=True):
        if beta:
            p.add_argument("--beta", default="golden", help="golden, silver, p/q or a decimal")
        p.add_argument("--out", default=None, help="output file (stdout if omitted where possible)")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("butterfly", help="spectrum raster over Farey fractions")
    common(p, beta=False)
    p.add_argument("--q-max", type=int, default=8)
    p.add_argument("--grid", type=int, default=512, help="angle bins")
    p.add_argument("--theta-grid", type=int, default=16)
    p.add_argument("--k-grid", type=int, default=16)
    p.set_defaults(func=cmd_butterfly)

    p = sub.add_parser("lyapunov", help="profile eps -> L(beta, z; eps) as CSV")
    common(p)
    p.add_argument("--z", default="e:0.25")
    p.add_argument("--eps-min", type=float, default=0.0)
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-steps", type=int, default=11)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--samples", type=int, default=256)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("acceleration", help="quantised slope of the profile")
    common(p)
    p.add_argument("--z", default="e:0.25")
    p.add_argument("--eps0", type=float, default=0.0)
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--samples", type=int, default=256)
    p.set_defaults(func=cmd_acceleration)

    p = sub.add_parser("spectrum", help="Floquet arcs (JSON) or measure table along convergents (.csv)")
    common(p)
    p.add_argument("--q-max", type=int, default=34)
    p.add_argument("--grid", type=int, default=64, help="theta and Bloch-phase grid size")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ds-scan", help="dominated-splitting verdicts on a z grid")
    common(p)
    p.add_argument("--z", action="append", help="explicit z values (repeatable)")
    p.add_argument("--grid", type=int, default=256, help="number of z points on the circle")
    p.add_argument("--iters", type=int, default=None, help="largest iterate n_max")
    p.add_argument("--q-max", type=int, default=34, help="reference convergent for irrational beta")
    p.set_defaults(func=cmd_ds_scan)

    p = sub.add_parser("duality", help="dual residuals of truncation eigenvectors")
    common(p)
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--L", default="64,128,256", help="comma-separated half sizes")
    p.set_defaults(func=cmd_duality)

    p = sub.add_parser("verify", help="run acceptance suites")
    p.add_argument("suite", nargs="?", default="all")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        # library constructors raise ValueError on out-of-range parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
