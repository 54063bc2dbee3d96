"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 internal-consistency failure,
4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import replace

from . import __version__
from .errors import ConsistencyError, ContractError, NgmziError
from .explorer import FIGURES, GridSpec, Record, SweepSpec, run_grid, run_sweep
from .interferometry import figure_of_merit, parity_expectation, phase_sensitivity, sensitivity_diff
from .phase_space import MZIScenario, NGOpParams
from .states import success_probability

EXIT_OK, EXIT_USAGE, EXIT_CONSISTENCY, EXIT_ORACLE = 0, 2, 3, 4

PARITY_TOL = 1e-6
WIGNER_TOL = 1e-6
PROB_TOL = 1e-8


class UsageError(Exception):
    pass


def _json_num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def sensitivity_record(s: MZIScenario) -> dict:
    """Library values printed by ``sensitivity``."""
    p_ng = success_probability(s.ng)
    sens = phase_sensitivity(s)
    d_ng = sensitivity_diff(s)
    flags = []
    if sens.divergent:
        flags.append("divergent")
    if math.isnan(d_ng):
        flags.append("undefined_diff")
    return {
        "delta_phi": sens.delta_phi,
        "parity": sens.parity,
        "dparity": sens.dparity,
        "p_ng": p_ng,
        "d_ng": d_ng,
        "pxd": figure_of_merit(s),
        "flags": flags,
    }


def _atomic_write(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_table(records: list[Record], fmt: str) -> str:
    if fmt == "json":
        rows = [{k: _json_num(v) for k, v in r.as_dict().items()} for r in records]
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(Record.columns())
    for r in records:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in r.as_dict().values()])
    return buf.getvalue()


def _emit(records, args, spec) -> None:
    text = format_table(records, args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    _atomic_write(args.out, text)
    if not args.no_meta:
        meta = {
            "package_version": __version__,
            "command": sys.argv[1:] if args.argv is None else args.argv,
            "spec": repr(spec),
            "rows": len(records),
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        _atomic_write(args.out + ".meta.json", json.dumps(meta, indent=1) + "\n")


def _parse_states(text: str) -> tuple[tuple[int, int], ...]:
    try:
        out = []
        for chunk in text.split(";"):
            if chunk.strip():
                m, n = chunk.split(",")
                out.append((int(m), int(n)))
    except ValueError as exc:
        raise UsageError(f"bad --states {text!r}; expected 'm,n;m,n;...'") from exc
    if not out:
        raise UsageError("--states is empty")
    return tuple(out)


def cmd_sensitivity(args) -> int:
    s = MZIScenario(NGOpParams(args.r, args.tau, args.m, args.n), args.dx, args.dp, args.phi)
    record = sensitivity_record(s)
    code = EXIT_OK
    if args.oracle:
        from .oracle import heralded_state, mzi_parity

        sig, _ = heralded_state(args.r, args.tau, args.m, args.n)
        record["oracle_parity"] = mzi_parity(sig, s.coherent_amplitude, s.phi)
        record["oracle_abs_diff"] = abs(record["parity"] - record["oracle_parity"])
        if record["oracle_abs_diff"] > PARITY_TOL:
            code = EXIT_ORACLE
    print(json.dumps({k: _json_num(v) for k, v in record.items()}))
    return code


def _sweep_spec(args) -> SweepSpec:
    if args.fig:
        spec = FIGURES.get(args.fig)
        if not isinstance(spec, SweepSpec):
            raise UsageError(f"no sweep preset {args.fig!r}")
        overrides = {k: getattr(args, k) for k in ("points",) if getattr(args, k) is not None}
        return replace(spec, **overrides)
    if args.axis is None or args.lo is None or args.hi is None:
        raise UsageError("sweep needs --fig or all of --axis --from --to")
    return SweepSpec(
        args.axis, args.lo, args.hi, args.points or 50,
        _parse_states(args.states or "0,1"),
        r=args.r, tau=args.tau, phi=args.phi, dx=args.dx, dp=args.dp,
    )


def cmd_sweep(args) -> int:
    spec = _sweep_spec(args)
    _emit(run_sweep(spec, args.workers), args, spec)
    return EXIT_OK


def _grid_spec(args) -> GridSpec:
    if args.fig:
        spec = FIGURES.get(args.fig)
        if not isinstance(spec, GridSpec):
            raise UsageError(f"no grid preset {args.fig!r}")
        overrides = {}
        if args.points is not None:
            overrides = {"r_points": args.points, "tau_points": args.points}
        if args.probability_only:
            overrides["probability_only"] = True
        return replace(spec, **overrides)
    states = _parse_states(args.states or "0,1")
    if len(states) != 1:
        raise UsageError("grid takes exactly one state")
    return GridSpec(
        (args.r_from, args.r_to), (args.tau_from, args.tau_to),
        args.points or 21, args.points or 21, states[0],
        phi=args.phi, dx=args.dx, dp=args.dp, probability_only=args.probability_only,
    )


def cmd_grid(args) -> int:
    spec = _grid_spec(args)
    _emit(run_grid(spec, args.workers), args, spec)
    return EXIT_OK


def oracle_suite(name: str) -> list[tuple[float, float, int, int, float]]:
    """(r, tau, m, n, phi) points of the cross-path agreement grid."""
    if name == "fast":
        rs, taus, phis = (0.3, 0.5), (0.5, 0.9), (0.01, 0.1)
        states = [(0, 1), (0, 2), (1, 0), (2, 0), (1, 1)]
    else:
        rs, taus, phis = (0.3, 0.5, 0.9), (0.5, 0.9), (0.01, 0.1)
        states = [(m, n) for m in range(7) for n in range(7) if m + n <= 6]
    return [(r, t, m, n, ph) for r in rs for t in taus for (m, n) in states for ph in phis]


def run_oracle_check(name: str, dx: float = 2.0, dp: float = 2.0) -> dict[str, float]:
    """Maximum |analytic - oracle| per quantity over a suite."""
    from .oracle import heralded_state, mzi_parity, wigner_displaced_parity
    from .states import wigner_ng

    worst = {"parity": 0.0, "wigner": 0.0, "probability": 0.0}

    def record(name, analytic, reference):
        # an analytic path that fails its own consistency checks counts as a mismatch
        try:
            value = abs(analytic() - reference)
        except ConsistencyError:
            value = math.inf
        worst[name] = max(worst[name], value)

    seen = {}
    for r, tau, m, n, phi in oracle_suite(name):
        key = (r, tau, m, n)
        ng = NGOpParams(r, tau, m, n)
        if key not in seen:
            sig, prob = heralded_state(r, tau, m, n)
            seen[key] = sig
            record("probability", lambda: success_probability(ng), prob)
            for q, p in ((0.0, 0.0), (0.7, -0.4)):
                record("wigner", lambda: wigner_ng(ng, q, p), wigner_displaced_parity(sig, q, p))
        s = MZIScenario(ng, dx, dp, phi)
        record("parity", lambda: parity_expectation(s), mzi_parity(seen[key], s.coherent_amplitude, phi))
    return worst


def cmd_oracle_check(args) -> int:
    worst = run_oracle_check(args.suite)
    tols = {"parity": PARITY_TOL, "wigner": WIGNER_TOL, "probability": PROB_TOL}
    ok = True
    for name, value in worst.items():
        good = value <= tols[name]
        ok &= good
        print(f"{name:12s} max|analytic - oracle| = {value:.3e}  (tol {tols[name]:.0e})  {'ok' if good else 'FAIL'}")
    return EXIT_OK if ok else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ngmzi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p, with_state=True):
        p.add_argument("--r", type=float, default=0.5, help="squeezing parameter")
        p.add_argument("--tau", type=float, default=0.9, help="heralding beam-splitter transmissivity")
        if with_state:
            p.add_argument("--m", type=int, default=0, help="photons injected into the ancilla")
            p.add_argument("--n", type=int, default=1, help="photons detected")
        p.add_argument("--phi", type=float, default=0.01)
        p.add_argument("--dx", type=float, default=2.0)
        p.add_argument("--dp", type=float, default=2.0)

    def table_flags(p):
        p.add_argument("--states", help="'m,n;m,n;...'")
        p.add_argument("--points", type=int)
        p.add_argument("--fig", help="figure preset, e.g. 2a, 3b, 4a, 6")
        p.add_argument("--out", help="output path ('-' or omitted: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--no-meta", action="store_true", help="skip the .meta.json sidecar")
        p.add_argument("--workers", type=int, help="process count (capped by NGMZI_THREADS)")

    p = sub.add_parser("sensitivity", help="phase sensitivity at one point (JSON)")
    scenario_flags(p)
    p.add_argument("--oracle", action="store_true", help="also compare parity with the Fock simulator")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("sweep", help="1D sweep over r, tau or phi")
    scenario_flags(p, with_state=False)
    table_flags(p)
    p.add_argument("--axis", choices=("r", "tau", "phi"))
    p.add_argument("--from", dest="lo", type=float)
    p.add_argument("--to", dest="hi", type=float)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid", help="(r, tau) grid of P^NG and D^NG")
    scenario_flags(p, with_state=False)
    table_flags(p)
    p.add_argument("--r-from", type=float, default=0.0)
    p.add_argument("--r-to", type=float, default=2.0)
    p.add_argument("--tau-from", type=float, default=0.0)
    p.add_argument("--tau-to", type=float, default=1.0)
    p.add_argument("--probability-only", action="store_true")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("oracle-check", help="analytic vs Fock-space agreement")
    p.add_argument("--suite", choices=("fast", "full"), default="fast")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return args.func(args)
    except (UsageError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConsistencyError, NgmziError) as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
