"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 infeasible intensities,
4 I/O failure, 5 soundness violation found by ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from typing import Sequence

from .bounds import decoy_bounds, key_rate
from .channel import plob_bound, simulate_observables
from .config import MODE_NAMES, RunConfig, load_config, parse_distances
from .errors import DomainError, NumericError, SNSError, TruncationError, ValidityError
from .fock import oracle_observables, oracle_untagged_truth
from .lp import lp_s1_lower
from .optimize import Evaluation, optimize_rate, scan_distances
from .params import ProtocolParams

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
EXIT_UNSOUND = 5

CSV_COLUMNS = (
    "L_km", "N", "mode", "mu_x", "mu_y", "mu_z", "epsilon",
    "s01_L", "s10_L", "eph_U", "S_z", "E_z", "R", "plob",
)


def fmt(value: float) -> str:
    return format(value, ".12g")


def csv_row(L_km: float, N: int, mode: str, ev: Evaluation | None, plob: float) -> list[str]:
    """One output row; ``ev is None`` marks a distance with no valid parameter point."""
    if ev is None:
        nan = fmt(math.nan)
        return [fmt(L_km), str(N), mode, nan, nan, nan, nan, fmt(0.0), fmt(0.0), fmt(0.5), nan, nan, fmt(0.0), fmt(plob)]
    p, b, o = ev.params, ev.bounds, ev.observed
    return [
        fmt(L_km), str(N), mode,
        fmt(p.mu_x), fmt(p.mu_y), fmt(p.mu_z), fmt(p.epsilon),
        fmt(b.s01_L), fmt(b.s10_L), fmt(b.eph_U), fmt(o.S_z), fmt(o.E_z),
        fmt(ev.rate), fmt(plob),
    ]


def render_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _summary(L_km: float, ev: Evaluation, plob: float) -> str:
    p, b = ev.params, ev.bounds
    return (
        f"L = {L_km:g} km, N = {p.N}: mu_x = {p.mu_x:.4g}, mu_y = {p.mu_y:.4g}, "
        f"mu_z = {p.mu_z:.4g}, epsilon = {p.epsilon:.4g}\n"
        f"  s1_L = {b.s1_L:.6g}, eph_U = {b.eph_U:.6g}, E_z = {ev.observed.E_z:.6g}\n"
        f"  R = {ev.rate:.6g} bits/pair, PLOB = {plob:.6g}, R/PLOB = {ev.rate / plob if plob > 0 else math.inf:.4g}\n"
    )


def _explicit_params(cfg: RunConfig, N: int) -> ProtocolParams:
    missing = [k for k in ("mu_x", "mu_y", "mu_z", "epsilon") if getattr(cfg, k) is None]
    if missing:
        raise DomainError(f"rate needs explicit intensities; missing {', '.join(missing)}")
    return ProtocolParams(N, cfg.mu_x, cfg.mu_y, cfg.mu_z, cfg.epsilon, cfg.f)


def cmd_rate(cfg: RunConfig, out: str | None) -> int:
    rows, notes = [], []
    for N in cfg.phases:
        p = _explicit_params(cfg, N)
        for L in cfg.distances:
            ch = cfg.channel(L)
            obs = simulate_observables(p, ch)
            bounds = decoy_bounds(obs, p, cfg.policy())
            ev = Evaluation(p, obs, bounds, key_rate(p, obs, bounds, cfg.policy()))
            plob = plob_bound(ch, cfg.plob_include_detector)
            rows.append(csv_row(L, N, "3int" if p.mu_z == p.mu_y else "4int", ev, plob))
            notes.append(_summary(L, ev, plob))
    _emit(render_csv(rows), out)
    (sys.stdout if out else sys.stderr).write("".join(notes))
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, out: str | None) -> int:
    rows, notes = [], []
    for N in cfg.phases:
        for mode in cfg.modes:
            spec = cfg.spec(N, mode)
            for L in cfg.distances:
                ch = cfg.channel(L)
                result = optimize_rate(ch, spec)
                plob = plob_bound(ch, cfg.plob_include_detector)
                rows.append(csv_row(L, N, mode, result.best, plob))
                if result.best is not None:
                    notes.append(f"[{mode}] " + _summary(L, result.best, plob))
                else:
                    notes.append(f"[{mode}] L = {L:g} km, N = {N}: {result.message}\n")
    _emit(render_csv(rows), out)
    (sys.stdout if out else sys.stderr).write("".join(notes))
    return EXIT_OK


def scan_rows(cfg: RunConfig) -> list[list[str]]:
    rows = []
    for N in cfg.phases:
        for mode in cfg.modes:
            scan = scan_distances(cfg.channel(), cfg.spec(N, mode), cfg.distances, cfg.plob_include_detector)
            rows.extend(csv_row(r.L_km, N, mode, r.result.best, r.plob) for r in scan.records)
    return rows


def cmd_scan(cfg: RunConfig, out: str | None) -> int:
    _emit(render_csv(scan_rows(cfg)), out)
    return EXIT_OK


@dataclass(frozen=True)
class VerifyRow:
    L_km: float
    N: int
    params: ProtocolParams
    checks: dict[str, tuple[float, float, bool]]

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.checks.values())


def verify_point(cfg: RunConfig, L_km: float, N: int, p: ProtocolParams | None = None) -> VerifyRow:
    """Bounds from oracle observations against the oracle's exact values at one grid point."""
    ch = cfg.channel(L_km)
    policy = cfg.policy()
    if p is None:
        best = optimize_rate(ch, cfg.spec(N, "4int")).best
        if best is None:
            raise ValidityError(f"no valid parameter point at L = {L_km}, N = {N}")
        p = best.params
    obs = oracle_observables(p, ch, cfg.n_max, cfg.misalignment)
    b = decoy_bounds(obs, p, policy)
    truth = oracle_untagged_truth(p, ch, cfg.n_max, cfg.misalignment, policy)
    lp = lp_s1_lower(obs, p, policy)
    checks = {
        "s01_L <= s01": (b.s01_L, truth.s01, b.s01_L <= truth.s01),
        "s10_L <= s10": (b.s10_L, truth.s10, b.s10_L <= truth.s10),
        "t0r_U >= T0R": (b.t0r_U, truth.t0r, b.t0r_U >= truth.t0r),
        "t1l_U >= T1L": (b.t1l_U, truth.t1l, b.t1l_U >= truth.t1l),
        "eph_U >= eph": (b.eph_U, truth.eph, b.eph_U >= truth.eph),
        "s1_L <= s1_LP": (b.s1_L, lp, b.s1_L <= lp + 1e-9),
        "s1_LP <= s1": (lp, truth.s1, lp <= truth.s1),
    }
    return VerifyRow(L_km, N, p, checks)


def cmd_verify(cfg: RunConfig, out: str | None) -> int:
    explicit = all(getattr(cfg, k) is not None for k in ("mu_x", "mu_y", "mu_z", "epsilon"))
    lines = []
    failures = []
    for N in cfg.verify_phases:
        for L in cfg.verify_distances:
            p = _explicit_params(cfg, N) if explicit else None
            row = verify_point(cfg, L, N, p)
            for name, (bound, truth, ok) in row.checks.items():
                lines.append(f"{L:g}\t{N}\t{name}\t{fmt(bound)}\t{fmt(truth)}\t{'pass' if ok else 'FAIL'}")
            if not row.passed:
                failures.append(row)
    report = "L_km\tN\tcheck\tbound\treference\tstatus\n" + "\n".join(lines) + "\n"
    _emit(report, out)
    if failures:
        for row in failures:
            bad = [k for k, (_, _, ok) in row.checks.items() if not ok]
            print(f"soundness violated at L = {row.L_km:g} km, N = {row.N}, {row.params}: {', '.join(bad)}", file=sys.stderr)
        return EXIT_UNSOUND
    return EXIT_OK


COMMANDS = {"rate": cmd_rate, "optimize": cmd_optimize, "scan": cmd_scan, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snsqkd", description="Discrete-phase SNS twin-field QKD key-rate tools.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="flat key = value config file")
        cmd.add_argument("--out", help="write CSV (or the verify report) here instead of stdout")
        cmd.add_argument("--distance", help="distances in km: a value, a comma list, or start:stop:step")
        cmd.add_argument("--phases", help="phase counts N, comma separated")
        cmd.add_argument("--mode", choices=sorted(MODE_NAMES), help="protocol variant")
        cmd.add_argument("--plob-include-detector", action="store_true", default=None,
                         help="include detector efficiency in the PLOB transmittance")
        for key in ("mu_x", "mu_y", "mu_z", "epsilon"):
            cmd.add_argument("--" + key.replace("_", "-"), dest=key, type=float)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {
        "plob_include_detector": args.plob_include_detector,
        "mu_x": args.mu_x,
        "mu_y": args.mu_y,
        "mu_z": args.mu_z,
        "epsilon": args.epsilon,
    }
    if args.distance is not None:
        overrides["distances"] = parse_distances(args.distance)
        overrides["verify_distances"] = overrides["distances"]
    if args.phases is not None:
        try:
            phases = tuple(int(t) for t in args.phases.split(","))
        except ValueError:
            raise DomainError(f"--phases must be comma-separated integers, got {args.phases!r}") from None
        overrides["phases"] = phases
        overrides["verify_phases"] = phases
    if args.mode is not None:
        overrides["modes"] = (args.mode,)
    return cfg.with_overrides(**overrides)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command](cfg, args.out)
    except ValidityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DomainError, TruncationError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericError, SNSError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
