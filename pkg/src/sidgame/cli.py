"""Command-line entry point: ``sidgame <command> [options]``.

Grids go out as CSV, scalar reports as JSON. Exit status is 0 on success,
1 when ``verify`` finds a violation and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import delay_game as dg
from .filippov import equilibrium_trajectory, lemma_monotonicity_suite, shadow_value
from .model import GameParams
from .oracle import derivative_check, nash_residual

# lattice deviants may beat the closed form by at most the integration error
RESIDUAL_TOL = 1e-7
DERIVATIVE_TOL = 1e-6


@dataclass(frozen=True)
class ScenarioConfig:
    population: float
    initial_cases: float
    doubling_time: float  # weeks
    infection_cost: float  # currency
    max_weekly_spend: float  # currency per week
    vaccine_wait: float  # weeks

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.initial_cases >= self.population:
            raise ValueError("initial_cases must be smaller than population")

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls(**json.load(fh))


def time_unit_weeks(s: ScenarioConfig) -> float:
    """Length in weeks of one nondimensional time unit, ``1 / (beta N)``."""
    return s.doubling_time / math.log(2.0)


def nondimensionalize(s: ScenarioConfig) -> GameParams:
    unit = time_unit_weeks(s)
    return GameParams(
        m=s.infection_cost / (s.max_weekly_spend * unit),
        i0=s.initial_cases / s.population,
        tf=s.vaccine_wait / unit,
    )


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _emit_json(obj, out):
    json.dump(obj, out, indent=2, sort_keys=False, default=str)
    out.write("\n")


def _emit_csv(header, rows, out):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _params(args) -> GameParams:
    if args.scenario:
        return nondimensionalize(ScenarioConfig.from_file(args.scenario))
    missing = [f"--{k}" for k in ("m", "i0", "tf") if getattr(args, k) is None]
    if missing:
        raise UsageError(f"missing {', '.join(missing)} (or give --scenario)")
    return GameParams(args.m, args.i0, args.tf)


class UsageError(Exception):
    pass


def cmd_equilibrium(params: GameParams) -> dict:
    eq = dg.nash_equilibrium(params)
    report = dg.improvement_over_indifference(params)
    return {
        "m": params.m,
        "i0": params.i0,
        "tf": params.tf,
        "x_star": eq.x_star,
        "regime": eq.regime.value,
        "residual": eq.residual,
        "emblematic_disutility": dg.emblematic_disutility(eq.x_star, params),
        "burden": report.burden,
        "burden_indifferent": report.burden_indifferent,
        "improvement": report.improvement,
    }


def cmd_surface(params: GameParams, grid: int):
    xs = np.linspace(0.0, params.tf, grid)
    header = ["x", "xbar", "disutility", "relative_disutility", "emblematic_disutility"]
    rows = []
    for xbar in xs:
        emblem = dg.emblematic_disutility(xbar, params)
        for x in xs:
            d = dg.restricted_disutility(x, xbar, params)
            rows.append((x, xbar, d, d / emblem, emblem))
    return header, rows


def _axis(values, log=False):
    if len(values) == 1:
        return np.array(values, dtype=float)
    if len(values) != 3:
        raise UsageError("ranges take one value or START STOP NUM")
    start, stop, num = values
    if num != int(num) or num < 1:
        raise UsageError("NUM must be a positive integer")
    space = np.geomspace if log else np.linspace
    return space(start, stop, int(num))


def cmd_sweep(tfs, i0s, ms):
    header = [
        "tf", "i0", "m", "regime", "x_star", "burden", "burden_indifferent",
        "improvement", "relative_improvement", "degenerate",
    ]
    rows = []
    for m in ms:
        for i0 in i0s:
            for tf in tfs:
                params = GameParams(float(m), float(i0), float(tf))
                eq = dg.nash_equilibrium(params)
                rep = dg.improvement_over_indifference(params)
                rel = rep.improvement / rep.burden_indifferent
                # constant risk: everyone is already infected, burden is identically 1
                degenerate = params.constant_risk
                rows.append((
                    tf, i0, m, eq.regime.value, eq.x_star, rep.burden,
                    rep.burden_indifferent, rep.improvement, rel, degenerate,
                ))
    return header, rows


def cmd_filippov(params: GameParams) -> dict:
    traj = equilibrium_trajectory(params)
    end = traj.terminal_state
    return {
        "m": params.m,
        "i0": params.i0,
        "tf": params.tf,
        "phi0": traj.phi0,
        "v0": traj.v0,
        "disutility": traj.disutility,
        "tau": traj.tau,
        "delay": traj.delay,
        "terminal": {"i": end.i, "phi": end.phi, "v": shadow_value(end)},
        "segments": [
            {
                "t0": seg.start.t,
                "i0": seg.start.i,
                "phi0": seg.start.phi,
                "control": seg.control,
                "duration": seg.duration,
            }
            for seg in traj.segments
        ],
    }


VERIFY_LEVELS = {1: {"grid": 2001, "n_intervals": 8}, 2: {"grid": 10001, "n_intervals": 12}}


def cmd_verify(params: GameParams, level: int = 2) -> tuple[dict, bool]:
    settings = VERIFY_LEVELS[level]
    ess = dg.ess_check(params, settings["grid"])
    ess_ok = ess.holds if ess.covered else ess.nash_slack >= 0

    mono = lemma_monotonicity_suite(params)

    residual = nash_residual(params, settings["n_intervals"])
    residual_ok = residual >= -RESIDUAL_TOL

    deriv = None
    deriv_ok = True
    if not params.constant_risk:
        tf = params.tf
        points = [(tf / 4, tf / 2), (tf / 2, tf / 4), (tf / 2, tf / 2), (0.8 * tf, 0.3 * tf)]
        deriv = max(derivative_check(p, params) for p in points)
        deriv_ok = deriv <= DERIVATIVE_TOL

    report = {
        "params": {"m": params.m, "i0": params.i0, "tf": params.tf},
        "level": level,
        "ess": {**asdict(ess), "regime": ess.regime.value, "ok": ess_ok},
        "monotonicity": {**asdict(mono), "ok": mono.ok},
        "nash_residual": {"value": residual, "n_intervals": settings["n_intervals"], "ok": residual_ok},
        "derivative_check": {"max_error": deriv, "ok": deriv_ok},
    }
    ok = ess_ok and mono.ok and residual_ok and deriv_ok
    report["ok"] = ok
    return report, ok


def _add_point_args(p):
    p.add_argument("--m", type=float, help="distancing efficiency")
    p.add_argument("--i0", type=float, help="initial infected fraction")
    p.add_argument("--tf", type=float, help="game duration")
    p.add_argument("--scenario", help="JSON file with a dimensional scenario")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sidgame", description=__doc__.splitlines()[0])
    parser.add_argument("--out", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_point_args(sub.add_parser("equilibrium", help="equilibrium duration as JSON"))

    p = sub.add_parser("surface", help="D, relative D and E over an (x, xbar) grid as CSV")
    _add_point_args(p)
    p.add_argument("--grid", type=int, default=61)

    p = sub.add_parser("sweep", help="equilibrium and burden over parameter ranges as CSV")
    p.add_argument("--tf", type=float, nargs="+", required=True, metavar="V")
    p.add_argument("--i0", type=float, nargs="+", required=True, metavar="V",
                   help="geometrically spaced when given as START STOP NUM")
    p.add_argument("--m", type=float, nargs="+", default=[6.0], metavar="V")

    _add_point_args(sub.add_parser("filippov", help="equilibrium trajectory as JSON"))

    p = sub.add_parser("verify", help="run the verification checks; exit 1 on violation")
    _add_point_args(p)
    p.add_argument("--level", type=int, choices=sorted(VERIFY_LEVELS), default=2)

    p = sub.add_parser("nondim", help="convert a dimensional scenario to game parameters")
    p.add_argument("--scenario", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "grid", 2) < 2:
        parser.error("--grid must be at least 2")
    status = 0
    with contextlib.ExitStack() as stack:
        out = stack.enter_context(open(args.out, "w", newline="")) if args.out else sys.stdout
        try:
            if args.command == "equilibrium":
                _emit_json(cmd_equilibrium(_params(args)), out)
            elif args.command == "surface":
                _emit_csv(*cmd_surface(_params(args), args.grid), out)
            elif args.command == "sweep":
                _emit_csv(*cmd_sweep(_axis(args.tf), _axis(args.i0, log=True), _axis(args.m)), out)
            elif args.command == "filippov":
                _emit_json(cmd_filippov(_params(args)), out)
            elif args.command == "verify":
                report, ok = cmd_verify(_params(args), args.level)
                _emit_json(report, out)
                status = 0 if ok else 1
            elif args.command == "nondim":
                scenario = ScenarioConfig.from_file(args.scenario)
                params = nondimensionalize(scenario)
                _emit_json(
                    {"m": params.m, "i0": params.i0, "tf": params.tf,
                     "time_unit_weeks": time_unit_weeks(scenario)},
                    out,
                )
        except (UsageError, ValueError) as exc:
            parser.error(str(exc))
    return status


if __name__ == "__main__":
    sys.exit(main())
