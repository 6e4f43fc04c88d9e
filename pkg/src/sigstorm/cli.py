"""Command-line front end; every command writes one CSV table.

Each table starts with a ``#`` comment block holding the full run
configuration (re-parseable after stripping ``# ``), followed by a header
row.  Floats are written with ``repr`` so output is exact and locale
independent.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from sigstorm.analytic import OCCUPANCY_FIELDS, evaluate_loads, stationary_distribution
from sigstorm.config import ConfigError, RunSpec, SweepAxis, dump_config, load_config, spec_problems
from sigstorm.model import (COST_KEYS, RATE_KEYS, UMTS_COSTS, ModelParams, SignallingCosts, State,
                            build_transition_table, with_pch)
from sigstorm.optimizer import core_alpha_H_hat, core_optimal_alpha_L, optimize_all, radio_limit_load
from sigstorm.presets import FIG5_MAX_FRACTION, FIG5_USERS, PRESETS
from sigstorm.sim import METRICS, confidence, simulate, sort_replications
from sigstorm.storm import detection_metrics, storm_curves, worst_case_policies

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_MISMATCH = 0, 2, 3, 4

COMMANDS = ("solve", "loads", "optimize", "sweep", "simulate", "storm", "verify",
            "fig2", "fig3", "fig4", "fig5")

SIM_Z_TOLERANCE = 4.0
ORACLE_TOLERANCE = 1e-9


class NumericalFailure(ArithmeticError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    status: int = EXIT_OK


def point_metrics(p: ModelParams, c: SignallingCosts) -> dict[str, float]:
    """Every scalar output available to ``sweep``, for one parameter set."""
    rep = evaluate_loads(p, c)
    d = stationary_distribution(p, c)
    occ = rep.occupancy
    det = detection_metrics(p, c)
    out = {"gamma_r": rep.gamma_r, "gamma_c": rep.gamma_c, **occ.as_dict(),
           "active": occ.active, "inactive": occ.inactive, "waiting": occ.waiting,
           "promotion_rate": det.promotion_rate}
    out.update({f"pi_{s.value}": d.pi[s] for s in State})
    return out


SWEEP_METRICS = tuple(point_metrics(PRESETS["fig2"], UMTS_COSTS))


def apply_value(p: ModelParams, c: SignallingCosts, name: str, value: float):
    if name in RATE_KEYS:
        return replace(p, **{name: float(value)}), c
    if name in COST_KEYS:
        return p, replace(c, **{name: float(value)})
    raise ConfigError([f"{name!r} cannot be swept here"])


def _sweep_job(args):
    p, c, name, value = args
    p, c = apply_value(p, c, name, value)
    return point_metrics(p, c)


def _fan_out(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [fn(j) for j in jobs]


def _check_points(spec: RunSpec, axis: SweepAxis) -> None:
    problems = []
    for v in axis.values():
        p, c = apply_value(spec.params, spec.costs, axis.param, v)
        for msg in spec_problems(replace(spec, params=p, costs=c, sweep=None)):
            problems.append(f"{axis.param}={float(v)!r}: {msg}")
    if problems:
        raise ConfigError(problems[:10])


# commands ---------------------------------------------------------------------

def cmd_solve(spec: RunSpec, workers: int) -> Table:
    d = stationary_distribution(spec.params, spec.costs)
    t = Table(["state", "pi", "weight"])
    for s in State:
        t.rows.append([s.value, d.pi[s], d.weights[s]])
    t.notes = [f"G = {d.G!r}", f"sum_pi_weight = {d.normalisation()!r}"]
    return t


def cmd_loads(spec: RunSpec, workers: int) -> Table:
    m = point_metrics(spec.params, spec.costs)
    return Table(["quantity", "value"], [[k, v] for k, v in m.items()])


def cmd_optimize(spec: RunSpec, workers: int) -> Table:
    t = Table(["result", "field", "value"])
    for name, r in optimize_all(spec.params, spec.costs).items():
        for f in ("policy", "alpha_L_star", "alpha_H_star", "gamma_star", "alpha_H_hat",
                  "no_profitable_attack", "regime_warning"):
            v = getattr(r, f)
            t.rows.append([name, f, "" if v is None else (str(v) if not isinstance(v, float) else v)])
        for k, v in r.intermediates.items():
            t.rows.append([name, f"intermediate.{k}", v])
    t.rows.append(["radio", "limit_load_at_alpha_H_0",
                   radio_limit_load(spec.params.with_attack(0, 0), spec.costs, 0.0)])
    return t


def cmd_sweep(spec: RunSpec, workers: int) -> Table:
    axis = spec.sweep
    if axis is None:
        raise ConfigError(["sweep needs --sweep PARAM=lo:hi:points[:log]"])
    if axis.param == "fraction":
        raise ConfigError(["fraction sweeps belong to the storm command"])
    metrics = list(SWEEP_METRICS) if spec.metric is None else spec.metric.split(",")
    unknown = [m for m in metrics if m not in SWEEP_METRICS]
    if unknown:
        raise ConfigError([f"unknown metric {m!r}; choose from {', '.join(SWEEP_METRICS)}"
                           for m in unknown])
    _check_points(spec, axis)
    values = axis.values()
    results = _fan_out(_sweep_job, [(spec.params, spec.costs, axis.param, float(v)) for v in values],
                       workers)
    t = Table([axis.param] + metrics)
    for v, r in zip(values, results):
        t.rows.append([float(v)] + [r[m] for m in metrics])
    return t


def _sim_job(args):
    table, seed, horizon, ids = args
    return simulate(table, seed, horizon, replication_ids=ids)


def _finite(spec: RunSpec) -> None:
    if spec.params.has_infinite_rate:
        raise ConfigError(["simulation needs finite rates"])


def run_simulation(spec: RunSpec, workers: int):
    _finite(spec)
    table = build_transition_table(spec.params, spec.costs)
    ids = list(range(spec.replications))
    groups = [ids[i::max(1, workers)] for i in range(max(1, workers))]
    parts = _fan_out(_sim_job, [(table, spec.seed, spec.horizon, g) for g in groups if g], workers)
    stats = parts[0]
    for s in parts[1:]:
        stats = stats.merge(s)
    stats = sort_replications(stats)
    return stats, stats.per_replication()


def cmd_simulate(spec: RunSpec, workers: int) -> Table:
    stats, per = run_simulation(spec, workers)
    t = Table(["replication"] + list(METRICS))
    for i in range(spec.replications):
        t.rows.append([i] + [float(per[m][i]) for m in METRICS])
    if spec.replications >= 2:
        est = confidence(stats)
        for row, attr in (("mean", "mean"), ("stderr", "stderr"), ("rel_half_width", "rel_half_width")):
            t.rows.append([row] + [getattr(est[m], attr) for m in METRICS])
        t.notes = ["imprecise = " + ",".join(m for m in METRICS if est[m].imprecise)]
    rep = evaluate_loads(spec.params, spec.costs)
    analytic = {"gamma_r": rep.gamma_r, "gamma_c": rep.gamma_c, **rep.occupancy.as_dict()}
    t.rows.append(["analytic"] + [analytic[m] for m in METRICS])
    return t


def _fractions(spec: RunSpec) -> np.ndarray:
    if spec.sweep is None:
        return np.linspace(0.0, FIG5_MAX_FRACTION, 21)
    if spec.sweep.param != "fraction":
        raise ConfigError(["storm sweeps must be over fraction"])
    f = spec.sweep.values()
    if f.min() < 0 or f.max() > 1:
        raise ConfigError(["fraction must lie in [0, 1]"])
    return f


STORM_COLUMNS = ["policy", "alpha_L", "alpha_H", "fraction", "gamma_r_total", "gamma_c_total"]


def cmd_storm(spec: RunSpec, workers: int) -> Table:
    normal = spec.params.with_attack(0.0, 0.0)
    rows = storm_curves(normal, spec.costs, spec.n_users, _fractions(spec))
    return Table(STORM_COLUMNS, [[r[k] for k in STORM_COLUMNS] for r in rows])


def cmd_verify(spec: RunSpec, workers: int) -> Table:
    from sigstorm.verify import compare_with_oracle, compare_with_simulation, oracle_batch

    t = Table(["check", "subject", "value", "tolerance", "pass"])
    batch = oracle_batch(spec.samples, spec.seed, workers)
    for f in ("pi", "gamma_r", "gamma_c", "signalling"):
        worst = max(getattr(r[2], f) for r in batch)
        t.rows.append(["oracle_random_max_rel_err", f, worst, ORACLE_TOLERANCE,
                       worst <= ORACLE_TOLERANCE])
    own = compare_with_oracle(spec.params, spec.costs)
    for f in ("pi", "gamma_r", "gamma_c", "signalling"):
        v = getattr(own, f)
        t.rows.append(["oracle_config_rel_err", f, v, ORACLE_TOLERANCE, v <= ORACLE_TOLERANCE])
    _finite(spec)
    reps = max(spec.replications, 2)
    for chk in compare_with_simulation(spec.params, spec.costs, spec.seed, reps, spec.horizon):
        t.rows.append(["simulation_z", chk.metric, chk.z, SIM_Z_TOLERANCE,
                       abs(chk.z) <= SIM_Z_TOLERANCE])
    t.notes = [f"oracle_samples = {spec.samples}"]
    if not all(r[4] for r in t.rows):
        t.status = EXIT_MISMATCH
    return t


def _two_pch(costs: SignallingCosts) -> dict[str, SignallingCosts]:
    return {"on": with_pch(costs, True), "off": with_pch(costs, False)}


def cmd_fig2(spec: RunSpec, workers: int) -> Table:
    axis = spec.sweep or SweepAxis("alpha_H", 1e-4, 10.0, 200, "log")
    if axis.param != "alpha_H":
        raise ConfigError(["fig2 sweeps alpha_H"])
    base = spec.params.with_attack(0.0, 0.0)
    t = Table(["alpha_H", "gamma_r_pch_on", "gamma_c_pch_on", "gamma_r_pch_off", "gamma_c_pch_off"])
    modes = _two_pch(spec.costs)
    for a in axis.values():
        row = [float(a)]
        for c in modes.values():
            rep = evaluate_loads(base.with_attack(0.0, float(a)), c)
            row += [rep.gamma_r, rep.gamma_c]
        t.rows.append(row)
    for name, c in modes.items():
        hat = core_alpha_H_hat(base, c)
        t.notes += [f"alpha_H_hat_pch_{name} = {hat.alpha_H_star!r}",
                    f"gamma_r_limit_pch_{name} = {radio_limit_load(base, c, math.inf)!r}"]
    return t


def cmd_fig3(spec: RunSpec, workers: int) -> Table:
    base = spec.params.with_attack(0.0, 0.0)
    grid = np.linspace(0.0, 0.1, 51)
    t = Table(["alpha_L", "alpha_H", "gamma_c", "gamma_r"])
    best = None
    for aL in grid:
        for aH in grid:
            rep = evaluate_loads(base.with_attack(float(aL), float(aH)), spec.costs)
            t.rows.append([float(aL), float(aH), rep.gamma_c, rep.gamma_r])
            if best is None or rep.gamma_c > best[2]:
                best = (float(aL), float(aH), rep.gamma_c)
    opt = core_optimal_alpha_L(base, spec.costs)
    t.notes = [f"alpha_L_star = {opt.alpha_L_star!r}", f"gamma_c_star = {opt.gamma_star!r}",
               f"grid_argmax = ({best[0]!r}, {best[1]!r})"]
    return t


def cmd_fig4(spec: RunSpec, workers: int) -> Table:
    axis = spec.sweep or SweepAxis("alpha_H", 0.0, 1.0, 101)
    if axis.param != "alpha_H":
        raise ConfigError(["fig4 sweeps alpha_H"])
    base = spec.params.with_attack(0.0, 0.0)
    cols = list(OCCUPANCY_FIELDS) + ["active", "inactive", "waiting", "promotion_rate"]
    t = Table(["alpha_H"] + cols)
    for a in axis.values():
        m = point_metrics(base.with_attack(0.0, float(a)), spec.costs)
        t.rows.append([float(a)] + [m[k] for k in cols])
    return t


def cmd_fig5(spec: RunSpec, workers: int) -> Table:
    normal = spec.params.with_attack(0.0, 0.0)
    t = Table(["pch"] + STORM_COLUMNS)
    for name, c in _two_pch(spec.costs).items():
        pol = worst_case_policies(normal, c)
        for r in storm_curves(normal, c, spec.n_users, _fractions(spec), pol):
            t.rows.append([name] + [r[k] for k in STORM_COLUMNS])
    return t


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}
_PCH_AGNOSTIC = ("fig2", "fig5")


# plumbing ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sigstorm", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--preset", choices=sorted(PRESETS))
    ap.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--sweep", metavar="PARAM=lo:hi:points[:log]")
    ap.add_argument("--pch", choices=("on", "off"))
    ap.add_argument("--metric", help="comma-separated sweep outputs (default: all)")
    ap.add_argument("--replications", type=int)
    ap.add_argument("--horizon", type=float, help="simulated seconds per replication")
    ap.add_argument("--users", type=int, dest="n_users")
    ap.add_argument("--samples", type=int, help="random parameter sets for verify")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--dump-config", metavar="PATH",
                    help="write the resolved configuration ('-' for stdout) and exit")
    return ap


def resolve_spec(args: argparse.Namespace) -> RunSpec:
    preset = args.preset
    if args.command.startswith("fig") and preset is None and args.config is None:
        preset = args.command
    if args.config and preset:
        raise ConfigError(["give either --config or --preset, not both"])
    if args.config:
        spec = load_config(args.config, command=args.command, out=args.out)
    elif preset:
        spec = RunSpec(command=args.command, params=PRESETS[preset], out=args.out)
        if args.command == "fig5":
            spec = replace(spec, n_users=FIG5_USERS)
    elif args.command == "verify":
        spec = RunSpec(command=args.command, params=PRESETS["fig2"], out=args.out)
    else:
        raise ConfigError(["no parameters: give --config PATH or --preset NAME"])

    upd = {}
    for k in ("seed", "replications", "horizon", "n_users", "samples", "metric"):
        if getattr(args, k) is not None:
            upd[k] = getattr(args, k)
    if args.sweep is not None:
        upd["sweep"] = SweepAxis.parse(args.sweep)
    if args.pch is not None:
        if args.command in _PCH_AGNOSTIC:
            raise ConfigError([f"{args.command} always compares PCH on and off; drop --pch"])
        upd["costs"] = with_pch(spec.costs, args.pch == "on")
    if args.workers < 1:
        raise ConfigError(["--workers must be >= 1"])
    spec = replace(spec, **upd)
    problems = spec_problems(spec)
    if problems:
        raise ConfigError(problems)
    return spec


def render(spec: RunSpec, table: Table, preset: str | None) -> str:
    buf = io.StringIO()
    buf.write(f"# command = {spec.command}\n")
    if preset:
        buf.write(f"# preset = {preset}\n")
    for line in dump_config(spec).splitlines():
        buf.write(f"# {line}\n" if line else "#\n")
    for note in table.notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            raise NumericalFailure("result is NaN")
        return repr(v)
    return str(v)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = resolve_spec(args)
        if args.dump_config:
            text = dump_config(spec)
            if args.dump_config == "-":
                sys.stdout.write(text)
            else:
                with open(args.dump_config, "w") as fh:
                    fh.write(text)
            return EXIT_OK
        table = HANDLERS[spec.command](spec, args.workers)
        preset = args.preset or (spec.command if spec.command.startswith("fig") and not args.config else None)
        text = render(spec, table, preset)
        if spec.out:
            with open(spec.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return table.status
    except ConfigError as exc:
        for line in exc.problems:
            print(f"sigstorm: config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"sigstorm: config error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError) as exc:
        print(f"sigstorm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
