"""Command-line front end: ``hngarch {optimize,simulate,wel,converge,mgf}``.

Settings come from built-in defaults, then ``--config FILE`` (or the metadata
header of an earlier CSV via ``--replay``), then ``--<key> VALUE`` flags.
Every CSV starts with ``# key = value`` lines holding the full resolved
configuration, so ``--replay out.csv`` regenerates the same file.

Exit codes: 0 success, 2 invalid configuration, 3 admissibility failure,
4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .config import ALIASES, KEYS, RunConfig, coerce, format_value, from_csv_header, load_file
from .errors import HNGarchError, InadmissibleCoefficient, MgfDivergent, NonStationary, ValidationError
from .limits import (
    DEFAULT_DELTAS,
    SCALING_CONVENTION,
    convergence_sweep,
    heston_schedule,
    merton_schedule,
    merton_weight,
)
from .mgf import cumulants_from_mgf, mgf_coefficients
from .model import expected_variance, long_run_variance, validate
from .recursion import (
    Preferences,
    StrategySchedule,
    evaluate_suboptimal,
    expected_utility,
    solve_optimal,
    value_at,
    wealth_equivalent_loss,
)
from .simulate import (
    QUANTILE_LEVELS,
    ReturnAccumulator,
    iter_paths,
)
from .stats import RunningMoments

EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBILITY, EXIT_IO = 0, 2, 3, 4
SWEEPABLE = ("gamma", "omega", "beta", "alpha", "theta", "lam")
SCHEDULES = ("optimal", "merton", "heston")
# Accepted spellings of the optimal schedule on the command line.
OPTIMAL_ALIASES = ("optimal", "egz")


class CsvArtifact:
    """A CSV file with ``#`` metadata lines, a header row and fixed-width rows."""

    def __init__(self, path: Path, columns: Sequence[str], meta: Sequence[tuple[str, Any]]):
        self.path = Path(path)
        self.columns = list(columns)
        self.meta = list(meta)
        self.rows: list[list[str]] = []

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} fields, schema has {len(self.columns)}")
        self.rows.append([_cell(v) for v in values])

    def write(self) -> Path:
        lines = [f"# {k} = {format_value(v)}" for k, v in self.meta]
        lines.append(",".join(self.columns))
        lines.extend(",".join(row) for row in self.rows)
        with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        return self.path


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (np.floating, float)):
        return format(float(value) + 0.0, ".17g")
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return format_value(value)


def _meta(cfg: RunConfig, command: str, extra: Iterable[tuple[str, Any]] = ()) -> list:
    head = [("package", "hngarch_portfolio"), ("version", __version__), ("command", command)]
    return head + list(cfg.resolved().items()) + list(extra)


def _schedule(cfg: RunConfig, params, prefs: Preferences) -> StrategySchedule:
    name = cfg["schedule"]
    if name in OPTIMAL_ALIASES:
        return solve_optimal(params, prefs).pi
    if name == "merton":
        return merton_schedule(params, prefs)
    if name == "heston":
        return heston_schedule(params, prefs, delta_ref=cfg["delta_ref"])
    raise ValidationError(f"schedule must be one of {', '.join(SCHEDULES)}, got {name!r}")


# -- commands -----------------------------------------------------------------


def cmd_optimize(cfg: RunConfig) -> list[Path]:
    params, prefs = cfg.params(), cfg.prefs()
    table = solve_optimal(params, prefs)
    h0 = cfg.h0()
    myopic, hedging = table.myopic(), table.hedging()
    extra = [
        ("h0_resolved", h0),
        ("regime", prefs.regime),
        ("value_function_phi0", value_at(table, 0, prefs.w0, h0)),
        ("admissible_column", "1 - 2*alpha*E[t+1] > 0, the condition used to form pi_star[t]"),
    ]
    csv = CsvArtifact(
        cfg.out_dir / "optimize.csv",
        ["t", "pi_star", "myopic", "hedging", "D", "E", "admissible"],
        _meta(cfg, "optimize", extra),
    )
    for t in range(prefs.T):
        csv.add(t, table.pi[t], myopic[t], hedging[t], table.D[t], table.E[t], table.admissible[t + 1])
    return [csv.write()]


class _ColumnMoments:
    """Per-column running mean and variance merged chunk by chunk."""

    def __init__(self, width: int):
        self.n = 0
        self.mean = np.zeros(width)
        self.M2 = np.zeros(width)

    def push(self, block: np.ndarray) -> None:
        nb = block.shape[0]
        if nb == 0:
            return
        mb = block.mean(axis=0)
        m2b = ((block - mb) ** 2).sum(axis=0)
        n = self.n + nb
        delta = mb - self.mean
        self.M2 = self.M2 + m2b + delta**2 * self.n * nb / n
        self.mean = self.mean + delta * nb / n
        self.n = n

    def std(self) -> np.ndarray:
        return np.sqrt(self.M2 / (self.n - 1)) if self.n > 1 else np.full_like(self.mean, np.nan)


def cmd_simulate(cfg: RunConfig) -> list[Path]:
    params, prefs = cfg.params(), cfg.prefs()
    sim = cfg.sim_config()
    schedule = _schedule(cfg, params, prefs)
    T = prefs.T

    w_cols, v_cols, h_cols = _ColumnMoments(T + 1), _ColumnMoments(T + 1), _ColumnMoments(T + 1)
    proxy, exact = ReturnAccumulator(prefs, "proxy"), ReturnAccumulator(prefs, "exact")
    gaps, cumulative, daily_sample = [], [], []
    daily_moments, cumulative_moments = RunningMoments(), RunningMoments()
    n_excluded = 0
    sample_left = cfg["cash_sample_paths"]

    for chunk in iter_paths(params, sim, schedule, cfg["chunk_size"], cfg["n_workers"]):
        w_cols.push(chunk.w_proxy)
        v_cols.push(chunk.v_exact)
        h_cols.push(chunk.h)
        proxy.push(chunk)
        exact.push(chunk)
        gap = (chunk.v_exact[:, -1] - np.exp(chunk.w_proxy[:, -1])) / sim.v0
        gaps.append(gap[chunk.valid])
        n_excluded += int(chunk.n - chunk.valid.sum())
        cum = (chunk.cash * np.exp(chunk.w_proxy[:, :-1])).sum(axis=1) / sim.v0
        cumulative.append(cum)
        cumulative_moments.push(cum)
        daily_moments.push(chunk.cash)
        if sample_left > 0:
            daily_sample.append(chunk.cash[:sample_left].reshape(-1))
            sample_left -= min(sample_left, chunk.n)

    base = _meta(cfg, "simulate", [("h0_resolved", sim.h0), ("schedule_label", schedule.label)])
    out = []

    paths_csv = CsvArtifact(
        cfg.out_dir / "simulate_paths.csv",
        ["t", "mean_w_proxy", "sd_w_proxy", "closed_form_mean_w", "mean_v_exact", "mean_h_next"],
        base,
    )
    sd = w_cols.std()
    closed = _expected_log_wealth_path(params, schedule, sim.h0, math.log(sim.v0))
    for t in range(T + 1):
        paths_csv.add(t, w_cols.mean[t], sd[t], closed[t], v_cols.mean[t], h_cols.mean[t])
    out.append(paths_csv.write())

    gap_all = np.concatenate(gaps)
    gap_csv = CsvArtifact(
        cfg.out_dir / "simulate_gap.csv", ["statistic", "value"],
        base + [("gap_definition", "(exact terminal wealth - proxy terminal wealth) / initial wealth")],
    )
    for q, val in _quantiles(gap_all):
        gap_csv.add(f"q{q:g}", val)
    gap_csv.add("mean", float(gap_all.mean()) if gap_all.size else float("nan"))
    gap_csv.add("n_valid", int(gap_all.size))
    gap_csv.add("n_excluded", n_excluded)
    out.append(gap_csv.write())

    daily = np.concatenate(daily_sample)
    cum_all = np.concatenate(cumulative)
    cash_csv = CsvArtifact(
        cfg.out_dir / "simulate_cash.csv", ["kind", "statistic", "value"],
        base + [
            ("daily_definition", "cash paid in per period as a fraction of wealth at its start"),
            ("daily_quantile_paths", min(cfg["cash_sample_paths"], sim.n_paths)),
            ("cumulative_definition", "sum of cash paid in over the horizon / initial wealth"),
        ],
    )
    for kind, values, mom in (("daily", daily, daily_moments), ("cumulative", cum_all, cumulative_moments)):
        for q, val in _quantiles(values):
            cash_csv.add(kind, f"q{q:g}", val)
        cash_csv.add(kind, "mean", mom.mean)
        cash_csv.add(kind, "sd", mom.std())
        cash_csv.add(kind, "skewness", mom.skewness)
        cash_csv.add(kind, "kurtosis", mom.kurtosis)
    out.append(cash_csv.write())

    closed = expected_utility(params, prefs, schedule, sim.h0)
    ret_csv = CsvArtifact(
        cfg.out_dir / "simulate_returns.csv",
        ["wealth", "n", "mean", "stdev", "skewness", "kurtosis", "sharpe_ratio",
         "excess_sharpe", "expected_utility_mc", "utility_sem", "expected_utility_closed_form"],
        base + [("annualisation", "252 periods per year; sharpe_ratio = mean / stdev")],
    )
    for name, acc in (("proxy", proxy), ("exact", exact)):
        s = acc.result()
        ret_csv.add(name, s.n, s.mean, s.stdev, s.skewness, s.kurtosis, s.sharpe_ratio,
                    s.excess_sharpe, s.expected_utility, s.utility_sem, closed)
    out.append(ret_csv.write())
    return out


def _expected_log_wealth_path(params, schedule, h1: float, w_start: float) -> np.ndarray:
    """``E_0[W_t]`` for every ``t`` in one pass (same drift terms as ``expected_log_wealth``)."""
    pi = schedule.pi
    drift = ((params.lam + 0.5) * pi - 0.5 * pi * pi) * np.array(
        [expected_variance(params, h1, j) for j in range(pi.size)]
    )
    return w_start + params.r * np.arange(pi.size + 1) + np.concatenate(([0.0], np.cumsum(drift)))


def _quantiles(values: np.ndarray):
    if values.size == 0:
        return [(q, float("nan")) for q in QUANTILE_LEVELS]
    return list(zip(QUANTILE_LEVELS, np.quantile(values, QUANTILE_LEVELS).tolist()))


def _sweep_values(cfg: RunConfig, base) -> tuple[float, ...]:
    if cfg["sweep_values"] is not None:
        return cfg["sweep_values"]
    n = cfg["n_points"]
    if cfg["sweep"] == "gamma":
        return tuple(np.linspace(-10.0, -0.1, n).tolist())
    centre = getattr(base, cfg["sweep"])
    return tuple((centre * np.linspace(0.5, 2.0, n)).tolist())


def cmd_wel(cfg: RunConfig) -> list[Path]:
    base = cfg.params()
    name = cfg["sweep"]
    if name not in SWEEPABLE:
        raise ValidationError(f"sweep must be one of {', '.join(SWEEPABLE)}, got {name!r}")
    h_next = long_run_variance(base) if cfg["h_next"] is None else cfg["h_next"]
    t = cfg["t_eval"]
    if not 0 <= t < cfg["T"]:
        raise ValidationError(f"t_eval must lie in [0, T), got {t}")
    csv = CsvArtifact(
        cfg.out_dir / "wel.csv",
        ["sweep", "value", "L_merton", "L_heston", "L_optimal", "pi0_optimal", "pi_merton", "status"],
        _meta(cfg, "wel", [("h_next_resolved", h_next), ("scaling_convention", SCALING_CONVENTION)]),
    )
    nan = float("nan")
    for value in _sweep_values(cfg, base):
        try:
            if name == "gamma":
                params, prefs = base, Preferences(value, cfg["T"], cfg["w0"])
            else:
                params, prefs = validate(base.with_(**{name: value})), cfg.prefs()
        except NonStationary:
            csv.add(name, value, nan, nan, nan, nan, nan, "nonstationary")
            continue
        except ValidationError:
            csv.add(name, value, nan, nan, nan, nan, nan, "invalid")
            continue
        opt = solve_optimal(params, prefs, strict=False)
        if opt.first_violation is not None:
            csv.add(name, value, nan, nan, nan, nan, nan, f"inadmissible_optimal_t={opt.first_violation}")
            continue
        merton = evaluate_suboptimal(params, prefs, merton_schedule(params, prefs), strict=False)
        status = "ok"
        l_merton = nan
        if merton.first_violation is None:
            l_merton = wealth_equivalent_loss(opt, merton, t, h_next).loss
        else:
            status = f"inadmissible_merton_t={merton.first_violation}"
        l_heston = nan
        try:
            hs = heston_schedule(params, prefs, delta_ref=cfg["delta_ref"])
            heston = evaluate_suboptimal(params, prefs, hs, strict=False)
            if heston.first_violation is None:
                l_heston = wealth_equivalent_loss(opt, heston, t, h_next).loss
            else:
                status = f"inadmissible_heston_t={heston.first_violation}"
        except InadmissibleCoefficient as exc:
            status = f"inadmissible_heston_t={exc.t}"
        l_opt = wealth_equivalent_loss(opt, opt, t, h_next).loss
        csv.add(name, value, l_merton, l_heston, l_opt, opt.pi[0],
                merton_weight(params, prefs.gamma), status)
    return [csv.write()]


def cmd_converge(cfg: RunConfig) -> list[Path]:
    params, prefs = cfg.params(), cfg.prefs()
    deltas = DEFAULT_DELTAS if cfg["deltas"] is None else cfg["deltas"]
    horizon = cfg.horizon_days()
    rows = convergence_sweep(params, prefs, horizon, deltas, cfg["delta_ref"])
    csv = CsvArtifact(
        cfg.out_dir / "converge.csv",
        ["delta", "n_periods", "pi_0", "pi_heston", "gap", "pi_merton"],
        _meta(cfg, "converge", [
            ("horizon_days_resolved", horizon),
            ("scaling_convention", SCALING_CONVENTION),
            ("heston_baseline", "optimal recursion on the delta_ref grid"),
        ]),
    )
    pm = merton_weight(params, prefs.gamma)
    for row in rows:
        csv.add(row.delta, row.n_periods, row.pi_0, row.pi_heston, row.gap, pm)
    return [csv.write()]


def _default_u_grid(gamma: float) -> tuple[float, ...]:
    return tuple(sorted({-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, float(gamma)}))


def cmd_mgf(cfg: RunConfig) -> list[Path]:
    params, prefs = cfg.params(), cfg.prefs()
    schedule = _schedule(cfg, params, prefs)
    h0 = cfg.h0()
    w0 = prefs.w0
    grid = _default_u_grid(prefs.gamma) if cfg["u_grid"] is None else cfg["u_grid"]
    extra = [("h0_resolved", h0)]
    if cfg["schedule"] in OPTIMAL_ALIASES:
        phi0 = value_at(solve_optimal(params, prefs), 0, w0, h0)
        extra += [
            ("value_function_phi0", phi0),
            ("identity", "Psi at u = gamma divided by gamma equals value_function_phi0"),
        ]
    csv = CsvArtifact(
        cfg.out_dir / "mgf.csv", ["u", "A_0", "B_0", "Psi", "status"], _meta(cfg, "mgf", extra),
    )
    nan = float("nan")
    for u in grid:
        c = mgf_coefficients(params, prefs, schedule, u, strict=False)
        if c.divergent:
            csv.add(u, nan, nan, nan, f"divergent_t={c.first_violation}")
            continue
        exponent = u * w0 + c.A[0] + c.B[0] * h0
        try:
            csv.add(u, c.A[0], c.B[0], math.exp(exponent), "ok")
        except OverflowError:
            csv.add(u, c.A[0], c.B[0], math.inf, "overflow")

    cum = cumulants_from_mgf(params, prefs, schedule, w0, h0)
    block = CsvArtifact(
        cfg.out_dir / "mgf_cumulants.csv", ["statistic", "value"],
        _meta(cfg, "mgf", extra + [("method", "central differences of log Psi in u")]),
    )
    for n, k in enumerate(cum.kappa, 1):
        block.add(f"kappa{n}", k)
    block.add("mean", cum.mean)
    block.add("variance", cum.variance)
    block.add("skewness", cum.skewness)
    block.add("excess_kurtosis", cum.excess_kurtosis)
    block.add("step", cum.step)
    return [csv.write(), block.write()]


COMMANDS = {
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "wel": cmd_wel,
    "converge": cmd_converge,
    "mgf": cmd_mgf,
}


# -- argument handling ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat 'key = value' settings file")
    common.add_argument("--replay", metavar="CSV", help="take settings from a CSV metadata header")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    keys = common.add_argument_group("settings (override the config file)")
    for key in KEYS:
        keys.add_argument(f"--{key}", dest=f"key_{key}", metavar="VALUE")
    for alias, key in ALIASES.items():
        keys.add_argument(f"--{alias}", dest=f"key_{key}", metavar="VALUE", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="hngarch",
        description="Optimal dynamic portfolios under Heston-Nandi GARCH(1,1).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "optimize": "optimal allocation and value-function coefficients per period",
        "simulate": "Monte Carlo study of returns, wrapping gap and cash flows",
        "wel": "wealth-equivalent loss of the Merton and Heston schedules",
        "converge": "initial optimal weight as the period length shrinks",
        "mgf": "moment generating function of terminal log-wealth",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    file_values: dict = {}
    if args.replay:
        file_values.update(from_csv_header(args.replay))
    if args.config:
        file_values.update(load_file(args.config))
    raw = {k[4:]: v for k, v in vars(args).items() if k.startswith("key_") and v is not None}
    return RunConfig.build(file_values, coerce(raw), out_dir=args.out)


def _attach_dash_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--key -1,2`` into ``--key=-1,2`` so argparse does not read ``-1,2`` as a flag."""
    names = {f"--{k}" for k in (*KEYS, *ALIASES)}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in names and i + 1 < len(argv) and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_dash_values(argv))
    try:
        cfg = resolve(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.command](cfg)
    except (InadmissibleCoefficient, MgfDivergent) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (HNGarchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
