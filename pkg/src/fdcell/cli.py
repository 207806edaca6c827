"""Command-line front end: config parsing, sweeps, validation runs, emission.

Subcommands: analytic, simulate, validate, sweep, pulses.  Parameters come
from layered sources: built-in defaults, then an INI config file, then
command-line flags.  Powers accept dBm, attenuations accept dB; everything
else is plain SI.  Output is CSV (unit-annotated headers) or JSON (schema
versioned, with run metadata), plus a rendered figure unless suppressed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace

from . import __version__
from .analytic import NetworkParams, LinkContext, bep, outage, rate
from .montecarlo import SimulationConfig, collect_link_samples, metric_from_samples
from .pulse import (
    UL,
    DL,
    DuplexConfig,
    PulseShape,
    find_orthogonal_alpha,
    overlap_factors,
    RECT,
    RRC,
    SINC,
    SINCSQ,
)
from .specfun import QuadratureError

SCHEMA = "fdcell.run/1"

SWEEP_VARIABLES = ("alpha", "lambda", "beta", "theta")


class ConfigError(ValueError):
    """Config file or flag rejected; message carries the field path."""


# ---------------------------------------------------------------------------
# RunSpec and config parsing
# ---------------------------------------------------------------------------

@dataclass
class RunSpec:
    """Fully resolved description of one tool invocation."""

    mode: str
    params: NetworkParams
    duplex: DuplexConfig
    pulse_ul: PulseShape
    pulse_dl: PulseShape
    sim: SimulationConfig
    sweep_variable: str = "alpha"
    grid: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    theta: float = 1.0
    ergodic: bool = False
    output_path: str = "fdcell_out.csv"
    output_format: str = "csv"
    threads: int = 1
    plot: bool = True

    def __post_init__(self):
        if self.mode not in ("analytic", "simulate", "validate", "sweep", "pulses"):
            raise ConfigError(f"mode: unknown mode {self.mode!r}")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep.variable: must be one of {SWEEP_VARIABLES}")
        if not self.grid:
            raise ConfigError("sweep.grid: grid must be non-empty")
        if sorted(self.grid) != list(self.grid):
            raise ConfigError("sweep.grid: grid must be sorted ascending")
        if self.theta <= 0:
            raise ConfigError("theta: must be positive")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output.format: must be csv or json")
        if self.threads < 1:
            raise ConfigError("threads: must be >= 1")


def parse_quantity(text: str, key: str) -> float:
    """Parse a plain number, a dBm power, or a dB ratio into linear SI."""
    s = str(text).strip()
    low = s.lower()
    try:
        if low.endswith("dbm"):
            return 10.0 ** ((float(s[:-3]) - 30.0) / 10.0)
        if low.endswith("db"):
            return 10.0 ** (float(s[:-2]) / 10.0)
        if low.endswith("w") and not low.endswith("kw"):
            return float(s[:-1])
        if low.endswith("hz"):
            return float(s[:-2])
        return float(s)
    except ValueError as e:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number") from e


_NETWORK_KEYS = {
    "lambda": "lam",
    "rho": "rho",
    "p_d": "p_d",
    "p_u_max": "p_u_max",
    "eta": "eta",
    "beta": "beta",
    "n_o": "n_o",
    "omega1_u": "omega1_u",
    "omega2_u": "omega2_u",
    "omega1_d": "omega1_d",
    "omega2_d": "omega2_d",
}
_DUPLEX_KEYS = ("b_u", "b_d", "alpha")
_PULSE_KEYS = ("ul", "dl", "rrc_rolloff")
_SIM_KEYS = ("area_side", "window_side", "ue_intensity", "n_realizations", "seed", "fading")
_SWEEP_KEYS = ("variable", "grid")
_OUTPUT_KEYS = ("path", "format", "plot")
_RUN_KEYS = ("theta", "ergodic", "threads")

_PULSE_NAMES = {"rect": RECT, "rrc": RRC, "sinc": SINC, "sincsq": SINCSQ, "sinc2": SINCSQ}


def _read_ini(path: str) -> dict[str, dict[str, str]]:
    import configparser

    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as e:
        raise ConfigError(f"config file {path!r}: {e}") from e
    known = {
        "network": set(_NETWORK_KEYS),
        "duplex": set(_DUPLEX_KEYS),
        "pulses": set(_PULSE_KEYS),
        "simulation": set(_SIM_KEYS),
        "sweep": set(_SWEEP_KEYS),
        "output": set(_OUTPUT_KEYS),
        "run": set(_RUN_KEYS),
    }
    out: dict[str, dict[str, str]] = {}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"[{section}]: unknown section")
        for key in cp[section]:
            if key not in known[section]:
                raise ConfigError(f"[{section}] {key}: unknown key")
        out[section] = dict(cp[section])
    return out


def _parse_grid(text: str, key: str) -> list[object]:
    vals: list[object] = []
    for tok in str(text).replace(";", ",").split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "sp":
            vals.append("sp")
        else:
            try:
                vals.append(float(tok))
            except ValueError as e:
                raise ConfigError(f"{key}: cannot parse grid entry {tok!r}") from e
    if not vals:
        raise ConfigError(f"{key}: grid must be non-empty")
    return vals


def parse_config(mode: str, config_path: str | None = None, overrides: dict | None = None) -> RunSpec:
    """Build a RunSpec from defaults, an optional INI file, and overrides.

    Precedence: flags > file > defaults.  Unknown keys and out-of-range
    values are rejected with the offending field path in the message.
    """
    overrides = overrides or {}
    file_cfg = _read_ini(config_path) if config_path else {}

    def pick(section: str, key: str, flag: str | None = None):
        if flag is not None and overrides.get(flag) is not None:
            return overrides[flag]
        return file_cfg.get(section, {}).get(key)

    net_kwargs = {}
    for key, attr in _NETWORK_KEYS.items():
        raw = pick("network", key, flag=attr)
        if raw is not None:
            net_kwargs[attr] = parse_quantity(raw, f"[network] {key}")
    try:
        params = NetworkParams(**net_kwargs)
    except ValueError as e:
        raise ConfigError(f"[network]: {e}") from e

    dup_kwargs = {"b_u": 1e6, "b_d": 1e6, "alpha": 0.0}
    for key in _DUPLEX_KEYS:
        raw = pick("duplex", key, flag=key)
        if raw is not None:
            dup_kwargs[key] = parse_quantity(raw, f"[duplex] {key}")
    try:
        duplex = DuplexConfig(**dup_kwargs)
    except ValueError as e:
        raise ConfigError(f"[duplex]: {e}") from e

    rolloff_raw = pick("pulses", "rrc_rolloff", flag="rrc_rolloff")
    rolloff = parse_quantity(rolloff_raw, "[pulses] rrc_rolloff") if rolloff_raw is not None else 0.22

    def make_pulse(key: str, default: str) -> PulseShape:
        raw = pick("pulses", key, flag=f"pulse_{key}")
        name = str(raw).strip().lower() if raw is not None else default
        if name not in _PULSE_NAMES:
            raise ConfigError(f"[pulses] {key}: unknown pulse {name!r}")
        return PulseShape(_PULSE_NAMES[name], rolloff=rolloff)

    # default assignment puts the orthogonality-capable shape on the uplink
    pulse_ul = make_pulse("ul", "sincsq")
    pulse_dl = make_pulse("dl", "sinc")

    sim_kwargs = {}
    for key in _SIM_KEYS:
        raw = pick("simulation", key, flag=key)
        if raw is None:
            continue
        if key in ("n_realizations", "seed"):
            try:
                sim_kwargs[key] = int(float(raw))
            except ValueError as e:
                raise ConfigError(f"[simulation] {key}: cannot parse {raw!r}") from e
        elif key == "fading":
            sim_kwargs[key] = str(raw).strip().lower() not in ("0", "false", "no")
        else:
            sim_kwargs[key] = parse_quantity(raw, f"[simulation] {key}")
    try:
        sim = SimulationConfig(**sim_kwargs)
    except ValueError as e:
        raise ConfigError(f"[simulation]: {e}") from e

    grid_raw = pick("sweep", "grid", flag="grid")
    grid_tokens = _parse_grid(grid_raw, "[sweep] grid") if grid_raw is not None else None
    variable = pick("sweep", "variable", flag="sweep_variable") or "alpha"

    theta_raw = pick("run", "theta", flag="theta")
    threads_raw = pick("run", "threads", flag="threads")
    if threads_raw is None:
        threads_raw = os.environ.get("FDCELL_THREADS")
    ergodic_raw = pick("run", "ergodic", flag="ergodic")

    out_path = pick("output", "path", flag="out") or "fdcell_out.csv"
    out_fmt = pick("output", "format", flag="format") or "csv"
    plot_raw = pick("output", "plot", flag="plot")

    # resolve alpha grid; 'sp' means the orthogonality point of the pulse pair
    if grid_tokens is None:
        if overrides.get("alpha") is not None:
            grid = [float(overrides["alpha"])]
        elif mode == "pulses":
            grid = [i / 100.0 for i in range(101)]
        elif str(variable) == "alpha":
            grid = [duplex.alpha]
        else:
            grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    else:
        grid = []
        for tok in grid_tokens:
            if tok == "sp":
                grid.append(find_orthogonal_alpha(pulse_ul, pulse_dl, duplex))
            else:
                grid.append(float(tok))
    grid = sorted(grid)

    spec = RunSpec(
        mode=mode,
        params=params,
        duplex=duplex,
        pulse_ul=pulse_ul,
        pulse_dl=pulse_dl,
        sim=sim,
        sweep_variable=str(variable),
        grid=grid,
        theta=float(parse_quantity(theta_raw, "[run] theta")) if theta_raw is not None else 1.0,
        ergodic=bool(ergodic_raw) and str(ergodic_raw).strip().lower() not in ("0", "false", "no"),
        output_path=str(out_path),
        output_format=str(out_fmt),
        threads=int(float(threads_raw)) if threads_raw is not None else 1,
        plot=str(plot_raw).strip().lower() not in ("0", "false", "no") if plot_raw is not None else True,
    )
    if spec.mode == "sweep" and spec.sweep_variable == "alpha" and any(not 0 <= g <= 1 for g in grid):
        raise ConfigError("[sweep] grid: alpha values must lie in [0, 1]")
    return spec


# ---------------------------------------------------------------------------
# result table
# ---------------------------------------------------------------------------

@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list]
    meta: dict

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def emit(table: ResultTable, fmt: str, path: str) -> None:
    """Write a result table as CSV or schema-versioned JSON."""
    try:
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([_fmt_cell(v) for v in row])
            data = buf.getvalue()
        elif fmt == "json":
            payload = {
                "schema": SCHEMA,
                "tool_version": __version__,
                "meta": table.meta,
                "columns": table.columns,
                "rows": table.rows,
            }
            data = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        else:
            raise ConfigError(f"output.format: unknown format {fmt!r}")
        with open(path, "w") as fh:
            fh.write(data)
    except OSError as e:
        raise RuntimeError(f"cannot write {path!r}: {e}") from e


def read_table_json(path: str) -> ResultTable:
    """Round-trip loader for the JSON emission."""
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != SCHEMA:
        raise ValueError(f"unexpected schema {payload.get('schema')!r} in {path!r}")
    return ResultTable(columns=payload["columns"], rows=payload["rows"], meta=payload["meta"])


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

_METRICS = ("bep", "outage", "eff_rate")
_UNITS = {"bep": "1", "outage": "1", "eff_rate": "bit/s", "erg_rate": "bit/s"}


def _analytic_row_metrics(spec: RunSpec, p: NetworkParams, dup: DuplexConfig, theta: float) -> tuple[dict, list[str]]:
    factors = overlap_factors(spec.pulse_ul, spec.pulse_dl, dup)
    vals: dict[str, float] = {
        "eff_cross_ul": factors.eff_cross_u,
        "eff_cross_dl": factors.eff_cross_d,
        "bw_ul": dup.band(UL),
        "bw_dl": dup.band(DL),
    }
    errors: list[str] = []
    for d in (UL, DL):
        ctx = LinkContext(d, dup.alpha, factors.eff_cross(d), duplex=dup)
        jobs = {
            f"bep_{d}": lambda: bep(d, ctx, p),
            f"outage_{d}": lambda: outage(d, theta, ctx, p),
            f"eff_rate_{d}": lambda: rate(d, "effective", ctx, p, theta=theta),
        }
        if spec.ergodic:
            jobs[f"erg_rate_{d}"] = lambda: rate(d, "ergodic", ctx, p)
        for name, job in jobs.items():
            try:
                vals[name] = job()
            except (QuadratureError, ValueError) as e:
                vals[name] = math.nan
                errors.append(f"{name}: {e}")
    return vals, errors


def _sweep_point(spec: RunSpec, value: float) -> tuple[NetworkParams, DuplexConfig, float]:
    if spec.sweep_variable == "alpha":
        return spec.params, spec.duplex.with_alpha(value), spec.theta
    if spec.sweep_variable == "lambda":
        return replace(spec.params, lam=value), spec.duplex, spec.theta
    if spec.sweep_variable == "beta":
        return replace(spec.params, beta=value), spec.duplex, spec.theta
    return spec.params, spec.duplex, value  # theta sweep


def run(spec: RunSpec) -> ResultTable:
    """Execute a RunSpec and return the result table (deterministic per seed)."""
    meta = {
        "mode": spec.mode,
        "seed": spec.sim.seed,
        "sweep_variable": spec.sweep_variable,
        "theta": spec.theta,
        "pulses": {"ul": spec.pulse_ul.kind, "dl": spec.pulse_dl.kind},
        "params": {
            "lambda": spec.params.lam,
            "rho": spec.params.rho,
            "p_d": spec.params.p_d,
            "p_u_max": spec.params.p_u_max,
            "eta": spec.params.eta,
            "beta": spec.params.beta,
            "n_o": spec.params.n_o,
        },
        "duplex": {"b_u": spec.duplex.b_u, "b_d": spec.duplex.b_d},
    }
    if spec.mode == "pulses":
        return _run_pulses(spec, meta)

    var = spec.sweep_variable if spec.mode == "sweep" else "alpha"
    var_col = f"{var} [1]" if var in ("alpha", "beta", "theta") else f"{var} [1/m^2]"

    needs_mc = spec.mode in ("simulate", "validate")
    samples = None
    if needs_mc:
        if spec.mode in ("simulate", "validate") and var != "alpha" and var != "theta" and var != "beta":
            raise ConfigError("simulate/validate sweeps support alpha, beta, and theta variables")
        samples = collect_link_samples(spec.params, spec.sim, threads=spec.threads)
        meta["n_realizations"] = spec.sim.n_realizations
        meta["window_resamples"] = samples["resamples"]

    columns = [var_col]
    metric_cols: list[str] = []
    for d in (UL, DL):
        metric_cols += [f"eff_cross_{d} [1]", f"bw_{d} [Hz]"]
    ana_names = []
    for d in (UL, DL):
        for m in _METRICS:
            ana_names.append(f"{m}_{d}")
        if spec.ergodic:
            ana_names.append(f"erg_rate_{d}")

    rows = []
    mc_names = [n for n in ana_names if not n.startswith("erg_")]
    for value in spec.grid:
        p, dup, theta = _sweep_point(spec, value)
        row_vals: dict[str, object] = {}
        errors: list[str] = []
        if spec.mode in ("analytic", "sweep", "validate"):
            vals, errs = _analytic_row_metrics(spec, p, dup, theta)
            row_vals.update(vals)
            errors += errs
        else:
            factors = overlap_factors(spec.pulse_ul, spec.pulse_dl, dup)
            row_vals.update(
                {
                    "eff_cross_ul": factors.eff_cross_u,
                    "eff_cross_dl": factors.eff_cross_d,
                    "bw_ul": dup.band(UL),
                    "bw_dl": dup.band(DL),
                }
            )
        if needs_mc:
            factors = overlap_factors(spec.pulse_ul, spec.pulse_dl, dup)
            for d in (UL, DL):
                ec = factors.eff_cross(d)
                bwd = dup.band(d)
                for m in _METRICS:
                    mname = {"bep": "bep", "outage": "outage", "eff_rate": "effective_rate"}[m]
                    try:
                        est = metric_from_samples(
                            samples[d], mname, d, ec, p, theta=theta, bandwidth=bwd
                        )
                        row_vals[f"mc_{m}_{d}"] = est.mean
                        row_vals[f"mc_{m}_{d}_ci95"] = est.ci_halfwidth
                        if spec.mode == "validate":
                            ana = row_vals.get(f"{m}_{d}", math.nan)
                            row_vals[f"within_ci_{m}_{d}"] = bool(
                                abs(ana - est.mean) <= est.ci_halfwidth
                            )
                    except ValueError as e:
                        row_vals[f"mc_{m}_{d}"] = math.nan
                        row_vals[f"mc_{m}_{d}_ci95"] = math.nan
                        if spec.mode == "validate":
                            row_vals[f"within_ci_{m}_{d}"] = False
                        errors.append(f"mc_{m}_{d}: {e}")
        row_vals["errors"] = ";".join(errors)
        rows.append((value, row_vals))

    # assemble stable column order
    columns += metric_cols
    if spec.mode in ("analytic", "sweep", "validate"):
        columns += [f"{n} [{_UNITS[n.rsplit('_', 1)[0] if not n.startswith('erg') else 'erg_rate']}]" for n in ana_names]
    if needs_mc:
        for d in (UL, DL):
            for m in _METRICS:
                columns += [f"mc_{m}_{d} [{_UNITS[m]}]", f"mc_{m}_{d}_ci95 [{_UNITS[m]}]"]
        if spec.mode == "validate":
            for d in (UL, DL):
                for m in _METRICS:
                    columns.append(f"within_ci_{m}_{d} [bool]")
    columns.append("errors [text]")

    out_rows = []
    for value, row_vals in rows:
        out = [value]
        for col in columns[1:]:
            name = col.split(" [")[0]
            out.append(row_vals.get(name, math.nan))
        out_rows.append(out)
    return ResultTable(columns=columns, rows=out_rows, meta=meta)


_PAIR_SET = ((RECT, RECT), (RRC, RRC), (SINC, SINC), (SINCSQ, SINC))


def _run_pulses(spec: RunSpec, meta: dict) -> ResultTable:
    """Effective cross-mode power factor curves over alpha for pulse pairs."""
    grid = spec.grid if len(spec.grid) > 1 else [i / 100.0 for i in range(101)]
    columns = ["alpha [1]"]
    pairs = []
    for ul_kind, dl_kind in _PAIR_SET:
        label = f"{ul_kind}-{dl_kind}"
        pairs.append((PulseShape(ul_kind, spec.pulse_ul.rolloff), PulseShape(dl_kind, spec.pulse_dl.rolloff), label))
        columns += [f"eff_cross_ul:{label} [1]", f"eff_cross_dl:{label} [1]"]
    columns.append("errors [text]")
    rows = []
    for a in grid:
        row: list[object] = [a]
        errors = []
        dup = spec.duplex.with_alpha(a)
        for s_u, s_d, label in pairs:
            try:
                f = overlap_factors(s_u, s_d, dup)
                row += [f.eff_cross_u, f.eff_cross_d]
            except QuadratureError as e:
                row += [math.nan, math.nan]
                errors.append(f"{label}: {e}")
        row.append(";".join(errors))
        rows.append(row)
    meta["pairs"] = [label for _, _, label in pairs]
    return ResultTable(columns=columns, rows=rows, meta=meta)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="INI config file")
    sp.add_argument("--alpha", type=float, help="single overlap value")
    sp.add_argument("--grid", help="comma-separated sweep grid; 'sp' = orthogonality point")
    sp.add_argument("--theta", help="SINR threshold for outage/effective rate (default 1)")
    sp.add_argument("--seed", type=int, help="simulation seed")
    sp.add_argument("--out", help="output path")
    sp.add_argument("--format", choices=("csv", "json"), help="output format")
    sp.add_argument("--threads", type=int, help="worker threads (or env FDCELL_THREADS)")
    sp.add_argument("--ergodic", action="store_true", default=None, help="include ergodic rates (slower)")
    sp.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    sp.add_argument("--n-realizations", type=int, help="Monte Carlo realization count")
    sp.add_argument("--pulse-ul", dest="pulse_ul", help="uplink pulse: rect|rrc|sinc|sincsq")
    sp.add_argument("--pulse-dl", dest="pulse_dl", help="downlink pulse: rect|rrc|sinc|sincsq")


def _overrides_from(args: argparse.Namespace) -> dict:
    ov = {
        "alpha": args.alpha,
        "grid": args.grid,
        "theta": args.theta,
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
        "threads": args.threads,
        "ergodic": args.ergodic,
        "pulse_ul": args.pulse_ul,
        "pulse_dl": args.pulse_dl,
        "n_realizations": args.n_realizations,
    }
    if getattr(args, "variable", None):
        ov["sweep_variable"] = args.variable
    if args.no_plot:
        ov["plot"] = "false"
    return ov


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="fdcell",
        description="Partial-overlap duplex cellular analysis and simulation",
    )
    ap.add_argument("--version", action="version", version=f"fdcell {__version__}")
    sub = ap.add_subparsers(dest="mode", required=True)
    for name, help_ in (
        ("analytic", "closed-form metrics over an alpha grid"),
        ("simulate", "Monte Carlo metrics with confidence intervals"),
        ("validate", "analytic vs Monte Carlo side by side"),
        ("sweep", "analytic metrics over alpha/lambda/beta/theta"),
        ("pulses", "effective cross-mode factor curves per pulse pair"),
    ):
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        if name == "sweep":
            sp.add_argument("--variable", choices=SWEEP_VARIABLES, help="sweep variable")
    args = ap.parse_args(argv)

    try:
        spec = parse_config(args.mode, args.config, _overrides_from(args))
        table = run(spec)
        emit(table, spec.output_format, spec.output_path)
        print(f"wrote {spec.output_path} ({len(table.rows)} rows)")
        if spec.plot:
            from .report import render_figure

            png = os.path.splitext(spec.output_path)[0] + ".png"
            render_figure(table, spec.mode, png)
            print(f"wrote {png}")
    except (ConfigError, QuadratureError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
