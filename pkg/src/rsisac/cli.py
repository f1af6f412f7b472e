"""
Command-line front end.

Configuration is a flat ``key=value`` file, one key per line, ``#`` starts a
comment. Omitted keys take the reference-scenario defaults. Gain keys also
accept a ``_db`` suffix (e.g. ``radar_gain_db=30``) and are stored linear.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from . import bounds, fim, montecarlo, tradeoff
from .bounds import Scheme
from .linkbudget import SystemParams, db_to_linear, derive

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

SUBCOMMANDS = ("bounds", "sweep", "hull", "alpha-opt", "montecarlo", "validate-crlb", "alpha-vs-range")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    alpha_points: int = tradeoff.DEFAULT_ALPHA_POINTS
    mu_points: int = tradeoff.DEFAULT_MU_POINTS
    noma_points: int = tradeoff.DEFAULT_NOMA_POINTS
    alpha_grid_step: float = 1e-5
    range_min_m: float = 1e3
    range_max_m: float = 5e4
    range_points: int = 50
    oversample: int = 4


@dataclass(frozen=True)
class MonteCarloConfig:
    trials: int = 10000
    seed: int = 12345
    threads: int = 1
    fade_comm: bool = True
    fade_radar: bool = True
    mc_reference: bool = False
    rs_knobs: tuple = (0.0, 0.0039, 0.05, 0.5, 1.0)
    oma_knobs: tuple = (0.1, 0.5, 0.9)
    noma_knobs: tuple = (0.25, 0.5, 1.0)


@dataclass(frozen=True)
class OutputConfig:
    out: str = ""
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    scenario: SystemParams = field(default_factory=SystemParams)
    grids: GridConfig = field(default_factory=GridConfig)
    mc: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


_SECTIONS = (("scenario", SystemParams), ("grids", GridConfig), ("mc", MonteCarloConfig), ("output", OutputConfig))

KEY_DOCS = {
    "bandwidth_hz": "Hz, receiver bandwidth B",
    "carrier_freq_hz": "Hz, carrier frequency",
    "effective_temp_k": "K, effective noise temperature",
    "comm_range_m": "m, user-to-BS range",
    "comm_power_w": "W, total user power P_c",
    "comm_tx_gain": "linear, user antenna gain (or comm_tx_gain_db, dBi)",
    "comm_rx_sidelobe_gain": "linear, BS sidelobe gain (or comm_rx_sidelobe_gain_db, dBi)",
    "radar_range_m": "m, target range",
    "radar_gain": "linear, radar antenna gain (or radar_gain_db, dBi)",
    "radar_power_w": "W, radar power P_r",
    "target_rcs_m2": "m^2, target cross section",
    "target_process_std_m": "m, target range prediction std",
    "time_bandwidth_product": "-, pulse TB product",
    "duty_factor": "-, radar duty factor in (0, 1]",
    "alpha_points": "count, RS alpha grid size",
    "mu_points": "count, OMA mu grid size",
    "noma_points": "count, NOMA power grid size",
    "alpha_grid_step": "-, alpha step of the brute-force argmax",
    "range_min_m": "m, first user range of alpha-vs-range",
    "range_max_m": "m, last user range of alpha-vs-range",
    "range_points": "count, alpha-vs-range grid size",
    "oversample": "count, pulse oversampling for validate-crlb",
    "trials": "count, Monte Carlo trials per point",
    "seed": "integer, RNG seed",
    "threads": "count, Monte Carlo worker threads",
    "fade_comm": "bool, Rayleigh fading on the user link",
    "fade_radar": "bool, exponential fading on the echo power",
    "mc_reference": "bool, add quadrature reference columns (slow)",
    "rs_knobs": "comma list, RS alpha values for montecarlo",
    "oma_knobs": "comma list, OMA mu values for montecarlo",
    "noma_knobs": "comma list, NOMA power fractions for montecarlo",
    "out": "path, output file (empty: stdout)",
    "format": "csv | json",
}

DB_KEYS = {"comm_tx_gain_db": "comm_tx_gain", "comm_rx_sidelobe_gain_db": "comm_rx_sidelobe_gain", "radar_gain_db": "radar_gain"}


def config_keys() -> list:
    """Every flat key accepted by :func:`parse_config`, in schema order."""
    return [f.name for _, cls in _SECTIONS for f in fields(cls)]


def _field_types():
    out = {}
    for section, cls in _SECTIONS:
        defaults = cls()
        for f in fields(cls):
            out[f.name] = (section, type(getattr(defaults, f.name)))
    return out


def _parse_value(key: str, kind: type, raw: str, lineno: int):
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError(raw)
            return v
        if kind is tuple:
            return tuple(float(x) for x in raw.split(",") if x.strip()) if raw.strip() else ()
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: invalid value {raw!r} for {key}") from None


def parse_config(text: str, strict: bool = False) -> RunConfig:
    """Parse flat ``key=value`` text into a validated :class:`RunConfig`."""
    types = _field_types()
    values = {name: {} for name, _ in _SECTIONS}
    where = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in DB_KEYS:
            v = _parse_value(key, float, raw, lineno)
            key, value = DB_KEYS[key], db_to_linear(v)
        elif key in types:
            value = _parse_value(key, types[key][1], raw, lineno)
        else:
            msg = f"line {lineno}: unknown key {key!r}"
            if strict:
                raise ConfigError(msg)
            warnings.warn(msg, stacklevel=2)
            continue
        if key in where:
            raise ConfigError(f"line {lineno}: {key} already set on line {where[key]}")
        where[key] = lineno
        values[types[key][0]][key] = value

    built = {}
    for section, cls in _SECTIONS:
        try:
            built[section] = cls(**values[section])
        except ValueError as exc:
            msg = str(exc)
            culprit = next((k for k in values[section] if msg.startswith(k)), None)
            prefix = f"line {where[culprit]}: " if culprit else ""
            raise ConfigError(f"{prefix}{msg}") from None
    cfg = RunConfig(**built)
    _validate(cfg, where)
    return cfg


def _validate(cfg: RunConfig, where: dict):
    def fail(key, msg):
        prefix = f"line {where[key]}: " if key in where else ""
        raise ConfigError(f"{prefix}{key} {msg}")

    g, mc, out = cfg.grids, cfg.mc, cfg.output
    for key in ("alpha_points", "mu_points", "noma_points", "range_points"):
        if getattr(g, key) < 2:
            fail(key, "must be >= 2")
    if not 0 < g.alpha_grid_step <= 0.1:
        fail("alpha_grid_step", "must lie in (0, 0.1]")
    if not 0 < g.range_min_m < g.range_max_m:
        fail("range_min_m", "must satisfy 0 < range_min_m < range_max_m")
    if g.oversample < 1:
        fail("oversample", "must be >= 1")
    if mc.trials < 1:
        fail("trials", "must be >= 1")
    if mc.seed < 0:
        fail("seed", "must be >= 0")
    if mc.threads < 1:
        fail("threads", "must be >= 1")
    for key in ("rs_knobs", "oma_knobs", "noma_knobs"):
        if any(not 0 <= k <= 1 for k in getattr(mc, key)):
            fail(key, "values must lie in [0, 1]")
    if out.format not in ("csv", "json"):
        fail("format", "must be csv or json")


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for section, _ in _SECTIONS:
        obj = getattr(cfg, section)
        lines.append(f"# {section}")
        lines.extend(f"{f.name}={_format_value(getattr(obj, f.name))}" for f in fields(obj))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- subcommands


def _cmd_bounds(cfg: RunConfig, args):
    p = cfg.scenario
    d = derive(p)
    opt = bounds.alpha_opt(d, p.comm_power_w, p.radar_power_w)
    rs = bounds.rs_bounds(d, opt.clamped, p.comm_power_w, p.radar_power_w)
    noma = bounds.noma_bounds(d, p.comm_power_w, p.comm_power_w, p.radar_power_w)
    oma = bounds.oma_bounds(d, 0.5, p.comm_power_w, p.radar_power_w)
    rows = [{"name": f.name, "value": float(getattr(d, f.name))} for f in fields(d)]
    rows += [
        {"name": "reir_prefactor_per_s", "value": d.duty_factor / (2 * d.pulse_duration_s)},
        {"name": "alpha_opt", "value": opt.clamped},
        {"name": "rs_alpha_opt_r_est_bps", "value": rs.r_est_bps},
        {"name": "rs_alpha_opt_r_c_bps", "value": rs.r_c_bps},
        {"name": "noma_full_power_r_est_bps", "value": noma.r_est_bps},
        {"name": "noma_full_power_r_c_bps", "value": noma.r_c_bps},
        {"name": "oma_mu_0.5_r_est_bps", "value": oma.r_est_bps},
        {"name": "oma_mu_0.5_r_c_bps", "value": oma.r_c_bps},
    ]
    return ["name", "value"], rows


def _curves(cfg: RunConfig, schemes):
    g = cfg.grids
    n = {Scheme.RS: g.alpha_points, Scheme.OMA: g.mu_points, Scheme.NOMA: g.noma_points}
    return [tradeoff.sweep(cfg.scenario, s, n[s]) for s in schemes]


def _selected(args):
    return list(Scheme) if args.scheme == "all" else [Scheme(args.scheme)]


def _cmd_sweep(cfg, args):
    rows = [
        {"scheme": c.scheme.value, "knob": p.knob, "r_est_bps": p.r_est_bps, "r_c_bps": p.r_c_bps}
        for c in _curves(cfg, _selected(args))
        for p in c.points
    ]
    return ["scheme", "knob", "r_est_bps", "r_c_bps"], rows


def _cmd_hull(cfg, args):
    curves = _curves(cfg, _selected(args))
    if args.combined:
        frontiers = [("combined", tradeoff.combined_frontier(curves))]
    else:
        frontiers = [(c.scheme.value, tradeoff.upper_convex_hull(c.points)) for c in curves]
    rows = []
    for label, fr in frontiers:
        area = fr.area()
        last = len(fr.hull_points) - 1
        for i, p in enumerate(fr.hull_points):
            rows.append(
                {
                    "frontier": label,
                    "order": i,
                    "scheme": p.scheme.value,
                    "knob": p.knob,
                    "r_est_bps": p.r_est_bps,
                    "r_c_bps": p.r_c_bps,
                    "segment_to_next": "end" if i == last else "time_sharing",
                    "frontier_area": area,
                }
            )
    cols = ["frontier", "order", "scheme", "knob", "r_est_bps", "r_c_bps", "segment_to_next", "frontier_area"]
    return cols, rows


def _cmd_alpha_opt(cfg, args):
    p = cfg.scenario
    d = derive(p)
    opt = bounds.alpha_opt(d, p.comm_power_w, p.radar_power_w)
    rates = bounds.dir_rs(d, bounds.PowerSplit.from_alpha(opt.clamped, p.comm_power_w), p.radar_power_w)
    step = cfg.grids.alpha_grid_step
    row = {
        "alpha_raw": opt.raw,
        "alpha_clamped": opt.clamped,
        "quadratic_residual": opt.residual,
        "r_c1": float(rates.r_c1_bps),
        "r_c2": float(rates.r_c2_bps),
        "r_sum": float(rates.total_bps),
        "alpha_grid_argmax": tradeoff.grid_argmax_alpha(p, step),
        "grid_step": step,
    }
    return list(row), [row]


def _cmd_montecarlo(cfg, args):
    p, mc = cfg.scenario, cfg.mc
    d = derive(p)
    knobs = {Scheme.RS: mc.rs_knobs, Scheme.OMA: mc.oma_knobs, Scheme.NOMA: mc.noma_knobs}
    rows = []
    for scheme in _selected(args):
        for k in knobs[scheme]:
            st = montecarlo.ergodic_rates(
                scheme, p, k, mc.trials, mc.seed,
                fade_comm=mc.fade_comm, fade_radar=mc.fade_radar, threads=mc.threads,
            )
            bound = montecarlo.instantaneous_rates(scheme, p, d, k)
            ref = (
                montecarlo.ergodic_reference(scheme, p, k, fade_comm=mc.fade_comm, fade_radar=mc.fade_radar)
                if mc.mc_reference
                else {"r_est_bps": None, "r_c_bps": None}
            )
            rows.append(
                {
                    "scheme": scheme.value,
                    "knob": float(k),
                    "r_est_mean": st.mean["r_est_bps"],
                    "r_est_se": st.std_error["r_est_bps"],
                    "r_c_mean": st.mean["r_c_bps"],
                    "r_c_se": st.std_error["r_c_bps"],
                    "r_est_bound": float(bound[0]),
                    "r_c_bound": float(bound[1]),
                    "r_est_ref": ref["r_est_bps"],
                    "r_c_ref": ref["r_c_bps"],
                    "n_trials": st.n_trials,
                    "seed": st.seed,
                }
            )
    return list(rows[0]) if rows else [], rows


def _cmd_validate_crlb(cfg, args):
    p = cfg.scenario
    d = derive(p)
    tb = int(round(p.time_bandwidth_product))
    if tb != p.time_bandwidth_product:
        raise ValueError("validate-crlb needs an integer time_bandwidth_product")
    pulse = fim.make_flat_pulse(tb, cfg.grids.oversample, p.bandwidth_hz)
    h = fim.default_interference(pulse)
    p_c2 = bounds.alpha_opt(d, p.comm_power_w, p.radar_power_w).clamped * p.comm_power_w
    kw = dict(
        radar_gain=d.radar_power_gain,
        p_r_w=p.radar_power_w,
        comm_gain=d.comm_power_gain,
        p_c2_w=p_c2,
        noise_power_w=d.noise_power_w,
    )
    closed = float(bounds.crlb_delay(d, p_c2, p.radar_power_w))
    forms = [
        ("exact", fim.fim_exact(pulse, h, **kw)),
        ("sherman_morrison", fim.fim_sherman_morrison(pulse, h, **kw)),
        ("pessimistic", fim.fim_pessimistic(pulse, **kw)),
    ]
    rows = []
    for name, j in forms:
        c = fim.crlb_from_fim(j)
        rows.append({"form": name, "fim": j, "crlb": c, "closed_form_crlb": closed, "rel_err": abs(c - closed) / closed})
    return ["form", "fim", "crlb", "closed_form_crlb", "rel_err"], rows


def _cmd_alpha_vs_range(cfg, args):
    g = cfg.grids
    grid = np.linspace(g.range_min_m, g.range_max_m, g.range_points)
    rows = [
        {"comm_range_m": r, "alpha_raw": raw, "alpha_clamped": a}
        for r, raw, a in tradeoff.sweep_alpha_vs_range(cfg.scenario, grid)
    ]
    return ["comm_range_m", "alpha_raw", "alpha_clamped"], rows


_DISPATCH = {
    "bounds": _cmd_bounds,
    "sweep": _cmd_sweep,
    "hull": _cmd_hull,
    "alpha-opt": _cmd_alpha_opt,
    "montecarlo": _cmd_montecarlo,
    "validate-crlb": _cmd_validate_crlb,
    "alpha-vs-range": _cmd_alpha_vs_range,
}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(columns, rows, fmt: str) -> str:
    """CSV with shortest round-trip floats, or JSON array of row objects."""
    if fmt == "json":
        return json.dumps([{c: _jsonable(r[c]) for c in columns} for r in rows], indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def run(subcommand: str, config: RunConfig, args=None) -> int:
    """Execute one subcommand and write its table. Returns the exit status."""
    if args is None:
        args = argparse.Namespace(scheme="all", combined=False)
    if subcommand not in _DISPATCH:
        print(f"error: unknown subcommand {subcommand!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            columns, rows = _DISPATCH[subcommand](config, args)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(columns, rows, config.output.format)
    if config.output.out:
        with open(config.output.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _keys_help() -> str:
    lines = ["config keys (key=value, '#' comments):"]
    lines += [f"  {k:<24} {KEY_DOCS[k]}" for k in config_keys()]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rsisac",
        description="Sensing/communication trade-off bounds for rate-splitting uplink ISAC.",
        epilog=_keys_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--grid-points", type=int, help="override every sweep grid size")
    parser.add_argument("--strict", action="store_true", help="unknown config keys are errors")
    parser.add_argument("--scheme", choices=("all", "rs", "oma", "noma"), default="all")
    parser.add_argument("--combined", action="store_true", help="hull over the union of all schemes")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    mc, g, out = cfg.mc, cfg.grids, cfg.output
    mc_kw = {k: v for k, v in (("seed", args.seed), ("trials", args.trials), ("threads", args.threads)) if v is not None}
    out_kw = {k: v for k, v in (("out", args.out), ("format", args.format)) if v is not None}
    g_kw = {}
    if args.grid_points is not None:
        g_kw = dict(alpha_points=args.grid_points, mu_points=args.grid_points, noma_points=args.grid_points)
    cfg = RunConfig(
        scenario=cfg.scenario,
        grids=dataclasses.replace(g, **g_kw),
        mc=dataclasses.replace(mc, **mc_kw),
        output=dataclasses.replace(out, **out_kw),
    )
    _validate(cfg, {})
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = _apply_overrides(parse_config(text, strict=args.strict), args)
    except (OSError, UnicodeDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.subcommand, cfg, args)


if __name__ == "__main__":
    sys.exit(main())
