"""Command-line front end: config parsing, trace file I/O, single
scenario runs and the modulation-depth sweep harness.

Config files are flat ``key=value`` text; unknown keys are hard errors
so a typo cannot silently fall back to a default physics parameter.
Trace files are UTF-8 CSV with ``#``-prefixed header lines carrying
``dt_ps``, ``t0_ns`` and ``n``, then one power value per line at 17
significant digits (bit-exact float64 round trip).
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import attack, dsp, tfa
from .encrypt import MessageSpec, Scheme, encrypt_cma, encrypt_cmo
from .laser import (InitialState, IntegrationDiverged, LaserParams, SimConfig,
                    TimeTrace, integrate_laser, perturbed_init)


class ConfigError(ValueError):
    """Malformed config file or unusable flag combination."""


# ---------------------------------------------------------------------------
# config files

_LASER_KEYS = {f.name for f in fields(LaserParams)} - {"q"}
_SIM_KEYS = {"dt", "duration", "transient", "record_stride", "s_floor_frac"}
_MESSAGE_KEYS = {"scheme", "freq", "md", "phase"}
_ATTACK_KEYS = {"fb", "fc", "ridge_cal", "grid_start", "grid_stop",
                "grid_step", "margin_db", "bpf_width", "bpf_ripple_db",
                "bpf_atten_db", "bpf_transition"}
_PLAN_KEYS = {"scheme", "frequencies", "md_values", "repetitions", "seed"}


def parse_kv(path) -> dict:
    """Flat key=value file; '#' starts a comment; duplicates rejected."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if key in out:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = val
    return out


def _convert(cfg: dict, key: str, kind):
    try:
        return kind(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"field {key!r}: {exc}") from None


def _take(cfg: dict, keys: set, kinds=None) -> dict:
    """Pop every key in `keys` present in cfg, converting values."""
    got = {}
    for key in sorted(keys & cfg.keys()):
        kind = (kinds or {}).get(key, float)
        got[key] = _convert(cfg, key, kind)
        del cfg[key]
    return got


def _reject_leftovers(cfg: dict, path) -> None:
    if cfg:
        bad = ", ".join(sorted(cfg))
        raise ConfigError(f"{path}: unknown config keys: {bad}")


def build_laser(cfg: dict) -> LaserParams:
    return LaserParams(**_take(cfg, _LASER_KEYS))


def build_sim(cfg: dict, seed: int | None) -> SimConfig:
    got = _take(cfg, _SIM_KEYS, kinds={"record_stride": int})
    sim = SimConfig(**got)
    if seed is not None:
        sim = replace(sim, init=perturbed_init(InitialState(), seed))
    return sim


def build_message(cfg: dict) -> MessageSpec:
    got = _take(cfg, _MESSAGE_KEYS, kinds={"scheme": str})
    for key in ("scheme", "freq", "md"):
        if key not in got:
            raise ConfigError(f"message config requires key {key!r}")
    try:
        got["scheme"] = Scheme(got["scheme"].lower())
    except ValueError:
        raise ConfigError(f"field 'scheme': must be one of "
                          f"{[s.value for s in Scheme]}") from None
    return MessageSpec(**got)


def build_attack(cfg: dict) -> attack.AttackConfig:
    got = _take(cfg, _ATTACK_KEYS)
    wl = tfa.WaveletParams(
        fb=got.pop("fb", tfa.WaveletParams.fb),
        fc=got.pop("fc", tfa.WaveletParams.fc),
        ridge_cal=got.pop("ridge_cal", tfa.WaveletParams.ridge_cal))
    default = tfa.FrequencyGrid.default()
    grid = tfa.FrequencyGrid.regular(
        got.pop("grid_start", default.freqs[0]),
        got.pop("grid_stop", default.freqs[-1]),
        got.pop("grid_step", default.spacing))
    return attack.AttackConfig(wavelet=wl, grid=grid, **got)


# ---------------------------------------------------------------------------
# trace files

def write_trace(path, trace: TimeTrace) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dt_ps={trace.dt:.17g}\n")
        fh.write(f"# t0_ns={trace.t0:.17g}\n")
        fh.write(f"# n={len(trace)}\n")
        fh.writelines(f"{v:.17g}\n" for v in trace.samples)


def read_trace(path) -> TimeTrace:
    header = {}
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = (s.strip() for s in body.split("=", 1))
                    header[key] = val
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: not a number: {line!r}") from None
    for key in ("dt_ps", "t0_ns", "n"):
        if key not in header:
            raise ConfigError(f"{path}: missing header line '# {key}=...'")
    n = int(header["n"])
    if len(values) != n:
        raise ConfigError(f"{path}: header says n={n} but found {len(values)} values")
    return TimeTrace(np.array(values), dt=float(header["dt_ps"]),
                     t0=float(header["t0_ns"]))


# ---------------------------------------------------------------------------
# sweep plan

@dataclass(frozen=True)
class SweepPlan:
    """Modulation-depth sweep grid mirroring the detection/extraction
    figures: every (frequency, MD) cell repeated with distinct initial
    conditions."""

    scheme: Scheme
    frequencies: tuple = (1.0, 2.0, 4.0)
    md_values: tuple = (0.01, 0.02, 0.03, 0.04, 0.05)
    repetitions: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.frequencies or not self.md_values:
            raise ValueError("sweep grids must be non-empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @property
    def n_records(self) -> int:
        return len(self.frequencies) * len(self.md_values) * self.repetitions


_SWEEP_COLUMNS = ("scheme", "freq_ghz", "md", "rep", "seed", "psl_db",
                  "detected", "est_freq_ghz", "snr_true_db", "error")


@dataclass
class SweepResult:
    plan: SweepPlan
    threshold_db: float
    records: list = field(default_factory=list)   # dicts keyed by _SWEEP_COLUMNS

    def aggregates(self) -> list:
        out = []
        for f in self.plan.frequencies:
            for md in self.plan.md_values:
                cell = [r for r in self.records
                        if r["freq_ghz"] == f and r["md"] == md and not r["error"]]
                if not cell:
                    continue
                for tag, fn in (("mean", np.mean), ("min", np.min), ("max", np.max)):
                    out.append({
                        "scheme": self.plan.scheme.value, "freq_ghz": f,
                        "md": md, "rep": tag, "seed": "",
                        "psl_db": float(fn([r["psl_db"] for r in cell])),
                        "detected": sum(r["detected"] for r in cell),
                        "est_freq_ghz": "",
                        "snr_true_db": float(fn([r["snr_true_db"] for r in cell])),
                        "error": "",
                    })
        return out

    def to_csv(self, path) -> None:
        def fmt(v):
            if isinstance(v, bool):
                return str(v).lower()
            if isinstance(v, float):
                return f"{v:.6g}"
            return str(v)

        rows = sorted(self.records,
                      key=lambda r: (r["freq_ghz"], r["md"], r["rep"]))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# threshold_db={self.threshold_db:.6g}\n")
            fh.write(f"# base_seed={self.plan.seed}\n")
            fh.write(",".join(_SWEEP_COLUMNS) + "\n")
            for r in rows + self.aggregates():
                fh.write(",".join(fmt(r[c]) for c in _SWEEP_COLUMNS) + "\n")


def build_plan(cfg: dict, seed_flag: int | None) -> SweepPlan:
    def listed(raw, kind):
        return tuple(kind(tok) for tok in raw.replace(" ", "").split(",") if tok)

    got = {}
    if "scheme" in cfg:
        try:
            got["scheme"] = Scheme(cfg.pop("scheme").lower())
        except ValueError:
            raise ConfigError("field 'scheme': must be cma or cmo") from None
    else:
        raise ConfigError("sweep plan requires key 'scheme'")
    if "frequencies" in cfg:
        got["frequencies"] = listed(cfg.pop("frequencies"), float)
    if "md_values" in cfg:
        got["md_values"] = listed(cfg.pop("md_values"), float)
    if "repetitions" in cfg:
        got["repetitions"] = _convert(cfg, "repetitions", int)
        del cfg["repetitions"]
    if "seed" in cfg:
        got["seed"] = _convert(cfg, "seed", int)
        del cfg["seed"]
    if seed_flag is not None:
        got["seed"] = seed_flag
    return SweepPlan(**got)


def _run_cell(args):
    """One sweep cell; module-level so worker processes can unpickle it."""
    scheme, f, md, rep, seed, laser, sim, acfg, threshold, carrier = args
    row = {"scheme": scheme.value, "freq_ghz": f, "md": md, "rep": rep,
           "seed": seed, "psl_db": "", "detected": "", "est_freq_ghz": "",
           "snr_true_db": "", "error": ""}
    try:
        msg = MessageSpec(freq=f, md=md, scheme=scheme)
        if scheme is Scheme.CMA:
            trace = encrypt_cma(carrier, msg)
        else:
            trace = encrypt_cmo(laser, replace(
                sim, init=perturbed_init(InitialState(), seed)), msg)
        report = attack.detect(trace, acfg, threshold)
        peak = report.msr_curve.peak_freq
        ext = attack.extract_at(trace, peak, acfg, truth=msg)
        row.update(psl_db=report.psl_db, detected=report.detected,
                   est_freq_ghz=peak, snr_true_db=ext.snr_true_db)
    except Exception as exc:                    # cell isolation by contract
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep_plan(plan: SweepPlan, laser: LaserParams, sim: SimConfig,
                   acfg: attack.AttackConfig, workers: int = 1) -> SweepResult:
    """Execute every cell; extraction filters at the MSR peak (the
    attacker's pointing rule), scored against the injected tone."""
    rep_seeds = [plan.seed + rep for rep in range(plan.repetitions)]
    carriers = {}
    for rep, seed in enumerate(rep_seeds):
        carriers[rep] = integrate_laser(laser, replace(
            sim, init=perturbed_init(InitialState(), seed)))
    threshold = max(
        tfa.msr(tfa.cwt(c, acfg.grid, acfg.wavelet)).psl_db
        for c in carriers.values()) + acfg.margin_db

    cells = [(plan.scheme, f, md, rep, rep_seeds[rep], laser, sim, acfg,
              threshold, carriers[rep] if plan.scheme is Scheme.CMA else None)
             for f in plan.frequencies
             for md in plan.md_values
             for rep in range(plan.repetitions)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell, cells))
    else:
        records = [_run_cell(c) for c in cells]
    return SweepResult(plan=plan, threshold_db=threshold, records=records)


def write_plot_script(path, csv_path, plan: SweepPlan) -> None:
    """gnuplot script rendering PSL-vs-MD and SNR-vs-MD panels from the
    sweep CSV's per-cell mean rows."""
    def series(column, f):
        sel = (f"< awk -F, '$1==\"{plan.scheme.value}\" && $2=={f:g} && "
               f"$4==\"mean\"' {csv_path}")
        return f'"{sel}" using 3:{column} with linespoints title "{f:g} GHz"'

    lines = [
        "# gnuplot script generated by the sweep harness",
        'set datafile separator ","',
        "set key left top",
        'set xlabel "modulation depth"',
        "set terminal pngcairo size 900,400",
        f'set output "{csv_path}.png"',
        "set multiplot layout 1,2",
        f'set ylabel "PSL (dB)"',
        "plot " + ", ".join(series(6, f) for f in plan.frequencies),
        f'set ylabel "extraction SNR (dB)"',
        "plot " + ", ".join(series(9, f) for f in plan.frequencies),
        "unset multiplot",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def _load_config(args) -> dict:
    return parse_kv(args.config) if args.config else {}


def _trace_summary(trace: TimeTrace) -> str:
    mean = float(trace.samples.mean())
    fluct = float(trace.samples.std() / mean) if mean else float("inf")
    parts = [f"samples={len(trace)}", f"dt_ps={trace.dt:g}",
             f"span_ns={trace.duration_ns:g}", f"mean={mean:.6g}",
             f"fluctuation={fluct:.3e}"]
    if fluct < 1e-6:
        parts.append("steady_state=true")
    elif len(trace) >= 256:
        try:
            bw = dsp.bandwidth(dsp.power_spectrum(trace))
            parts.append(f"bandwidth_ghz={bw:.3f}")
        except dsp.BandwidthUndefined:
            pass
    return " ".join(parts)


def run_simulate(args) -> int:
    cfg = _load_config(args)
    laser = build_laser(cfg)
    sim = build_sim(cfg, args.seed)
    _reject_leftovers(cfg, args.config)
    trace = integrate_laser(laser, sim)
    if args.out:
        write_trace(args.out, trace)
    print(_trace_summary(trace))
    return 0


def run_encrypt(args) -> int:
    cfg = _load_config(args)
    msg = build_message(cfg)
    laser = build_laser(cfg)
    sim = build_sim(cfg, args.seed)
    _reject_leftovers(cfg, args.config)
    if msg.scheme is Scheme.CMA:
        trace = encrypt_cma(integrate_laser(laser, sim), msg)
    else:
        trace = encrypt_cmo(laser, sim, msg)
    if args.out:
        write_trace(args.out, trace)
    print(_trace_summary(trace))
    return 0


def _resolve_threshold(args, acfg) -> float:
    if args.threshold_db is not None:
        return args.threshold_db
    if args.carrier:
        return attack.calibrate_threshold(read_trace(args.carrier), acfg)
    raise ConfigError("need --threshold-db or --carrier to set the detection "
                      "threshold (run 'calibrate' to produce one)")


def run_detect(args) -> int:
    cfg = _load_config(args)
    acfg = build_attack(cfg)
    _reject_leftovers(cfg, args.config)
    trace = read_trace(args.trace)
    report = attack.detect(trace, acfg, _resolve_threshold(args, acfg))
    line = report.record()
    print(line)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(line + "\n")
    if args.msr_csv:
        report.msr_curve.to_csv(args.msr_csv)
    return 0


def run_extract(args) -> int:
    cfg = _load_config(args)
    acfg = build_attack(cfg)
    _reject_leftovers(cfg, args.config)
    trace = read_trace(args.trace)
    report = attack.detect(trace, acfg, _resolve_threshold(args, acfg))
    print(report.record())
    if not report.detected:
        print("no message detected; nothing to extract", file=sys.stderr)
        return 1
    result = attack.extract(trace, report, acfg)
    print(result.record())
    if args.out:
        write_trace(args.out, result.filtered)
    if args.msr_csv:
        report.msr_curve.to_csv(args.msr_csv)
    return 0


def run_calibrate(args) -> int:
    cfg = _load_config(args)
    acfg = build_attack(cfg)
    if args.carriers:
        _reject_leftovers(cfg, args.config)
        carriers = [read_trace(p) for p in args.carriers]
    else:
        laser = build_laser(cfg)
        sim = build_sim(cfg, None)
        _reject_leftovers(cfg, args.config)
        base = args.seed if args.seed is not None else 0
        carriers = [
            integrate_laser(laser, replace(
                sim, init=perturbed_init(InitialState(), base + i)))
            for i in range(args.runs)]
    psls = [tfa.msr(tfa.cwt(c, acfg.grid, acfg.wavelet)).psl_db
            for c in carriers]
    threshold = max(psls) + acfg.margin_db
    line = (f"threshold_db={threshold:.6g} carrier_psl_max={max(psls):.6g} "
            f"runs={len(psls)}")
    print(line)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(line + "\n")
    return 0


def run_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep requires --config with a plan file")
    if not args.out:
        raise ConfigError("sweep requires --out for the results CSV")
    cfg = parse_kv(args.config)
    plan = build_plan(cfg, args.seed)
    acfg = build_attack(cfg)
    laser = build_laser(cfg)
    sim = build_sim(cfg, None)
    _reject_leftovers(cfg, args.config)
    result = run_sweep_plan(plan, laser, sim, acfg, workers=args.workers)
    result.to_csv(args.out)
    write_plot_script(str(args.out) + ".gp", args.out, plan)
    n_err = sum(1 for r in result.records if r["error"])
    print(f"records={len(result.records)} errors={n_err} "
          f"threshold_db={result.threshold_db:.6g} csv={args.out}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p, out=True):
    p.add_argument("--config", help="flat key=value config file")
    if out:
        p.add_argument("--out", help="output artifact path")
    p.add_argument("--seed", type=int, default=None,
                   help="64-bit seed for initial-condition perturbation")
    p.add_argument("--workers", type=int, default=1,
                   help="worker processes for sweep cells")
    p.add_argument("--msr-csv", dest="msr_csv",
                   help="also write the frequency/MSR curve as CSV")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chaoscomm",
        description="chaotic laser carrier simulation and time-frequency "
                    "message detection/extraction")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate the carrier laser")
    _add_common(p)
    p.set_defaults(fn=run_simulate)

    p = sub.add_parser("encrypt", help="embed a sinusoidal message (CMA/CMO)")
    _add_common(p)
    p.set_defaults(fn=run_encrypt)

    for name, fn in (("detect", run_detect), ("extract", run_extract)):
        p = sub.add_parser(name, help=f"{name} a message in a trace file")
        p.add_argument("trace", help="input trace CSV")
        p.add_argument("--threshold-db", type=float, default=None)
        p.add_argument("--carrier", help="carrier trace file for threshold "
                                         "calibration")
        _add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("calibrate", help="derive the detection threshold "
                                         "from carrier runs")
    p.add_argument("carriers", nargs="*", help="carrier trace files "
                   "(default: simulate fresh ones)")
    p.add_argument("--runs", type=int, default=5,
                   help="carrier runs to simulate when no files are given")
    _add_common(p)
    p.set_defaults(fn=run_calibrate)

    p = sub.add_parser("sweep", help="frequency x MD sweep with CSV and "
                                     "plot-script output")
    _add_common(p)
    p.set_defaults(fn=run_sweep)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IntegrationDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
