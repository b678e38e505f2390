"""Command-line harness: experiments as subcommands over key=value configs.

Config files are flat UTF-8 text, one ``dotted.key=value`` entry per line,
with ``#`` comments.  All floating-point output is printed with 17
significant digits, so identical configs and seeds reproduce byte-identical
CSV and report files.

Exit codes: 0 all requested checks pass, 1 a check failed, 2 configuration
error (including checks that are undefined for the instance), 3 numerical
failure (non-finite values or step collapse).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    HypothesisNotMet,
    InvalidInstance,
    NotInX0,
    NumericalFailure,
    SamplerFailure,
    StepCollapse,
    UnsupportedRegime,
)
from .flow import EXPLICIT, PROXIMAL, FlowConfig, FlowTrace, TraceRow, Verdict, run_flow
from .functionals import GridFunction, report
from .grid import Grid, ModelParams, build_grid
from .rng import SplitMix64
from .variational import (
    WellClassification,
    bump_profile,
    classify,
    estimate_well_depth,
    fibering_profile,
    growth_exponent_gamma,
    lambda_star,
    sine_profile,
)
from . import verify

TRACE_HEADER = "t,dt,l2,lp_p,seminorm_p,log_int,energy,nehari,dissipation"

CHECK_NAMES = ("energy_inequality", "well_invariance", "decay", "blowup")

IC_KINDS = ("bump", "sine", "random", "file")


def fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    amplitude: float
    mode: int = 1
    seed: int = 0
    path: str | None = None


@dataclass(frozen=True)
class WellDepthOptions:
    samples: int = 200
    seed: int = 0
    num_seeds: int = 5
    descent_iters: int = 300
    d_hat: float | None = None


@dataclass(frozen=True)
class FiberOptions:
    lambda_min: float | None = None
    lambda_max: float | None = None
    count: int = 121


@dataclass(frozen=True)
class ThresholdOptions:
    alpha_lo: float | None = None
    alpha_hi: float | None = None
    tol: float = 0.01


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    flow: FlowConfig
    ic: InitialSpec | None
    output_dir: str
    checks: tuple[str, ...]
    welldepth: WellDepthOptions
    fiber: FiberOptions
    threshold: ThresholdOptions
    golden: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentSummary:
    """Everything cmd_flow reports about a run; deterministic given the
    config and seed."""

    config_lines: tuple[str, ...]
    classification: str
    d_hat: float
    verdict: str
    t_event: float
    rows: int
    check_lines: tuple[str, ...]
    golden_lines: tuple[str, ...]
    all_passed: bool

    def to_lines(self) -> list[str]:
        lines = list(self.config_lines)
        lines.append(f"classify.d_hat={fmt(self.d_hat)}")
        lines.append(f"classify.result={self.classification}")
        lines.append(f"run.verdict={self.verdict}")
        lines.append(f"run.t_event={fmt(self.t_event)}")
        lines.append(f"run.rows={self.rows}")
        lines.extend(self.check_lines)
        lines.extend(self.golden_lines)
        return lines


def _parse_entries(path: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError("empty key", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        entries[key] = (value, lineno)
    return entries


_FLOAT_KEYS = {
    "model.s", "model.p", "model.a", "model.b",
    "flow.dt0", "flow.t_end", "flow.dt_min", "flow.blowup_threshold",
    "flow.inner_tol", "ic.amplitude", "welldepth.d_hat",
    "fiber.lambda_min", "fiber.lambda_max",
    "threshold.alpha_lo", "threshold.alpha_hi", "threshold.tol",
    "golden.d_hat", "golden.threshold",
}
_INT_KEYS = {
    "model.n", "flow.inner_max_iters", "ic.mode", "ic.seed",
    "welldepth.samples", "welldepth.seed", "welldepth.num_seeds",
    "welldepth.descent_iters", "fiber.count",
}
_STR_KEYS = {"flow.integrator", "ic.kind", "ic.path", "output_dir", "checks"}
_KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS


class _Entries:
    def __init__(self, entries: dict[str, tuple[str, int]]):
        self.entries = entries
        for key, (_, lineno) in entries.items():
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"unknown key {key!r}", lineno)

    def get(self, key: str, default=None):
        if key not in self.entries:
            return default
        value, lineno = self.entries[key]
        try:
            if key in _FLOAT_KEYS:
                return float(value)
            if key in _INT_KEYS:
                return int(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}", lineno) from exc
        return value

    def require(self, key: str):
        if key not in self.entries:
            raise ConfigError(f"missing required key {key!r}")
        return self.get(key)


def load_config(path: str, need_ic: bool = True) -> RunConfig:
    """Parse and validate a config file into a typed RunConfig."""
    ent = _Entries(_parse_entries(path))

    try:
        model = ModelParams(
            s=ent.require("model.s"),
            p=ent.require("model.p"),
            a=ent.require("model.a"),
            b=ent.require("model.b"),
            n=ent.require("model.n"),
        )
    except InvalidInstance as exc:
        raise ConfigError(str(exc)) from exc

    integrator = ent.get("flow.integrator", PROXIMAL)
    if integrator not in (PROXIMAL, EXPLICIT):
        raise ConfigError(f"unknown integrator {integrator!r}")
    try:
        flow_cfg = FlowConfig(
            dt0=ent.get("flow.dt0", 1e-2),
            t_end=ent.get("flow.t_end", 1.0),
            dt_min=ent.get("flow.dt_min", 1e-12),
            blowup_threshold=ent.get("flow.blowup_threshold", 1e6),
            inner_tol=ent.get("flow.inner_tol", 1e-8),
            inner_max_iters=ent.get("flow.inner_max_iters", 500),
            integrator=integrator,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    ic = None
    if need_ic:
        kind = ent.require("ic.kind")
        if kind not in IC_KINDS:
            raise ConfigError(f"ic.kind must be one of {IC_KINDS}, got {kind!r}")
        amplitude = ent.require("ic.amplitude")
        if amplitude == 0.0:
            raise ConfigError("ic.amplitude must be nonzero")
        path_value = ent.get("ic.path")
        if kind == "file":
            if path_value is None:
                raise ConfigError("ic.kind=file requires ic.path")
            if not Path(path_value).is_file():
                raise ConfigError(f"ic.path does not exist: {path_value}")
        ic = InitialSpec(
            kind=kind,
            amplitude=amplitude,
            mode=ent.get("ic.mode", 1),
            seed=ent.get("ic.seed", 0),
            path=path_value,
        )

    checks_raw = ent.get("checks", "")
    checks = tuple(name for name in (s.strip() for s in checks_raw.split(",")) if name)
    for name in checks:
        if name not in CHECK_NAMES:
            raise ConfigError(f"unknown check {name!r}; known: {', '.join(CHECK_NAMES)}")

    golden = {}
    for key in ("d_hat", "threshold"):
        value = ent.get(f"golden.{key}")
        if value is not None:
            golden[key] = value

    return RunConfig(
        model=model,
        flow=flow_cfg,
        ic=ic,
        output_dir=ent.get("output_dir", "out"),
        checks=checks,
        welldepth=WellDepthOptions(
            samples=ent.get("welldepth.samples", 200),
            seed=ent.get("welldepth.seed", 0),
            num_seeds=ent.get("welldepth.num_seeds", 5),
            descent_iters=ent.get("welldepth.descent_iters", 300),
            d_hat=ent.get("welldepth.d_hat"),
        ),
        fiber=FiberOptions(
            lambda_min=ent.get("fiber.lambda_min"),
            lambda_max=ent.get("fiber.lambda_max"),
            count=ent.get("fiber.count", 121),
        ),
        threshold=ThresholdOptions(
            alpha_lo=ent.get("threshold.alpha_lo"),
            alpha_hi=ent.get("threshold.alpha_hi"),
            tol=ent.get("threshold.tol", 0.01),
        ),
        golden=golden,
    )


# ---------------------------------------------------------------------------
# initial data


def initial_condition(grid: Grid, spec: InitialSpec) -> GridFunction:
    """Build u0 from its spec: bump, sine mode, seeded random field, or file."""
    if spec.kind == "bump":
        base = bump_profile(grid)
    elif spec.kind == "sine":
        base = sine_profile(grid, spec.mode)
    elif spec.kind == "random":
        rng = SplitMix64(spec.seed)
        raw = rng.symmetric_array(grid.n)
        padded = np.concatenate(([0.0], raw, [0.0]))
        base = GridFunction(grid, (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0)
    elif spec.kind == "file":
        values = []
        with open(spec.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    values.append(float(line))
                except ValueError as exc:
                    raise ConfigError(
                        f"bad value in {spec.path}: {line!r}", lineno
                    ) from exc
        if len(values) != grid.n:
            raise ConfigError(
                f"{spec.path} holds {len(values)} values, grid needs {grid.n}"
            )
        base = GridFunction(grid, np.array(values))
    else:
        raise ConfigError(f"unknown ic.kind {spec.kind!r}")
    return base.scaled(spec.amplitude)


# ---------------------------------------------------------------------------
# output helpers


def _row_line(row: TraceRow) -> str:
    r = row.report
    fields = (row.t, row.dt, r.l2, r.lp_p, r.seminorm_p, r.log_int,
              r.energy, r.nehari, row.dissipation)
    return ",".join(fmt(x) for x in fields)


class TraceCsvSink:
    """Streams accepted rows into an open CSV file as they arrive."""

    def __init__(self, path: Path):
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._fh.write(TRACE_HEADER + "\n")
        self._fh.flush()

    def __call__(self, row: TraceRow):
        self._fh.write(_row_line(row) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()


def write_trace_csv(path: Path, trace: FlowTrace):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRACE_HEADER + "\n")
        for row in trace.rows:
            fh.write(_row_line(row) + "\n")


def write_report(path: Path, lines: list[str]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _config_echo(cfg: RunConfig) -> list[str]:
    m, f = cfg.model, cfg.flow
    lines = [
        f"config.model.s={fmt(m.s)}",
        f"config.model.p={fmt(m.p)}",
        f"config.model.a={fmt(m.a)}",
        f"config.model.b={fmt(m.b)}",
        f"config.model.n={m.n}",
        f"config.flow.dt0={fmt(f.dt0)}",
        f"config.flow.t_end={fmt(f.t_end)}",
        f"config.flow.dt_min={fmt(f.dt_min)}",
        f"config.flow.blowup_threshold={fmt(f.blowup_threshold)}",
        f"config.flow.inner_tol={fmt(f.inner_tol)}",
        f"config.flow.inner_max_iters={f.inner_max_iters}",
        f"config.flow.integrator={f.integrator}",
    ]
    if cfg.ic is not None:
        lines += [
            f"config.ic.kind={cfg.ic.kind}",
            f"config.ic.amplitude={fmt(cfg.ic.amplitude)}",
            f"config.ic.mode={cfg.ic.mode}",
            f"config.ic.seed={cfg.ic.seed}",
        ]
        if cfg.ic.path is not None:
            lines.append(f"config.ic.path={cfg.ic.path}")
    return lines


def _energy_lines(prefix: str, rep) -> list[str]:
    return [
        f"{prefix}.seminorm_p={fmt(rep.seminorm_p)}",
        f"{prefix}.lp_p={fmt(rep.lp_p)}",
        f"{prefix}.log_int={fmt(rep.log_int)}",
        f"{prefix}.energy={fmt(rep.energy)}",
        f"{prefix}.nehari={fmt(rep.nehari)}",
        f"{prefix}.l2={fmt(rep.l2)}",
    ]


def _resolve_d_hat(cfg: RunConfig, grid: Grid) -> float:
    if cfg.welldepth.d_hat is not None:
        return cfg.welldepth.d_hat
    estimate = estimate_well_depth(
        grid,
        count=cfg.welldepth.samples,
        seed=cfg.welldepth.seed,
        descent_iters=cfg.welldepth.descent_iters,
    )
    return estimate.d_hat


def _out_dir(cfg: RunConfig, override: str | None) -> Path:
    out = Path(override if override is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_energy(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg.model)
    u0 = initial_condition(grid, cfg.ic)
    rep = report(u0)
    d_hat = _resolve_d_hat(cfg, grid)
    verdict = classify(u0, d_hat)
    lines = _config_echo(cfg)
    lines += _energy_lines("energy", rep)
    lines.append(f"classify.d_hat={fmt(d_hat)}")
    lines.append(f"classify.result={verdict.value}")
    write_report(out / "energy.report", lines)
    for line in lines:
        print(line)
    return 0


def cmd_fiber(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg.model)
    u0 = initial_condition(grid, cfg.ic)
    try:
        star = lambda_star(u0)
    except NotInX0 as exc:
        raise ConfigError(str(exc)) from exc
    except OverflowError as exc:
        raise ConfigError(
            "the critical scale of this state is not representable; "
            "rescale the initial data"
        ) from exc
    lam_min = cfg.fiber.lambda_min if cfg.fiber.lambda_min is not None else star * 1e-2
    lam_max = cfg.fiber.lambda_max if cfg.fiber.lambda_max is not None else star * 1e2
    profile = fibering_profile(u0, lam_min, lam_max, cfg.fiber.count)

    lambdas = list(profile.lambdas)
    j_vals = list(profile.j_values)
    i_vals = list(profile.i_values)
    # splice the critical scale into the sampled grid and mark its row
    star_row = None
    if lam_min <= star <= lam_max:
        pos = int(np.searchsorted(profile.lambdas, star))
        single = fibering_profile(u0, star, 2.0 * star, 16)
        lambdas.insert(pos, star)
        j_vals.insert(pos, float(single.j_values[0]))
        i_vals.insert(pos, float(single.i_values[0]))
        star_row = pos

    path = out / "fiber.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("lambda,j,i,is_star\n")
        for k, (lam, j, i) in enumerate(zip(lambdas, j_vals, i_vals)):
            mark = 1 if k == star_row else 0
            fh.write(f"{fmt(lam)},{fmt(j)},{fmt(i)},{mark}\n")
    print(f"lambda_star={fmt(star)}")
    print(f"wrote {path}")
    return 0


def _run_checks(cfg: RunConfig, u0: GridFunction, trace: FlowTrace,
                classification: WellClassification,
                d_hat: float) -> tuple[list[str], bool]:
    lines: list[str] = []
    all_passed = True
    for name in cfg.checks:
        if name == "energy_inequality":
            result = verify.check_energy_inequality(trace)
            lines += verify.report_lines(name, result)
            all_passed &= result.passed
        elif name == "well_invariance":
            if classification in (WellClassification.INSIDE_WELL,
                                  WellClassification.EXTERIOR):
                ok = verify.check_well_invariance(trace, classification, d_hat)
            else:
                ok = True
            lines += verify.report_lines(name, ok)
            all_passed &= ok
        elif name == "decay":
            try:
                result = verify.check_decay(trace, cfg.model)
            except ValueError as exc:
                if isinstance(exc, UnsupportedRegime):
                    raise
                lines.append(f"check.{name}.passed=false")
                lines.append(f"check.{name}.reason={exc}")
                all_passed = False
                continue
            lines += verify.report_lines(name, result)
            all_passed &= result.passed
        elif name == "blowup":
            try:
                result = verify.check_blowup(trace, cfg.model)
            except ValueError as exc:
                if isinstance(exc, (UnsupportedRegime, HypothesisNotMet)):
                    raise
                lines.append(f"check.{name}.passed=false")
                lines.append(f"check.{name}.reason={exc}")
                all_passed = False
                continue
            lines += verify.report_lines(name, result)
            all_passed &= result.passed
    return lines, all_passed


def cmd_flow(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg.model)
    u0 = initial_condition(grid, cfg.ic)
    d_hat = _resolve_d_hat(cfg, grid)
    classification = classify(u0, d_hat)
    sink = TraceCsvSink(out / "trace.csv")
    try:
        trace = run_flow(u0, cfg.flow, on_row=sink)
    finally:
        sink.close()

    check_lines, all_passed = _run_checks(cfg, u0, trace, classification, d_hat)
    golden_lines = []
    if "d_hat" in cfg.golden:
        golden_lines.append(f"golden.d_hat.delta={fmt(d_hat - cfg.golden['d_hat'])}")
    summary = ExperimentSummary(
        config_lines=tuple(_config_echo(cfg)),
        classification=classification.value,
        d_hat=d_hat,
        verdict=trace.verdict.value,
        t_event=trace.t_event,
        rows=len(trace.rows),
        check_lines=tuple(check_lines),
        golden_lines=tuple(golden_lines),
        all_passed=all_passed,
    )
    lines = summary.to_lines()
    lines += _energy_lines("run.final", trace.rows[-1].report)
    write_report(out / "summary.report", lines)
    for line in lines:
        print(line)
    return 0 if summary.all_passed else 1


def cmd_welldepth(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg.model)
    opts = cfg.welldepth
    seeds = [opts.seed + k for k in range(opts.num_seeds)]

    def estimate(seed: int):
        return estimate_well_depth(
            grid, count=opts.samples, seed=seed, descent_iters=opts.descent_iters
        )

    workers = os.environ.get("FRACFLOW_THREADS")
    max_workers = max(1, int(workers)) if workers else min(4, os.cpu_count() or 1)
    if max_workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            estimates = list(pool.map(estimate, seeds))
    else:
        estimates = [estimate(seed) for seed in seeds]

    d_hats = [e.d_hat for e in estimates]
    best = estimates[int(np.argmin(d_hats))]
    spread = (max(d_hats) - min(d_hats)) / min(d_hats) if min(d_hats) > 0 else float("inf")
    gamma, rho, theta = growth_exponent_gamma(cfg.model)

    lines = _config_echo(cfg)
    for seed, e in zip(seeds, estimates):
        lines.append(f"welldepth.seed{seed}.d_hat={fmt(e.d_hat)}")
    lines += [
        f"welldepth.d_hat={fmt(best.d_hat)}",
        f"welldepth.spread={fmt(spread)}",
        f"welldepth.residual_I={fmt(best.residual_I)}",
        f"welldepth.sampler_seed={best.sampler_seed}",
        f"welldepth.gamma={fmt(gamma)}",
        f"welldepth.rho={fmt(rho)}",
        f"welldepth.theta={fmt(theta)}",
    ]
    if "d_hat" in cfg.golden:
        lines.append(f"golden.d_hat.delta={fmt(best.d_hat - cfg.golden['d_hat'])}")
    write_report(out / "welldepth.report", lines)

    with open(out / "minimizer.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,u\n")
        for x, v in zip(grid.centers, best.minimizer.values):
            fh.write(f"{fmt(x)},{fmt(v)}\n")
    for line in lines:
        print(line)
    return 0


def cmd_threshold(cfg: RunConfig, out: Path) -> int:
    opts = cfg.threshold
    if opts.alpha_lo is None or opts.alpha_hi is None:
        raise ConfigError("threshold.alpha_lo and threshold.alpha_hi are required")
    if not 0.0 < opts.alpha_lo < opts.alpha_hi:
        raise ConfigError("need 0 < threshold.alpha_lo < threshold.alpha_hi")

    grid = build_grid(cfg.model)

    def outcome(amplitude: float) -> FlowTrace:
        spec = InitialSpec(
            kind=cfg.ic.kind, amplitude=amplitude, mode=cfg.ic.mode,
            seed=cfg.ic.seed, path=cfg.ic.path,
        )
        return run_flow(initial_condition(grid, spec), cfg.flow)

    lo, hi = opts.alpha_lo, opts.alpha_hi
    trace_lo = outcome(lo)
    if trace_lo.verdict == Verdict.BLOW_UP:
        raise ConfigError(f"alpha_lo={fmt(lo)} already blows up; bracket invalid")
    trace_hi = outcome(hi)
    if trace_hi.verdict != Verdict.BLOW_UP:
        raise ConfigError(f"alpha_hi={fmt(hi)} does not blow up; bracket invalid")

    while hi - lo > opts.tol * hi:
        mid = 0.5 * (lo + hi)
        trace_mid = outcome(mid)
        if trace_mid.verdict == Verdict.BLOW_UP:
            hi, trace_hi = mid, trace_mid
        else:
            lo, trace_lo = mid, trace_mid

    write_trace_csv(out / "trace_lo.csv", trace_lo)
    write_trace_csv(out / "trace_hi.csv", trace_hi)
    lines = _config_echo(cfg)
    lines += [
        f"threshold.alpha_lo={fmt(lo)}",
        f"threshold.alpha_hi={fmt(hi)}",
        f"threshold.width={fmt(hi - lo)}",
    ]
    if "threshold" in cfg.golden:
        mid = 0.5 * (lo + hi)
        lines.append(f"golden.threshold.delta={fmt(mid - cfg.golden['threshold'])}")
    write_report(out / "threshold.report", lines)
    for line in lines:
        print(line)
    return 0


# ---------------------------------------------------------------------------
# entry point


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    flow_cfg = cfg.flow
    if args.integrator is not None:
        if args.integrator not in (PROXIMAL, EXPLICIT):
            raise ConfigError(f"unknown integrator {args.integrator!r}")
        flow_cfg = FlowConfig(
            dt0=flow_cfg.dt0, t_end=flow_cfg.t_end, dt_min=flow_cfg.dt_min,
            blowup_threshold=flow_cfg.blowup_threshold,
            inner_tol=flow_cfg.inner_tol, inner_max_iters=flow_cfg.inner_max_iters,
            integrator=args.integrator,
        )
    ic = cfg.ic
    welldepth = cfg.welldepth
    if args.seed is not None:
        if ic is not None:
            ic = InitialSpec(kind=ic.kind, amplitude=ic.amplitude, mode=ic.mode,
                             seed=args.seed, path=ic.path)
        welldepth = WellDepthOptions(
            samples=welldepth.samples, seed=args.seed,
            num_seeds=welldepth.num_seeds, descent_iters=welldepth.descent_iters,
            d_hat=welldepth.d_hat,
        )
    checks = cfg.checks
    if args.check:
        for name in args.check:
            if name not in CHECK_NAMES:
                raise ConfigError(f"unknown check {name!r}")
        checks = tuple(args.check)
    return RunConfig(
        model=cfg.model, flow=flow_cfg, ic=ic, output_dir=cfg.output_dir,
        checks=checks, welldepth=welldepth, fiber=cfg.fiber,
        threshold=cfg.threshold, golden=cfg.golden,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracflow",
        description="Nonlocal p-Laplacian flows with logarithmic nonlinearity: "
                    "energy reports, fibering scans, dissipative runs, well-depth "
                    "estimates, and blow-up threshold searches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "energy": "report the diagnostics of u0 and classify it against the well depth",
        "fiber": "write the ray-energy profile j(lambda) and I(lambda u) as CSV",
        "flow": "integrate the flow, stream the trace CSV, and run requested checks",
        "welldepth": "estimate the well depth across sampler seeds",
        "threshold": "bisect the amplitude between decay and blow-up outcomes",
    }
    for name, help_text in specs.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="key=value config file")
        sp.add_argument("--out", default=None, help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override ic.seed and welldepth.seed")
        sp.add_argument("--check", action="append", default=None, metavar="NAME",
                        help="verify check to run (repeatable); overrides config")
        sp.add_argument("--integrator", default=None,
                        help=f"{PROXIMAL} or {EXPLICIT}")
    return parser


_COMMANDS = {
    "energy": (cmd_energy, True),
    "fiber": (cmd_fiber, True),
    "flow": (cmd_flow, True),
    "welldepth": (cmd_welldepth, False),
    "threshold": (cmd_threshold, True),
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    command, need_ic = _COMMANDS[args.command]
    try:
        cfg = load_config(args.config, need_ic=need_ic)
        cfg = _apply_overrides(cfg, args)
        out = _out_dir(cfg, args.out)
        return command(cfg, out)
    except (ConfigError, InvalidInstance, UnsupportedRegime,
            HypothesisNotMet, NotInX0) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, StepCollapse, SamplerFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
