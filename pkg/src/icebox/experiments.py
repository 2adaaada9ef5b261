"""Declarative experiment runner: validated configs in, CSV/JSON files out.

Each experiment id maps to one runner function.  Runners are deterministic
given the config (seeds included), write every artifact into the output
directory, and return a :class:`RunReport` echoing the config, the produced
file manifest, wall-clock timings and the norm/energy invariant audit.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from math import pi
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .analytics import (
    evolve_effective,
    grover_equivalence,
    nonlocal_frequency,
    nonlocal_ground_probability,
    wavepacket_iteration,
)
from .basis import BATH, SystemDims
from .dynamics import (
    PropagatorConfig,
    TimeSeries,
    audit_evolution,
    evolve,
    fourier_spectrum,
    ground_state_probability,
    magnetization_profile,
)
from .errors import CapacityError, UsageError
from .operators import (
    build_nonlocal_model,
    build_local_model,
    build_radial_tridiagonal,
    build_reduced_hamiltonian,
    build_toy_model,
    build_xxx_bath,
    interaction_strength,
)
from .states import composite_basis_state, uniform_over_system
from .subspace import (
    scaling_study,
    shell_profile,
    subspace_gap,
)

AMPLITUDE_GUARD = 1 << 26

EXPERIMENTS = (
    "toy-wave",
    "nonlocal",
    "local-evolve",
    "gap",
    "scaling",
    "wavepacket",
    "grover-check",
)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict
    out_dir: Path

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise UsageError(
                f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}"
            )
        object.__setattr__(self, "out_dir", Path(self.out_dir))


@dataclass
class RunReport:
    experiment: str
    config: dict
    manifest: list[str] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    audit: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=_jsonify)


def _jsonify(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def select_target(n_s: int, seed: int) -> int:
    """Deterministic pseudo-random target label; same (seed, n_s) same target."""
    rng = np.random.default_rng([seed, n_s])
    return int(rng.integers(0, 1 << n_s))


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    """Full-double-precision CSV (17 significant digits)."""
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, default=_jsonify))


def _guard_amplitudes(count: int) -> None:
    if count > AMPLITUDE_GUARD:
        raise CapacityError(
            f"state of {count} amplitudes exceeds the guard of {AMPLITUDE_GUARD}"
        )


class _Schema:
    """Tiny per-experiment parameter validator."""

    def __init__(self, experiment: str, params: dict):
        self.experiment = experiment
        self.params = dict(params)
        self.seen: set[str] = set()

    def get(self, key, kind, default=None, required=False, check=None):
        if key not in self.params:
            if required:
                raise UsageError(f"{self.experiment}: missing required parameter {key!r}")
            self.seen.add(key)
            return default
        value = self.params[key]
        self.seen.add(key)
        if kind is float and isinstance(value, int):
            value = float(value)
        if kind is list and isinstance(value, (list, tuple)):
            value = list(value)
        elif not isinstance(value, kind):
            raise UsageError(
                f"{self.experiment}: parameter {key!r} must be {kind.__name__}, "
                f"got {type(value).__name__}"
            )
        if check is not None and not check(value):
            raise UsageError(f"{self.experiment}: parameter {key!r}={value!r} out of range")
        return value

    def finish(self):
        unknown = set(self.params) - self.seen
        if unknown:
            raise UsageError(
                f"{self.experiment}: unknown parameters {sorted(unknown)}"
            )


def _propagator(schema: _Schema) -> PropagatorConfig:
    tol = schema.get("tolerance", float, default=1e-10, check=lambda v: v > 0)
    return PropagatorConfig(tolerance=tol)


def _maybe_plot(enabled: bool, out_dir: Path, spec: dict, manifest: list[str]) -> None:
    if not enabled:
        return
    from .plotting import emit_plot

    svg = emit_plot(out_dir, spec)
    manifest.append(svg.name)


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------


def _run_toy_wave(config: ExperimentConfig, report: RunReport) -> None:
    schema = _Schema(config.experiment, config.params)
    n_b = schema.get("n_b", int, default=13, check=lambda v: v >= 3)
    j_exchange = schema.get("J", float, default=1.0)
    field_b = schema.get("B", float, default=1.0)
    lam = schema.get("lam", float, default=1.0)
    t_max = schema.get("t_max", float, default=10.0, check=lambda v: v > 0)
    dt = schema.get("dt", float, default=0.05, check=lambda v: v > 0)
    plot = schema.get("plot", bool, default=False)
    prop = _propagator(schema)
    schema.finish()
    _guard_amplitudes(1 << (1 + n_b))

    h_total = build_toy_model(n_b, j_exchange, field_b, lam)
    bath = build_xxx_bath(n_b, j_exchange, topology="chain-periodic").promoted()
    dims = h_total.dims
    psi0 = composite_basis_state(dims, 1, 0)  # system excited, bath aligned down
    times = np.arange(0.0, t_max + dt / 2, dt)

    t0 = time.perf_counter()
    snaps = evolve(h_total, psi0, times, prop)
    report.timings["evolve_s"] = time.perf_counter() - t0

    pg = np.array([ground_state_probability(s, 0) for s in snaps])
    mags = np.array([magnetization_profile(s, BATH) for s in snaps])
    e_bath = np.array([bath.expectation(s.amplitudes) for s in snaps])

    out = config.out_dir
    write_csv(out / "ground_probability.csv", ["t", "value"], [times, pg])
    write_csv(
        out / "bath_magnetization.csv",
        ["t"] + [f"z{m}" for m in range(n_b)],
        [times] + [mags[:, m] for m in range(n_b)],
    )
    write_csv(out / "bath_energy.csv", ["t", "value"], [times, e_bath])
    report.manifest += ["ground_probability.csv", "bath_magnetization.csv", "bath_energy.csv"]
    report.audit = audit_evolution(h_total, snaps)
    report.info = {
        "hamiltonian": h_total.describe(),
        "bath_ground_energy": -j_exchange * n_b,
    }
    _maybe_plot(
        plot,
        out,
        {
            "kind": "line",
            "file": "ground_probability.csv",
            "x": "t",
            "y": ["value"],
            "out": "ground_probability.svg",
            "xlabel": "t",
            "ylabel": "ground-state probability",
        },
        report.manifest,
    )
    _maybe_plot(
        plot,
        out,
        {
            "kind": "heatmap",
            "file": "bath_magnetization.csv",
            "x": "t",
            "out": "bath_magnetization.svg",
            "xlabel": "t",
            "ylabel": "bath qubit",
        },
        report.manifest,
    )


def _run_nonlocal(config: ExperimentConfig, report: RunReport) -> None:
    schema = _Schema(config.experiment, config.params)
    n_s = schema.get("n_s", int, default=5, check=lambda v: v >= 1)
    n_b = schema.get("n_b", int, default=5, check=lambda v: v >= 1)
    seed = schema.get("seed", int, default=0)
    g_s = schema.get("g_s", int, default=None)
    g_b = schema.get("g_b", int, default=0)
    half_periods = schema.get("half_periods", float, default=3.0, check=lambda v: v > 0)
    samples = schema.get("samples", int, default=240, check=lambda v: v >= 2)
    include_full = schema.get("include_full", bool, default=True)
    plot = schema.get("plot", bool, default=False)
    prop = _propagator(schema)
    schema.finish()

    dims = SystemDims(n_s=n_s, n_b=n_b)
    if g_s is None:
        g_s = select_target(n_s, seed)
    omega = nonlocal_frequency(dims.N_s, dims.N_b)
    times = np.linspace(0.0, half_periods * pi / omega, samples)

    amps0 = np.zeros(4, dtype=complex)
    amps0[2] = np.sqrt((dims.N_s - 1) / dims.N_s)
    amps0[3] = np.sqrt(1.0 / dims.N_s)
    t0 = time.perf_counter()
    eff = evolve_effective(dims.N_s, dims.N_b, amps0, times)
    pg_eff = np.abs(eff[:, 3]) ** 2 + np.abs(eff[:, 1]) ** 2
    report.timings["effective_s"] = time.perf_counter() - t0
    pg_formula = nonlocal_ground_probability(dims.N_s, dims.N_b, times)

    columns = {"t": times, "pg_effective4": pg_eff, "pg_formula": pg_formula}
    if include_full:
        _guard_amplitudes(dims.N_c)
        h_total = build_nonlocal_model(dims, g_s, g_b)
        psi0 = uniform_over_system(dims, g_b)
        t0 = time.perf_counter()
        snaps = evolve(h_total, psi0, times, prop)
        report.timings["evolve_s"] = time.perf_counter() - t0
        columns["pg_full"] = np.array([ground_state_probability(s, g_s) for s in snaps])
        report.audit = audit_evolution(h_total, snaps)

    out = config.out_dir
    write_csv(out / "overlay.csv", list(columns), list(columns.values()))
    report.manifest.append("overlay.csv")
    report.info = {
        "g_s": g_s,
        "g_b": g_b,
        "seed": seed,
        "omega": omega,
        "peak_time": pi / omega,
    }
    _maybe_plot(
        plot,
        out,
        {
            "kind": "line",
            "file": "overlay.csv",
            "x": "t",
            "y": [c for c in columns if c != "t"],
            "out": "overlay.svg",
            "xlabel": "t",
            "ylabel": "ground-state probability",
        },
        report.manifest,
    )


def _local_gap_table(n_s: int, gamma: list[float], ls: list[int], tolerance: float) -> dict[int, float]:
    lam = interaction_strength(n_s, gamma)
    out = {}
    for l_j in ls:
        problem = build_reduced_hamiltonian(n_s, 0, (1 << l_j) - 1, lam)
        out[l_j] = subspace_gap(problem, tolerance=tolerance).omega
    return out


def _run_local_evolve(config: ExperimentConfig, report: RunReport) -> None:
    schema = _Schema(config.experiment, config.params)
    n_s = schema.get("n_s", int, default=8, check=lambda v: v >= 2)
    gamma = schema.get("gamma", list, default=[1.0, 1.16])
    seed = schema.get("seed", int, default=0)
    g_b = schema.get("g_b", int, default=0)
    initial_l = schema.get("initial_l", int, default=None)
    t_max = schema.get("t_max", float, default=0.0)
    dt = schema.get("dt", float, default=0.0)
    max_match = schema.get("max_match", int, default=4, check=lambda v: v >= 1)
    plot = schema.get("plot", bool, default=False)
    prop = _propagator(schema)
    schema.finish()

    dims = SystemDims(n_s=n_s, n_b=n_s)
    _guard_amplitudes(dims.N_c)
    g_s = select_target(n_s, seed)
    ls = sorted(set(range(1, max(n_s // 2 + 1, max_match) + 1)))
    t0 = time.perf_counter()
    omegas = _local_gap_table(n_s, gamma, ls, prop.tolerance)
    report.timings["eigensolve_s"] = time.perf_counter() - t0

    if dt <= 0:
        dt = (pi / omegas[1]) / 16.0
    if t_max <= 0:
        two_w = [2 * omegas[l] for l in sorted(omegas)]
        min_gap = min(a - b for a, b in zip(two_w, two_w[1:]))
        t_max = max(8.0 * pi / omegas[max(omegas)], 2.5 * 2.0 * pi / min_gap)
    times = np.arange(0.0, t_max, dt)

    h_total = build_local_model(n_s, gamma, g_s, g_b)
    if initial_l is None:
        psi0 = uniform_over_system(dims, g_b)
    else:
        if not 0 <= initial_l <= n_s:
            raise UsageError(f"initial_l={initial_l} out of range [0, {n_s}]")
        j_s = g_s ^ ((1 << initial_l) - 1)
        psi0 = composite_basis_state(dims, j_s, g_b)

    t0 = time.perf_counter()
    snaps = evolve(h_total, psi0, times, prop)
    report.timings["evolve_s"] = time.perf_counter() - t0
    pg = np.array([ground_state_probability(s, g_s) for s in snaps])
    report.audit = audit_evolution(h_total, snaps)

    series = TimeSeries(t0=0.0, dt=dt, values=pg, label="ground probability")
    spectrum = fourier_spectrum(series)
    matches = {}
    bin_width = 2.0 * pi / (len(times) * dt)
    peak_freqs = spectrum.peak_frequencies()
    for l_j in range(1, max_match + 1):
        expected = 2.0 * omegas[l_j]
        if len(peak_freqs) > 0:
            best = float(peak_freqs[np.argmin(np.abs(peak_freqs - expected))])
            matches[l_j] = {
                "expected": expected,
                "peak": best,
                "deviation": abs(best - expected),
                "within_resolution": abs(best - expected) <= bin_width,
            }

    out = config.out_dir
    write_csv(out / "ground_probability.csv", ["t", "value"], [times, pg])
    write_csv(
        out / "spectrum.csv",
        ["frequency", "magnitude"],
        [spectrum.frequencies, spectrum.magnitudes],
    )
    _write_json(
        out / "peaks.json",
        {
            "grid_resolution": bin_width,
            "omegas": {str(k): v for k, v in omegas.items()},
            "matches": {str(k): v for k, v in matches.items()},
            "peaks": [asdict(p) for p in spectrum.peaks],
        },
    )
    report.manifest += ["ground_probability.csv", "spectrum.csv", "peaks.json"]
    report.info = {
        "g_s": g_s,
        "seed": seed,
        "lam": interaction_strength(n_s, gamma),
        "dt": dt,
        "t_max": t_max,
        "mean_pg": float(pg.mean()),
    }
    _maybe_plot(
        plot,
        out,
        {
            "kind": "spectrum",
            "file": "spectrum.csv",
            "x": "frequency",
            "y": ["magnitude"],
            "out": "spectrum.svg",
            "markers": [2 * omegas[l] for l in range(1, max_match + 1)],
            "xlabel": "angular frequency",
            "ylabel": "|FFT|",
        },
        report.manifest,
    )


def _run_gap(config: ExperimentConfig, report: RunReport) -> None:
    schema = _Schema(config.experiment, config.params)
    n_s = schema.get("n_s", int, default=12, check=lambda v: v >= 2)
    gamma = schema.get("gamma", list, default=[1.0, 1.16])
    l_j = schema.get("l_j", int, default=None)
    seed = schema.get("seed", int, default=0)
    tolerance = schema.get("tolerance", float, default=1e-10, check=lambda v: v > 0)
    maxiter = schema.get("maxiter", int, default=5000, check=lambda v: v >= 1)
    schema.finish()
    if l_j is None:
        l_j = n_s // 2
    if not 1 <= l_j <= n_s:
        raise UsageError(f"l_j={l_j} out of range [1, {n_s}]")

    g_s = select_target(n_s, seed)
    mask = 0
    count = 0
    for bit in range(n_s):  # flip the lowest l_j bits of the target
        if count == l_j:
            break
        mask |= 1 << bit
        count += 1
    j_s = g_s ^ mask
    lam = interaction_strength(n_s, gamma)
    problem = build_reduced_hamiltonian(n_s, g_s, j_s, lam)

    t0 = time.perf_counter()
    gap = subspace_gap(problem, tolerance=tolerance, maxiter=maxiter)
    report.timings["eigensolve_s"] = time.perf_counter() - t0
    profile = shell_profile(gap)

    out = config.out_dir
    _write_json(
        out / "gap.json",
        {
            "n_s": n_s,
            "g_s": g_s,
            "j_s": j_s,
            "l_j": problem.l_j,
            "lam": lam,
            "e0": gap.e0,
            "e1": gap.e1,
            "omega": gap.omega,
            "residuals": list(gap.residuals),
            "well_component": profile.well_component,
            "flagged_shells": profile.flagged,
        },
    )
    rows = list(profile.rows())
    write_csv(
        out / "shell_profile.csv",
        ["h", "m", "amplitude"],
        [
            np.array([r[0] for r in rows]),
            np.array([r[1] for r in rows]),
            np.array([r[2] for r in rows]),
        ],
    )
    report.manifest += ["gap.json", "shell_profile.csv"]
    report.audit = {"max_residual": max(gap.residuals)}
    report.info = {"seed": seed, "g_s": g_s, "j_s": j_s, "omega": gap.omega}


def _run_scaling(config: ExperimentConfig, report: RunReport) -> None:
    schema = _Schema(config.experiment, config.params)
    n_min = schema.get("n_min", int, default=8, check=lambda v: v >= 2)
    n_max = schema.get("n_max", int, default=16, check=lambda v: v >= 2)
    gamma = schema.get("gamma", list, default=[1.0, 1.16])
    tolerance = schema.get("tolerance", float, default=1e-10, check=lambda v: v > 0)
    maxiter = schema.get("maxiter", int, default=5000, check=lambda v: v >= 1)
    plot = schema.get("plot", bool, default=False)
    schema.finish()
    if n_max < n_min:
        raise UsageError(f"n_max={n_max} < n_min={n_min}")

    t0 = time.perf_counter()
    fit = scaling_study(range(n_min, n_max + 1), gamma, tolerance=tolerance, maxiter=maxiter)
    report.timings["eigensolve_s"] = time.perf_counter() - t0

    out = config.out_dir
    _write_json(out / "scaling.json", asdict(fit))
    write_csv(
        out / "points.csv",
        ["n_s", "omega"],
        [
            np.array([p[0] for p in fit.points], dtype=float),
            np.array([p[1] for p in fit.points]),
        ],
    )
    report.manifest += ["scaling.json", "points.csv"]
    report.info = {"slope": fit.slope, "gamma": gamma}
    _maybe_plot(
        plot,
        out,
        {
            "kind": "loglog-scaling",
            "file": "points.csv",
            "x": "n_s",
            "y": ["omega"],
            "out": "scaling.svg",
            "slope": fit.slope,
            "intercept": fit.intercept,
            "xlabel": "log2 N_s",
            "ylabel": "log2 omega",
        },
        report.manifest,
    )


def _run_wavepacket(config: ExperimentConfig, report: RunReport) -> None:
    schema = _Schema(config.experiment, config.params)
    n_s = schema.get("n_s", int, default=18, check=lambda v: v >= 1)
    gamma = schema.get("gamma", list, default=[1.0, 1.16])
    lam = schema.get("lam", float, default=None)
    orders = schema.get("orders", list, default=[1, 2, 3])
    schema.finish()
    if lam is None:
        lam = interaction_strength(n_s, gamma)

    radial = build_radial_tridiagonal(n_s, lam)
    t0 = time.perf_counter()
    e_exact, a_exact = radial.ground()
    solutions = {order: wavepacket_iteration(n_s, lam, order) for order in orders}
    report.timings["solve_s"] = time.perf_counter() - t0

    out = config.out_dir
    _write_json(
        out / "wavepacket.json",
        {
            "n_s": n_s,
            "lam": lam,
            "radial_ground_energy": e_exact,
            "radial_well_component": float(a_exact[0] ** 2),
            "orders": {
                str(o): {
                    "energy": s.energy,
                    "normalization": s.normalization,
                    "well_component": float(s.amplitudes[0] ** 2),
                }
                for o, s in solutions.items()
            },
        },
    )
    hs = np.arange(n_s + 1, dtype=float)
    cols = [hs, a_exact]
    header = ["h", "a_exact"]
    for o in orders:
        cols.append(solutions[o].amplitudes)
        header.append(f"a_order{o}")
    write_csv(out / "amplitudes.csv", header, cols)
    report.manifest += ["wavepacket.json", "amplitudes.csv"]
    report.info = {"lam": lam, "radial_ground_energy": e_exact}


def _run_grover_check(config: ExperimentConfig, report: RunReport) -> None:
    schema = _Schema(config.experiment, config.params)
    n = schema.get("n", int, default=6, check=lambda v: 1 <= v <= 12)
    seed = schema.get("seed", int, default=0)
    target = schema.get("target", int, default=None)
    steps = schema.get("steps", int, default=6, check=lambda v: v >= 0)
    schema.finish()
    if target is None:
        target = select_target(n, seed)

    t0 = time.perf_counter()
    result = grover_equivalence(n, target, steps)
    report.timings["solve_s"] = time.perf_counter() - t0

    out = config.out_dir
    write_csv(
        out / "grover.csv",
        ["step", "fidelity", "success_unitary", "success_hamiltonian"],
        [
            np.arange(steps + 1, dtype=float),
            result.step_fidelity,
            result.success_unitary,
            result.success_hamiltonian,
        ],
    )
    report.manifest.append("grover.csv")
    report.info = {
        "n": n,
        "target": target,
        "seed": seed,
        "min_fidelity": float(result.step_fidelity[1:].min()) if steps else 1.0,
        "best_success_unitary": float(result.success_unitary.max()),
        "best_success_hamiltonian": float(result.success_hamiltonian.max()),
    }


_RUNNERS: dict[str, Callable[[ExperimentConfig, RunReport], None]] = {
    "toy-wave": _run_toy_wave,
    "nonlocal": _run_nonlocal,
    "local-evolve": _run_local_evolve,
    "gap": _run_gap,
    "scaling": _run_scaling,
    "wavepacket": _run_wavepacket,
    "grover-check": _run_grover_check,
}


def run(config: ExperimentConfig) -> RunReport:
    """Validate, execute, and persist one experiment; returns its report."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport(experiment=config.experiment, config=dict(config.params))
    started = time.perf_counter()
    _RUNNERS[config.experiment](config, report)
    report.timings["total_s"] = time.perf_counter() - started
    report_path = config.out_dir / "report.json"
    report_path.write_text(report.to_json())
    report.manifest.append("report.json")
    return report
