"""Parameter sweeps over the analytic engine and the Fock oracle.

Each command produces a SweepTable: fixed column order, real-valued cells,
one status column, and '#'-prefixed metadata.  Grid points that fall on
singular or unstable parameters stay in the output as rows with a non-OK
status and empty value cells -- the figures this feeds need the boundaries,
not a hole where they were.
"""
from __future__ import annotations

import datetime
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    CutoffTooSmall,
    DivergenceDetected,
    EpnoiseError,
    NotAtEP,
    SingularParameters,
    Unstable,
    UnnormalizedEnsemble,
)
from .fock import FockConfig, coherent_state, evolve, fock_observables, steady_state
from .model import SystemParams, classify_regime, heff_spectrum, stationary_gaussian
from .moments import observables
from .transient import fit_constants, order_parameter_ep, order_parameter_general

__all__ = [
    "PARAM_NAMES",
    "STATUS_OK",
    "SweepAxis",
    "SweepSpec",
    "SweepTable",
    "cmd_stability_map",
    "cmd_intensity_map",
    "cmd_linecut",
    "cmd_snr_map",
    "cmd_transient",
    "cmd_verify",
]

PARAM_NAMES = ("delta", "j", "f", "gamma1", "gamma2")
STATUS_OK = "OK"

_STATUS_BY_ERROR = (
    (SingularParameters, "SingularParameters"),
    (Unstable, "Unstable"),
    (CutoffTooSmall, "CutoffTooSmall"),
    (DivergenceDetected, "DivergenceDetected"),
    (NotAtEP, "NotAtEP"),
    (UnnormalizedEnsemble, "UnnormalizedEnsemble"),
)


def _status_of(err: EpnoiseError) -> str:
    for cls, name in _STATUS_BY_ERROR:
        if isinstance(err, cls):
            return name
    return type(err).__name__


@dataclass(frozen=True)
class SweepAxis:
    """One swept quantity: a SystemParams field or, for transients, time."""

    name: str
    start: float
    stop: float
    num: int
    scale: str = "linear"

    def __post_init__(self):
        if self.num < 2:
            raise ConfigError(f"axis {self.name!r} needs at least 2 points")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis scale must be linear or log, got {self.scale!r}")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log axes need positive endpoints")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


@dataclass(frozen=True)
class SweepSpec:
    """Everything a sweep command needs: axes, fixed parameters, knobs.

    fixed + swept parameter names must exactly cover SystemParams for the
    grid commands; the transient command instead fixes all five and sweeps
    time.
    """

    axes: tuple = ()
    fixed: Mapping[str, float] = field(default_factory=dict)
    engine: str = "analytic"
    times: tuple = ()
    f_values: tuple = ()
    a0: tuple = (0.0 + 0.0j, 0.0 + 0.0j)
    cutoff: object = 16
    tail_tol: float = 1e-6
    dim2_budget: int = 600_000
    tol: float = 1e-5
    jobs: int = 1

    def __post_init__(self):
        if self.engine not in ("analytic", "oracle", "both"):
            raise ConfigError(
                f"engine must be analytic, oracle, or both, got {self.engine!r}"
            )
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        for key in self.fixed:
            if key not in PARAM_NAMES:
                raise ConfigError(f"unknown parameter {key!r} in fixed set")

    def fock_config(self) -> FockConfig:
        return FockConfig(
            cutoff=self.cutoff, tail_tol=self.tail_tol, dim2_budget=self.dim2_budget
        )

    def axes_named(self, *names: str, defaults: Mapping[str, "SweepAxis"]):
        """The spec's axes reordered as ``names``, falling back to defaults."""
        chosen = []
        by_name = {ax.name: ax for ax in self.axes}
        unknown = set(by_name) - set(names)
        if unknown:
            raise ConfigError(
                f"axes {sorted(unknown)} not usable here; expected {list(names)}"
            )
        for name in names:
            if name in by_name:
                chosen.append(by_name[name])
            elif name in defaults:
                chosen.append(defaults[name])
            else:
                raise ConfigError(f"missing required axis {name!r}")
        return chosen

    def params(self, **overrides) -> SystemParams:
        merged = dict(self.fixed)
        merged.update(overrides)
        missing = [k for k in PARAM_NAMES if k not in merged]
        extra = [k for k in merged if k not in PARAM_NAMES]
        if missing or extra:
            raise ConfigError(
                f"parameters do not cover SystemParams exactly: "
                f"missing {missing}, extra {extra}"
            )
        return SystemParams(**merged)


class SweepTable:
    """Column-named rows plus metadata; serializes to CSV or JSON.

    Every row is either fully populated with status OK, or carries a non-OK
    status with None in the unavailable cells.
    """

    def __init__(self, columns: Sequence[str], rows: Sequence[Sequence], metadata: dict):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.metadata = dict(metadata)
        if "status" not in self.columns:
            raise ValueError("a SweepTable needs a status column")
        k = self.columns.index("status")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row length does not match the column count")
            if row[k] == STATUS_OK:
                for cell in row:
                    if cell is None or (
                        isinstance(cell, float) and not np.isfinite(cell)
                    ):
                        raise ValueError(f"OK row holds an unavailable cell: {row}")

    @staticmethod
    def _cell(value) -> str:
        if value is None:
            return ""
        if isinstance(value, (bool, np.bool_)):
            return "1" if value else "0"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return repr(float(value))  # shortest round-trip decimal
        return str(value)

    def to_csv(self, fh) -> None:
        for key in sorted(self.metadata):
            fh.write(f"# {key}={self.metadata[key]}\n")
        fh.write(",".join(self.columns) + "\n")
        for row in self.rows:
            fh.write(",".join(self._cell(v) for v in row) + "\n")

    def to_json(self, fh) -> None:
        def clean(value):
            if value is None or isinstance(value, str):
                return value
            if isinstance(value, (bool, np.bool_)):
                return bool(value)
            if isinstance(value, (int, np.integer)):
                return int(value)
            return float(value)

        doc = {
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": [[clean(v) for v in row] for row in self.rows],
        }
        json.dump(doc, fh, indent=1)
        fh.write("\n")

    def write(self, out: str | None, fmt: str = "csv") -> None:
        emit = self.to_csv if fmt == "csv" else self.to_json
        if out is None or out == "-":
            emit(sys.stdout)
        else:
            with open(out, "w", newline="") as fh:
                emit(fh)

    def column(self, name: str) -> list:
        return [row[self.columns.index(name)] for row in self.rows]


def _metadata(command: str, spec: SweepSpec, **extra) -> dict:
    md = {
        "command": command,
        "engine": spec.engine,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    md.update(extra)
    return md


def _run_points(worker, points: Sequence, jobs: int) -> list:
    """Evaluate points in order; parallel workers never reorder results."""
    if jobs <= 1 or len(points) < 4:
        return [worker(pt) for pt in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(points) // (4 * jobs))
        return list(pool.map(worker, points, chunksize=chunk))


# ---------------------------------------------------------------------------
# stability-map

def _stability_point(args) -> list:
    g1, g2, fixed = args
    p = SystemParams(**{**fixed, "gamma1": g1, "gamma2": g2})
    rep = classify_regime(p)
    tol = 1e-9 * p.j**2
    return [
        g1,
        g2,
        rep.stable,
        rep.on_ep_line,
        abs(g2 - g1) <= tol,
        abs(p.j**2 - g1 * g2) <= tol,
        rep.boundary_distance,
        STATUS_OK,
    ]


def cmd_stability_map(spec: SweepSpec) -> SweepTable:
    """Regime flags on a (gamma1, gamma2) grid.

    Emits the stability region, the exceptional-point line
    gamma1 + gamma2 = 2 j, and both singular boundaries gamma2 = gamma1 and
    j**2 = gamma1 * gamma2.
    """
    defaults = {
        "gamma1": SweepAxis("gamma1", 0.0, 2.0, 101),
        "gamma2": SweepAxis("gamma2", 0.0, 2.0, 101),
    }
    ax1, ax2 = spec.axes_named("gamma1", "gamma2", defaults=defaults)
    fixed = dict(spec.fixed)
    fixed.setdefault("delta", 0.0)
    fixed.setdefault("j", 1.0)
    fixed.setdefault("f", 0.0)
    for key in ("gamma1", "gamma2"):
        fixed.pop(key, None)
    points = [
        (float(g1), float(g2), fixed) for g1 in ax1.values() for g2 in ax2.values()
    ]
    rows = _run_points(_stability_point, points, spec.jobs)
    columns = [
        "gamma1",
        "gamma2",
        "stable",
        "on_ep_line",
        "pt_boundary",
        "coupling_boundary",
        "boundary_distance",
        "status",
    ]
    return SweepTable(columns, rows, _metadata("stability-map", spec))


# ---------------------------------------------------------------------------
# intensity-map

def _intensity_point(args) -> list:
    delta, g1, fixed, engine, cutoff, tail_tol, budget = args
    p = SystemParams(**{**fixed, "delta": delta, "gamma1": g1})
    spectrum = heff_spectrum(p)
    re_plus = float(spectrum.eigenvalues[0].real)
    re_minus = float(spectrum.eigenvalues[1].real)
    base = [delta, g1]
    tail = [re_plus, re_minus]
    try:
        if engine == "oracle":
            cfg = FockConfig(cutoff=cutoff, tail_tol=tail_tol, dim2_budget=budget)
            obs = fock_observables(steady_state(p, cfg))
        else:
            obs = observables(stationary_gaussian(p), p)
    except EpnoiseError as err:
        return base + [None, None] + tail + [_status_of(err)]
    i2 = float(obs.intensity[1])
    d2 = float(obs.dispersion[1])
    return base + [i2, d2] + tail + [STATUS_OK]


def cmd_intensity_map(spec: SweepSpec) -> SweepTable:
    """Drain-mode intensity and dispersion on a (delta, gamma1) grid.

    The re_lambda columns expose the pitchfork of Re eigenvalues: the two
    branches merge exactly on the exceptional-point line.
    """
    defaults = {
        "delta": SweepAxis("delta", -4.0, 4.0, 81),
        "gamma1": SweepAxis("gamma1", 0.0, 1.6, 81),
    }
    ax1, ax2 = spec.axes_named("delta", "gamma1", defaults=defaults)
    fixed = dict(spec.fixed)
    fixed.setdefault("j", 1.0)
    fixed.setdefault("gamma2", 1.6)
    fixed.setdefault("f", 10.0)
    for key in ("delta", "gamma1"):
        fixed.pop(key, None)
    points = [
        (
            float(d),
            float(g1),
            fixed,
            spec.engine,
            spec.cutoff,
            spec.tail_tol,
            spec.dim2_budget,
        )
        for d in ax1.values()
        for g1 in ax2.values()
    ]
    rows = _run_points(_intensity_point, points, spec.jobs)
    columns = [
        "delta",
        "gamma1",
        "i2",
        "d2",
        "re_lambda_plus",
        "re_lambda_minus",
        "status",
    ]
    return SweepTable(columns, rows, _metadata("intensity-map", spec))


# ---------------------------------------------------------------------------
# linecut

def _linecut_point(args) -> list:
    delta, f, fixed, engine, cutoff, tail_tol, budget = args
    p = SystemParams(**{**fixed, "delta": delta, "f": f})
    try:
        if engine == "oracle":
            cfg = FockConfig(cutoff=cutoff, tail_tol=tail_tol, dim2_budget=budget)
            obs = fock_observables(steady_state(p, cfg))
        else:
            obs = observables(stationary_gaussian(p), p)
    except EpnoiseError as err:
        return [delta, f, None, None, None, None, _status_of(err)]
    i2 = float(obs.intensity[1])
    band = float(np.sqrt(obs.dispersion[1]))
    return [delta, f, i2, i2 - band, i2 + band, float(obs.snr2[1]), STATUS_OK]


def cmd_linecut(spec: SweepSpec) -> SweepTable:
    """Detuning linecut of I2 with its quantum-noise band, per drive value.

    For each f in f_values emits I2 and the band I2 -+ sqrt(D2); the
    band-to-signal ratio is 1/snr2_2, which halves when the drive doubles in
    the strong-drive regime.
    """
    defaults = {"delta": SweepAxis("delta", -4.0, 4.0, 161)}
    (ax,) = spec.axes_named("delta", defaults=defaults)
    f_values = tuple(float(f) for f in spec.f_values) or (10.0, 20.0)
    fixed = dict(spec.fixed)
    fixed.setdefault("j", 1.0)
    fixed.setdefault("gamma1", 0.386)
    fixed.setdefault("gamma2", 1.6)
    for key in ("delta", "f"):
        fixed.pop(key, None)
    points = [
        (
            float(d),
            f,
            fixed,
            spec.engine,
            spec.cutoff,
            spec.tail_tol,
            spec.dim2_budget,
        )
        for f in f_values
        for d in ax.values()
    ]
    rows = _run_points(_linecut_point, points, spec.jobs)
    columns = ["delta", "f", "i2", "band_lo", "band_hi", "snr2_2", "status"]
    return SweepTable(
        columns, rows, _metadata("linecut", spec, f_values=",".join(map(repr, f_values)))
    )


# ---------------------------------------------------------------------------
# snr-map

def _snr_point(args) -> list:
    g1, g2, fixed, engine, cutoff, tail_tol, budget = args
    p = SystemParams(**{**fixed, "gamma1": g1, "gamma2": g2})
    try:
        if engine == "oracle":
            cfg = FockConfig(cutoff=cutoff, tail_tol=tail_tol, dim2_budget=budget)
            obs = fock_observables(steady_state(p, cfg))
        else:
            obs = observables(stationary_gaussian(p), p)
    except EpnoiseError as err:
        return [g1, g2, None, None, None, None, _status_of(err)]
    cells = [float(obs.snr1[0]), float(obs.snr1[1]), float(obs.snr2[0]), float(obs.snr2[1])]
    if not all(np.isfinite(c) for c in cells):
        return [g1, g2, None, None, None, None, "NonFinite"]
    return [g1, g2] + cells + [STATUS_OK]


def cmd_snr_map(spec: SweepSpec) -> SweepTable:
    """Both signal-to-noise ratios for both modes on a (gamma1, gamma2) grid."""
    defaults = {
        "gamma1": SweepAxis("gamma1", 0.0, 2.0, 81),
        "gamma2": SweepAxis("gamma2", 0.0, 2.0, 81),
    }
    ax1, ax2 = spec.axes_named("gamma1", "gamma2", defaults=defaults)
    fixed = dict(spec.fixed)
    fixed.setdefault("delta", 0.0)
    fixed.setdefault("j", 1.0)
    fixed.setdefault("f", 0.3)
    for key in ("gamma1", "gamma2"):
        fixed.pop(key, None)
    points = [
        (
            float(g1),
            float(g2),
            fixed,
            spec.engine,
            spec.cutoff,
            spec.tail_tol,
            spec.dim2_budget,
        )
        for g1 in ax1.values()
        for g2 in ax2.values()
    ]
    rows = _run_points(_snr_point, points, spec.jobs)
    columns = ["gamma1", "gamma2", "snr1_1", "snr1_2", "snr2_1", "snr2_2", "status"]
    return SweepTable(columns, rows, _metadata("snr-map", spec))


# ---------------------------------------------------------------------------
# transient

def cmd_transient(spec: SweepSpec) -> SweepTable:
    """First-moment transient a(t) from a coherent start, analytic and/or Fock.

    The analytic route uses the exceptional-point closed form when the fixed
    parameters sit on the EP line and the generic matrix exponential
    otherwise; the oracle route evolves a truncated coherent state.
    """
    defaults = {"time": SweepAxis("time", 0.0, 20.0, 41)}
    if spec.times:
        times = [float(t) for t in spec.times]
        if any(t < 0 for t in times) or times != sorted(times):
            raise ConfigError("transient times must be nonnegative and sorted")
    else:
        (ax,) = spec.axes_named("time", defaults=defaults)
        if ax.start < 0:
            raise ConfigError("transient times must be nonnegative")
        times = [float(t) for t in ax.values()]
    p = spec.params()
    a0 = np.array(spec.a0, dtype=complex)

    analytic: list | None = None
    if spec.engine in ("analytic", "both"):
        if classify_regime(p).on_ep_line:
            c0, c1 = fit_constants(p, a0)
            analytic = [order_parameter_ep(p, c0, c1, t) for t in times]
        else:
            analytic = [order_parameter_general(p, a0, t) for t in times]

    oracle: list | None = None
    oracle_status = STATUS_OK
    if spec.engine in ("oracle", "both"):
        try:
            cfg = spec.fock_config()
            states = evolve(p, coherent_state(a0, cfg.cutoffs), times, cfg)
            oracle = [fock_observables(st).mean_a for st in states]
        except EpnoiseError as err:
            oracle_status = _status_of(err)
            oracle = None

    columns = ["time"]
    if analytic is not None:
        columns += ["re_a1", "im_a1", "re_a2", "im_a2"]
    if spec.engine in ("oracle", "both"):
        columns += ["oracle_re_a1", "oracle_im_a1", "oracle_re_a2", "oracle_im_a2"]
    columns += ["status"]

    rows = []
    for k, t in enumerate(times):
        row: list = [t]
        if analytic is not None:
            a_t = analytic[k]
            row += [a_t[0].real, a_t[0].imag, a_t[1].real, a_t[1].imag]
        if spec.engine in ("oracle", "both"):
            if oracle is None:
                row += [None, None, None, None]
            else:
                o_t = oracle[k]
                row += [o_t[0].real, o_t[0].imag, o_t[1].real, o_t[1].imag]
        row += [oracle_status if spec.engine in ("oracle", "both") else STATUS_OK]
        rows.append(row)
    md = _metadata(
        "transient",
        spec,
        a0=f"{a0[0]!r};{a0[1]!r}",
        params=";".join(f"{k}={getattr(p, k)!r}" for k in PARAM_NAMES),
    )
    return SweepTable(columns, rows, md)


# ---------------------------------------------------------------------------
# verify

def _verify_point(args) -> list:
    values, fixed, cutoff, tail_tol, budget = args
    merged = {**fixed, **values}
    p = SystemParams(**merged)
    base = [merged[k] for k in PARAM_NAMES]
    try:
        an = observables(stationary_gaussian(p), p)
    except EpnoiseError as err:
        return base + [None, None, None, None, _status_of(err)]
    try:
        cfg = FockConfig(cutoff=cutoff, tail_tol=tail_tol, dim2_budget=budget)
        orc = fock_observables(steady_state(p, cfg))
    except EpnoiseError as err:
        return base + [None, None, None, None, _status_of(err)]

    scale_a = max(np.max(np.abs(an.mean_a)), 1e-12)
    d_mean = float(np.max(np.abs(an.mean_a - orc.mean_a)) / scale_a)
    d_int = float(np.max(np.abs(an.intensity - orc.intensity) / np.abs(an.intensity)))
    d_disp = float(np.max(np.abs(an.dispersion - orc.dispersion) / np.abs(an.dispersion)))
    d_rho = float(
        np.max(np.abs(an.rho - orc.rho)) / max(np.max(np.abs(an.rho)), 1e-12)
    )
    return base + [d_mean, d_int, d_disp, d_rho, STATUS_OK]


def cmd_verify(spec: SweepSpec) -> SweepTable:
    """Relative analytic-vs-oracle discrepancies at one point or on a grid.

    Requires engine=both.  Oracle failures (instability, budget, tail) land
    in the status column; the analytic-only part of such rows is still the
    parameter set, so downstream tooling can see exactly what was skipped.
    """
    if spec.engine != "both":
        raise ConfigError("verify compares engines and needs engine=both")
    axis_names = [ax.name for ax in spec.axes]
    for name in axis_names:
        if name not in PARAM_NAMES:
            raise ConfigError(f"verify axes must be system parameters, not {name!r}")
    fixed = dict(spec.fixed)
    if axis_names:
        grids = [ax.values() for ax in spec.axes]
        mesh = np.meshgrid(*grids, indexing="ij")
        combos = [
            {name: float(m.flat[i]) for name, m in zip(axis_names, mesh)}
            for i in range(mesh[0].size)
        ]
    else:
        combos = [{}]
    # the fixed + swept union must be a complete SystemParams
    spec.params(**combos[0])
    points = [
        (combo, fixed, spec.cutoff, spec.tail_tol, spec.dim2_budget)
        for combo in combos
    ]
    rows = _run_points(_verify_point, points, spec.jobs)
    columns = list(PARAM_NAMES) + [
        "d_mean_a",
        "d_intensity",
        "d_dispersion",
        "d_rho",
        "status",
    ]
    md = _metadata("verify", spec, tol=repr(spec.tol), cutoff=repr(spec.cutoff))
    return SweepTable(columns, rows, md)


def verify_failures(table: SweepTable, tol: float) -> int:
    """Count OK rows whose worst discrepancy exceeds the tolerance."""
    cols = [table.columns.index(c) for c in ("d_mean_a", "d_intensity", "d_dispersion", "d_rho")]
    k = table.columns.index("status")
    bad = 0
    for row in table.rows:
        if row[k] == STATUS_OK and max(row[c] for c in cols) > tol:
            bad += 1
    return bad
