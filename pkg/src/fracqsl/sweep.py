"""Parameter sweeps of the speed-limit bounds and figure-style presets.

A sweep varies one axis (tau, lambda, n, or beta) while the remaining
model parameters stay fixed.  Results are plain records that serialize
to CSV or JSON with repr-exact floats, so rerunning a sweep with the
same inputs reproduces the output byte for byte regardless of the
thread count.

Sweeps along tau share one dynamics pass: the population extrema on
[0, tau_max] are located once, their cumulative variation is tabulated,
and each requested tau is answered by a lookup plus one endpoint term.
Other axes evaluate points independently, optionally across a thread
pool; a failing point is recorded as data instead of aborting the run.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ._version import VERSION
from .config import DEFAULT_CONFIG, EvalConfig
from .errors import (
    FracQslError,
    InvalidParams,
    TooFewPoints,
    UnknownFigure,
)
from .jcmodel import JCParams, QubitDynamics
from .qsl import QslPoint, _extrema_times, _point_from_variation, _qsl_grid, qsl_point

__all__ = [
    "SweepSpec",
    "CurveRecord",
    "run_sweep",
    "figure_preset",
    "detect_revivals",
    "write_records",
    "run_figure",
    "CSV_COLUMNS",
]

_AXES = ("tau", "lambda", "n", "beta")
_AXIS_PARAM = {"tau": "tau", "lambda": "lam", "n": "n", "beta": "beta"}
_FIXED_KEYS = ("beta", "lam", "n", "a", "b", "tau")

CSV_COLUMNS = (
    "axis",
    "axis_value",
    "tau",
    "sin2_bures",
    "lambda_tr",
    "lambda_hs",
    "lambda_op",
    "ratio_op",
    "ratio_max",
    "error",
)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: the axis, its grid, and the frozen remaining parameters.

    ``grid`` is either an explicit strictly increasing array of axis
    values or a ``(start, stop, count)`` triple that expands to an
    inclusive linear grid.  ``fixed`` holds every model parameter the
    axis does not vary; the key for the coupling is ``lam``.  ``label``
    names the output file when the sweep belongs to a figure preset.
    """

    axis: str
    grid: np.ndarray
    fixed: dict
    quadrature: EvalConfig = DEFAULT_CONFIG
    output: str = "csv"
    threads: int = 1
    label: str = ""

    def __post_init__(self) -> None:
        if self.axis not in _AXES:
            raise InvalidParams(f"axis must be one of {_AXES}, got {self.axis!r}")
        raw = self.grid
        if isinstance(raw, tuple) and len(raw) == 3:
            start, stop, count = raw
            if not isinstance(count, int) or count < 2:
                raise InvalidParams(f"grid count must be an integer >= 2, got {count!r}")
            grid = np.linspace(float(start), float(stop), count)
        else:
            grid = np.asarray(raw, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise InvalidParams("grid must be a 1-d array of at least 2 values")
        if not np.all(np.isfinite(grid)):
            raise InvalidParams("grid values must be finite")
        if not np.all(np.diff(grid) > 0.0):
            raise InvalidParams("grid must be strictly increasing")
        if self.output not in ("csv", "json"):
            raise InvalidParams(f"output must be csv or json, got {self.output!r}")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise InvalidParams(f"threads must be a positive integer, got {self.threads!r}")
        if not isinstance(self.fixed, dict):
            raise InvalidParams("fixed must be a dict")
        varied = _AXIS_PARAM[self.axis]
        unknown = set(self.fixed) - set(_FIXED_KEYS)
        if unknown:
            raise InvalidParams(f"unknown fixed parameters: {sorted(unknown)}")
        if varied in self.fixed:
            raise InvalidParams(f"{varied!r} is the sweep axis and cannot be fixed")
        needed = {"beta", "lam", "n", "tau"} - {varied}
        missing = needed - set(self.fixed)
        if missing:
            raise InvalidParams(f"missing fixed parameters: {sorted(missing)}")
        object.__setattr__(self, "grid", grid)

    def params_at(self, value: float) -> tuple[JCParams, float]:
        """Materialize (model parameters, tau) for one axis value."""
        kw = {
            "a": self.fixed.get("a", math.sqrt(0.5)),
            "b": self.fixed.get("b", math.sqrt(0.5)),
        }
        for key in ("beta", "lam", "n"):
            if key in self.fixed:
                kw[key] = self.fixed[key]
        varied = _AXIS_PARAM[self.axis]
        if varied == "tau":
            tau = float(value)
        else:
            tau = float(self.fixed["tau"])
            if varied == "n":
                if float(value) != int(value):
                    raise InvalidParams(f"n must be integer-valued, got {value!r}")
                kw["n"] = int(value)
            else:
                kw[varied] = float(value)
        kw["n"] = int(kw["n"])
        return JCParams(**kw), tau

    def echo(self) -> dict:
        """JSON-ready echo of the sweep definition."""
        cfg = self.quadrature
        fixed = {k: self.fixed[k] for k in sorted(self.fixed)}
        eigen = abs(
            self.fixed.get("a", math.sqrt(0.5)) - math.sqrt(0.5)
        ) < 1e-12 and abs(self.fixed.get("b", math.sqrt(0.5)) - math.sqrt(0.5)) < 1e-12
        return {
            "axis": self.axis,
            "fixed": fixed,
            "eigenweighted": eigen,
            "points": int(self.grid.size),
            "grid_start": float(self.grid[0]),
            "grid_stop": float(self.grid[-1]),
            "output": self.output,
            "version": VERSION,
            "config": {
                "rel_tol": cfg.rel_tol,
                "abs_tol": cfg.abs_tol,
                "max_terms": cfg.max_terms,
                "quad_points": cfg.quad_points,
                "quad_cutoff": cfg.quad_cutoff,
            },
        }

    def fingerprint(self) -> str:
        """Hash of the exact inputs: echo, full grid, and label."""
        payload = self.echo()
        payload["grid"] = [repr(float(v)) for v in self.grid]
        payload["label"] = self.label
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class CurveRecord:
    """One sweep point: the axis value, its bound summary, and an echo.

    ``point`` is None exactly when ``error`` is set; failures travel as
    data so one bad point cannot abort a long sweep.
    """

    axis_value: float
    point: QslPoint | None
    meta: dict = field(default_factory=dict)
    error: str | None = None


def _error_text(exc: Exception) -> str:
    text = f"{type(exc).__name__}: {exc}"
    return " ".join(text.split())


def run_sweep(spec: SweepSpec) -> list[CurveRecord]:
    """Evaluate the sweep, one record per grid value, in grid order."""
    meta = spec.echo()
    meta["config_hash"] = spec.fingerprint()
    if spec.axis == "tau":
        return _run_tau_sweep(spec, meta)
    if spec.threads > 1 and spec.grid.size > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            futures = [
                pool.submit(_eval_point, spec, float(v), meta) for v in spec.grid
            ]
            return [f.result() for f in futures]
    return [_eval_point(spec, float(v), meta) for v in spec.grid]


def _eval_point(spec: SweepSpec, value: float, meta: dict) -> CurveRecord:
    try:
        params, tau = spec.params_at(value)
        point = qsl_point(params, tau, spec.quadrature)
        return CurveRecord(axis_value=value, point=point, meta=meta)
    except Exception as exc:
        return CurveRecord(
            axis_value=value, point=None, meta=meta, error=_error_text(exc)
        )


def _run_tau_sweep(spec: SweepSpec, meta: dict) -> list[CurveRecord]:
    """Shared-pass evaluation for a tau grid.

    One sampling of the dynamics on [0, max(tau)] provides the extrema
    and the cumulative variation; each tau is then a prefix lookup.
    """
    values = spec.grid
    ok = np.isfinite(values) & (values > 0.0)
    records: list[CurveRecord | None] = [None] * values.size
    for i in np.flatnonzero(~ok):
        records[i] = CurveRecord(
            axis_value=float(values[i]),
            point=None,
            meta=meta,
            error="InvalidParams: tau must be positive",
        )
    if not np.any(ok):
        return [r for r in records if r is not None]

    try:
        params, _ = spec.params_at(float(values[np.flatnonzero(ok)[0]]))
        engine = QubitDynamics(params, spec.quadrature)
        taus = np.unique(values[ok])
        tau_max = float(taus[-1])
        base = _qsl_grid(engine.oscillation_rate(), 0.0, tau_max)
        times = np.unique(np.concatenate([base, taus]))
        rho_ee, _, rates = engine.population_sample(times)
        zs = _extrema_times(engine, times, rates)
        if zs.size:
            rho_z, _, _ = engine.population_sample(zs)
        else:
            rho_z = np.empty(0)
        node_vals = np.concatenate([[rho_ee[0]], rho_z])
        cum = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(node_vals)))])

        value_at = {}
        for tau_k in taus:
            idx = int(np.searchsorted(times, tau_k))
            rho_k = rho_ee[idx]
            j = int(np.searchsorted(zs, tau_k, side="left"))
            tv_k = cum[j] + abs(rho_k - node_vals[j])
            sin2_k = abs(rho_k - 1.0)
            value_at[float(tau_k)] = _point_from_variation(
                float(tau_k), float(sin2_k), float(tv_k)
            )
        for i in np.flatnonzero(ok):
            records[i] = CurveRecord(
                axis_value=float(values[i]),
                point=value_at[float(values[i])],
                meta=meta,
            )
    except Exception as exc:
        text = _error_text(exc)
        for i in np.flatnonzero(ok):
            records[i] = CurveRecord(
                axis_value=float(values[i]), point=None, meta=meta, error=text
            )
    return [r for r in records if r is not None]


def detect_revivals(
    curve, min_rise: float = 1e-6
) -> tuple[int, list[tuple[float, float]]]:
    """Count bound-ratio revivals on a sweep curve.

    ``curve`` is the record list from ``run_sweep`` (the ratio_op
    column is examined, and every record must have succeeded) or a bare
    1-d series.  A revival is a strict local minimum followed by a rise
    above ``min_rise``, measured to the highest later value before the
    next minimum.  Returns the count and the turning points as
    (axis value, rise) pairs; a monotone curve counts zero.  The count
    is only meaningful when the grid resolves the oscillation; an
    aliased curve (cycles comparable to the point count) miscounts at
    any resolution.  Needs at least 8 points.
    """
    if isinstance(curve, np.ndarray) or not (len(curve) and isinstance(curve[0], CurveRecord)):
        vals = np.asarray(curve, dtype=float)
        if vals.ndim != 1:
            raise InvalidParams("series must be 1-d")
        axis_vals = np.arange(vals.size, dtype=float)
    else:
        bad = [r for r in curve if r.error is not None]
        if bad:
            raise InvalidParams(
                f"curve has {len(bad)} failed points; revivals need a clean curve"
            )
        axis_vals = np.array([r.axis_value for r in curve], dtype=float)
        vals = np.array([r.point.ratio_op for r in curve], dtype=float)
        if not np.all(np.diff(axis_vals) > 0.0):
            raise InvalidParams("curve axis must be strictly increasing")
    if vals.size < 8:
        raise TooFewPoints(f"need at least 8 samples, got {vals.size}")
    if not np.all(np.isfinite(vals)):
        raise InvalidParams("values must be finite")
    interior = np.arange(1, vals.size - 1)
    is_min = (vals[interior] < vals[interior - 1]) & (vals[interior] < vals[interior + 1])
    minima = interior[is_min]
    turns: list[tuple[float, float]] = []
    for pos, idx in enumerate(minima):
        stop = minima[pos + 1] if pos + 1 < minima.size else vals.size
        rise = float(vals[idx:stop].max() - vals[idx])
        if rise > min_rise:
            turns.append((float(axis_vals[idx]), rise))
    return len(turns), turns


def _fmt_tag(value: float) -> str:
    text = repr(float(value))
    if text.endswith(".0"):
        text = text[:-2]
    return text.replace(".", "p").replace("-", "m")


def figure_preset(figure: str, threads: int = 1) -> list[SweepSpec]:
    """Sweep collection reproducing one of the four parameter studies.

    fig2: population bound along tau for several fractional orders.
    fig3: bound along the coupling for (order, tau) combinations.
    fig4: bound along tau for several couplings at order 1/2.
    fig5: bound along the coupling for (photon number, order) pairs.
    """
    tau_axis = np.linspace(3.0 / 400.0, 3.0, 400)
    lam_axis = np.linspace(0.0, 1.0, 81)
    if figure == "fig2":
        return [
            SweepSpec(
                axis="tau",
                grid=tau_axis,
                fixed={"beta": beta, "lam": 0.5, "n": 20},
                threads=threads,
                label=f"fig2_beta{_fmt_tag(beta)}",
            )
            for beta in (0.1, 0.4, 0.7, 1.0)
        ]
    if figure == "fig3":
        return [
            SweepSpec(
                axis="lambda",
                grid=lam_axis,
                fixed={"beta": beta, "n": 40, "tau": tau},
                threads=threads,
                label=f"fig3_beta{_fmt_tag(beta)}_tau{_fmt_tag(tau)}",
            )
            for beta in (0.2, 0.5, 0.8, 1.0)
            for tau in (0.1, 0.4, 0.7, 1.0)
        ]
    if figure == "fig4":
        return [
            SweepSpec(
                axis="tau",
                grid=tau_axis,
                fixed={"beta": 0.5, "lam": lam, "n": 20},
                threads=threads,
                label=f"fig4_lam{_fmt_tag(lam)}",
            )
            for lam in (0.3, 0.5, 0.8, 1.0)
        ]
    if figure == "fig5":
        return [
            SweepSpec(
                axis="lambda",
                grid=lam_axis,
                fixed={"beta": beta, "n": n, "tau": 1.0},
                threads=threads,
                label=f"fig5_n{n}_beta{_fmt_tag(beta)}",
            )
            for n in (0, 5, 10, 20)
            for beta in (0.2, 0.5, 0.8, 1.0)
        ]
    raise UnknownFigure(f"no preset named {figure!r}; know fig2, fig3, fig4, fig5")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        # Plain-float repr; numpy scalars would otherwise print their type.
        return repr(float(value))
    return str(value)


def records_to_csv(spec: SweepSpec, records: list[CurveRecord]) -> str:
    """RFC-4180 text with repr-exact floats; stable across reruns."""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        p = rec.point
        writer.writerow(
            [
                spec.axis,
                _csv_cell(rec.axis_value),
                _csv_cell(p.tau if p else None),
                _csv_cell(p.sin2_bures if p else None),
                _csv_cell(p.lambda_tr if p else None),
                _csv_cell(p.lambda_hs if p else None),
                _csv_cell(p.lambda_op if p else None),
                _csv_cell(p.ratio_op if p else None),
                _csv_cell(p.ratio_max if p else None),
                rec.error or "",
            ]
        )
    return buf.getvalue()


def records_to_json(spec: SweepSpec, records: list[CurveRecord]) -> str:
    rows = []
    for rec in records:
        row = {"axis": spec.axis, "axis_value": rec.axis_value, "error": rec.error}
        if rec.point is not None:
            p = rec.point
            row.update(
                tau=p.tau,
                sin2_bures=p.sin2_bures,
                lambda_tr=p.lambda_tr,
                lambda_hs=p.lambda_hs,
                lambda_op=p.lambda_op,
                ratio_op=p.ratio_op,
                ratio_max=p.ratio_max,
            )
        rows.append(row)
    doc = {"spec": spec.echo(), "records": rows}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_records(
    path: str, spec: SweepSpec, records: list[CurveRecord], fmt: str | None = None
) -> None:
    fmt = fmt or spec.output
    if fmt == "csv":
        text = records_to_csv(spec, records)
    elif fmt == "json":
        text = records_to_json(spec, records)
    else:
        raise InvalidParams(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _spec_fingerprint(specs: list[SweepSpec]) -> str:
    blob = json.dumps([s.fingerprint() for s in specs]).encode()
    return hashlib.sha256(blob).hexdigest()


def run_figure(
    figure: str,
    out_dir: str,
    threads: int = 1,
    fmt: str = "csv",
) -> tuple[list[str], int]:
    """Run every sweep of a figure preset and write one file per sweep.

    A ``manifest.json`` beside the data files echoes the sweep
    definitions, their content hashes, and a configuration fingerprint
    (timestamp excluded, so reruns agree on it).  Returns the list of
    written data files and the number of failed points.
    """
    specs = figure_preset(figure, threads=threads)
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    paths = []
    failures = 0
    for spec in specs:
        records = run_sweep(spec)
        failures += sum(1 for r in records if r.error is not None)
        name = f"{spec.label}.{fmt}"
        path = os.path.join(out_dir, name)
        write_records(path, spec, records, fmt)
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        entries.append(
            {
                "file": name,
                "sha256": digest,
                "spec": spec.echo(),
                "errors": sum(1 for r in records if r.error is not None),
            }
        )
        paths.append(path)
    manifest = {
        "figure": figure,
        "version": VERSION,
        "config_hash": _spec_fingerprint(specs),
        "created": datetime.now(timezone.utc).isoformat(),
        "files": entries,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths, failures
