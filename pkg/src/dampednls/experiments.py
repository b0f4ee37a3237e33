"""Scenario configs, the run harness, parameter sweeps and convergence studies.

Configs are JSON documents with a versioned schema; unknown keys are
rejected.  Every run writes the observable series as CSV (fixed column
order) and a JSON report referencing it.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import BlowUpDiagnostic, StepperConfig, evolve
from .grid import Domain, DomainKind, Field, Params, lp_norm, make_domain
from .inequalities import random_band_limited
from .observables import (
    RunReport,
    write_report_json,
    write_series_csv,
)

SCHEMA_VERSION = 1

PARAM_AXES = ("lambda", "a", "b", "sigma1", "sigma2", "alpha", "delta", "k_energy")


class ConfigError(ValueError):
    pass


def _take(d: dict, allowed: dict, where: str) -> dict:
    """Validate keys of ``d`` against ``allowed`` (name -> required flag)."""
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = [k for k, req in allowed.items() if req and k not in d]
    if missing:
        raise ConfigError(f"missing keys in {where}: {missing}")
    return d


@dataclass(frozen=True)
class ScenarioConfig:
    label: str
    domain: dict
    params: dict
    stepper: dict
    initial: dict
    outputs: str = "runs"

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        _take(doc, {"schema_version": True, "label": True, "domain": True, "params": True,
                    "stepper": True, "initial": True, "outputs": False}, "config")
        if doc["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {doc['schema_version']}")
        _take(doc["domain"], {"kind": True, "extent": True, "n": True, "omega": False}, "domain")
        _take(doc["params"], {k: False for k in PARAM_AXES}, "params")
        _take(doc["stepper"], {"dt": True, "scheme": False, "extinction_threshold": False,
                               "max_time": True, "record_every": False}, "stepper")
        if "type" not in doc["initial"]:
            raise ConfigError("initial needs a 'type'")
        _INITIAL_VALIDATORS[doc["initial"]["type"]](doc["initial"])
        return cls(label=doc["label"], domain=dict(doc["domain"]), params=dict(doc["params"]),
                   stepper=dict(doc["stepper"]), initial=dict(doc["initial"]),
                   outputs=doc.get("outputs", "runs"))

    @classmethod
    def from_json(cls, path: str) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "label": self.label,
            "domain": dict(self.domain),
            "params": dict(self.params),
            "stepper": dict(self.stepper),
            "initial": dict(self.initial),
            "outputs": self.outputs,
        }

    def build_domain(self) -> Domain:
        return make_domain(self.domain["kind"], self.domain["extent"], self.domain["n"],
                           self.domain.get("omega"))

    def build_params(self) -> Params:
        return Params.from_dict(self.params)

    def build_stepper(self) -> StepperConfig:
        return StepperConfig(**self.stepper)

    def build_initial(self, domain: Domain) -> Field:
        return build_initial(domain, self.initial)


# -- initial data ----------------------------------------------------------------


def _validate_constant(spec):
    _take(spec, {"type": True, "amplitude": True}, "initial(constant)")


def _validate_plane_wave(spec):
    _take(spec, {"type": True, "mode": True, "amplitude": False}, "initial(plane_wave)")


def _validate_gaussian(spec):
    _take(spec, {"type": True, "amplitude": True, "width": True, "center": False},
          "initial(gaussian)")


def _validate_random(spec):
    _take(spec, {"type": True, "seed": True, "decay": False, "amplitude": False},
          "initial(random)")


def _validate_file(spec):
    _take(spec, {"type": True, "path": True}, "initial(file)")


_INITIAL_VALIDATORS = {
    "constant": _validate_constant,
    "plane_wave": _validate_plane_wave,
    "gaussian": _validate_gaussian,
    "random": _validate_random,
    "file": _validate_file,
}


def build_initial(domain: Domain, spec: dict) -> Field:
    kind = spec["type"]
    if kind not in _INITIAL_VALIDATORS:
        raise ConfigError(f"unknown initial type {kind!r}")
    _INITIAL_VALIDATORS[kind](spec)

    if kind == "constant":
        return Field(np.full(domain.size, complex(spec["amplitude"])), domain)

    if kind == "plane_wave":
        modes = spec["mode"]
        if np.isscalar(modes):
            modes = [modes] * domain.dim
        amp = complex(spec.get("amplitude", 1.0))
        mesh = domain.coordinate_mesh()
        phase = np.zeros(domain.shape)
        for j, (m, X) in enumerate(zip(modes, mesh)):
            period = domain.extent[j] if not domain.kind.confined else 2 * domain.extent[j]
            phase = phase + (2.0 * np.pi * int(m) / period) * X
        return Field(amp * np.exp(1j * phase).ravel(), domain)

    if kind == "gaussian":
        amp = complex(spec["amplitude"])
        width = spec["width"]
        widths = [width] * domain.dim if np.isscalar(width) else list(width)
        centers = spec.get("center")
        mesh = domain.coordinate_mesh()
        arg = np.zeros(domain.shape)
        for j, X in enumerate(mesh):
            if centers is None:
                c = 0.5 * domain.extent[j] if not domain.kind.confined else 0.0
            else:
                c = centers if np.isscalar(centers) else centers[j]
            dxj = X - c
            if not domain.kind.confined:
                period = domain.extent[j]
                dxj = (dxj + 0.5 * period) % period - 0.5 * period  # minimal image
            arg = arg + dxj**2 / (2.0 * widths[j] ** 2)
        return Field(amp * np.exp(-arg).ravel(), domain)

    if kind == "random":
        f = random_band_limited(domain, np.random.default_rng(int(spec["seed"])),
                                decay=spec.get("decay", 2.5))
        amp = spec.get("amplitude")
        if amp is not None:
            peak = lp_norm(f, math.inf)
            if peak > 0:
                f = Field(f.values * (amp / peak), domain)
        return f

    values = np.load(spec["path"])
    return Field(values, domain)


# -- harness ----------------------------------------------------------------------


def run_scenario(cfg: ScenarioConfig, outputs: str | None = None,
                 observer=None) -> RunReport:
    """Run one scenario and write its CSV series and JSON report.

    Blow-up is written out and then re-raised as BlowUpDiagnostic with the
    report attached.
    """
    domain = cfg.build_domain()
    params = cfg.build_params()
    stepper = cfg.build_stepper()
    u0 = cfg.build_initial(domain)

    out_dir = outputs if outputs is not None else cfg.outputs
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{cfg.label}_series.csv")
    json_path = os.path.join(out_dir, f"{cfg.label}_report.json")

    try:
        report = evolve(u0, params, stepper, observer=observer)
    except BlowUpDiagnostic as exc:
        if exc.report is not None:
            exc.report.label = cfg.label
            write_series_csv(csv_path, exc.report.series)
            write_report_json(json_path, exc.report, csv_path)
        raise
    report.label = cfg.label
    write_series_csv(csv_path, report.series)
    write_report_json(json_path, report, csv_path)
    return report


# -- delta convergence --------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    delta: float
    error: float


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple
    reference_delta: float
    monotone_ok: bool

    def to_dict(self) -> dict:
        return {
            "reference_delta": self.reference_delta,
            "monotone_ok": self.monotone_ok,
            "rows": [{"delta": r.delta, "error": r.error} for r in self.rows],
        }


def _snapshot_run(cfg: ScenarioConfig, delta: float, T: float):
    params = replace(cfg.build_params(), delta=delta)
    stepper = cfg.build_stepper()
    stepper = StepperConfig(dt=stepper.dt, scheme=stepper.scheme,
                            extinction_threshold=stepper.extinction_threshold,
                            max_time=T, record_every=stepper.record_every)
    domain = cfg.build_domain()
    u0 = cfg.build_initial(domain)
    snaps: dict = {}

    def observer(t, fld):
        snaps[round(t / stepper.dt)] = fld.values.copy()

    evolve(u0, params, stepper, observer=observer)
    return snaps, domain


def delta_convergence(cfg: ScenarioConfig, deltas, T: float) -> ConvergenceTable:
    """Worst L2 distance over [0, T] between each regularized run and the
    smallest-delta reference run."""
    deltas = [float(d) for d in deltas]
    if len(deltas) < 3:
        raise ValueError("need at least three delta values")
    if any(d1 < d2 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be sorted in decreasing order")
    if T < 0:
        raise ValueError("T must be >= 0")

    ref_delta = deltas[-1]
    ref_snaps, domain = _snapshot_run(cfg, ref_delta, T)
    w = domain.quad_weight
    rows = []
    for d in deltas:
        if d == ref_delta:
            rows.append(ConvergenceRow(delta=d, error=0.0))
            continue
        snaps, _ = _snapshot_run(cfg, d, T)
        keys = sorted(set(snaps) & set(ref_snaps))
        if not keys:
            rows.append(ConvergenceRow(delta=d, error=0.0))
            continue
        err = 0.0
        for k in keys:
            diff = snaps[k] - ref_snaps[k]
            err = max(err, math.sqrt(float((diff.real**2 + diff.imag**2).sum() * w)))
        rows.append(ConvergenceRow(delta=d, error=err))

    monotone = all(r2.error <= r1.error * 1.1 + 1e-300
                   for r1, r2 in zip(rows, rows[1:]))
    return ConvergenceTable(rows=tuple(rows), reference_delta=ref_delta, monotone_ok=monotone)


def write_convergence_csv(path: str, table: ConvergenceTable) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("delta,error\n")
        for r in table.rows:
            fh.write(f"{r.delta!r},{r.error!r}\n")


# -- parameter sweeps -----------------------------------------------------------------


@dataclass
class SweepEntry:
    value: float
    label: str
    report: RunReport | None = None
    error: str | None = None

    @property
    def blow_up(self) -> bool:
        return bool(self.report is not None and self.report.blow_up)

    @property
    def extinction_time(self) -> float | None:
        return self.report.extinction_time if self.report is not None else None


def _sweep_cfg(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    params = dict(cfg.params)
    params[axis] = value
    label = f"{cfg.label}_{axis}={value:g}"
    return replace(cfg, params=params, label=label)


def _sweep_worker(args) -> SweepEntry:
    cfg_doc, axis, value, outputs = args
    cfg = _sweep_cfg(ScenarioConfig.from_dict(cfg_doc), axis, value)
    entry = SweepEntry(value=value, label=cfg.label)
    try:
        entry.report = run_scenario(cfg, outputs=outputs)
    except BlowUpDiagnostic as exc:
        entry.report = exc.report
        entry.error = str(exc)
    except Exception as exc:  # collected, not fatal to the sweep
        entry.error = f"{type(exc).__name__}: {exc}"
    return entry


def sweep(cfg: ScenarioConfig, axis: str, values, outputs: str | None = None,
          workers: int | None = None) -> list:
    """Independent runs along one Params axis; per-run failures are collected."""
    if axis not in PARAM_AXES:
        raise ValueError(f"axis must be one of {PARAM_AXES}")
    values = [float(v) for v in values]
    if not values:
        return []
    out_dir = outputs if outputs is not None else cfg.outputs
    jobs = [(cfg.to_dict(), axis, v, out_dir) for v in values]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) == 1:
        return [_sweep_worker(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
        return list(ex.map(_sweep_worker, jobs))


def write_sweep_summary_csv(path: str, axis: str, entries: list) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value,label,extinction_time,blow_up,violations,error\n")
        for e in entries:
            ext = "" if e.extinction_time is None else repr(float(e.extinction_time))
            viol = e.report.violation_total if e.report is not None else ""
            err = e.error or ""
            fh.write(f"{e.value!r},{e.label},{ext},{int(e.blow_up)},{viol},{err}\n")


# -- 2D small-mass extinction ----------------------------------------------------------


@dataclass(frozen=True)
class SmallMassRow:
    scale: float
    l2_initial: float
    extinction_time: float | None


@dataclass(frozen=True)
class SmallMassTable:
    rows: tuple
    monotone_ok: bool


def smallmass_2d_extinction(cfg: ScenarioConfig, mass_scales) -> SmallMassTable:
    """Scale the initial profile, run each, and check that extinction comes no
    later for smaller mass (on the subset that extinguishes)."""
    domain = cfg.build_domain()
    if domain.dim != 2:
        raise ValueError("small-mass extinction study needs a two-dimensional domain")
    params = cfg.build_params()
    if not 0.5 <= params.sigma1 <= 1.5:
        raise ValueError("sigma1 must lie in [1/2, 3/2] for this study")
    stepper = cfg.build_stepper()
    base = cfg.build_initial(domain)

    rows = []
    for scale in mass_scales:
        scale = float(scale)
        if scale == 0.0:
            rows.append(SmallMassRow(scale=0.0, l2_initial=0.0, extinction_time=0.0))
            continue
        u0 = Field(base.values * scale, domain)
        report = evolve(u0, params, stepper)
        rows.append(SmallMassRow(scale=scale, l2_initial=lp_norm(u0, 2),
                                 extinction_time=report.extinction_time))

    extinguished = sorted((r for r in rows if r.extinction_time is not None),
                          key=lambda r: r.l2_initial)
    slack = 2.0 * stepper.dt
    monotone = all(r1.extinction_time <= r2.extinction_time + slack
                   for r1, r2 in zip(extinguished, extinguished[1:]))
    return SmallMassTable(rows=tuple(rows), monotone_ok=monotone)
