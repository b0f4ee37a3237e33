"""Energies, dissipation functionals, residuals, decay fits and reports.

All quantities are derived from a Field and the model Params; the record
layout doubles as the CSV column contract:

    t, mass_sq, linf, e0, ek, e2, diss_a, diss_b, sigma1_norm, boundary_frac
"""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import (
    Domain,
    Field,
    Params,
    fft_coeffs,
    lp_norm,
    mass_sq as field_mass_sq,
    boundary_mass,
    sigma_norms,
)

CSV_COLUMNS = (
    "t", "mass_sq", "linf", "e0", "ek", "e2",
    "diss_a", "diss_b", "sigma1_norm", "boundary_frac",
)

_EPS = np.finfo(np.float64).eps


class FitModel(str, enum.Enum):
    EXP_DECAY = "exp"
    POWER_EXTINCTION = "power"


class FitError(ValueError):
    """Raised when a decay fit is refused (degenerate or non-monotone data)."""


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    mass_sq: float
    linf: float
    e0: float
    ek: float
    e2: float
    diss_a: float
    diss_b: float
    sigma1_norm: float
    boundary_frac: float

    def as_row(self) -> tuple:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass(frozen=True)
class FitResult:
    model: FitModel
    rate_or_exponent: float  # decay rate C (exp) or slope C*b (power)
    constant: float          # fitted amplitude (exp) or implied T* (power)
    r_squared: float
    window: tuple

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "rate_or_exponent": self.rate_or_exponent,
            "constant": self.constant,
            "r_squared": self.r_squared,
            "window": list(self.window),
        }


@dataclass
class RunReport:
    """Trajectory summary: observable series plus extinction/violation data."""

    series: list
    extinction_time: float | None = None
    decay_fit: FitResult | None = None
    violations: dict = dc_field(default_factory=dict)
    blow_up: bool = False
    blow_up_time: float | None = None
    params: Params | None = None
    domain: Domain | None = None
    config: dict = dc_field(default_factory=dict)
    label: str = ""

    @property
    def violation_total(self) -> int:
        # Conditioning warnings are informational, not invariant breaches.
        return sum(v for k, v in self.violations.items() if k != "e2_conditioning")

    def to_dict(self, csv_path: str | None = None) -> dict:
        dom = self.domain
        out = {
            "schema_version": 1,
            "label": self.label,
            "extinction_time": self.extinction_time,
            "blow_up": self.blow_up,
            "blow_up_time": self.blow_up_time,
            "violations": dict(sorted(self.violations.items())),
            "decay_fit": self.decay_fit.to_dict() if self.decay_fit else None,
            "params": self.params.to_dict() if self.params else None,
            "domain": None if dom is None else {
                "kind": dom.kind.value,
                "extent": list(dom.extent),
                "n": list(dom.n),
                "omega": list(dom.omega) if dom.omega else None,
            },
            "stepper": self.config,
            "n_records": len(self.series),
            "final_mass_sq": self.series[-1].mass_sq if self.series else None,
            "series_csv": csv_path,
        }
        return out


# -- pointwise helpers ---------------------------------------------------------


def _abs_sq(v: np.ndarray) -> np.ndarray:
    return v.real**2 + v.imag**2


def _power_of_abs(s: np.ndarray, expo: float) -> np.ndarray:
    """|u|^(2*expo) with the convention that u = 0 contributes exactly 0.

    Negative exponents are guarded by machine epsilon away from exact zeros.
    """
    if expo == 0.0:
        return np.where(s > 0.0, 1.0, 0.0)
    return np.where(s > 0.0, np.power(np.maximum(s, _EPS), expo), 0.0)


def dissipation_integrals(f: Field, params: Params) -> tuple:
    """(int |u|^(2 sigma2 + 2), int |u|^2/(|u|^2+delta)^(alpha/2))."""
    s = _abs_sq(f.values)
    w = f.domain.quad_weight
    d_a = float(_power_of_abs(s, params.sigma2 + 1.0).sum() * w)
    if params.delta > 0.0:
        d_b = float((s / np.power(s + params.delta, 0.5 * params.alpha)).sum() * w)
    else:
        d_b = float(_power_of_abs(s, 1.0 - 0.5 * params.alpha).sum() * w)
    return d_a, d_b


# -- energies ------------------------------------------------------------------


def energy_e0(u: Field, params: Params) -> float:
    """Gradient + potential + focusing/defocusing energy of the flow."""
    dom = u.domain
    c = fft_coeffs(u)
    csq = c.real**2 + c.imag**2
    grad_sq = float((dom.lap_symbol * csq).sum() * dom.quad_weight / dom.size)
    s = _abs_sq(u.values)
    pot = 2.0 * float((dom.potential * s).sum() * dom.quad_weight)
    nl = (2.0 * params.lam / (params.sigma1 + 1.0)) * float(
        _power_of_abs(s, params.sigma1 + 1.0).sum() * dom.quad_weight
    )
    return grad_sq + pot + nl


def energy_ek(u: Field, params: Params) -> float:
    """energy_e0 augmented by k * int |u|^(2 sigma2 + 2)."""
    s = _abs_sq(u.values)
    extra = params.k_energy * float(_power_of_abs(s, params.sigma2 + 1.0).sum() * u.domain.quad_weight)
    return energy_e0(u, params) + extra


def energy_e2(u: Field, params: Params) -> float:
    """Second-order energy controlling the weighted-H2 norm of the solution."""
    dom = u.domain
    params.validate_for_domain(dom)
    w = dom.quad_weight
    v = u.values
    s = _abs_sq(v)
    lam, a, b = params.lam, params.a, params.b
    s1, s2, alpha = params.sigma1, params.sigma2, params.alpha

    c = fft_coeffs(u)
    lap = np.fft.ifftn(-dom.lap_symbol * c).ravel()
    grads = [np.fft.ifftn(1j * K * c).ravel() for K in dom._kmesh]
    grad_abs_sq = sum(_abs_sq(g) for g in grads)
    grad_sq_cplx = sum(g * g for g in grads)  # sum over axes of (du/dx_j)^2

    total = 0.25 * float(_abs_sq(lap).sum() * w)
    V = dom.potential
    if dom.kind.confined:
        total += float((V**2 * s).sum() * w)
        total += float((V * grad_abs_sq).sum() * w)
        total -= 0.5 * dom.laplacian_delta_v() * float(s.sum() * w)
        if lam != 0.0:
            total += (lam / (s1 + 1.0)) * float((V * _power_of_abs(s, s1 + 1.0)).sum() * w)
    if a != 0.0:
        total += a**2 * float(_power_of_abs(s, 2.0 * s2 + 1.0).sum() * w)
        total -= a * s2 * float((_power_of_abs(s, s2 - 1.0) * np.conj(v) ** 2 * grad_sq_cplx).imag.sum() * w)
    if b != 0.0:
        total += b**2 * float(_power_of_abs(s, 1.0 - alpha).sum() * w)
        if a != 0.0:
            total += 2.0 * a * b * float(_power_of_abs(s, s2 + 1.0 - 0.5 * alpha).sum() * w)
        total += b * float((_power_of_abs(s, -0.5 * alpha) * np.conj(v) * lap).imag.sum() * w)
    if lam != 0.0:
        total += lam * (s1 + 1.0) / 2.0 * float((_power_of_abs(s, s1) * grad_abs_sq).sum() * w)
        total += lam * s1 / 2.0 * float((_power_of_abs(s, s1 - 1.0) * np.conj(v) ** 2 * grad_sq_cplx).real.sum() * w)
    return total


def compute_record(u: Field, params: Params, t: float) -> ObservableRecord:
    d_a, d_b = dissipation_integrals(u, params)
    sn = sigma_norms(u, order=1)
    return ObservableRecord(
        t=t,
        mass_sq=field_mass_sq(u),
        linf=lp_norm(u, math.inf),
        e0=energy_e0(u, params),
        ek=energy_ek(u, params),
        e2=energy_e2(u, params),
        diss_a=d_a,
        diss_b=d_b,
        sigma1_norm=sn.sigma,
        boundary_frac=boundary_mass(u) if u.domain.kind.confined else 0.0,
    )


def holder_bracket(u: Field, params: Params) -> float:
    """One-sample bound driving the half-order time continuity estimate.

    Along a trajectory, ||u(t) - u(t')||_L2 <= sqrt(2 * sup bracket) *
    |t - t'|^(1/2); the bracket combines the H^-1 norm of the Laplacian,
    the potential energy and the nonlinear Lebesgue norms.
    """
    dom = u.domain
    c = fft_coeffs(u)
    csq = c.real**2 + c.imag**2
    scale = dom.quad_weight / dom.size
    ksq = dom.lap_symbol
    lap_hm1 = math.sqrt(float((ksq**2 / (1.0 + ksq) * csq).sum() * scale))
    h1 = math.sqrt(float(((1.0 + ksq) * csq).sum() * scale))
    s = _abs_sq(u.values)
    w = dom.quad_weight
    pot_sq = float((dom.potential**2 * s).sum() * w)
    out = 0.5 * lap_hm1 * h1 + pot_sq
    out += abs(params.lam) * float(_power_of_abs(s, params.sigma1 + 1.0).sum() * w)
    out += params.a * float(_power_of_abs(s, params.sigma2 + 1.0).sum() * w)
    out += params.b * float(_power_of_abs(s, 1.0 - 0.5 * params.alpha).sum() * w)
    return out


# -- series analysis -----------------------------------------------------------


def mass_balance_residual(series: list, params: Params) -> list:
    """Per-step defect of the discrete mass balance.

    r_n = [M(t_{n+1}) - M(t_n)]/dt + 2a*D_a + 2b*D_b with the dissipation
    integrals taken at the interval midpoint (endpoint average).  Requires a
    uniformly spaced series.
    """
    if len(series) < 2:
        raise ValueError("need at least two records")
    ts = np.array([r.t for r in series])
    dts = np.diff(ts)
    dt = dts[0]
    if dt <= 0 or not np.allclose(dts, dt, rtol=1e-9, atol=1e-12):
        raise ValueError("series is not uniformly spaced in time")
    m = np.array([r.mass_sq for r in series])
    da = np.array([r.diss_a for r in series])
    db = np.array([r.diss_b for r in series])
    da_mid = 0.5 * (da[:-1] + da[1:])
    db_mid = 0.5 * (db[:-1] + db[1:])
    res = np.diff(m) / dt + 2.0 * params.a * da_mid + 2.0 * params.b * db_mid
    return list(res)


def detect_extinction(series: list, threshold: float = 1e-24) -> float | None:
    """First time the relative squared mass crosses ``threshold``.

    Linearly interpolates between the bracketing samples; None if the series
    never crosses (or is empty).
    """
    if not series:
        return None
    m0 = series[0].mass_sq
    if m0 == 0.0:
        return series[0].t
    floor = threshold * m0
    prev = series[0]
    if prev.mass_sq < floor:
        return prev.t
    for rec in series[1:]:
        if rec.mass_sq < floor:
            span = rec.mass_sq - prev.mass_sq
            if span == 0.0:
                return rec.t
            frac = (floor - prev.mass_sq) / span
            return prev.t + frac * (rec.t - prev.t)
        prev = rec
    return None


def _fit_window(series: list, threshold: float) -> list:
    if not series:
        return []
    floor = 100.0 * threshold * series[0].mass_sq
    live = [r for r in series if r.mass_sq > floor]
    if len(live) < 10:
        raise FitError(f"need >= 10 samples above 100x extinction threshold, got {len(live)}")
    # Trim transient head and floor-contaminated tail.
    k = max(1, len(live) // 20)
    return live[k:len(live) - k]


def fit_decay(series: list, model: FitModel | str, alpha: float | None = None,
              threshold: float = 1e-24) -> FitResult:
    """Least-squares decay fit on the trimmed above-threshold window.

    ExpDecay fits log ||u|| vs t; PowerExtinction fits ||u||^(alpha/2) vs t
    (requires ``alpha``) and reports the implied extinction bound
    T* = ||u0||^(alpha/2) / slope in ``constant``.
    """
    model = FitModel(model)
    live = _fit_window(series, threshold)
    m = np.array([r.mass_sq for r in live])
    if np.any(np.diff(m) > 1e-10 * m[0]):
        raise FitError("mass is not monotone decreasing; fit refused")
    t = np.array([r.t for r in live])

    if model is FitModel.EXP_DECAY:
        y = 0.5 * np.log(m)
    else:
        if alpha is None or not 0.0 < alpha <= 1.0:
            raise FitError("power-extinction fit requires alpha in (0, 1]")
        y = np.power(m, alpha / 4.0)

    A = np.vstack([t, np.ones_like(t)]).T
    (slope, intercept), _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * t + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 0.0:
        raise FitError("degenerate (constant) series; r^2 undefined")
    r2 = 1.0 - float((resid**2).sum()) / ss_tot
    window = (float(t[0]), float(t[-1]))

    if model is FitModel.EXP_DECAY:
        return FitResult(model, rate_or_exponent=float(-slope),
                         constant=float(np.exp(intercept)), r_squared=r2, window=window)
    norm0 = math.sqrt(series[0].mass_sq)
    slope_down = float(-slope)
    t_star = norm0 ** (alpha / 2.0) / slope_down if slope_down > 0 else math.inf
    return FitResult(model, rate_or_exponent=slope_down, constant=float(t_star),
                     r_squared=r2, window=window)


# -- file I/O -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series_csv(path: str, series: list) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in series:
            fh.write(",".join(_fmt(v) for v in rec.as_row()) + "\n")


def read_series_csv(path: str) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != list(CSV_COLUMNS):
            raise ValueError(f"unexpected CSV columns {header}")
        out = []
        for line in fh:
            if not line.strip():
                continue
            vals = [float(x) for x in line.strip().split(",")]
            out.append(ObservableRecord(*vals))
    return out


def write_report_json(path: str, report: RunReport, csv_path: str | None = None) -> None:
    rel = os.path.relpath(csv_path, os.path.dirname(path) or ".") if csv_path else None
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(csv_path=rel), fh, indent=2, sort_keys=True)
        fh.write("\n")
