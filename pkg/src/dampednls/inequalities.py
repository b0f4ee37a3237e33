"""Monte Carlo verification of the functional inequalities behind the bounds.

Each check returns the two sides of an inequality with the (unknown)
constant stripped; sweeps over seeded random band-limited fields report the
empirical worst ratio as the estimated constant.  Constants are never
asserted against literature values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .grid import Domain, DomainKind, Field, lp_norm, sigma_norms

__all__ = [
    "IneqName",
    "IneqReport",
    "CheckResult",
    "check_gn",
    "check_gn_dual",
    "check_gn_dual2",
    "check_nash",
    "check_brezis_gallouet",
    "check_young_monotone",
    "young_monotone_values",
    "random_band_limited",
    "sweep_inequality",
]


class IneqName(str, enum.Enum):
    GN = "gn"
    GN_DUAL = "gn_dual"
    GN_DUAL2 = "gn_dual2"
    NASH1 = "nash1"
    NASH2 = "nash2"
    BREZIS_GALLOUET = "brezis_gallouet"
    YOUNG_MONOTONE = "young_monotone"


@dataclass(frozen=True)
class CheckResult:
    lhs: float
    rhs_factors: dict
    ratio: float


@dataclass(frozen=True)
class IneqReport:
    name: IneqName
    trials: int
    worst_ratio: float
    estimated_constant: float
    violations_at_C: int

    def to_dict(self) -> dict:
        return {
            "name": self.name.value,
            "trials": self.trials,
            "worst_ratio": self.worst_ratio,
            "estimated_constant": self.estimated_constant,
            "violations_at_C": self.violations_at_C,
        }


def _delta_p(p: float, d: int) -> float:
    if p == math.inf:
        return d / 2.0
    return d * (0.5 - 1.0 / p)


def _require_nonzero(f: Field) -> None:
    if not np.any(f.values):
        raise ValueError("ratio undefined for the zero field")


def _check_p_range(p: float, d: int) -> None:
    if p < 2:
        raise ValueError("p must be >= 2")
    if d == 2 and p == math.inf:
        raise ValueError("p = inf is excluded in dimension 2")


def check_gn(f: Field, p: float) -> CheckResult:
    """Interpolation of L^p between L^2 and H^1 with exponent d(1/2 - 1/p)."""
    d = f.domain.dim
    _check_p_range(p, d)
    _require_nonzero(f)
    sn = sigma_norms(f, order=1)
    h1 = math.sqrt(sn.l2**2 + sn.h_grad**2)
    dp = _delta_p(p, d)
    lhs = lp_norm(f, p)
    rhs = sn.l2 ** (1.0 - dp) * h1**dp
    factors = {"l2": sn.l2, "h1": h1, "delta_p": dp}
    if f.domain.kind.confined and sn.h_grad > 0.0:
        # On the whole space the gradient seminorm alone suffices.
        factors["h1_homogeneous"] = sn.h_grad
        factors["ratio_homogeneous"] = lhs / (sn.l2 ** (1.0 - dp) * sn.h_grad**dp)
    return CheckResult(lhs=lhs, rhs_factors=factors, ratio=lhs / rhs)


def check_gn_dual(f: Field, p: float) -> CheckResult:
    """Control of the low norm L^{p'} by the L^2 norm and the first momentum."""
    dom = f.domain
    if not dom.kind.confined:
        raise ValueError("momentum control applies on confined domains only")
    d = dom.dim
    _check_p_range(p, d)
    _require_nonzero(f)
    p_prime = 1.0 if p == math.inf else p / (p - 1.0)
    sn = sigma_norms(f, order=1)
    dp = _delta_p(p, d)
    lhs = lp_norm(f, p_prime)
    rhs = sn.l2 ** (1.0 - dp) * sn.moment**dp
    return CheckResult(lhs=lhs,
                       rhs_factors={"l2": sn.l2, "moment1": sn.moment, "delta_p": dp},
                       ratio=lhs / rhs)


def check_gn_dual2(f: Field) -> CheckResult:
    """L^1 control by the L^2 norm and the second momentum (plane only)."""
    dom = f.domain
    if dom.kind is not DomainKind.CONFINED_R2:
        raise ValueError("second-momentum control applies on the confined plane only")
    _require_nonzero(f)
    sn = sigma_norms(f, order=2)
    lhs = lp_norm(f, 1.0)
    rhs = math.sqrt(sn.l2) * math.sqrt(sn.moment)
    return CheckResult(lhs=lhs,
                       rhs_factors={"l2": sn.l2, "moment2": sn.moment},
                       ratio=lhs / rhs)


def check_nash(f: Field, order: int, alpha: float) -> CheckResult:
    """Low-norm interpolation driving the extinction ODE.

    order 1:  ||f||_2^(alpha*d+4-2alpha) <= C (||f||_{2-alpha}^{2-alpha})^2 ||f||_{H1}^(alpha*d)
    order 2:  ||f||_2^(alpha*d+8-4alpha) <= C (||f||_{2-alpha}^{2-alpha})^4 ||f||_{H2}^(alpha*d)
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    _require_nonzero(f)
    d = f.domain.dim
    sn = sigma_norms(f, order=order)
    h = math.sqrt(sn.l2**2 + sn.h_grad**2 + sn.h_lap**2)
    block = lp_norm(f, 2.0 - alpha) ** (2.0 - alpha)
    if order == 1:
        lhs = sn.l2 ** (alpha * d + 4.0 - 2.0 * alpha)
        rhs = block**2 * h ** (alpha * d)
    else:
        lhs = sn.l2 ** (alpha * d + 8.0 - 4.0 * alpha)
        rhs = block**4 * h ** (alpha * d)
    return CheckResult(lhs=lhs,
                       rhs_factors={"low_block": block, f"h{order}": h, "alpha": alpha},
                       ratio=lhs / rhs)


def check_brezis_gallouet(f: Field) -> CheckResult:
    """sup-norm control by H1 times a square-root log of H2 (dimension 2)."""
    if f.domain.dim != 2:
        raise ValueError("this inequality is specific to dimension 2")
    sn = sigma_norms(f, order=2)
    h1 = math.sqrt(sn.l2**2 + sn.h_grad**2)
    h2 = math.sqrt(sn.l2**2 + sn.h_grad**2 + sn.h_lap**2)
    lhs = lp_norm(f, math.inf)
    rhs = h1 * math.sqrt(math.log(2.0 + h2)) + 1.0
    return CheckResult(lhs=lhs,
                       rhs_factors={"h1": h1, "h2": h2},
                       ratio=lhs / rhs)


def check_young_monotone(z1: complex, z2: complex, sigma: float) -> float:
    """Re((|z1|^s z1 - |z2|^s z2) conj(z1 - z2)); nonnegative for s >= -1."""
    if sigma < -1.0:
        raise ValueError("sigma must be >= -1")

    def powz(z: complex) -> complex:
        m = abs(z)
        if m == 0.0:
            return 0.0
        return m**sigma * z

    return ((powz(z1) - powz(z2)) * np.conj(complex(z1) - complex(z2))).real


def young_monotone_values(z1: np.ndarray, z2: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Vectorized check_young_monotone over matching arrays."""
    m1 = np.abs(z1)
    m2 = np.abs(z2)
    t1 = np.where(m1 > 0, np.power(np.maximum(m1, np.finfo(float).tiny), sigma), 0.0) * z1
    t2 = np.where(m2 > 0, np.power(np.maximum(m2, np.finfo(float).tiny), sigma), 0.0) * z2
    return ((t1 - t2) * np.conj(z1 - z2)).real


# -- random ensemble ------------------------------------------------------------


def random_band_limited(domain: Domain, rng: np.random.Generator,
                        decay: float = 2.5) -> Field:
    """Random field with an algebraically decaying band-limited spectrum.

    Coefficients of integer frequency k get a complex Gaussian weight times
    (1+|k|)^(-decay) inside |k_j| <= n_j/4, zero outside.  On confined
    domains the field is multiplied by a Gaussian envelope so that it decays
    inside the truncated box.
    """
    shape = domain.shape
    coeffs = np.zeros(shape, dtype=np.complex128)
    idx_axes = [np.fft.fftfreq(m, d=1.0 / m) for m in shape]  # integer frequencies
    mesh = np.meshgrid(*idx_axes, indexing="ij")
    kmag = np.sqrt(sum(K**2 for K in mesh))
    band = np.ones(shape, dtype=bool)
    for K, m in zip(mesh, shape):
        band &= np.abs(K) <= m // 4
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coeffs[band] = (g * np.power(1.0 + kmag, -decay))[band]
    values = np.fft.ifftn(coeffs) * domain.size
    if domain.kind.confined:
        cmesh = domain.coordinate_mesh()
        env = np.exp(-sum((X / (0.25 * L)) ** 2 for X, L in zip(cmesh, domain.extent)) / 2.0)
        values = values * env
    return Field(values.ravel(), domain)


# -- sweeps ---------------------------------------------------------------------

_P_CHOICES_1D = (2.0, 2.5, 3.0, 4.0, 6.0, 8.0, math.inf)
_P_CHOICES_2D = (2.0, 2.5, 3.0, 4.0, 6.0, 8.0)


def _trial_ratio(name: IneqName, domain: Domain | None, rng: np.random.Generator) -> float:
    if name is IneqName.YOUNG_MONOTONE:
        z = rng.standard_normal(4) * 2.0
        sigma = rng.uniform(-1.0, 4.0)
        z1 = complex(z[0], z[1])
        z2 = complex(z[2], z[3])
        value = check_young_monotone(z1, z2, sigma)
        scale = (abs(z1) + abs(z2)) ** (sigma + 2.0)
        return max(0.0, -value) / scale if scale > 0 else 0.0

    assert domain is not None
    decay = rng.choice((1.5, 2.5))
    f = random_band_limited(domain, rng, decay=decay)
    if name is IneqName.GN:
        p_choices = _P_CHOICES_1D if domain.dim == 1 else _P_CHOICES_2D
        return check_gn(f, rng.choice(p_choices)).ratio
    if name is IneqName.GN_DUAL:
        p_choices = _P_CHOICES_1D if domain.dim == 1 else _P_CHOICES_2D
        return check_gn_dual(f, rng.choice(p_choices)).ratio
    if name is IneqName.GN_DUAL2:
        return check_gn_dual2(f).ratio
    if name is IneqName.NASH1:
        return check_nash(f, 1, rng.uniform(0.1, 1.0)).ratio
    if name is IneqName.NASH2:
        return check_nash(f, 2, rng.uniform(0.1, 1.0)).ratio
    if name is IneqName.BREZIS_GALLOUET:
        return check_brezis_gallouet(f).ratio
    raise ValueError(f"unknown inequality {name}")


def _validate_pairing(name: IneqName, domain: Domain | None) -> None:
    if name is IneqName.YOUNG_MONOTONE:
        return
    if domain is None:
        raise ValueError(f"{name.value} needs a domain")
    if name in (IneqName.GN_DUAL, IneqName.GN_DUAL2) and not domain.kind.confined:
        raise ValueError(f"{name.value} applies on confined domains only")
    if name is IneqName.GN_DUAL2 and domain.kind is not DomainKind.CONFINED_R2:
        raise ValueError("gn_dual2 applies on the confined plane only")
    if name is IneqName.BREZIS_GALLOUET and domain.dim != 2:
        raise ValueError("brezis_gallouet needs a two-dimensional domain")


def sweep_inequality(name: IneqName | str, domain: Domain | None, trials: int,
                     seed: int) -> IneqReport:
    """Evaluate an inequality on ``trials`` random inputs with per-trial RNG
    streams spawned from ``seed``; reproducible for a fixed seed."""
    name = IneqName(name)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _validate_pairing(name, domain)
    streams = np.random.SeedSequence(seed).spawn(trials)
    ratios = np.empty(trials)
    for i, ss in enumerate(streams):
        ratios[i] = _trial_ratio(name, domain, np.random.default_rng(ss))
    worst = float(ratios.max())
    violations = int((ratios > worst * (1.0 + 1e-12)).sum())
    return IneqReport(name=name, trials=trials, worst_ratio=worst,
                      estimated_constant=worst, violations_at_C=violations)
