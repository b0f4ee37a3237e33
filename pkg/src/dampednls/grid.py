"""Domains, complex grid fields, spectral transforms and norms.

Two geometries are supported in one and two dimensions: a flat periodic
torus, and a truncated real line/plane with a harmonic confining potential
V(x) = sum_j omega_j^2 x_j^2.  The truncated box is treated as periodic;
its validity is policed at run time by :func:`boundary_mass`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

__all__ = [
    "DomainKind",
    "Domain",
    "Field",
    "Params",
    "SigmaNorms",
    "make_domain",
    "lp_norm",
    "sigma_norms",
    "apply_spectral",
    "boundary_mass",
]

# Relative L2-mass fraction allowed in the outer shell of a truncated box.
BOUNDARY_MASS_THRESHOLD = 1e-8


class DomainKind(str, enum.Enum):
    TORUS_1D = "torus1d"
    TORUS_2D = "torus2d"
    CONFINED_R1 = "confined_r1"
    CONFINED_R2 = "confined_r2"

    @property
    def dim(self) -> int:
        return 1 if self in (DomainKind.TORUS_1D, DomainKind.CONFINED_R1) else 2

    @property
    def confined(self) -> bool:
        return self in (DomainKind.CONFINED_R1, DomainKind.CONFINED_R2)


def _as_tuple(value, dim: int, name: str) -> tuple:
    if np.isscalar(value):
        items = (value,) * dim
    else:
        items = tuple(value)
    if len(items) != dim:
        raise ValueError(f"{name} must have {dim} entries, got {len(items)}")
    return items


@dataclass(frozen=True)
class Domain:
    """Discretized geometry: grid, quadrature weight and spectral symbols.

    ``extent`` is the torus period per axis, or the truncation half-width
    for confined kinds (the box is then [-L, L) with period 2L).
    """

    kind: DomainKind
    extent: tuple
    n: tuple
    omega: tuple | None = None
    # Derived, filled in __post_init__:
    potential: np.ndarray = dc_field(init=False, repr=False, compare=False)
    wavenumbers: tuple = dc_field(init=False, repr=False, compare=False)
    quad_weight: float = dc_field(init=False, compare=False)

    def __post_init__(self):
        kind = DomainKind(self.kind)
        object.__setattr__(self, "kind", kind)
        d = kind.dim
        object.__setattr__(self, "extent", tuple(float(L) for L in _as_tuple(self.extent, d, "extent")))
        object.__setattr__(self, "n", tuple(int(m) for m in _as_tuple(self.n, d, "n")))

        for m in self.n:
            if m < 8 or (m & (m - 1)) != 0:
                raise ValueError(f"grid size {m} must be a power of two >= 8")
        for L in self.extent:
            if L <= 0:
                raise ValueError("extent must be positive")

        if kind.confined:
            if self.omega is None:
                raise ValueError(f"{kind.value} requires omega")
            om = tuple(float(w) for w in _as_tuple(self.omega, d, "omega"))
            if any(w <= 0 for w in om):
                raise ValueError("omega must be positive")
            object.__setattr__(self, "omega", om)
        else:
            if self.omega is not None:
                raise ValueError("omega is only meaningful on confined domains")

        axes = []
        waves = []
        cell = 1.0
        for j in range(d):
            period = self.extent[j] if not kind.confined else 2.0 * self.extent[j]
            dx = period / self.n[j]
            cell *= dx
            x0 = 0.0 if not kind.confined else -self.extent[j]
            axes.append(x0 + dx * np.arange(self.n[j]))
            waves.append(2.0 * np.pi * np.fft.fftfreq(self.n[j], d=dx))
        object.__setattr__(self, "quad_weight", cell)
        object.__setattr__(self, "_axes", tuple(a for a in axes))
        object.__setattr__(self, "wavenumbers", tuple(w for w in waves))

        if kind.confined:
            mesh = np.meshgrid(*axes, indexing="ij")
            V = sum(w**2 * X**2 for w, X in zip(self.omega, mesh))
            object.__setattr__(self, "potential", np.ascontiguousarray(V.ravel()))
        else:
            object.__setattr__(self, "potential", np.zeros(self.size))

        kmesh = np.meshgrid(*waves, indexing="ij")
        ksq = sum(K**2 for K in kmesh)
        object.__setattr__(self, "_ksq", np.ascontiguousarray(ksq))
        object.__setattr__(self, "_kmesh", tuple(kmesh))

    @property
    def dim(self) -> int:
        return self.kind.dim

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def axes(self) -> tuple:
        """Per-axis coordinate arrays."""
        return self._axes

    @property
    def lap_symbol(self) -> np.ndarray:
        """|k|^2 on the mode mesh (the symbol of -Laplacian)."""
        return self._ksq

    def coordinate_mesh(self) -> tuple:
        return np.meshgrid(*self._axes, indexing="ij")

    def laplacian_delta_v(self) -> float:
        """Laplacian of the confining potential (constant); 0 on tori."""
        if not self.kind.confined:
            return 0.0
        return 2.0 * sum(w**2 for w in self.omega)


def make_domain(kind, extent, n, omega=None) -> Domain:
    """Build a domain; see :class:`Domain` for conventions."""
    return Domain(kind=DomainKind(kind), extent=extent, n=n, omega=omega)


@dataclass(frozen=True)
class Field:
    """Immutable complex grid function tied to its domain."""

    values: np.ndarray
    domain: Domain

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.complex128).ravel())
        if v.size != self.domain.size:
            raise ValueError(f"field length {v.size} does not match grid size {self.domain.size}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("field contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def grid_values(self) -> np.ndarray:
        """Values reshaped to the grid shape (read-only view)."""
        return self.values.reshape(self.domain.shape)


@dataclass(frozen=True)
class Params:
    """Model coefficients.

    The three damping/nonlinearity terms are lam*|u|^(2*sigma1)*u (phase,
    focusing for lam<0), -i*a*|u|^(2*sigma2)*u (superlinear damping) and
    -i*b*u/(|u|^2+delta)^(alpha/2) (regularized sublinear damping).
    ``k_energy`` weights the augmented energy used for a priori bounds.
    """

    lam: float = 0.0
    a: float = 0.0
    b: float = 0.0
    sigma1: float = 1.0
    sigma2: float = 1.0
    alpha: float = 1.0
    delta: float = 0.0
    k_energy: float = 0.1

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be >= 0")
        if self.b < 0:
            # b=0 switches the sublinear damping off (Hamiltonian/control runs).
            raise ValueError("b must be >= 0")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("sigma1 and sigma2 must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.k_energy <= 0:
            raise ValueError("k_energy must be positive")
        if self.lam < 0 and self.a > 0:
            k_max = 2.0 * self.a / (self.sigma2 * (self.sigma2 + 1.0))
            if not self.k_energy < k_max:
                raise ValueError(
                    f"for lam<0 the augmented-energy weight needs k_energy < 2a/(sigma2(sigma2+1)) = {k_max:g}"
                )

    def validate_for_domain(self, domain: Domain) -> None:
        if domain.kind is DomainKind.CONFINED_R2 and self.alpha > 0.5:
            raise ValueError("alpha must be <= 1/2 on the confined plane")

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "a": self.a,
            "b": self.b,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "alpha": self.alpha,
            "delta": self.delta,
            "k_energy": self.k_energy,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        d = dict(d)
        allowed = {"lambda", "a", "b", "sigma1", "sigma2", "alpha", "delta", "k_energy"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown params keys: {sorted(unknown)}")
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


# -- transforms --------------------------------------------------------------


def fft_coeffs(f: Field) -> np.ndarray:
    """Unnormalized forward FFT on the grid shape."""
    return np.fft.fftn(f.grid_values())


def apply_spectral(f: Field, symbol: np.ndarray) -> Field:
    """Multiply the Fourier coefficients of ``f`` by a per-mode symbol."""
    sym = np.asarray(symbol)
    if sym.size != f.domain.size:
        raise ValueError(f"symbol length {sym.size} does not match mode count {f.domain.size}")
    sym = sym.reshape(f.domain.shape)
    out = np.fft.ifftn(np.fft.fftn(f.grid_values()) * sym)
    return Field(out.ravel(), f.domain)


def gradient_values(f: Field) -> list[np.ndarray]:
    """Pointwise partial derivatives of f along each axis (spectral)."""
    c = fft_coeffs(f)
    out = []
    for K in f.domain._kmesh:
        out.append(np.fft.ifftn(1j * K * c).ravel())
    return out


def laplacian_values(f: Field) -> np.ndarray:
    c = fft_coeffs(f)
    return np.fft.ifftn(-f.domain.lap_symbol * c).ravel()


# -- norms --------------------------------------------------------------------


def lp_norm(f: Field, p: float) -> float:
    """L^p norm by the uniform rectangle rule; p = inf gives max |f|."""
    if p != math.inf and p < 1:
        raise ValueError("p must be >= 1 (or inf)")
    v = f.values
    mag_sq = v.real**2 + v.imag**2
    if p == math.inf:
        return float(np.sqrt(mag_sq.max(initial=0.0)))
    if p == 2:
        return float(np.sqrt(mag_sq.sum() * f.domain.quad_weight))
    # |f|^p through a real power of |f|^2; zeros contribute exactly 0.
    acc = np.where(mag_sq > 0.0, np.power(np.maximum(mag_sq, np.finfo(float).tiny), p / 2.0), 0.0)
    return float((acc.sum() * f.domain.quad_weight) ** (1.0 / p))


def mass_sq(f: Field) -> float:
    v = f.values
    return float((v.real**2 + v.imag**2).sum() * f.domain.quad_weight)


@dataclass(frozen=True)
class SigmaNorms:
    l2: float
    h_grad: float
    h_lap: float
    moment: float
    sigma: float


def sigma_norms(f: Field, order: int = 1) -> SigmaNorms:
    """L2, spectral gradient/Laplacian norms, moment norm and the combined
    weighted-Sobolev norm of the given order.

    On tori the moment term is 0 by convention, so the combined norm is the
    plain inhomogeneous H^order norm.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    dom = f.domain
    c = fft_coeffs(f)
    csq = c.real**2 + c.imag**2
    # Parseval: sum_x |f|^2 dx = (cell / N) * sum_k |fhat|^2
    scale = dom.quad_weight / dom.size
    l2 = math.sqrt(csq.sum() * scale)
    h_grad = math.sqrt((dom.lap_symbol * csq).sum() * scale)
    h_lap = math.sqrt((dom.lap_symbol**2 * csq).sum() * scale) if order == 2 else 0.0

    if dom.kind.confined:
        mesh = dom.coordinate_mesh()
        r_sq = sum(X**2 for X in mesh).ravel()
        w = r_sq if order == 1 else r_sq**2
        mag = f.values.real**2 + f.values.imag**2
        moment = math.sqrt(float((w * mag).sum() * dom.quad_weight))
    else:
        moment = 0.0

    sig = math.sqrt(l2**2 + h_grad**2 + h_lap**2 + moment**2)
    return SigmaNorms(l2=l2, h_grad=h_grad, h_lap=h_lap, moment=moment, sigma=sig)


def boundary_mass(f: Field) -> float:
    """Fraction of the L2 mass carried by the outer 10% shell of the box.

    Only meaningful on confined (truncated) domains; a zero field returns 0.
    """
    dom = f.domain
    if not dom.kind.confined:
        raise ValueError("boundary_mass applies to confined domains only")
    mesh = dom.coordinate_mesh()
    shell = np.zeros(dom.shape, dtype=bool)
    for j, X in enumerate(mesh):
        shell |= np.abs(X) >= 0.9 * dom.extent[j]
    mag = (f.values.real**2 + f.values.imag**2).reshape(dom.shape)
    total = mag.sum()
    if total == 0.0:
        return 0.0
    return float(mag[shell].sum() / total)
