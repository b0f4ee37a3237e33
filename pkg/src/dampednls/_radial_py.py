"""Pure-NumPy radial/phase kernel for the pointwise damping substep.

The substep solves, independently at every grid point over a time dt,

    rho' = -a * rho^(2*sigma2+1) - b * rho / (rho^2 + delta)^(alpha/2)
    theta' = -lam * rho^(2*sigma1)

in the variables (s, theta) with s = rho^2.  Closed forms are used when
a == 0 and (delta == 0 or b == 0); otherwise classical RK4 with an
integer number of internal substeps.  Amplitudes are clipped at exactly 0
and the phase is frozen there (polar-factor convention).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def _pow(base: np.ndarray, expo: float) -> np.ndarray:
    # base >= 0 everywhere it matters; 0^0 never reaches here.  sqrt chains
    # for the common exponents (matches the compiled kernel).
    if expo == 1.0:
        return base
    if expo == 0.5:
        return np.sqrt(base)
    if expo == 0.25:
        return np.sqrt(np.sqrt(base))
    if expo == 0.75:
        return np.sqrt(base) * np.sqrt(np.sqrt(base))
    if expo == 1.5:
        return base * np.sqrt(base)
    if expo == 2.0:
        return base * base
    if expo == 3.0:
        return base * base * base
    if expo == 4.0:
        return base * base * base * base
    return np.power(base, expo)


def closed_form_substep(u: np.ndarray, dt: float, lam: float, b: float,
                        sigma1: float, alpha: float) -> np.ndarray:
    """Exact substep for a == 0 with either delta == 0 or b == 0."""
    s = u.real**2 + u.imag**2
    alive = s > 0.0
    out = np.zeros_like(u)
    if not alive.any():
        return out
    s_a = s[alive]
    u_a = u[alive]

    if b == 0.0:
        dtheta = -lam * _pow(s_a, sigma1) * dt
        out[alive] = u_a * np.exp(1j * dtheta)
        return out

    if alpha == 0.0:
        # Linear damping limit: rho(t) = rho0 * exp(-b t).
        amp = np.exp(-b * dt)
        if lam != 0.0:
            integral = _pow(s_a, sigma1) * (1.0 - np.exp(-2.0 * sigma1 * b * dt)) / (2.0 * sigma1 * b)
            phase = np.exp(-1j * lam * integral)
        else:
            phase = 1.0
        out[alive] = u_a * amp * phase
        return out

    # Sublinear damping: rho(t)^alpha = rho0^alpha - alpha*b*t, clipped at 0.
    P = _pow(s_a, 0.5 * alpha)  # rho0^alpha
    c = alpha * b
    P_end = np.maximum(P - c * dt, 0.0)
    ratio = np.where(P_end > 0.0, _pow(P_end / P, 1.0 / alpha), 0.0)
    if lam != 0.0:
        m1 = 2.0 * sigma1 / alpha + 1.0
        integral = (_pow(P, m1) - _pow(P_end, m1)) / (c * m1)
        phase = np.exp(-1j * lam * integral)
    else:
        phase = 1.0
    out[alive] = u_a * ratio * phase
    return out


def _rhs_s(s: np.ndarray, a: float, b: float, sigma2: float,
           alpha: float, delta: float) -> np.ndarray:
    sc = np.maximum(s, 0.0)
    out = np.zeros_like(sc)
    if a != 0.0:
        out -= 2.0 * a * _pow(sc, sigma2 + 1.0)
    if b != 0.0:
        if delta > 0.0:
            out -= 2.0 * b * (sc / _pow(sc + delta, 0.5 * alpha))
        else:
            out -= 2.0 * b * _pow(sc, 1.0 - 0.5 * alpha)
    return out


def _rhs_theta(s: np.ndarray, lam: float, sigma1: float) -> np.ndarray:
    if lam == 0.0:
        return np.zeros_like(s)
    return -lam * _pow(np.maximum(s, 0.0), sigma1)


def rk4_substep(u: np.ndarray, dt: float, lam: float, a: float, b: float,
                sigma1: float, sigma2: float, alpha: float, delta: float,
                substeps: int = 8) -> np.ndarray:
    """RK4 on (s, theta) with fixed internal substeps, vectorized over points."""
    s0 = u.real**2 + u.imag**2
    s = s0.copy()
    theta = np.zeros_like(s)
    h = dt / substeps
    for _ in range(substeps):
        k1s = _rhs_s(s, a, b, sigma2, alpha, delta)
        k1t = _rhs_theta(s, lam, sigma1)
        s2 = s + 0.5 * h * k1s
        k2s = _rhs_s(s2, a, b, sigma2, alpha, delta)
        k2t = _rhs_theta(s2, lam, sigma1)
        s3 = s + 0.5 * h * k2s
        k3s = _rhs_s(s3, a, b, sigma2, alpha, delta)
        k3t = _rhs_theta(s3, lam, sigma1)
        s4 = s + h * k3s
        k4s = _rhs_s(s4, a, b, sigma2, alpha, delta)
        k4t = _rhs_theta(s4, lam, sigma1)
        s = np.maximum(s + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s), 0.0)
        theta = theta + (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    alive = (s0 > 0.0) & (s > 0.0)
    out = np.zeros_like(u)
    out[alive] = u[alive] * np.sqrt(s[alive] / s0[alive]) * np.exp(1j * theta[alive])
    return out
