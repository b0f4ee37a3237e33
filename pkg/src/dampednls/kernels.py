"""Backend selection for the pointwise radial/phase kernel.

The compiled extension is preferred when importable; the pure-NumPy twin is
the fallback.  Set DAMPEDNLS_FORCE_PYTHON=1 to force the fallback (used by
the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _radial_py

if os.environ.get("DAMPEDNLS_FORCE_PYTHON") == "1":
    _impl = _radial_py
else:
    try:
        from . import _radial_ext as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _radial_py

BACKEND = _impl.BACKEND_NAME

RK4_SUBSTEPS = 8


def uses_closed_form(a: float, b: float, delta: float) -> bool:
    return a == 0.0 and (b == 0.0 or delta == 0.0)


def radial_substep(values, dt: float, params, backend=None):
    """Advance raw complex values through the pointwise substep over dt.

    ``params`` is a grid.Params; ``backend`` overrides the module default
    (pass the _radial_py / _radial_ext module itself).
    """
    impl = backend if backend is not None else _impl
    if uses_closed_form(params.a, params.b, params.delta):
        return impl.closed_form_substep(values, dt, params.lam, params.b,
                                        params.sigma1, params.alpha)
    return impl.rk4_substep(values, dt, params.lam, params.a, params.b,
                            params.sigma1, params.sigma2, params.alpha,
                            params.delta, RK4_SUBSTEPS)
