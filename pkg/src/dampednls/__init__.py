"""Pseudospectral simulator and verification toolkit for damped NLS equations.

The model couples a power nonlinearity with a superlinear damping term and a
(regularized) sublinear damping term, on a flat torus or a truncated
harmonic-confinement domain in one or two dimensions.  The package bundles
the split-step integrator, the energy/dissipation observables, Monte Carlo
checks of the supporting functional inequalities, and a reproduction harness
with a CLI.
"""

from .grid import (
    Domain,
    DomainKind,
    Field,
    Params,
    SigmaNorms,
    apply_spectral,
    boundary_mass,
    lp_norm,
    make_domain,
    sigma_norms,
)
from .dynamics import (
    BlowUpDiagnostic,
    Scheme,
    StepperConfig,
    evolve,
    linear_substep,
    nonlinear_substep,
    polar_factor,
    step,
)
from .observables import (
    FitError,
    FitModel,
    FitResult,
    ObservableRecord,
    RunReport,
    detect_extinction,
    energy_e0,
    energy_e2,
    energy_ek,
    fit_decay,
    holder_bracket,
    mass_balance_residual,
)
from .inequalities import (
    IneqName,
    IneqReport,
    check_brezis_gallouet,
    check_gn,
    check_gn_dual,
    check_gn_dual2,
    check_nash,
    check_young_monotone,
    random_band_limited,
    sweep_inequality,
)
from .experiments import (
    ScenarioConfig,
    delta_convergence,
    run_scenario,
    smallmass_2d_extinction,
    sweep,
)
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
