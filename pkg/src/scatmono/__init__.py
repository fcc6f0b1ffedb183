"""Scattering monodromy of focus-focus singularities, computed numerically."""
from .action import disk_action, flatness_profile, loop_action, loop_action_standard
from .dynamics import (
    PerturbedSystem,
    Trajectory,
    complex_flow,
    hamiltonian_vector_field,
    integrate,
    standard_flow_q1,
    standard_flow_q2,
)
from .errors import (
    ConfigError,
    DomainViolation,
    NumericalError,
    PoleError,
    ScatmonoError,
    SectionNotReached,
    UnwrapAmbiguity,
)
from .integrator import IntegratorConfig
from .normal_form import MoserField, NormalizingMap, TaylorFactorization, normalize
from .phase_space import ComplexPair, EnergyMomentum, PhasePoint, TangentVector
from .polynomial import FlatPolynomial, Poly
from .scattering import (
    ConnectionForm,
    CrossSectionPair,
    MonodromyResult,
    ScatteringRecord,
    connection_eval,
    eta_section,
    monodromy_scan,
    mu,
    oscillator_deflection,
    scattering_phase,
    scattering_phase_standard,
    singular_fiber_probe,
    transit_time_standard,
    xi_section,
)

__version__ = "0.1.0"
