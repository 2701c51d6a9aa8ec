"""Simulator for a pump-controlled cavity-optomechanical signal amplifier.

Computes pumped steady states, signal-beam response spectra, transistor
gain curves and stability limits, and cross-validates the closed-form
response against two independently derived reference solvers.
"""

from .errors import (
    BracketError,
    ConfigError,
    DivergenceError,
    OmtxError,
    SingularResponseError,
    WindowTooShortError,
)
from .model import (
    DriveConfig,
    OptomechParams,
    ResponsePoint,
    Spectrum,
    SteadyState,
    b_plus_closed_form,
    coupling_rate,
    drive_amplitude,
    eta,
    f_denominator,
    output_field,
    response_eps,
    select_branch,
    steady_state_roots,
)
from .oracles import (
    DemodulationResult,
    Trajectory,
    demodulate,
    integrate_dynamics,
    jacobian_eigenvalues,
    linearized_response,
    time_domain_response,
)
from .sweeps import (
    BistabilityMap,
    CharacteristicCurve,
    SweepSpec,
    bistability_map,
    instability_threshold,
    spectrum,
    transistor_curve,
)
from .config import RunConfig, parse_config, serialize
from .validate import ConformanceReport, run_validation

__version__ = "0.1.0"
