"""Quantum noise of two coupled bosonic modes with incoherent gain and drain.

Closed-form stationary and transient statistics of the driven two-mode model
(gain gamma1 on mode 1, drain gamma2 and coherent drive f on mode 2, coupling
j, detuning delta), organized around its exceptional point, plus an
independent truncated-Fock-space oracle and a sweep CLI.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CutoffTooSmall,
    DivergenceDetected,
    EpnoiseError,
    NotAtEP,
    OrderTooLarge,
    SingularParameters,
    UnnormalizedEnsemble,
    Unstable,
)
from .model import (
    EffectiveHamiltonian,
    HeffSpectrum,
    RegimeReport,
    StationaryGaussian,
    SystemParams,
    build_heff,
    classify_regime,
    heff_spectrum,
    stationary_gaussian,
)
from .moments import (
    ObservableSet,
    antinormal_moment,
    chi_stationary,
    husimi_density,
    intensity_dispersion_from_moments,
    observables,
    snr_limit_checks,
)
from .transient import (
    EpModeData,
    TransientEnsemble,
    chi_pde_residual,
    ep_mode_data,
    fit_constants,
    order_parameter_ep,
    order_parameter_general,
    transient_chi,
)
from .fock import (
    CutoffScanReport,
    FockConfig,
    FockState,
    build_liouvillian,
    chi_from_state,
    coherent_state,
    cutoff_scan,
    displaced_thermal_state,
    evolve,
    fock_observables,
    load_density_csv,
    intensity_doubling_onset,
    moment_ode_evolve,
    save_density_csv,
    steady_state,
    vacuum_state,
)
from .sweep import (
    SweepAxis,
    SweepSpec,
    SweepTable,
    cmd_intensity_map,
    cmd_linecut,
    cmd_snr_map,
    cmd_stability_map,
    cmd_transient,
    cmd_verify,
)

__all__ = [
    "__version__",
    # errors
    "EpnoiseError",
    "ConfigError",
    "CutoffTooSmall",
    "DivergenceDetected",
    "NotAtEP",
    "OrderTooLarge",
    "SingularParameters",
    "UnnormalizedEnsemble",
    "Unstable",
    # model
    "SystemParams",
    "EffectiveHamiltonian",
    "HeffSpectrum",
    "RegimeReport",
    "StationaryGaussian",
    "build_heff",
    "classify_regime",
    "heff_spectrum",
    "stationary_gaussian",
    # moments
    "ObservableSet",
    "antinormal_moment",
    "chi_stationary",
    "husimi_density",
    "intensity_dispersion_from_moments",
    "observables",
    "snr_limit_checks",
    # transient
    "EpModeData",
    "TransientEnsemble",
    "chi_pde_residual",
    "ep_mode_data",
    "fit_constants",
    "order_parameter_ep",
    "order_parameter_general",
    "transient_chi",
    # fock oracle
    "CutoffScanReport",
    "FockConfig",
    "FockState",
    "build_liouvillian",
    "chi_from_state",
    "coherent_state",
    "cutoff_scan",
    "displaced_thermal_state",
    "evolve",
    "fock_observables",
    "load_density_csv",
    "intensity_doubling_onset",
    "moment_ode_evolve",
    "save_density_csv",
    "steady_state",
    "vacuum_state",
    # sweeps
    "SweepAxis",
    "SweepSpec",
    "SweepTable",
    "cmd_stability_map",
    "cmd_intensity_map",
    "cmd_linecut",
    "cmd_snr_map",
    "cmd_transient",
    "cmd_verify",
]
