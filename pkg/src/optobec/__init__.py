"""Simulation library for a Bose-Einstein condensate side mode in a driven
optomechanical cavity: classical ensemble transport, quantum wave-packet
localization, the underlying coupled mean-field model, and experiment runners
that emit reproducible CSV artifact sets."""

__version__ = "0.1.0"

from .analysis import (DistributionSnapshot, FitResult, ObservableSeries,
                       SaturationStats, classical_tail_region, detect_break_time,
                       fit_exponential_tail, fit_power_law, saturation_stats)
from .classical import (ClassicalEnsemble, HistogramRecorder, NumericalAbortError,
                        PoincareSection, classify_section, dispersion,
                        distribution, matched_gaussian, poincare, sample_ensemble)
from .classical import evolve as evolve_ensemble
from .classical import step as step_ensemble
from .config import ConfigError, RunConfig, parse_config_text
from .coupled import (AnsatzResidual, CoupledSeries, CoupledState,
                      evolve_adiabatic, evolve_meanfield, mirror_ansatz_residual)
from .params import (EffectiveParams, ParamWarning, PhysicalParams, WarningCode,
                     derive_effective, from_lambda_eff, reference_preset,
                     t_of_tau, tau_of_t)
from .potential import DRIVE_PERIOD, EffectivePotential
from .quantum import (DensityRecorder, Grid, SplitOperator, WavePacket,
                      gaussian_packet, momentum_representation, observables,
                      split_step, time_averaged_distribution)
from .quantum import evolve as evolve_packet
from .runners import (ArtifactSet, interior_minima, run_coupled_check, run_custom,
                      run_fig1, run_fig2, run_fig3, run_kbar_sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
