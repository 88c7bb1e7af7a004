"""qfridge: simulator for a parametrically driven linear quantum refrigerator.

A single harmonic oscillator, parametrically modulated at frequency
omega_d, pumps heat from a single motional mode (reservoir A) into a
broadband electromagnetic reservoir B.  The package computes the driven
response (Floquet coefficients), the heat-current decomposition into
resonant pumping / resonant heating / non-resonant pair heating, the
attainable cooling limits, and the emitted photon spectrum including the
broad dynamical-Casimir pair continuum — plus an independent exact-dynamics
oracle for validation.
"""

__version__ = "1.0.0"

from .errors import (AccuracyError, ConditioningError, ConfigError,
                     DomainError, NotConvergedError, OutOfRegimeError,
                     QfridgeError, SymbolicKindError, TruncationError,
                     UndefinedRatioError, UnsupportedDriveError)
from .model import (DiracMode, DrivePlan, Lorentzian, PowerLaw, ReservoirSpec,
                    SpectralDensity, SystemParams, Tabulated,
                    dissipation_kernel_laplace, planck_occupation)
from .floquet import (FloquetSolution, GreenStatic, floquet_coefficients,
                      floquet_residual, perturbative_A1, solve_floquet)
from .currents import (HeatBreakdown, TransitionWeight, heat_breakdown,
                       heat_nrh, heat_rh, heat_rp, transition_weight,
                       work_rate)
from .limits import (CoolingReport, CriticalBand, critical_ratio,
                     doppler_limit, half_frequency_limit,
                     occupation_leading_order, occupation_slow_sd,
                     optimize_drive, rp_nrh_ratio, sideband_limit,
                     steady_occupation, structured_limit)
from .spectrum import (CasimirRatio, IonModel, IonPreset, SpectrumParams,
                       SpectrumTable, build_spectrum, casimir_ratio,
                       ion_mapping, photon_rate_nrh, photon_rate_pairs,
                       photon_rate_rp)
from .oracle import (CovarianceState, DiscretizedBath, OracleRecord,
                     Trajectory, build_discretized_bath, measure_currents,
                     propagate, thermal_state)
