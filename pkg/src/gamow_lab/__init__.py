"""Breit-Wigner lineshapes, exponential decay and Gamow states on truncated and full spectra."""
from .spectral import (EnergyDensity, HalfPlane, Rational, RationalHardyFunction, ResonanceLine,
                       SpectralSupport, bw_amplitude, bw_density, hardy_eval,
                       norm_full_line, norm_truncated_closed_form, norm_truncated_series,
                       verify_semicircle_decay)
from .quadrature import (QuadratureMethod, QuadratureResult, cross_validate, fourier_fullline,
                         fourier_halfline, halfline_rotated, residue_fourier)
from .dynamics import (AmplitudeSeries, PoleBackgroundSplit, crossover_time,
                       fermi_retarded_probability, gamow_amplitude, pole_background_split,
                       precursor_report, survival_amplitude, survival_probability, tail_exponent)
from .fitting import (compare_width_lifetime, fit_decay_rate, fit_lineshape,
                      generate_decay_counts, generate_lineshape)
from .relativistic import (CausalityRejection, FourVector, GamowLabel, LorentzTransform,
                           in_forward_cone, standard_boost, transform_gamow, wigner_d,
                           wigner_rotation)
from .units import HBAR, PRESETS

__version__ = "0.1.0"
