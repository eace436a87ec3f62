"""Fully-loaded margin estimation for partially filled DWDM links.

The package couples a Gaussian-noise nonlinear-interference engine (closed
form plus an adaptive quadrature oracle) with spectrum packing, labeled
dataset generation, a polynomial Bayesian ridge regressor, and few-shot
affine adaptation to a perturbed surrogate link.
"""

__version__ = "0.1.0"

from .adaptation import (Recalibration, SurrogateLinkProfile,
                         fit_recalibration, measure_grid, predict_adapted,
                         select_calibration_points)
from .analysis import (Histogram, SweepResult, correlation, error_histogram,
                       fill_sweep, frequency_sweep, granularity_sweep,
                       power_sweep, quantize_fill)
from .bayes_ridge import BayesRidgeModel, FitResult, fit
from .dataset import (DatasetSplit, GenerationResult, ProbeRecord, Scenario,
                      feature_matrix, generate, generate_record, labels,
                      read_csv, row_seed, sample_parameter_space, split,
                      write_csv)
from .errors import (ConfigError, CutOutOfBand, DegenerateFeature,
                     DegeneratePoints, MarginProbeError, OverlappingChannels,
                     QuadratureNotConverged, SingularDesign)
from .features import (FEATURE_NAMES, MONOMIAL_TABLE, N_FEATURES, N_MONOMIALS,
                       ScalerStats, design_matrix, expand, fit_scaler,
                       monomial_exponents)
from .gn_engine import (ChannelSpec, FiberParams, LinkTopology,
                        SpectrumRealization, ase_power, margin,
                        nli_psd_closed_form, nli_psd_integral, snr)
from .quadrature import integrate_2d
from .spectrum import (GridPolicy, build_full_plan, from_text, sample_partial,
                       to_text)

__all__ = [name for name in dir() if not name.startswith("_")]
