"""Spectral toolkit for slow-fast stochastic heat equations with rough drifts.

The package simulates a coupled two-time-scale stochastic evolution
equation in a sine spectral basis, estimates the averaged drift from
the ergodic frozen dynamics, solves the associated elliptic (resolvent)
equation at truncated dimension, and verifies the quantitative bounds
behind the averaging principle with seeded Monte-Carlo experiments.
"""

__version__ = "0.1.0"

from .averaging import (AveragingParams, BbarEstimate, BbarOracle,
                        estimate_bbar, estimate_bbar_batch, mixing_diagnostic)
from .errors import (ConfigError, ErgodicityError, IntegrationError,
                     PicardDivergenceError, SlowFastError)
from .model import (AssumptionReport, ModelConfig, check_assumptions,
                    empirical_holder, heat_example)
from .noise import (NoiseSpectrum, NoiseStream, conv_increment_law,
                    derive_substream, power_law_spectrum, sample_increments)
from .simulate import (SlowFastState, StepScheme, Trajectory,
                       simulate_auxiliary_fast, simulate_averaged,
                       simulate_frozen, simulate_slow_fast, step_slow_fast)
from .spectral import (GridField, OperatorSpectrum, SpectralField, from_grid,
                       frac_power_apply, grid_points, h_norm, semigroup_apply,
                       to_grid)
from .zvonkin import (OuKernel, TruncatedFunction, box_axes, dlambda_curve,
                      ou_gradient_apply, ou_semigroup_apply, picard_solve)

__all__ = [name for name in dir() if not name.startswith("_")]
