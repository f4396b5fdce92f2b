"""Numerics for extremal solutions of nonlocal elliptic systems on an interval."""
from .discretize import DiscreteOperator, Grid, assemble, energy_form, product_rule_defect, pv_apply
from .errors import *  # noqa: F401,F403
from .kernel import SpectralKernel, check_ellipticity, exterior_mass, frac_lap_constant
from .solve import (Branch, BranchRecord, StepPolicy, continue_branch, extremal_estimate,
                    minimal_solution)
from .special_fn import (log_gamma, nedev_bootstrap, threshold_gelfand, threshold_lane_emden,
                         threshold_mems)
from .systems import Nonlinearity, SystemSpec
from .verify import StabilityForm, elementary_inequalities, stability_indicator

__version__ = "0.1.0"
