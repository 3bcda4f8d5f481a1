"""Nonparametric tests of isotropy for second-order stationary spatial random fields."""

from ._backend import BACKEND
from .core import (
    ContrastMatrix,
    CovarianceEstimate,
    Design,
    LagSet,
    SemivariogramEstimate,
    SpatialDataset,
    TestResult,
    detect_design,
    load_dataset,
    validate_hypothesis,
    write_dataset,
)
from .errors import IsotropyError, IsotropyWarning, NumericalError, ValidationError
from .isotest import guan_test_grid, guan_test_unif, maity_test, test_statistic
from .numstats import RandomStream, chisq_survival, solve_spd, standard_normal
from .sigma import finite_sample_pvalue, sigma_from_bootstrap, sigma_from_subblocks
from .simulate import CovarianceModel, covariance_at, simulate_grf, uniform_locations
from .subsample import RegionGrid, WindowConfig, enumerate_windows, extract_subblock, resample_blocks
from .variogram import (
    DirectionalBinSpec,
    KernelSpec,
    classical_semivariogram,
    directional_semivariogram,
    kernel_semivariogram,
)

# the standard lag set and contrasts for unit-spaced grids
STANDARD_LAGS = ((1, 0), (0, 1), (1, 1), (-1, 1))
STANDARD_CONTRASTS = ((1, -1, 0, 0), (0, 0, 1, -1))

__version__ = "0.1.0"
