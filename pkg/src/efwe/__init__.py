"""Exponential flexible Weibull extension (EFWE) lifetime distribution."""

from .datasets import Dataset, aarset, load_csv, write_csv
from .distributions import (
    EfweParams,
    Family,
    RefModel,
    SamplePolicy,
    cdf,
    cumulative_hazard,
    defect,
    hazard,
    log_pdf,
    log_survival,
    pdf,
    quantile,
    reversed_hazard,
    sample,
    survival,
)
from .inference import FitResult, fit_mle, kaplan_meier, loglik, observed_info, score
from .properties import median, mgf, mode, raw_moment, stationary_points

__version__ = "0.1.0"
