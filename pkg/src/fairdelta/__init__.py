"""Individual-level analysis and post-processing of fair regression outputs."""
from .data import Dataset, SplitSpec, load_dataset, load_schema, split
from .errors import DataError, FairDeltaError, ValidationError
from .learners import FitReport, Predictor, fit_logistic, fit_ols, predict
from .metrics import EmpiricalCdf, dp_disparity, empirical_cdf, standard_loss
from .postproc import (DiffDistribution, PredictionPair, RangeParams, apply_postprocess, cap,
                       diff_distribution,
                       normalize_diffs, normalize_translate_budget_neutral,
                       normalize_translate_nonpositive, translate_budget_neutral,
                       translate_nonpositive)
from .repair import RepairModel, apply_repair, fit_repair, with_lambda
from .report import (ExperimentReport, Histogram, histogram, render_report, render_table,
                     run_experiment)

__version__ = "0.1.0"
