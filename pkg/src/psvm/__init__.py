"""Kernel SVMs with p-norm hinge loss, trained by a coordinate-pair solver."""

from .data import (Dataset, SplitSpec, Standardizer, binarize_wine, kfold_indices,
                   load_csv, standardize, stratified_kfold_indices, train_test_split)
from .dual import (Hyperparams, derive_gamma_theta, dual_objective, is_feasible,
                   primal_objective, w_norm_sq_from_dual)
from .exceptions import (DegenerateDataError, InvalidInputError, NonPSDKernelError,
                         NumericFailureError, OracleFailureError, ParseError, PsvmError)
from .kernels import (Kernel, KernelCache, default_gaussian_sigma, eta, gaussian,
                      kernel_eval, kernel_matrix, linear, precomputed)
from .losses import (MarginLossParams, empirical_margin_loss, generalization_bound, phi,
                     pnorm_hinge_sum)
from .models import (BinaryModel, OvOModel, decision_value, decision_values, fit_multiclass,
                     load_model, predict_binary, predict_multiclass,
                     predict_multiclass_batch, save_model)
from .reference import OracleConfig, reference_dual_solve
from .selection import EvalReport, GridSpec, cross_validate, evaluate, learning_curve
from .solver import (DualState, PairUpdateResult, compute_error, fit_binary, kkt_residuals,
                     select_working_pair, solve_g_root, train_dual, update_bias, update_pair)

__version__ = "0.1.0"
