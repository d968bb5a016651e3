"""Multiplicative-update training for SVMs with non-negative kernels."""

from .errors import ConfigError, InputError, ModelFormatError, NotConvergedError
from .kernels import GramBlocks, KernelSpec, eval_kernel, gram, gram_blocks, validate_nonneg
from .data import LabeledDataset, SplitSpec, load_csv, split, standardize, unstandardize
from .solver import (
    AlphaState,
    ConvergenceTrace,
    SolverConfig,
    clip_box,
    gradient_split,
    munk_step,
    objective,
    train,
)
from .baselines import SignedGram, ka_step, m3_step
from .model import TrainedModel, load_model, misclassification_rate, predict, save_model

__version__ = "0.1.0"
