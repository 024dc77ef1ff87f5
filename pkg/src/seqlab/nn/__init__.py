"""Differentiable neural core: double-precision tensors with hand-written
layer-local backward passes (no autodiff framework)."""

from .params import Parameter, clip_gradients, glorot_init, normalize_gradients
from .functional import sigmoid, softmax_nll
from .dropout import LayerMasks, dropout_masks
from .lstm import BiLstmStack, LstmDirection, lstm_step
from .charenc import CharCnnEncoder, CharLstmEncoder
from .embed import Embedding
from . import crf
from .checkpoint import load_params, save_params

__all__ = [
    "Parameter",
    "clip_gradients",
    "glorot_init",
    "normalize_gradients",
    "sigmoid",
    "softmax_nll",
    "LayerMasks",
    "dropout_masks",
    "BiLstmStack",
    "LstmDirection",
    "lstm_step",
    "CharCnnEncoder",
    "CharLstmEncoder",
    "Embedding",
    "crf",
    "load_params",
    "save_params",
]
