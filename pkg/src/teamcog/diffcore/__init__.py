from .tensor import Tensor, no_grad
from . import tensor
from .nn import (
    Dense,
    MLP,
    GRUCell,
    GaussianHead,
    gaussian_sample,
    kl_diag_gaussians,
    scaled_dot_attention,
    masked_mean,
    DELTA_FLOOR,
)
from .optim import RMSProp, SGD, clip_grad_norm, make_optimizer
from .checkpoint import save_params, load_params, save_arrays, load_arrays

softmax = tensor.softmax
