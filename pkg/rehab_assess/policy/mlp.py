# Copyright 2026 The RehabAssess Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Dense ReLU networks used as quality predictors and Q-networks.

Predictors read standardized feature values followed by one mask bit per
feature (values ++ mask), so a single network serves any subset of acquired
features. Unacquired values are zeroed before the forward pass.
"""

import dataclasses
import functools
import logging
from typing import Any
from typing import Dict
from typing import Optional
from typing import Sequence
from typing import Tuple

import jax
import jax.numpy as jnp
import numpy as np
from flax import linen as nn
from flax import struct
from jax import random

from rehab_assess.errors import DimensionMismatch
from rehab_assess.errors import DomainError
from rehab_assess.kinematics import FeatureVector
from rehab_assess.policy.base import PolicyNetwork
from rehab_assess.util import create_logger
from rehab_assess.util import flatten_params
from rehab_assess.util import get_params_format_fn

HEADS = ('sigmoid', 'linear')


class MLP(nn.Module):
    feat_dims: Sequence[int]
    out_dim: int

    @nn.compact
    def __call__(self, x):
        for hidden_dim in self.feat_dims:
            x = nn.relu(nn.Dense(
                hidden_dim, kernel_init=nn.initializers.he_uniform())(x))
        return nn.Dense(
            self.out_dim, kernel_init=nn.initializers.he_uniform())(x)


@dataclasses.dataclass(frozen=True)
class Architecture(object):
    """Layer sizes and output head of a network.

    An empty hidden_dims gives a linear model (tabular Q-functions).
    """

    input_dim: int
    hidden_dims: Tuple[int, ...]
    output_dim: int = 1
    head: str = 'sigmoid'

    def __post_init__(self):
        object.__setattr__(self, 'hidden_dims', tuple(
            int(h) for h in self.hidden_dims))
        if self.input_dim < 1 or self.output_dim < 1:
            raise DomainError('input and output sizes must be positive')
        if len(self.hidden_dims) > 3 or any(
                h < 1 for h in self.hidden_dims):
            raise DomainError(
                'at most 3 positive hidden layers, got {}'.format(
                    self.hidden_dims))
        if self.head not in HEADS:
            raise DomainError('Unsupported output head: {}'.format(self.head))
        if self.head == 'sigmoid' and self.output_dim != 1:
            raise DomainError('the sigmoid head is binary (output_dim=1)')

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return (self.input_dim,) + self.hidden_dims + (self.output_dim,)

    def module(self) -> MLP:
        return MLP(feat_dims=self.hidden_dims, out_dim=self.output_dim)

    def to_dict(self) -> Dict[str, Any]:
        return {'input_dim': self.input_dim,
                'hidden_dims': list(self.hidden_dims),
                'output_dim': self.output_dim,
                'head': self.head}

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'Architecture':
        return cls(input_dim=config['input_dim'],
                   hidden_dims=tuple(config['hidden_dims']),
                   output_dim=config.get('output_dim', 1),
                   head=config.get('head', 'sigmoid'))


@struct.dataclass
class MlpModel(object):
    params: Any
    arch: Architecture = struct.field(pytree_node=False)

    @property
    def num_params(self) -> int:
        return int(sum(np.prod(p.shape)
                       for p in jax.tree_util.tree_leaves(self.params)))

    def flat_params(self) -> np.ndarray:
        return flatten_params(self.params)


def init_model(arch: Architecture, seed: int = 0) -> MlpModel:
    """He-uniform kernels and zero biases drawn from the seed."""
    params = arch.module().init(
        random.PRNGKey(seed), jnp.ones([1, arch.input_dim]))
    return MlpModel(params=params, arch=arch)


def model_from_layers(arch: Architecture,
                      layers: Sequence[Tuple[np.ndarray, np.ndarray]]
                      ) -> MlpModel:
    """Build a model from explicit (kernel, bias) pairs, input layer first.

    Kernels have shape (fan_in, fan_out).
    """

    sizes = arch.layer_sizes
    if len(layers) != len(sizes) - 1:
        raise DimensionMismatch('expected {} layers, got {}'.format(
            len(sizes) - 1, len(layers)))
    params = {}
    for i, (kernel, bias) in enumerate(layers):
        kernel = jnp.asarray(kernel, dtype=jnp.float64)
        bias = jnp.asarray(bias, dtype=jnp.float64)
        if kernel.shape != (sizes[i], sizes[i + 1]) or bias.shape != (
                sizes[i + 1],):
            raise DimensionMismatch('layer {} has shapes {} / {}'.format(
                i, kernel.shape, bias.shape))
        params['Dense_{}'.format(i)] = {'kernel': kernel, 'bias': bias}
    return MlpModel(params={'params': params}, arch=arch)


def model_from_flat(arch: Architecture, flat: np.ndarray) -> MlpModel:
    """Inverse of MlpModel.flat_params for the given architecture."""
    template = init_model(arch).params
    num_params, format_params_fn = get_params_format_fn(template)
    flat = jnp.asarray(flat, dtype=jnp.float64)
    if flat.shape != (num_params,):
        raise DimensionMismatch('expected {} parameters, got {}'.format(
            num_params, flat.shape))
    return MlpModel(params=format_params_fn(flat), arch=arch)


def apply_logits(arch: Architecture, params: Any, x: jnp.ndarray):
    """Raw outputs (pre-sigmoid for the binary head)."""
    return arch.module().apply(params, x)


def _check_input(model: MlpModel, x: jnp.ndarray) -> None:
    if jnp.shape(x)[-1] != model.arch.input_dim:
        raise DimensionMismatch('expected input size {}, got {}'.format(
            model.arch.input_dim, jnp.shape(x)[-1]))


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Network output for x of shape (input_dim,) or (N, input_dim).

    The sigmoid head returns probabilities in (0, 1), the linear head
    unconstrained Q-values.
    """

    x = jnp.asarray(x, dtype=jnp.float64)
    _check_input(model, x)
    out = _forward_jit(model.arch, model.params, x)
    return np.asarray(out)


def _forward(arch: Architecture, params: Any, x: jnp.ndarray) -> jnp.ndarray:
    out = apply_logits(arch, params, x)
    if arch.head == 'sigmoid':
        out = nn.sigmoid(out)
    return out


_forward_jit = jax.jit(_forward, static_argnums=0)


def weighted_bce(logits: jnp.ndarray,
                 labels: jnp.ndarray,
                 weights: jnp.ndarray) -> jnp.ndarray:
    """Binary cross-entropy on logits, averaged with sample weights."""
    losses = nn.softplus(logits) - labels * logits
    return jnp.sum(weights * losses) / jnp.sum(weights)


def bce_loss(arch: Architecture,
             params: Any,
             x: jnp.ndarray,
             y: jnp.ndarray,
             w: jnp.ndarray) -> jnp.ndarray:
    return weighted_bce(apply_logits(arch, params, x)[..., 0], y, w)


_loss_and_grad_jit = jax.jit(
    jax.value_and_grad(bce_loss, argnums=1), static_argnums=0)


def loss_and_grad(model: MlpModel,
                  x: np.ndarray,
                  y: np.ndarray) -> Tuple[float, Any]:
    """Mean binary cross-entropy and its gradient w.r.t. the parameters."""

    x = jnp.asarray(x, dtype=jnp.float64)
    y = jnp.asarray(y, dtype=jnp.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0] or (
            x.shape[0] < 1):
        raise DimensionMismatch('need X of shape (N, D) and y of shape (N,)')
    _check_input(model, x)
    if model.arch.head != 'sigmoid':
        raise DomainError('loss_and_grad needs the sigmoid head')
    loss, grads = _loss_and_grad_jit(
        model.arch, model.params, x, y, jnp.ones_like(y))
    return float(loss), grads


def encode_inputs(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """values ++ mask with unacquired values zeroed; works on (..., F)."""
    values = np.asarray(values, dtype=np.float64)
    mask = np.broadcast_to(np.asarray(mask, dtype=np.float64), values.shape)
    return np.concatenate([values * mask, mask], axis=-1)


def predict_proba(model: MlpModel,
                  values: np.ndarray,
                  mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Probability of a correct repetition for standardized (N, F) values."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if mask is None:
        mask = np.ones(values.shape[-1])
    if 2 * values.shape[-1] != model.arch.input_dim:
        raise DimensionMismatch('expected {} features, got {}'.format(
            model.arch.input_dim // 2, values.shape[-1]))
    return forward(model, encode_inputs(values, mask))[:, 0]


def predict(model: MlpModel, fv: FeatureVector) -> Tuple[int, float]:
    """Label (probability >= 0.5 is correct) and probability."""
    prob = float(predict_proba(model, fv.values[None], fv.effective_mask)[0])
    return int(prob >= 0.5), prob


class QPolicy(PolicyNetwork):
    """Greedy policy over legal actions of a Q-network."""

    def __init__(self,
                 arch: Architecture,
                 logger: logging.Logger = None):
        if logger is None:
            self._logger = create_logger(name='QPolicy')
        else:
            self._logger = logger

        self.arch = arch
        self.num_params = init_model(arch).num_params
        self._logger.debug('QPolicy.num_params = {}'.format(self.num_params))
        self._q_fn = jax.jit(functools.partial(apply_logits, arch))

    def action_values(self, obs: jnp.ndarray, params: Any) -> jnp.ndarray:
        return self._q_fn(params, obs)
