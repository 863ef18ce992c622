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

"""Adam with standard bias correction over arbitrary parameter pytrees."""

from typing import Any
from typing import Tuple

import jax
import jax.numpy as jnp
from flax import struct
from jax import tree_util

from rehab_assess.errors import ShapeMismatch

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@struct.dataclass
class AdamState(object):
    """First/second moment accumulators shaped like the parameters."""

    m: Any
    v: Any
    step: jnp.ndarray


def adam_init(params: Any) -> AdamState:
    zeros = tree_util.tree_map(jnp.zeros_like, params)
    return AdamState(m=zeros, v=zeros, step=jnp.zeros((), dtype=jnp.int32))


def adam_update(params: Any,
                grads: Any,
                state: AdamState,
                lr: float,
                b1: float = BETA1,
                b2: float = BETA2,
                eps: float = EPSILON) -> Tuple[Any, AdamState]:
    """One Adam step; traceable, no shape checks."""

    step = state.step + 1
    m = tree_util.tree_map(
        lambda m, g: b1 * m + (1. - b1) * g, state.m, grads)
    v = tree_util.tree_map(
        lambda v, g: b2 * v + (1. - b2) * jnp.square(g), state.v, grads)
    t = step.astype(jnp.float64)
    m_correction = 1. - jnp.power(b1, t)
    v_correction = 1. - jnp.power(b2, t)
    params = tree_util.tree_map(
        lambda p, m, v: p - lr * (m / m_correction) / (
            jnp.sqrt(v / v_correction) + eps),
        params, m, v)
    return params, AdamState(m=m, v=v, step=step)


_adam_update_jit = jax.jit(adam_update)


def adam_step(params: Any,
              grads: Any,
              state: AdamState,
              lr: float) -> Tuple[Any, AdamState]:
    """Checked Adam step.

    Args:
        params - Parameter pytree.
        grads - Gradients with the structure and shapes of params.
        state - Optimizer state from adam_init or a previous step.
        lr - Learning rate.
    Returns:
        Updated parameters and optimizer state (step incremented).
    """

    p_leaves, p_tree = tree_util.tree_flatten(params)
    g_leaves, g_tree = tree_util.tree_flatten(grads)
    m_leaves, m_tree = tree_util.tree_flatten(state.m)
    if p_tree != g_tree or p_tree != m_tree:
        raise ShapeMismatch('gradient/state structure differs from params')
    for p, g, m in zip(p_leaves, g_leaves, m_leaves):
        if jnp.shape(p) != jnp.shape(g) or jnp.shape(p) != jnp.shape(m):
            raise ShapeMismatch('shape mismatch: params {}, grads {}'.format(
                jnp.shape(p), jnp.shape(g)))
    return _adam_update_jit(params, grads, state, lr)
