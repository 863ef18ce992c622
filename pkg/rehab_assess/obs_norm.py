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

from typing import Dict
from typing import Sequence
from typing import Tuple
from typing import Union

import jax
import jax.numpy as jnp
import numpy as np
from flax import struct

from rehab_assess.errors import DimensionMismatch
from rehab_assess.errors import EmptyTrainingSet
from rehab_assess.errors import NameOrderMismatch
from rehab_assess.kinematics import FeatureVector

STD_MIN_VALUE = 1e-8


@struct.dataclass
class NormParams(object):
    """Per-feature mean and (floored, population) standard deviation."""

    mean: jnp.ndarray
    std: jnp.ndarray
    names: Tuple[str, ...] = struct.field(pytree_node=False, default=())

    def to_dict(self) -> Dict[str, np.ndarray]:
        return {'mean': np.asarray(self.mean), 'std': np.asarray(self.std)}

    @classmethod
    def from_dict(cls,
                  obs_params: Dict[str, np.ndarray],
                  names: Sequence[str] = ()) -> 'NormParams':
        return cls(mean=jnp.asarray(obs_params['mean'], dtype=jnp.float64),
                   std=jnp.asarray(obs_params['std'], dtype=jnp.float64),
                   names=tuple(names))


@jax.jit
def normalize(obs: jnp.ndarray,
              mean: jnp.ndarray,
              std: jnp.ndarray) -> jnp.ndarray:
    """Standardize observations of shape (..., F)."""
    return (obs - mean) / std


def fit_zscore_matrix(values: np.ndarray,
                      names: Sequence[str] = (),
                      std_min_value: float = STD_MIN_VALUE) -> NormParams:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise EmptyTrainingSet('cannot fit normalization on zero samples')
    std = np.maximum(values.std(axis=0), std_min_value)
    return NormParams(mean=jnp.asarray(values.mean(axis=0)),
                      std=jnp.asarray(std), names=tuple(names))


def fit_zscore(train: Sequence[FeatureVector],
               std_min_value: float = STD_MIN_VALUE) -> NormParams:
    """Fit per-feature z-score parameters on raw feature vectors."""
    if not train:
        raise EmptyTrainingSet('cannot fit normalization on zero samples')
    names = train[0].names
    for fv in train[1:]:
        if fv.names != names:
            raise NameOrderMismatch('feature vectors disagree on names')
    return fit_zscore_matrix(
        np.stack([fv.values for fv in train]), names, std_min_value)


def apply_zscore(params: NormParams,
                 fv: Union[FeatureVector, np.ndarray]
                 ) -> Union[FeatureVector, np.ndarray]:
    """Standardize a FeatureVector (mask kept) or a raw (..., F) array."""

    if isinstance(fv, FeatureVector):
        if params.names and fv.names != params.names:
            raise NameOrderMismatch('feature names differ from the fit')
        if fv.dim != params.mean.shape[0]:
            raise DimensionMismatch('expected {} features, got {}'.format(
                params.mean.shape[0], fv.dim))
        values = np.asarray(normalize(fv.values, params.mean, params.std))
        return FeatureVector(fv.names, values, fv.mask)
    values = np.asarray(fv, dtype=np.float64)
    if values.shape[-1] != params.mean.shape[0]:
        raise DimensionMismatch('expected {} features, got {}'.format(
            params.mean.shape[0], values.shape[-1]))
    return np.asarray(normalize(values, params.mean, params.std))
