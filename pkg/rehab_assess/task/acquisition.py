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

"""Sequential feature acquisition as an episodic decision task.

Actions 0..F-1 acquire one feature at cost c; action F classifies the
instance as incorrect (0) and F+1 as correct (1), ending the episode with
reward +r when right and -p when wrong. The observation is the observed
vector (standardized value where acquired, 0 elsewhere) followed by the
mask bits, the same encoding the quality predictor reads.
"""

import dataclasses
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import jax
import jax.numpy as jnp
import numpy as np
from flax.struct import dataclass

from rehab_assess.errors import DimensionMismatch
from rehab_assess.errors import IllegalAction
from rehab_assess.kinematics import FeatureVector
from rehab_assess.task.base import TaskState
from rehab_assess.task.base import VectorizedTask


@dataclasses.dataclass(frozen=True)
class RewardSpec(object):
    feature_cost: float = 0.05
    misclassification_penalty: float = 1.0
    correct_reward: float = 1.0


@dataclasses.dataclass(frozen=True)
class SelectorAction(object):
    """Acquire(i) or Classify(k)."""

    kind: str
    index: int

    @classmethod
    def acquire(cls, i: int) -> 'SelectorAction':
        return cls('acquire', int(i))

    @classmethod
    def classify(cls, k: int) -> 'SelectorAction':
        return cls('classify', int(k))

    @property
    def is_terminal(self) -> bool:
        return self.kind == 'classify'

    def to_int(self, num_features: int) -> int:
        if self.kind == 'acquire':
            return self.index
        return num_features + self.index

    @classmethod
    def from_int(cls, action: int, num_features: int) -> 'SelectorAction':
        action = int(action)
        if 0 <= action < num_features:
            return cls.acquire(action)
        if action in (num_features, num_features + 1):
            return cls.classify(action - num_features)
        raise IllegalAction('action {} outside [0, {})'.format(
            action, num_features + 2))

    def __str__(self) -> str:
        return '{}:{}'.format(self.kind, self.index)


CLASSIFY0 = SelectorAction.classify(0)
CLASSIFY1 = SelectorAction.classify(1)


@dataclasses.dataclass(frozen=True, eq=False)
class AcquisitionState(object):
    observed: np.ndarray
    mask: np.ndarray

    @classmethod
    def empty(cls, num_features: int) -> 'AcquisitionState':
        return cls(observed=np.zeros(num_features),
                   mask=np.zeros(num_features, dtype=np.int32))

    @property
    def num_features(self) -> int:
        return int(self.mask.shape[0])

    @property
    def budget_used(self) -> int:
        return int(self.mask.sum())

    def encode(self) -> np.ndarray:
        return np.concatenate([self.observed, self.mask.astype(np.float64)])


def legal_actions(s: AcquisitionState) -> List[SelectorAction]:
    """Unacquired features in index order, then Classify0 and Classify1."""
    actions = [SelectorAction.acquire(i)
               for i in np.flatnonzero(s.mask == 0)]
    return actions + [CLASSIFY0, CLASSIFY1]


def legal_mask(mask: np.ndarray) -> np.ndarray:
    """Boolean mask over the F + 2 integer actions."""
    return np.concatenate([np.asarray(mask) == 0, [True, True]])


def transition(s: AcquisitionState,
               a: SelectorAction,
               instance: Tuple[FeatureVector, int],
               rewards: Optional[RewardSpec] = None
               ) -> Tuple[AcquisitionState, float, bool]:
    """Checked single step of the acquisition episode.

    Args:
        s - Current state.
        a - Action; must be legal in s.
        instance - Standardized feature vector and its true label.
        rewards - Reward magnitudes.
    Returns:
        Next state, reward and the termination flag.
    """

    rewards = rewards or RewardSpec()
    fv, truth = instance
    if fv.dim != s.num_features:
        raise DimensionMismatch('instance has {} features, state {}'.format(
            fv.dim, s.num_features))
    if a.kind == 'acquire':
        if not 0 <= a.index < s.num_features or s.mask[a.index]:
            raise IllegalAction('cannot acquire feature {}'.format(a.index))
        mask = s.mask.copy()
        mask[a.index] = 1
        observed = s.observed.copy()
        observed[a.index] = fv.values[a.index]
        return (AcquisitionState(observed=observed, mask=mask),
                -rewards.feature_cost, False)
    if a.kind != 'classify' or a.index not in (0, 1):
        raise IllegalAction('unknown action {}'.format(a))
    if a.index == int(truth):
        return s, rewards.correct_reward, True
    return s, -rewards.misclassification_penalty, True


@dataclasses.dataclass(frozen=True)
class EpisodeTrace(object):
    """States before each action, the actions and their rewards."""

    states: Tuple[AcquisitionState, ...]
    actions: Tuple[SelectorAction, ...]
    rewards: Tuple[float, ...]
    prediction: int
    truth: Optional[int]

    @property
    def total_reward(self) -> float:
        return float(sum(self.rewards))

    @property
    def num_acquired(self) -> int:
        return sum(1 for a in self.actions if a.kind == 'acquire')

    def to_dict(self,
                feature_names: Optional[Sequence[str]] = None
                ) -> Dict[str, Any]:
        final_mask = (self.states[-1].mask.copy() if self.states
                      else np.zeros(0, dtype=np.int32))
        last = self.actions[-1] if self.actions else None
        if last is not None and last.kind == 'acquire':
            final_mask[last.index] = 1

        def name(a: SelectorAction) -> str:
            if a.kind == 'acquire' and feature_names is not None:
                return 'acquire:{}'.format(feature_names[a.index])
            return str(a)

        return {'mask': final_mask.tolist(),
                'actions': [name(a) for a in self.actions],
                'rewards': list(self.rewards),
                'prediction': self.prediction,
                'truth': self.truth}


@dataclass
class State(TaskState):
    obs: jnp.ndarray
    legal: jnp.ndarray
    values: jnp.ndarray
    mask: jnp.ndarray
    label: jnp.ndarray
    prediction: jnp.ndarray


def _make_state(values, mask, label, prediction):
    obs = jnp.concatenate([values * mask, mask], axis=-1)
    legal = jnp.concatenate(
        [mask == 0, jnp.ones(mask.shape[:-1] + (2,), dtype=bool)], axis=-1)
    return State(obs=obs, legal=legal, values=values, mask=mask, label=label,
                 prediction=prediction)


class AcquisitionTask(VectorizedTask):
    """Vectorized acquisition episodes over a fixed set of instances.

    reset() draws one instance uniformly per environment; reset_to() starts
    environments on given instances.
    """

    def __init__(self,
                 values: np.ndarray,
                 labels: np.ndarray,
                 rewards: Optional[RewardSpec] = None):
        values = jnp.asarray(values, dtype=jnp.float64)
        labels = jnp.asarray(labels, dtype=jnp.int32)
        if values.ndim != 2 or labels.shape != (values.shape[0],):
            raise DimensionMismatch('need values (N, F) and labels (N,)')
        rewards = rewards or RewardSpec()
        self.rewards = rewards
        self.num_features = int(values.shape[1])
        self.num_instances = int(values.shape[0])
        self.num_actions = self.num_features + 2
        self.obs_shape = (2 * self.num_features,)
        # Every feature acquired, then one classification.
        self.max_steps = self.num_features + 1
        self.num_starts = self.num_instances
        self._values = values
        self._labels = labels

    def init_state(self, start: jnp.ndarray) -> State:
        return _make_state(self._values[start],
                           jnp.zeros(self.num_features, dtype=jnp.float64),
                           self._labels[start], jnp.int32(-1))

    def step_state(self,
                   state: State,
                   action: jnp.ndarray
                   ) -> Tuple[State, jnp.ndarray, jnp.ndarray]:
        num_features, rewards = self.num_features, self.rewards
        acquire = action < num_features
        onehot = jax.nn.one_hot(action, num_features, dtype=state.mask.dtype)
        mask = jnp.where(acquire, jnp.maximum(state.mask, onehot), state.mask)
        predicted = (action - num_features).astype(jnp.int32)
        terminal_reward = jnp.where(
            predicted == state.label, rewards.correct_reward,
            -rewards.misclassification_penalty)
        reward = jnp.where(acquire, -rewards.feature_cost, terminal_reward)
        done = jnp.where(acquire, 0, 1).astype(jnp.int32)
        prediction = jnp.where(acquire, state.prediction, predicted)
        return (_make_state(state.values, mask, state.label, prediction),
                reward, done)
