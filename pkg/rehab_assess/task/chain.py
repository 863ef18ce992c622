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

"""Deterministic chain task with known optimal values.

States 0..n-1 are observed one-hot. Action 0 advances to the next state at
a cost, action 1 stops and collects the state's payoff. Advancing from the
last state is illegal. Episodes start in a uniformly drawn state.
"""

from typing import Sequence
from typing import Tuple

import jax
import jax.numpy as jnp
import numpy as np
from flax.struct import dataclass

from rehab_assess.errors import DomainError
from rehab_assess.task.base import TaskState
from rehab_assess.task.base import VectorizedTask

ADVANCE = 0
STOP = 1


@dataclass
class State(TaskState):
    obs: jnp.ndarray
    legal: jnp.ndarray
    position: jnp.ndarray


class ChainTask(VectorizedTask):

    def __init__(self,
                 stop_values: Sequence[float] = (0., 0.6, 0.1, 0.2, 0.45),
                 advance_cost: float = 0.1):
        if len(stop_values) < 2:
            raise DomainError('the chain needs at least two states')
        self.stop_values = np.asarray(stop_values, dtype=np.float64)
        self.advance_cost = float(advance_cost)
        n_states = len(stop_values)
        self.n_states = n_states
        self.num_actions = 2
        self.obs_shape = (n_states,)
        self.max_steps = n_states
        self.num_starts = n_states
        self._payoff = jnp.asarray(self.stop_values)

    def init_state(self, start: jnp.ndarray) -> State:
        obs = jax.nn.one_hot(start, self.n_states, dtype=jnp.float64)
        legal = jnp.array([True, True]).at[ADVANCE].set(
            start < self.n_states - 1)
        return State(obs=obs, legal=legal, position=start)

    def step_state(self,
                   state: State,
                   action: jnp.ndarray
                   ) -> Tuple[State, jnp.ndarray, jnp.ndarray]:
        stop = action == STOP
        reward = jnp.where(
            stop, self._payoff[state.position], -self.advance_cost)
        position = jnp.where(
            stop, state.position,
            jnp.minimum(state.position + 1, self.n_states - 1))
        return self.init_state(position), reward, stop.astype(jnp.int32)

    def optimal_q(self) -> np.ndarray:
        """Value iteration; illegal actions are -inf."""
        n_states = self.n_states
        q = np.full((n_states, 2), -np.inf)
        value = np.zeros(n_states)
        for s in reversed(range(n_states)):
            q[s, STOP] = self.stop_values[s]
            if s < n_states - 1:
                q[s, ADVANCE] = -self.advance_cost + value[s + 1]
            value[s] = q[s].max()
        return q
