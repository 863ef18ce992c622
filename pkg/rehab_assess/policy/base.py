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


from abc import ABC
from abc import abstractmethod
from typing import Any
from typing import Tuple

import jax.numpy as jnp
from flax.struct import dataclass

from rehab_assess.task.base import TaskState


def masked_argmax(values: jnp.ndarray, legal: jnp.ndarray) -> jnp.ndarray:
    """Index of the largest value among legal entries of the last axis."""
    return jnp.argmax(jnp.where(legal, values, -jnp.inf), axis=-1)


@dataclass
class PolicyState(object):
    """Decisions taken so far in each environment."""

    steps: jnp.ndarray


class PolicyNetwork(ABC):
    """Greedy policy over a state-dependent set of legal actions.

    Subclasses score every action; the legal action with the highest score
    is taken.
    """

    num_params: int

    def reset(self, states: TaskState) -> PolicyState:
        return PolicyState(
            steps=jnp.zeros(states.obs.shape[0], dtype=jnp.int32))

    @abstractmethod
    def action_values(self, obs: jnp.ndarray, params: Any) -> jnp.ndarray:
        """Scores of shape (num_tasks, num_actions)."""
        raise NotImplementedError()

    def get_actions(self,
                    t_states: TaskState,
                    params: Any,
                    p_states: PolicyState) -> Tuple[jnp.ndarray, PolicyState]:
        """Get vectorized actions.

        Args:
            t_states - Task states; t_states.legal masks the actions.
            params - Network parameters shared by every environment.
            p_states - Policy internal states.
        Returns:
            jnp.ndarray. Integer actions, shape (num_tasks,).
            PolicyState. Internal states.
        """
        actions = masked_argmax(
            self.action_values(t_states.obs, params), t_states.legal)
        return actions, PolicyState(steps=p_states.steps + 1)
