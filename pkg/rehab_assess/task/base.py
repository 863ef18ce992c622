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


"""Batched episodic tasks with a discrete, state-dependent action set."""

import functools
from abc import ABC
from abc import abstractmethod
from typing import Callable
from typing import Tuple

import jax
import jax.numpy as jnp
import numpy as np
from jax import random


class TaskState(ABC):
    """A template of the task state.

    obs - Observations, shape (num_tasks, *obs_shape).
    legal - Boolean action masks, shape (num_tasks, num_actions).
    """

    obs: jnp.ndarray
    legal: jnp.ndarray


class VectorizedTask(ABC):
    """Interface of episodic tasks run in many environments at once.

    A subclass describes a single environment with init_state() and
    step_state(); the batched reset(), reset_to() and step() vmap and jit
    them. Episodes start from one of num_starts start indices.
    """

    max_steps: int
    obs_shape: Tuple
    num_actions: int
    num_starts: int

    @abstractmethod
    def init_state(self, start: jnp.ndarray) -> TaskState:
        """State of one environment at a start index."""
        raise NotImplementedError()

    @abstractmethod
    def step_state(self,
                   state: TaskState,
                   action: jnp.ndarray
                   ) -> Tuple[TaskState, jnp.ndarray, jnp.ndarray]:
        """Advance one environment; returns state, reward and done (0/1)."""
        raise NotImplementedError()

    @functools.cached_property
    def _batched(self) -> Tuple[Callable, Callable, Callable]:

        def reset_fn(key):
            return self.init_state(
                random.randint(key, (), 0, self.num_starts))

        return (jax.jit(jax.vmap(self.init_state)),
                jax.jit(jax.vmap(reset_fn)),
                jax.jit(jax.vmap(self.step_state)))

    def reset(self, key: jnp.ndarray) -> TaskState:
        """This resets the vectorized task.

        Args:
            key - Random keys, shape (num_tasks, 2); each environment draws
                  its start index uniformly.
        Returns:
            TaskState. Initial task state.
        """
        return self._batched[1](key)

    def reset_to(self, starts: np.ndarray) -> TaskState:
        """Start one environment per given start index."""
        return self._batched[0](jnp.asarray(starts, dtype=jnp.int32))

    def step(self,
             state: TaskState,
             action: jnp.ndarray) -> Tuple[TaskState, jnp.ndarray, jnp.ndarray]:
        """This steps once the simulation.

        Args:
            state - System internal states of shape (num_tasks, *).
            action - Integer actions of shape (num_tasks,); must be legal.
        Returns:
            TaskState. Task states.
            jnp.ndarray. Reward.
            jnp.ndarray. Task termination flag: 1 for done, 0 otherwise.
        """
        return self._batched[2](state, action)
