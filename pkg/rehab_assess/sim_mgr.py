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

import logging
import time
from typing import Any
from typing import Tuple

import jax
import jax.numpy as jnp
from jax.tree_util import tree_map

from rehab_assess.policy.base import PolicyNetwork
from rehab_assess.task.base import TaskState
from rehab_assess.task.base import VectorizedTask
from rehab_assess.util import create_logger


@jax.jit
def update_score_and_mask(score, reward, mask, done):
    new_score = score + reward * mask
    new_mask = mask * (1 - done.ravel())
    return new_score, new_mask


@jax.jit
def all_done(masks):
    return masks.sum() == 0


@jax.jit
def freeze_finished(new_state: TaskState,
                    old_state: TaskState,
                    mask: jnp.ndarray) -> TaskState:
    """Keep the old state wherever an episode had already ended."""

    def select(new, old):
        keep = mask.reshape(mask.shape + (1,) * (new.ndim - 1)) > 0
        return jnp.where(keep, new, old)

    return tree_map(select, new_state, old_state)


class SimManager(object):
    """Runs batched episodes of a policy until every environment is done."""

    def __init__(self,
                 policy_net: PolicyNetwork,
                 vec_task: VectorizedTask,
                 logger: logging.Logger = None):
        """Initialization function.

        Args:
            policy_net - Policy network.
            vec_task - Vectorized task to roll out.
            logger - Logger.
        """

        if logger is None:
            self._logger = create_logger(name='SimManager')
        else:
            self._logger = logger

        self._policy_reset_fn = policy_net.reset
        self._policy_act_fn = policy_net.get_actions
        self._task_step_fn = vec_task.step
        self._max_steps = vec_task.max_steps

    def eval_params(self,
                    params: Any,
                    task_state: TaskState
                    ) -> Tuple[jnp.ndarray, TaskState, jnp.ndarray]:
        """Roll out from the given initial states.

        Args:
            params - Network parameters shared by all environments.
            task_state - Batched initial task states.
        Returns:
            Episode returns, terminal states and episode lengths.
        """

        policy_state = self._policy_reset_fn(task_state)
        n_envs = task_state.obs.shape[0]
        scores = jnp.zeros(n_envs)
        valid_mask = jnp.ones(n_envs)
        sim_steps = jnp.zeros(n_envs)
        start_time = time.perf_counter()
        rollout_steps = 0
        for _ in range(self._max_steps):
            actions, policy_state = self._policy_act_fn(
                task_state, params, policy_state)
            next_state, reward, done = self._task_step_fn(task_state, actions)
            task_state = freeze_finished(next_state, task_state, valid_mask)
            sim_steps = sim_steps + valid_mask
            scores, valid_mask = update_score_and_mask(
                scores, reward, valid_mask, done)
            rollout_steps += 1
            if all_done(valid_mask):
                break
        time_cost = time.perf_counter() - start_time
        self._logger.debug('{} steps/s, mean.steps={}'.format(
            int(rollout_steps * n_envs / max(time_cost, 1e-9)),
            float(sim_steps.sum()) / n_envs))
        return scores, task_state, sim_steps
