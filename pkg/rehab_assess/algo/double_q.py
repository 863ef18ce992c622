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

"""Double Q-learning with uniform experience replay.

The online network picks the next action and the target network values it;
the target is a periodic hard copy of the online network. Actions are
restricted to each state's legal set, both when acting and in the targets.
"""

import dataclasses
import logging
import time
from functools import partial
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import jax
import jax.numpy as jnp
import numpy as np
from jax import random
from jax.tree_util import tree_map

from rehab_assess.algo.adam import adam_init
from rehab_assess.algo.adam import adam_update
from rehab_assess.algo.replay import ReplayBuffer
from rehab_assess.errors import ConfigError
from rehab_assess.errors import DimensionMismatch
from rehab_assess.kinematics import FeatureVector
from rehab_assess.policy.base import masked_argmax
from rehab_assess.policy.mlp import Architecture
from rehab_assess.policy.mlp import MlpModel
from rehab_assess.policy.mlp import QPolicy
from rehab_assess.policy.mlp import apply_logits
from rehab_assess.policy.mlp import forward
from rehab_assess.policy.mlp import init_model
from rehab_assess.sim_mgr import SimManager
from rehab_assess.task.acquisition import AcquisitionState
from rehab_assess.task.acquisition import AcquisitionTask
from rehab_assess.task.acquisition import EpisodeTrace
from rehab_assess.task.acquisition import RewardSpec
from rehab_assess.task.acquisition import SelectorAction
from rehab_assess.task.acquisition import legal_mask
from rehab_assess.task.acquisition import transition
from rehab_assess.task.base import VectorizedTask
from rehab_assess.trainer import check_labels
from rehab_assess.trainer import stratified_split
from rehab_assess.util import create_logger

DEFAULT_Q_HIDDEN = (64,)


@dataclasses.dataclass(frozen=True)
class RlConfig(object):
    """Rewards, exploration and replay settings of the selector.

    q_hidden fixes the Q-network hidden layers; when None the predictor's
    selected architecture is used, or the best of q_hidden_grid by mean
    validation reward when that grid is non-empty.
    """

    feature_cost: float = 0.05
    misclassification_penalty: float = 1.0
    correct_reward: float = 1.0
    gamma: float = 1.0
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_fraction: float = 0.5
    buffer_size: int = 10000
    batch_size: int = 64
    target_sync: int = 200
    episodes: int = 4000
    n_envs: int = 16
    updates_per_step: int = 4
    learning_rate: float = 0.001
    q_hidden: Optional[Tuple[int, ...]] = None
    q_hidden_grid: Tuple[Tuple[int, ...], ...] = ()
    val_fraction: float = 0.2
    log_interval: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.q_hidden is not None:
            object.__setattr__(self, 'q_hidden', tuple(self.q_hidden))
        object.__setattr__(self, 'q_hidden_grid', tuple(
            tuple(h) for h in self.q_hidden_grid))
        if self.feature_cost <= 0:
            raise ConfigError('rl.feature_cost must be positive')
        if self.misclassification_penalty <= 0 or self.correct_reward <= 0:
            raise ConfigError('rl rewards must be positive')
        if not 0. < self.gamma <= 1.:
            raise ConfigError('rl.gamma must lie in (0, 1]')
        if not 0. <= self.eps_end <= self.eps_start <= 1.:
            raise ConfigError('rl needs 0 <= eps_end <= eps_start <= 1')
        if not 0. < self.eps_decay_fraction <= 1.:
            raise ConfigError('rl.eps_decay_fraction must lie in (0, 1]')
        for key in ('buffer_size', 'batch_size', 'target_sync', 'episodes',
                    'n_envs', 'updates_per_step', 'log_interval'):
            if getattr(self, key) < 1:
                raise ConfigError('rl.{} must be positive'.format(key))
        if self.learning_rate <= 0:
            raise ConfigError('rl.learning_rate must be positive')

    @property
    def rewards(self) -> RewardSpec:
        return RewardSpec(
            feature_cost=self.feature_cost,
            misclassification_penalty=self.misclassification_penalty,
            correct_reward=self.correct_reward)

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'RlConfig':
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        out = dataclasses.asdict(self)
        out['q_hidden'] = (None if self.q_hidden is None
                           else list(self.q_hidden))
        out['q_hidden_grid'] = [list(h) for h in self.q_hidden_grid]
        return out


def double_q_target(reward: jnp.ndarray,
                    next_q_online: jnp.ndarray,
                    next_q_target: jnp.ndarray,
                    done: jnp.ndarray,
                    gamma: float,
                    next_legal: Optional[jnp.ndarray] = None) -> jnp.ndarray:
    """r + gamma * Q_target(s', argmax over legal a of Q_online(s', a)).

    Reduces to r when done. Works on single transitions or batches.
    """

    next_q_online = jnp.asarray(next_q_online)
    next_q_target = jnp.asarray(next_q_target)
    if next_legal is None:
        next_legal = jnp.ones(next_q_online.shape, dtype=bool)
    next_legal = jnp.asarray(next_legal)
    best = masked_argmax(next_q_online, next_legal)
    value = jnp.take_along_axis(
        next_q_target, best[..., None], axis=-1)[..., 0]
    done = jnp.asarray(done) > 0
    return reward + gamma * jnp.where(done, 0., value)


def _td_update(arch: Architecture,
               online: Any,
               target: Any,
               opt_state: Any,
               batch: Dict[str, jnp.ndarray],
               lr: float,
               gamma: float):

    def loss_fn(params):
        q = apply_logits(arch, params, batch['obs'])
        q_taken = jnp.take_along_axis(
            q, batch['actions'][:, None], axis=-1)[:, 0]
        next_online = jax.lax.stop_gradient(
            apply_logits(arch, params, batch['next_obs']))
        next_target = apply_logits(arch, target, batch['next_obs'])
        y = double_q_target(batch['rewards'], next_online, next_target,
                            batch['dones'], gamma, batch['next_legal'])
        return jnp.mean(jnp.square(q_taken - jax.lax.stop_gradient(y)))

    loss, grads = jax.value_and_grad(loss_fn)(online)
    online, opt_state = adam_update(online, grads, opt_state, lr)
    return online, opt_state, loss


@dataclasses.dataclass(frozen=True)
class SelectorModel(object):
    """Trained online network and its frozen target copy."""

    online: MlpModel
    target: MlpModel
    rewards: RewardSpec

    @property
    def num_features(self) -> int:
        return self.online.arch.output_dim - 2


class DoubleQLearner(object):
    """Epsilon-greedy Double Q-learning over any VectorizedTask."""

    def __init__(self,
                 task: VectorizedTask,
                 hidden_dims: Sequence[int],
                 cfg: RlConfig,
                 logger: logging.Logger = None):
        """Initialization.

        Args:
            task - Training task; its reset() is called with one key per
                   environment.
            hidden_dims - Q-network hidden layer sizes.
            cfg - Learning settings.
            logger - Logger.
        """

        if logger is None:
            self._logger = create_logger(name='DoubleQLearner')
        else:
            self._logger = logger

        self.task = task
        self.cfg = cfg
        self.arch = Architecture(
            input_dim=int(np.prod(task.obs_shape)),
            hidden_dims=tuple(hidden_dims),
            output_dim=task.num_actions, head='linear')
        self.online_params = init_model(self.arch, cfg.seed).params
        self.target_params = self.online_params
        self._opt_state = adam_init(self.online_params)
        self._buffer = ReplayBuffer(
            cfg.buffer_size, self.arch.input_dim, task.num_actions, cfg.seed)
        self._rnd = np.random.RandomState(cfg.seed)
        self._key = random.PRNGKey(cfg.seed)
        self._q_fn = jax.jit(partial(apply_logits, self.arch))
        self._update_fn = jax.jit(partial(_td_update, self.arch))
        self.num_updates = 0
        self.losses: List[float] = []

    def epsilon(self, episodes_done: int) -> float:
        """Linear decay from eps_start to eps_end, then constant."""
        decay_episodes = self.cfg.eps_decay_fraction * self.cfg.episodes
        frac = min(1., episodes_done / max(decay_episodes, 1.))
        return self.cfg.eps_start + frac * (
            self.cfg.eps_end - self.cfg.eps_start)

    def _reset(self, n_envs: int):
        self._key, subkey = random.split(self._key)
        return self.task.reset(random.split(subkey, n_envs))

    def _select_actions(self, state, eps: float) -> np.ndarray:
        legal = np.asarray(state.legal)
        q_values = np.asarray(self._q_fn(self.online_params, state.obs))
        greedy = np.asarray(masked_argmax(q_values, legal))
        explore_scores = np.where(
            legal, self._rnd.rand(*legal.shape), -1.)
        explore = np.argmax(explore_scores, axis=-1)
        use_random = self._rnd.rand(legal.shape[0]) < eps
        return np.where(use_random, explore, greedy).astype(np.int32)

    def _learn(self) -> None:
        for _ in range(self.cfg.updates_per_step):
            batch = {k: jnp.asarray(v) for k, v in
                     self._buffer.sample(self.cfg.batch_size).items()}
            self.online_params, self._opt_state, loss = self._update_fn(
                self.online_params, self.target_params, self._opt_state,
                batch, self.cfg.learning_rate, self.cfg.gamma)
            self.num_updates += 1
            self.losses.append(float(loss))
            if self.num_updates % self.cfg.target_sync == 0:
                self.target_params = self.online_params

    def train(self) -> 'DoubleQLearner':
        """Run cfg.episodes episodes; finished environments restart."""

        cfg = self.cfg
        start_time = time.perf_counter()
        n_envs = cfg.n_envs
        state = self._reset(n_envs)
        episodes_done = 0
        returns = np.zeros(n_envs)
        finished_returns = []
        next_log = cfg.log_interval
        while episodes_done < cfg.episodes:
            actions = self._select_actions(state, self.epsilon(episodes_done))
            next_state, reward, done = self.task.step(
                state, jnp.asarray(actions))
            reward = np.asarray(reward)
            done = np.asarray(done)
            self._buffer.add(
                obs=np.asarray(state.obs), actions=actions, rewards=reward,
                next_obs=np.asarray(next_state.obs),
                next_legal=np.asarray(next_state.legal), dones=done)
            returns += reward
            if done.any():
                finished = np.flatnonzero(done)
                finished_returns.extend(returns[finished].tolist())
                returns[finished] = 0.
                episodes_done += int(finished.size)
                fresh = self._reset(n_envs)
                keep_old = jnp.asarray(done == 0)
                state = tree_map(
                    lambda old, new: jnp.where(
                        keep_old.reshape(
                            keep_old.shape + (1,) * (old.ndim - 1)),
                        old, new),
                    next_state, fresh)
            else:
                state = next_state
            if len(self._buffer) >= cfg.batch_size:
                self._learn()
            if episodes_done >= next_log:
                recent = finished_returns[-cfg.log_interval:]
                self._logger.info(
                    'Episodes={0}, eps={1:.3f}, updates={2}, '
                    'avg_return={3:.4f}, loss={4:.4f}'.format(
                        episodes_done, self.epsilon(episodes_done),
                        self.num_updates, float(np.mean(recent)),
                        float(np.mean(self.losses[-50:]))
                        if self.losses else float('nan')))
                next_log += cfg.log_interval
        self._logger.debug('Double-Q training time: {0:.2f}s'.format(
            time.perf_counter() - start_time))
        return self

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        return np.asarray(self._q_fn(self.online_params, jnp.asarray(obs)))

    def greedy_actions(self, obs: np.ndarray, legal: np.ndarray) -> np.ndarray:
        return np.asarray(masked_argmax(self.q_values(obs), legal))

    def model(self, rewards: Optional[RewardSpec] = None) -> SelectorModel:
        return SelectorModel(
            online=MlpModel(params=self.online_params, arch=self.arch),
            target=MlpModel(params=self.target_params, arch=self.arch),
            rewards=rewards or self.cfg.rewards)


def evaluate_selector(selector: SelectorModel,
                      values: np.ndarray,
                      labels: np.ndarray,
                      logger: logging.Logger = None
                      ) -> Dict[str, np.ndarray]:
    """Batched greedy rollouts, one per instance.

    Returns:
        Per-instance 'returns', 'predictions', 'masks' and 'lengths'.
    """

    task = AcquisitionTask(values, labels, selector.rewards)
    if task.num_actions != selector.online.arch.output_dim:
        raise DimensionMismatch('selector expects {} features, got {}'.format(
            selector.num_features, task.num_features))
    sim_mgr = SimManager(
        policy_net=QPolicy(selector.online.arch, logger=logger),
        vec_task=task, logger=logger)
    scores, final_state, lengths = sim_mgr.eval_params(
        selector.online.params, task.reset_to(np.arange(len(labels))))
    return {'returns': np.asarray(scores),
            'predictions': np.asarray(final_state.prediction),
            'masks': np.asarray(final_state.mask).astype(np.int32),
            'lengths': np.asarray(lengths).astype(np.int32)}


def _fit_learner(values, labels, hidden_dims, cfg, logger):
    task = AcquisitionTask(values, labels, cfg.rewards)
    learner = DoubleQLearner(task, hidden_dims, cfg, logger=logger)
    return learner.train().model()


def train_selector(values: np.ndarray,
                   labels: np.ndarray,
                   cfg: RlConfig,
                   hidden_dims: Optional[Sequence[int]] = None,
                   logger: logging.Logger = None) -> SelectorModel:
    """Train the acquisition policy on standardized features.

    Args:
        values - Standardized training features, shape (N, F).
        labels - Binary labels, shape (N,).
        cfg - Learning settings.
        hidden_dims - Predictor architecture, used when cfg.q_hidden is unset
                      and cfg.q_hidden_grid is empty.
        logger - Logger.
    """

    if logger is None:
        logger = create_logger(name='DoubleQLearner')
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    check_labels(labels)

    if cfg.q_hidden is not None:
        q_hidden = cfg.q_hidden
    elif cfg.q_hidden_grid:
        train_idx, val_idx = stratified_split(
            labels, cfg.val_fraction, cfg.seed)
        rewards = []
        for candidate in cfg.q_hidden_grid:
            selector = _fit_learner(values[train_idx], labels[train_idx],
                                    candidate, cfg, logger)
            result = evaluate_selector(
                selector, values[val_idx], labels[val_idx], logger)
            rewards.append(float(result['returns'].mean()))
            logger.info('Q-net hidden={0}, val_reward={1:.4f}'.format(
                candidate, rewards[-1]))
        q_hidden = cfg.q_hidden_grid[int(np.argmax(rewards))]
    elif hidden_dims is not None:
        q_hidden = tuple(hidden_dims)
    else:
        q_hidden = DEFAULT_Q_HIDDEN
    return _fit_learner(values, labels, q_hidden, cfg, logger)


def select_and_classify(selector: SelectorModel,
                        fv: FeatureVector,
                        truth: Optional[int] = None
                        ) -> Tuple[np.ndarray, int, EpisodeTrace]:
    """Greedy acquisition episode for one standardized instance.

    Without a truth label the terminal reward is recorded as 0.

    Returns:
        The acquisition mask, the predicted label and the episode trace.
    """

    num_features = selector.num_features
    if fv.dim != num_features:
        raise DimensionMismatch('selector expects {} features, got {}'.format(
            num_features, fv.dim))
    state = AcquisitionState.empty(num_features)
    states, actions, rewards = [], [], []
    # Every step either acquires a new feature or ends the episode.
    for _ in range(num_features + 1):
        q_values = forward(selector.online, state.encode())
        legal = legal_mask(state.mask)
        action = SelectorAction.from_int(
            int(masked_argmax(q_values, legal)), num_features)
        states.append(state)
        actions.append(action)
        if action.is_terminal:
            if truth is None:
                rewards.append(0.)
            else:
                _, reward, _ = transition(
                    state, action, (fv, truth), selector.rewards)
                rewards.append(float(reward))
            break
        state, reward, _ = transition(
            state, action, (fv, 0 if truth is None else truth),
            selector.rewards)
        rewards.append(float(reward))
    trace = EpisodeTrace(states=tuple(states), actions=tuple(actions),
                         rewards=tuple(rewards),
                         prediction=actions[-1].index, truth=truth)
    return state.mask.copy(), actions[-1].index, trace
