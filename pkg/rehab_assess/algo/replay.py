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

import numpy as np


class ReplayBuffer(object):
    """Fixed-capacity ring buffer with uniform sampling."""

    def __init__(self,
                 capacity: int,
                 obs_dim: int,
                 num_actions: int,
                 seed: int = 0):
        self.capacity = capacity
        self._obs = np.zeros((capacity, obs_dim))
        self._actions = np.zeros(capacity, dtype=np.int32)
        self._rewards = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_dim))
        self._next_legal = np.zeros((capacity, num_actions), dtype=bool)
        self._dones = np.zeros(capacity)
        self._cursor = 0
        self._size = 0
        self._rnd = np.random.RandomState(seed)

    def __len__(self) -> int:
        return self._size

    def add(self,
            obs: np.ndarray,
            actions: np.ndarray,
            rewards: np.ndarray,
            next_obs: np.ndarray,
            next_legal: np.ndarray,
            dones: np.ndarray) -> None:
        """Append a batch of transitions, overwriting the oldest."""
        for i in range(len(actions)):
            c = self._cursor
            self._obs[c] = obs[i]
            self._actions[c] = actions[i]
            self._rewards[c] = rewards[i]
            self._next_obs[c] = next_obs[i]
            self._next_legal[c] = next_legal[i]
            self._dones[c] = dones[i]
            self._cursor = (c + 1) % self.capacity
            self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int) -> Dict[str, np.ndarray]:
        idx = self._rnd.randint(0, self._size, size=batch_size)
        return {'obs': self._obs[idx],
                'actions': self._actions[idx],
                'rewards': self._rewards[idx],
                'next_obs': self._next_obs[idx],
                'next_legal': self._next_legal[idx],
                'dones': self._dones[idx]}
