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

import concurrent.futures
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

from rehab_assess.algo.adam import adam_init
from rehab_assess.algo.adam import adam_update
from rehab_assess.errors import ConfigError
from rehab_assess.errors import DegenerateLabels
from rehab_assess.errors import DimensionMismatch
from rehab_assess.metrics import f1_score
from rehab_assess.policy.mlp import Architecture
from rehab_assess.policy.mlp import MlpModel
from rehab_assess.policy.mlp import bce_loss
from rehab_assess.policy.mlp import init_model
from rehab_assess.policy.mlp import predict_proba
from rehab_assess.util import create_logger

MIN_BUCKET = 16


@dataclasses.dataclass(frozen=True)
class TrainConfig(object):
    """Predictor grid search settings.

    Every depth in `depths` is combined with every width in `hidden_widths`
    (one width for all hidden layers), then with every learning rate.
    """

    hidden_widths: Tuple[int, ...] = (32, 64, 128, 256, 512)
    depths: Tuple[int, ...] = (1, 2, 3)
    learning_rates: Tuple[float, ...] = (0.0001, 0.005, 0.001, 0.01, 0.1)
    tol: float = 0.0001
    max_iter: int = 200
    val_fraction: float = 0.2
    mask_dropout: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for key in ('hidden_widths', 'depths', 'learning_rates'):
            object.__setattr__(self, key, tuple(getattr(self, key)))
            if not getattr(self, key):
                raise ConfigError('train.{} must not be empty'.format(key))
        if any(d not in (1, 2, 3) for d in self.depths):
            raise ConfigError('train.depths must be within 1..3')
        if any(w < 1 for w in self.hidden_widths):
            raise ConfigError('train.hidden_widths must be positive')
        if any(lr <= 0 for lr in self.learning_rates):
            raise ConfigError('train.learning_rates must be positive')
        if self.tol <= 0:
            raise ConfigError('train.tol must be positive')
        if self.max_iter < 1:
            raise ConfigError('train.max_iter must be positive')
        if not 0. < self.val_fraction < 1.:
            raise ConfigError('train.val_fraction must lie in (0, 1)')
        if not 0. <= self.mask_dropout < 1.:
            raise ConfigError('train.mask_dropout must lie in [0, 1)')

    @property
    def hidden_grid(self) -> List[Tuple[int, ...]]:
        return [(w,) * d for d in self.depths for w in self.hidden_widths]

    @property
    def grid(self) -> List[Tuple[Tuple[int, ...], float]]:
        return [(h, lr) for h in self.hidden_grid
                for lr in self.learning_rates]

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'TrainConfig':
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        out = dataclasses.asdict(self)
        for key in ('hidden_widths', 'depths', 'learning_rates'):
            out[key] = list(out[key])
        return out


@dataclasses.dataclass(frozen=True)
class GridCell(object):
    hidden_dims: Tuple[int, ...]
    learning_rate: float
    val_f1: float
    n_iter: int
    final_loss: float

    def to_dict(self) -> Dict[str, Any]:
        return {'hidden_dims': list(self.hidden_dims),
                'learning_rate': self.learning_rate,
                'val_f1': self.val_f1,
                'n_iter': self.n_iter,
                'final_loss': self.final_loss}


@dataclasses.dataclass(frozen=True)
class GridReport(object):
    """Every grid cell in grid order and the index of the selected one."""

    cells: Tuple[GridCell, ...]
    best_index: int

    @property
    def best(self) -> GridCell:
        return self.cells[self.best_index]

    def to_dict(self) -> Dict[str, Any]:
        return {'cells': [c.to_dict() for c in self.cells],
                'best_index': self.best_index}


def check_labels(labels: np.ndarray) -> None:
    classes = set(np.unique(labels).tolist())
    if not classes <= {0, 1}:
        raise DegenerateLabels('labels must be binary, got {}'.format(
            sorted(classes)))
    if len(classes) < 2:
        raise DegenerateLabels(
            'both classes are required, only {} present'.format(
                sorted(classes)))


def stratified_split(labels: np.ndarray,
                     val_fraction: float,
                     seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded per-class split into (train, validation) row indices."""

    rnd = np.random.RandomState(seed)
    train_idx, val_idx = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rnd.permutation(idx.size)]
        n_val = int(round(val_fraction * idx.size))
        if idx.size >= 2:
            n_val = min(max(n_val, 1), idx.size - 1)
        else:
            n_val = 0
        val_idx.append(idx[:n_val])
        train_idx.append(idx[n_val:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(val_idx))


def bucket_size(n: int) -> int:
    """Padded batch size; shared sizes let folds reuse compiled code."""
    return max(MIN_BUCKET, 1 << int(np.ceil(np.log2(max(n, 1)))))


def pad_batch(values: np.ndarray,
              labels: np.ndarray,
              feature_mask: np.ndarray):
    n_rows, n_features = values.shape
    n_pad = bucket_size(n_rows)
    x = np.zeros((n_pad, n_features))
    x[:n_rows] = values
    y = np.zeros(n_pad)
    y[:n_rows] = labels
    w = np.zeros(n_pad)
    w[:n_rows] = 1.
    return (jnp.asarray(x), jnp.asarray(y), jnp.asarray(w),
            jnp.asarray(feature_mask, dtype=jnp.float64))


@partial(jax.jit, static_argnums=(0, 1))
def _fit_loop(arch: Architecture,
              max_iter: int,
              params: Any,
              x: jnp.ndarray,
              y: jnp.ndarray,
              w: jnp.ndarray,
              feature_mask: jnp.ndarray,
              lr: jnp.ndarray,
              tol: jnp.ndarray,
              mask_dropout: jnp.ndarray,
              key: jnp.ndarray):
    """Full-batch Adam until |loss_t - loss_t-1| < tol or max_iter steps."""

    def loss_fn(p, keep):
        mask = keep * feature_mask
        inputs = jnp.concatenate([x * mask, mask], axis=-1)
        return bce_loss(arch, p, inputs, y, w)

    def body(carry):
        p, opt_state, i, history, k = carry
        k, sub = random.split(k)
        keep = (random.uniform(sub, x.shape) >= mask_dropout).astype(x.dtype)
        loss, grads = jax.value_and_grad(loss_fn)(p, keep)
        p, opt_state = adam_update(p, grads, opt_state, lr)
        return p, opt_state, i + 1, history.at[i].set(loss), k

    def cond(carry):
        _, _, i, history, _ = carry
        delta = jnp.abs(history[jnp.maximum(i - 1, 0)] -
                        history[jnp.maximum(i - 2, 0)])
        return (i < max_iter) & ((i < 2) | (delta >= tol))

    history = jnp.full((max_iter,), jnp.nan)
    carry = (params, adam_init(params), jnp.zeros((), dtype=jnp.int32),
             history, key)
    params, _, n_iter, history, _ = jax.lax.while_loop(cond, body, carry)
    return params, n_iter, history


def fit_network(values: np.ndarray,
                labels: np.ndarray,
                hidden_dims: Sequence[int],
                learning_rate: float,
                cfg: TrainConfig,
                seed: int,
                feature_mask: Optional[np.ndarray] = None
                ) -> Tuple[MlpModel, int, np.ndarray]:
    """Train one predictor on standardized (N, F) values.

    Returns:
        The model, the number of iterations run and the loss history.
    """

    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if values.ndim != 2 or labels.shape != (values.shape[0],):
        raise DimensionMismatch('need values (N, F) and labels (N,)')
    n_features = values.shape[1]
    if feature_mask is None:
        feature_mask = np.ones(n_features)
    arch = Architecture(input_dim=2 * n_features,
                        hidden_dims=tuple(hidden_dims), head='sigmoid')
    model = init_model(arch, seed)
    x, y, w, fmask = pad_batch(values, labels, feature_mask)
    params, n_iter, history = _fit_loop(
        arch, cfg.max_iter, model.params, x, y, w, fmask,
        jnp.asarray(learning_rate, dtype=jnp.float64),
        jnp.asarray(cfg.tol, dtype=jnp.float64),
        jnp.asarray(cfg.mask_dropout, dtype=jnp.float64),
        random.PRNGKey(seed + 1))
    n_iter = int(n_iter)
    return (MlpModel(params=params, arch=arch), n_iter,
            np.asarray(history)[:n_iter])


def _predict_labels(model: MlpModel,
                    values: np.ndarray,
                    feature_mask: np.ndarray) -> np.ndarray:
    return (predict_proba(model, values, feature_mask) >= 0.5).astype(
        np.int64)


class Trainer(object):
    """Grid search over architectures and learning rates."""

    def __init__(self,
                 cfg: TrainConfig,
                 threads: int = 1,
                 logger: logging.Logger = None):
        """Initialization.

        Args:
            cfg - Grid and stopping settings.
            threads - Grid cells trained concurrently.
            logger - Logger.
        """

        if logger is None:
            self._logger = create_logger(name='Trainer')
        else:
            self._logger = logger
        self.cfg = cfg
        self._threads = max(1, threads)

    def _run_cell(self, cell, train_x, train_y, val_x, val_y, feature_mask):
        hidden_dims, lr = cell
        start_time = time.perf_counter()
        model, n_iter, history = fit_network(
            train_x, train_y, hidden_dims, lr, self.cfg, self.cfg.seed,
            feature_mask)
        val_f1 = f1_score(
            _predict_labels(model, val_x, feature_mask), val_y)
        self._logger.debug(
            'hidden={0}, lr={1}, iters={2}, loss={3:.4f}, val_f1={4:.4f}, '
            'time={5:.2f}s'.format(
                hidden_dims, lr, n_iter, float(history[-1]), val_f1,
                time.perf_counter() - start_time))
        return GridCell(hidden_dims=tuple(hidden_dims), learning_rate=lr,
                        val_f1=float(val_f1), n_iter=n_iter,
                        final_loss=float(history[-1]))

    def search(self,
               values: np.ndarray,
               labels: np.ndarray,
               feature_mask: Optional[np.ndarray] = None,
               grid: Optional[Sequence[Tuple[Tuple[int, ...], float]]] = None
               ) -> GridReport:
        """Score every grid cell on a seeded, stratified inner split."""

        values = np.asarray(values, dtype=np.float64)
        labels = np.asarray(labels).astype(np.int64)
        check_labels(labels)
        if feature_mask is None:
            feature_mask = np.ones(values.shape[1])
        grid = list(grid if grid is not None else self.cfg.grid)
        train_idx, val_idx = stratified_split(
            labels, self.cfg.val_fraction, self.cfg.seed)
        args = (values[train_idx], labels[train_idx],
                values[val_idx], labels[val_idx], feature_mask)
        if self._threads > 1:
            with concurrent.futures.ThreadPoolExecutor(self._threads) as pool:
                cells = list(pool.map(
                    lambda c: self._run_cell(c, *args), grid))
        else:
            cells = [self._run_cell(c, *args) for c in grid]
        # Ties go to the earliest cell in grid order.
        best_index = int(np.argmax([c.val_f1 for c in cells]))
        return GridReport(cells=tuple(cells), best_index=best_index)

    def fit(self,
            values: np.ndarray,
            labels: np.ndarray,
            feature_mask: Optional[np.ndarray] = None
            ) -> Tuple[MlpModel, GridReport]:
        """Select the best cell, then retrain it on all given rows."""

        start_time = time.perf_counter()
        report = self.search(values, labels, feature_mask)
        best = report.best
        model, n_iter, _ = fit_network(
            values, labels, best.hidden_dims, best.learning_rate, self.cfg,
            self.cfg.seed, feature_mask)
        self._logger.info(
            'Grid done: cells={0}, best hidden={1}, lr={2}, val_f1={3:.4f}, '
            'time={4:.2f}s'.format(
                len(report.cells), best.hidden_dims, best.learning_rate,
                best.val_f1, time.perf_counter() - start_time))
        return model, report


def train(values: np.ndarray,
          labels: np.ndarray,
          cfg: TrainConfig,
          threads: int = 1,
          logger: logging.Logger = None) -> Tuple[MlpModel, GridReport]:
    """Grid-searched quality predictor on standardized features."""
    return Trainer(cfg, threads=threads, logger=logger).fit(values, labels)
