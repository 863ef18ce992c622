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

import json
import logging
import os
import re
from typing import Any
from typing import Callable
from typing import Dict
from typing import Optional
from typing import Sequence
from typing import Tuple

import jax.numpy as jnp
import numpy as np
import yaml
from jax import tree_util

from rehab_assess.errors import ConfigError
from rehab_assess.errors import FeatureNameMismatch
from rehab_assess.errors import IoError

LOG_LEVEL_ENV = 'REHAB_ASSESS_LOG'
CHECKPOINT_FORMAT = 'rehab-assess-mlp'
CHECKPOINT_VERSION = 1


def get_params_format_fn(init_params: Any) -> Tuple[int, Callable]:
    """Return a function that formats a flat vector into the params tree."""

    flat, tree = tree_util.tree_flatten(init_params)
    params_sizes = np.cumsum([np.prod(p.shape) for p in flat])

    def params_format_fn(params: jnp.ndarray) -> Any:
        params = tree_util.tree_map(
            lambda x, y: x.reshape(y.shape),
            jnp.split(params, params_sizes, axis=-1)[:-1],
            flat)
        return tree_util.tree_unflatten(tree, params)

    return int(params_sizes[-1]), params_format_fn


def flatten_params(params: Any) -> np.ndarray:
    """Concatenate all leaves of a params tree into one vector."""
    flat, _ = tree_util.tree_flatten(params)
    return np.concatenate([np.asarray(p).ravel() for p in flat])


def create_logger(name: str,
                  log_dir: str = None,
                  debug: bool = False) -> logging.Logger:
    """Create a logger.

    Args:
        name - Name of the logger.
        log_dir - The logger will also log to an external file in the specified
                  directory if specified.
        debug - If we should log in DEBUG mode.

    Returns:
        logging.Logger. The level is taken from $REHAB_ASSESS_LOG when set.
    """

    if log_dir and not os.path.exists(log_dir):
        os.makedirs(log_dir)
    level = logging.DEBUG if debug else logging.INFO
    env_level = os.environ.get(LOG_LEVEL_ENV)
    if env_level:
        level = logging.getLevelName(env_level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    log_format = '%(name)s: %(asctime)s [%(levelname)s] %(message)s'
    logging.basicConfig(level=level, format=log_format)
    logger = logging.getLogger(name)
    if log_dir:
        log_file = os.path.join(log_dir, '{}.txt'.format(name))
        file_hdl = logging.FileHandler(log_file)
        file_hdl.setFormatter(logging.Formatter(fmt=log_format))
        logger.addHandler(file_hdl)
    # Set level explicitly, otherwise the logger does not output.
    logger.setLevel(level)
    return logger


def convert(obj: Any) -> Any:
    """Turn numpy/jax values into plain Python objects for serialization."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (list, tuple)):
        return [convert(item) for item in obj]
    if isinstance(obj, dict):
        return {str(key): convert(value) for key, value in obj.items()}
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.ndarray, jnp.ndarray)):
        return convert(np.asarray(obj).tolist())
    return obj


def dumps_json(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(convert(obj), sort_keys=True, indent=1) + '\n'


def write_json(filename: str, obj: Any) -> None:
    try:
        with open(filename, 'w') as f:
            f.write(dumps_json(obj))
    except OSError as e:
        raise IoError('cannot write {}: {}'.format(filename, e)) from e


def read_json(filename: str) -> Any:
    try:
        with open(filename) as f:
            return json.load(f)
    except OSError as e:
        raise IoError('cannot read {}: {}'.format(filename, e)) from e


def load_yaml(config_fname: str) -> dict:
    """Load in a YAML (or JSON) config file."""
    loader = yaml.SafeLoader
    loader.add_implicit_resolver(
        'tag:yaml.org,2002:float',
        re.compile(
            """^(?:
        [-+]?(?:[0-9][0-9_]*)\\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?[0-9][0-9_]*(?::[0-5]?[0-9])+\\.[0-9_]*
        |[-+]?\\.(?:inf|Inf|INF)
        |\\.(?:nan|NaN|NAN))$""",
            re.X,
        ),
        list('-+0123456789.'),
    )
    try:
        with open(config_fname) as file:
            return yaml.load(file, Loader=loader)
    except OSError as e:
        raise IoError('cannot read {}: {}'.format(config_fname, e)) from e
    except yaml.YAMLError as e:
        raise ConfigError('invalid YAML in {}: {}'.format(
            config_fname, e)) from e


def save_model(model_file: str,
               params: np.ndarray,
               architecture: Dict[str, Any],
               feature_names: Sequence[str],
               obs_params: Optional[Dict[str, np.ndarray]] = None,
               extra: Optional[Dict[str, Any]] = None) -> None:
    """Save flattened network parameters as a versioned JSON checkpoint.

    Args:
        model_file - Output path.
        params - Flattened parameters, shape (num_params,).
        architecture - Layer sizes and output head.
        feature_names - Feature order the network was trained on.
        obs_params - Normalization parameters {'mean', 'std'}.
        extra - Free-form metadata (e.g. chosen learning rate).
    """

    write_json(model_file, {
        'format': CHECKPOINT_FORMAT,
        'version': CHECKPOINT_VERSION,
        'architecture': architecture,
        'feature_names': list(feature_names),
        'params': np.asarray(params, dtype=np.float64),
        'obs_params': obs_params,
        'extra': extra or {},
    })


def load_model(model_file: str,
               feature_names: Optional[Sequence[str]] = None
               ) -> Dict[str, Any]:
    """Load a checkpoint written by save_model.

    Args:
        model_file - Checkpoint path.
        feature_names - When given, must equal the stored feature order.
    Returns:
        The checkpoint dictionary with 'params' as a float64 array.
    """

    if not os.path.exists(model_file):
        raise IoError('Model file {} does not exist.'.format(model_file))
    data = read_json(model_file)
    if data.get('format') != CHECKPOINT_FORMAT:
        raise IoError('{} is not a model checkpoint.'.format(model_file))
    if data.get('version') != CHECKPOINT_VERSION:
        raise IoError('Unsupported checkpoint version {} in {}.'.format(
            data.get('version'), model_file))
    if (feature_names is not None and
            list(feature_names) != list(data['feature_names'])):
        raise FeatureNameMismatch(
            'checkpoint {} was trained on a different feature order'.format(
                model_file))
    data['params'] = np.asarray(data['params'], dtype=np.float64)
    if data.get('obs_params') is not None:
        data['obs_params'] = {
            k: np.asarray(v, dtype=np.float64)
            for k, v in data['obs_params'].items()}
    return data
