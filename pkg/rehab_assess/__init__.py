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

import jax

# Finite-difference checks and bit-identical reruns need float64.
jax.config.update('jax_enable_x64', True)

from .algo.double_q import DoubleQLearner  # noqa: E402
from .algo.rfe import RecursiveFeatureEliminator  # noqa: E402
from .evaluation import LosoEvaluator  # noqa: E402
from .sim_mgr import SimManager  # noqa: E402
from .trainer import Trainer  # noqa: E402
from .version import __version__  # noqa: E402


__all__ = ['DoubleQLearner', 'RecursiveFeatureEliminator', 'LosoEvaluator',
           'SimManager', 'Trainer', '__version__']
