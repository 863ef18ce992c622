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

# Learners (double_q, rfe) import the trainer, which imports adam from here,
# so only leaf modules are re-exported.
from .adam import AdamState
from .adam import adam_init
from .adam import adam_step
from .replay import ReplayBuffer


__all__ = [
    "AdamState",
    "adam_init",
    "adam_step",
    "ReplayBuffer",
]
