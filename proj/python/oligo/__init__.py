# Copyright 2026 The Oligo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Finite-horizon dynamic oligopoly toolkit.

Simulation of the demand-inertia pricing game with firm dropouts, analytic
no-dropout Nash equilibria, self-play policy-gradient learning (REINFORCE and
PPO with beta policies), exhaustive best-response verification, and predatory
pricing metrics.
"""

try:
    from oligo._oligo import *  # noqa: F401,F403
    from oligo._oligo import __doc__ as _core_doc  # noqa: F401
except ImportError:  # running against a build tree on PYTHONPATH
    from _oligo import *  # noqa: F401,F403

__version__ = "0.1.0"
