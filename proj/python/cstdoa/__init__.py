# SPDX-License-Identifier: Apache-2.0
"""Compressive-sensing TDOA estimation (Python bindings)."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
