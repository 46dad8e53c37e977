# SPDX-License-Identifier: Apache-2.0
"""Depth and all-in-focus recovery from sparse focal stacks."""

from ._dfd import *  # noqa: F401,F403
from ._dfd import __doc__  # noqa: F401

__version__ = "0.1.0"
