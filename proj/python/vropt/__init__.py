"""Variance-reduced stochastic optimization toolkit."""

try:
    from ._vropt import *  # noqa: F401,F403
except ImportError:  # in-tree builds put the module next to the build dir
    from _vropt import *  # noqa: F401,F403
