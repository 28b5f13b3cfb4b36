"""Compressed-sensing multipath suppression for iToF depth imaging."""

try:
    from ._tofcs import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _tofcs import *  # noqa: F401,F403  (build-tree layout)

__version__ = "0.1.0"
