"""Probing toolkit for scalar adverb knowledge in pretrained language models.

The heavy lifting lives in the `_advprobe` extension module built from the C++
core; this package re-exports its surface.
"""

from ._advprobe import *  # noqa: F401,F403
from ._advprobe import __doc__  # noqa: F401

__version__ = "0.1.0"
