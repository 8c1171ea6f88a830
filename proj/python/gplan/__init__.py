"""Python bindings for the gplan planning pipeline."""

from ._gplan import *  # noqa: F401,F403
from ._gplan import __version__  # noqa: F401
