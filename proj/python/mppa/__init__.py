"""Python interface to the physics-principled sequence model core."""

try:
    from ._mppa import *  # noqa: F401,F403  (installed package layout)
    from ._mppa import Model  # noqa: F401
except ImportError:  # in-tree build: extension sits on PYTHONPATH
    from _mppa import *  # noqa: F401,F403
    from _mppa import Model  # noqa: F401
