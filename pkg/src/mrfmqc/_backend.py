"""Kernel selection: compiled extension if importable, numpy otherwise.

Set ``MRFMQC_PURE=1`` to force the numpy kernels.
"""

import os

from . import _purepy

BACKEND = "python"
rotate_pairs = _purepy.rotate_pairs
dipole_fields = _purepy.dipole_fields

if not os.environ.get("MRFMQC_PURE"):
    try:
        from . import _kernels
    except ImportError:
        _kernels = None
    else:
        BACKEND = "cython"
        rotate_pairs = _kernels.rotate_pairs
        dipole_fields = _kernels.dipole_fields
