"""Select the compiled core when available, else the numpy fallback.

Set ``LYAPFIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore

if os.environ.get("LYAPFIT_PURE_PYTHON", "") not in ("", "0"):
    core = _pycore
    BACKEND = "python"
else:
    try:
        from . import _ext as core
        BACKEND = "cython"
    except ImportError:
        core = _pycore
        BACKEND = "python"

profile = core.profile
kernel_matrix = core.kernel_matrix
orbital_gram = core.orbital_gram
orbital_cross = core.orbital_cross
expansion = core.expansion
nearest_counts = core.nearest_counts
