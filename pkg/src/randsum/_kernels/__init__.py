"""Hot kernels, compiled when the extension is built and numpy otherwise.

Set ``RANDSUM_PURE_PYTHON=1`` to force the numpy backend.  ``BACKEND`` names
the one in use.
"""

import os

from . import _fallback
from ._fallback import gap_draws

if os.environ.get("RANDSUM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _fallback
        BACKEND = "python"

compound_sums = _impl.compound_sums
coupled_gaps = _impl.coupled_gaps
cdf_l1 = _impl.cdf_l1
normal_l1 = _impl.normal_l1

__all__ = ["BACKEND", "compound_sums", "coupled_gaps", "cdf_l1", "normal_l1", "gap_draws"]
