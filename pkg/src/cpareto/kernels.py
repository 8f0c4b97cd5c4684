"""Backend dispatch for the hot kernels.

Prefers the compiled extension ``cpareto._ckern`` and falls back to the
pure NumPy twin ``cpareto._pykern`` when the extension is unavailable.
Set ``CPARETO_FORCE_FALLBACK=1`` to force the fallback (used by the
benchmark and the backend-parity tests).  Both backends implement the
same contracts; pivot decisions can differ only inside their shared
numerical tolerances.
"""

import os

from . import _pykern

if os.environ.get("CPARETO_FORCE_FALLBACK"):
    _impl = _pykern
    BACKEND = "fallback"
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - build without extension
        _impl = _pykern
        BACKEND = "fallback"

OPTIMAL = _pykern.OPTIMAL
UNBOUNDED = _pykern.UNBOUNDED
ITERATION_LIMIT = _pykern.ITERATION_LIMIT

nondominated_mask = _impl.nondominated_mask
nondominated_ranks = _impl.nondominated_ranks
simplex_loop = _impl.simplex_loop
