"""Select the compiled core or the numpy fallback at import.

Set ``HILBERT_KSD_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

_force_pure = os.environ.get("HILBERT_KSD_PURE", "").strip() not in ("", "0")

_core = None
if not _force_pure:
    try:
        from . import _core
    except ImportError:
        _core = None

_impl = _core if _core is not None else _fallback
BACKEND = "compiled" if _core is not None else "python"

stein_gram_pairs = _impl.stein_gram_pairs
em_sine_accept = _impl.em_sine_accept

SE_CODE = _fallback.SE
IMQ_CODE = _fallback.IMQ


def implementations():
    """Mapping of available backend name to module."""
    impls = {"python": _fallback}
    if _core is not None:
        impls["compiled"] = _core
    return impls
