"""Codec implementation selection.

The compiled extension is preferred when built; set NOTEMOTION_PURE_PYTHON=1
to force the pure-Python codec (useful for debugging and benchmarking).
"""

from __future__ import annotations

import os

from . import codec_py

if os.environ.get("NOTEMOTION_PURE_PYTHON"):
    _impl = codec_py
else:
    try:
        from . import _codec as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = codec_py

encode = _impl.encode
decode = _impl.decode
IMPLEMENTATION: str = _impl.IMPLEMENTATION


def available_implementations() -> dict[str, object]:
    """Name -> module for every codec present in this build."""
    impls: dict[str, object] = {"python": codec_py}
    try:
        from . import _codec

        impls["compiled"] = _codec
    except ImportError:
        pass
    return impls
