"""Hot-loop kernels, compiled when available.

The Cython extension ``dualunitary._kernels`` is imported if it was built;
otherwise (or when ``DUALUNITARY_PURE_PYTHON=1`` is set) the numpy versions in
``dualunitary._fallback`` are used. ``BACKEND`` names the active choice.
"""

import os

from dualunitary import _fallback

if os.environ.get("DUALUNITARY_PURE_PYTHON") == "1":
    _impl = _fallback
else:
    try:
        from dualunitary import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = "python" if _impl is _fallback else "cython"

apply_two_site = _impl.apply_two_site
channel_series = _impl.channel_series
spacing_ratios = _impl.spacing_ratios


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    out = {"python": _fallback}
    try:
        from dualunitary import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
