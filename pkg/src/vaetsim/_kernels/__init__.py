"""Hot-loop kernels: compiled extension with a pure-numpy fallback.

The compiled core is built from ``_core.pyx`` at install time; if it is
missing (source checkout without a build, unsupported platform) the numpy
implementation takes over transparently.  Set ``VAETSIM_FORCE_NUMPY=1``
to force the fallback, e.g. for benchmarking one against the other.
"""

from __future__ import annotations

import os

from . import _numpy as numpy_backend

try:
    from . import _core as compiled_backend
except ImportError:  # pragma: no cover - depends on build environment
    compiled_backend = None


def available_backends() -> dict:
    out = {"numpy": numpy_backend}
    if compiled_backend is not None:
        out["compiled"] = compiled_backend
    return out


def get_backend(name: str | None = None):
    """Resolve a kernel backend module by name, or the active default."""
    backends = available_backends()
    if name is None:
        forced = os.environ.get("VAETSIM_FORCE_NUMPY", "") not in ("", "0")
        if forced or "compiled" not in backends:
            return backends["numpy"]
        return backends["compiled"]
    try:
        return backends[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {sorted(backends)}"
        ) from None


def active_backend_name() -> str:
    return get_backend().NAME
