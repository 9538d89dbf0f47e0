"""Simulation backend selection: numba kernel with a pure NumPy fallback.

Resolution order: explicit argument, then the PULSELOOP_BACKEND environment
variable, then "auto" (numba when importable, NumPy otherwise). Requesting
numba explicitly when it is missing is an error rather than a silent
downgrade.
"""

from __future__ import annotations

import os

from .errors import InvalidParameterError

__all__ = ["ENV_VAR", "available_backends", "has_numba", "resolve_backend", "get_simulate"]

ENV_VAR = "PULSELOOP_BACKEND"

_numba_ok: bool | None = None


def has_numba() -> bool:
    global _numba_ok
    if _numba_ok is None:
        try:
            import numba  # noqa: F401

            _numba_ok = True
        except ImportError:
            _numba_ok = False
    return _numba_ok


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if has_numba() else ("numpy",)


def resolve_backend(requested: str | None = None) -> str:
    """Concrete backend name ("numba" or "numpy") from request/env/default."""
    name = (requested or os.environ.get(ENV_VAR) or "auto").strip().lower()
    if name == "auto":
        return "numba" if has_numba() else "numpy"
    if name == "numpy":
        return "numpy"
    if name == "numba":
        if not has_numba():
            raise InvalidParameterError("numba backend requested but numba is not installed")
        return "numba"
    raise InvalidParameterError(
        f"unknown backend {name!r}; choose 'numba', 'numpy', or 'auto'"
    )


def get_simulate(backend: str):
    """The ``simulate`` kernel entry point for a resolved backend name."""
    if backend == "numba":
        from . import _kernels_numba

        return _kernels_numba.simulate
    if backend == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy.simulate
    raise InvalidParameterError(f"unknown backend {backend!r}")
