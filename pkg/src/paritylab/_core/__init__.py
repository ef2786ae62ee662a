"""Hot-loop kernels: a compiled Cython fast path and a NumPy fallback.

The backend is chosen once at import time — the compiled extension when it
built, otherwise NumPy. Set PARITYLAB_BACKEND=numpy or =compiled to force
one (the benchmark and the equivalence tests do this).
"""

from __future__ import annotations

import os

from ..errors import ConfigError
from . import _numpy_backend

try:
    from . import _kernels as _compiled_backend
except ImportError:  # extension not built on this install
    _compiled_backend = None


def available_backends() -> tuple[str, ...]:
    if _compiled_backend is not None:
        return ("compiled", "numpy")
    return ("numpy",)


def get_backend(name: str | None = None):
    """Resolve a backend module by name; None picks the import-time default."""
    if name is None:
        name = os.environ.get("PARITYLAB_BACKEND")
    if name is None:
        name = "compiled" if _compiled_backend is not None else "numpy"
    if name == "compiled":
        if _compiled_backend is None:
            raise ConfigError("compiled backend requested but the extension is not built")
        return _compiled_backend
    if name == "numpy":
        return _numpy_backend
    raise ConfigError(f"unknown backend {name!r}; expected 'compiled' or 'numpy'")


BACKEND = get_backend()


def backend_name() -> str:
    return BACKEND.name
