"""Contraction kernels with a compiled fast path and a numpy fallback.

The backend is chosen at import time: the compiled extension if it built,
else pure numpy. Set ROTORCHAIN_KERNELS=numpy|compiled to force one, or
call :func:`set_backend` (used by the benchmark and the cross-checks).
"""

import os

from . import _ref

_BACKENDS = {"numpy": _ref}
try:
    from . import _fast  # type: ignore[attr-defined]

    _BACKENDS["compiled"] = _fast
except ImportError:
    _fast = None

_active_name = None
apply_heff2 = None
update_left_env = None
update_right_env = None


def available_backends() -> tuple:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    return _active_name


def get_backend(name: str):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} not available (have {available_backends()})"
        ) from None


def set_backend(name: str) -> None:
    global _active_name, apply_heff2, update_left_env, update_right_env
    mod = get_backend(name)
    _active_name = name
    apply_heff2 = mod.apply_heff2
    update_left_env = mod.update_left_env
    update_right_env = mod.update_right_env


_requested = os.environ.get("ROTORCHAIN_KERNELS", "auto")
if _requested == "auto":
    _requested = "compiled" if "compiled" in _BACKENDS else "numpy"
set_backend(_requested)
