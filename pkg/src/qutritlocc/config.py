"""Global numerical tolerance shared across the package.

Most operations accept an explicit ``tol`` argument; passing ``None`` (the
default) resolves to the package-wide zero tolerance, which can be adjusted
once per process (e.g. from the command line) with :func:`set_default_tol`.
"""

from __future__ import annotations

_DEFAULT_TOL = 1e-9


def default_tol() -> float:
    """Return the current package-wide zero tolerance."""
    return _DEFAULT_TOL


def set_default_tol(value: float) -> None:
    """Set the package-wide zero tolerance (must be positive)."""
    global _DEFAULT_TOL
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"tolerance must be positive, got {value}")
    _DEFAULT_TOL = value


def resolve_tol(tol: float | None) -> float:
    """Return ``tol`` itself, or the package default when ``tol`` is None."""
    return default_tol() if tol is None else float(tol)
