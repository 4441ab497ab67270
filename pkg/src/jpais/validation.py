"""Input validation helpers shared by the estimators and the harness.

scikit-learn's ``check_array`` rejects complex data, so the handful of
checks needed here are written out explicitly.
"""

from __future__ import annotations

import numpy as np


def as_complex_vector(x, length: int | None = None, name: str = "vector") -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if length is not None and x.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {x.shape[0]}")
    return x


def as_complex_matrix(x, shape: tuple[int, int] | None = None, name: str = "matrix") -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {x.shape}")
    if shape is not None and x.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {x.shape}")
    return x


def check_received_matrix(X, dim: int | None = None) -> np.ndarray:
    """Coerce a (n_symbols, dim) block of received vectors to complex."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2:
        raise ValueError(f"received data must be (n_symbols, dim), got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"received vectors must have {dim} entries, got {X.shape[1]}")
    return X


def check_symbol_vector(y, n_symbols: int | None = None) -> np.ndarray:
    y = np.asarray(y, dtype=complex)
    if y.ndim != 1:
        raise ValueError(f"symbol stream must be one-dimensional, got shape {y.shape}")
    if n_symbols is not None and y.shape[0] != n_symbols:
        raise ValueError(f"expected {n_symbols} symbols, got {y.shape[0]}")
    return y


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


def check_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
