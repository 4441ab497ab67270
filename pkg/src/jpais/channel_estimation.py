"""SG and RLS estimators of the block channel matrix at the destination.

The SG estimator descends the per-user cost ||r - b C H a||^2 over the
dense (n_r+1)L x (n_r+1) matrix:

    H <- H + nu (C^H r a^H b* - C^H C H a a^H)

optionally projecting onto the block-diagonal support after every step
(the true matrix is block diagonal; the projection is one mask multiply
and lowers estimator variance).

The RLS estimator works on the combined vector h~ = H a. Its weighted LS
solution is h~ = (C^H C)^-1 p with p accumulated recursively, and the
code Gram inverse precomputed once per code set. The raw accumulator
follows the recursion h~ <- alpha h~ + b* (C^H C)^-1 C^H r; the usable
estimate divides by the forgetting-weight sum W = sum alpha^(i-l) |b_l|^2.
Recovering the full matrix from h~ needs the applied allocation: either
the rank-one pseudo-inverse form H = h~ a^H / ||a||^2 or, by default, the
support-constrained form that divides block j of h~ by a_j. Both satisfy
H a = h~ exactly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .validation import as_complex_vector, check_positive, check_received_matrix, check_symbol_vector

RECOVERY_MODES = ("block", "rank1")


def block_support_mask(paths: int, n_links: int) -> np.ndarray:
    mask = np.zeros((n_links * paths, n_links))
    for j in range(n_links):
        mask[j * paths:(j + 1) * paths, j] = 1.0
    return mask


def recover_channel_matrix(combined, power, paths: int | None = None,
                           mode: str = "rank1") -> np.ndarray:
    """Lift the combined estimate h~ = H a back to a channel matrix.

    ``rank1`` applies the pseudo-inverse of a a^H, giving H = h~ a^H/||a||^2
    (rank one). ``block`` uses the block-diagonal support: block j of h~
    divided by a_j lands in column j (links with a vanishing amplitude are
    zeroed). Both satisfy H a = h~; ``block`` additionally matches the true
    support and needs ``paths``.
    """
    combined = as_complex_vector(combined, name="combined channel estimate")
    power = as_complex_vector(power, name="allocation")
    norm2 = float(np.linalg.norm(power) ** 2)
    if norm2 == 0:
        raise ValueError("cannot recover the channel from a zero allocation")
    if mode == "rank1":
        return np.outer(combined, power.conj()) / norm2
    if mode != "block":
        raise ValueError(f"mode must be one of {RECOVERY_MODES}")
    if paths is None:
        raise ValueError("block recovery needs the number of paths")
    n_links = power.shape[0]
    if combined.shape[0] != n_links * paths:
        raise ValueError("combined estimate length must be n_links * paths")
    matrix = np.zeros((n_links * paths, n_links), dtype=complex)
    for j in range(n_links):
        if abs(power[j]) < 1e-12 * np.sqrt(norm2):
            continue
        matrix[j * paths:(j + 1) * paths, j] = combined[j * paths:(j + 1) * paths] / power[j]
    return matrix


class SgChannelEstimator(BaseEstimator):
    """Gradient-descent estimator of the dense block channel matrix."""

    def __init__(self, code_stack=None, paths=None, step=0.01, project_blocks=True):
        self.code_stack = code_stack
        self.paths = paths
        self.step = step
        self.project_blocks = project_blocks

    @property
    def n_links(self) -> int:
        return np.asarray(self.code_stack).shape[1] // self.paths

    def _ensure_state(self):
        if not hasattr(self, "estimate_"):
            check_positive(self.step, "step")
            code_stack = np.asarray(self.code_stack, dtype=complex)
            n_links = self.n_links
            self.estimate_ = np.zeros((n_links * self.paths, n_links), dtype=complex)
            self._gram = code_stack.conj().T @ code_stack
            self._mask = block_support_mask(self.paths, n_links)

    def update(self, received, pilot, power) -> None:
        """One descent step on (r, b, a)."""
        self._ensure_state()
        received = as_complex_vector(received, name="received vector")
        power = as_complex_vector(power, length=self.estimate_.shape[1], name="allocation")
        code_stack = np.asarray(self.code_stack, dtype=complex)
        ct_r = code_stack.conj().T @ received
        fitted = self._gram @ (self.estimate_ @ power)
        self.estimate_ = self.estimate_ + self.step * (
            np.outer(ct_r * np.conj(pilot) - fitted, power.conj()))
        if self.project_blocks:
            self.estimate_ = self.estimate_ * self._mask

    def matrix(self) -> np.ndarray:
        self._ensure_state()
        return self.estimate_

    def fit(self, X, y, power):
        """Batch convenience: run the recursion over a training block."""
        X = check_received_matrix(X)
        y = check_symbol_vector(y, X.shape[0])
        for i in range(X.shape[0]):
            self.update(X[i], complex(y[i]), power)
        return self


class RlsChannelEstimator(BaseEstimator):
    """Recursive weighted-LS estimator of the combined vector h~ = H a."""

    def __init__(self, code_stack=None, paths=None, forgetting=0.998, recovery="block"):
        self.code_stack = code_stack
        self.paths = paths
        self.forgetting = forgetting
        self.recovery = recovery

    @property
    def n_links(self) -> int:
        return np.asarray(self.code_stack).shape[1] // self.paths

    def _ensure_state(self):
        if not hasattr(self, "cross_"):
            if not 0 < self.forgetting <= 1:
                raise ValueError("forgetting factor must lie in (0, 1]")
            if self.recovery not in RECOVERY_MODES:
                raise ValueError(f"recovery must be one of {RECOVERY_MODES}")
            code_stack = np.asarray(self.code_stack, dtype=complex)
            gram = code_stack.conj().T @ code_stack
            try:
                self.gram_inverse_ = np.linalg.inv(gram)
            except np.linalg.LinAlgError as exc:
                raise np.linalg.LinAlgError("degenerate code set: C^H C is singular") from exc
            self.cross_ = np.zeros(code_stack.shape[1], dtype=complex)
            self.weight_ = 0.0
            self.last_power_ = None

    def update(self, received, pilot, power=None) -> None:
        self._ensure_state()
        received = as_complex_vector(received, name="received vector")
        code_stack = np.asarray(self.code_stack, dtype=complex)
        self.cross_ = self.forgetting * self.cross_ + np.conj(pilot) * (
            code_stack.conj().T @ received)
        self.weight_ = self.forgetting * self.weight_ + abs(pilot) ** 2
        if power is not None:
            self.last_power_ = as_complex_vector(power).copy()

    def combined(self) -> np.ndarray:
        """Raw accumulator h~ = (C^H C)^-1 p (grows with the weight sum)."""
        self._ensure_state()
        return self.gram_inverse_ @ self.cross_

    def normalized(self) -> np.ndarray:
        """Weight-normalized estimate of H a."""
        self._ensure_state()
        if self.weight_ <= 0:
            return np.zeros_like(self.cross_)
        return self.combined() / self.weight_

    def matrix(self) -> np.ndarray:
        self._ensure_state()
        if self.weight_ <= 0 or self.last_power_ is None:
            n_links = self.n_links
            return np.zeros((n_links * self.paths, n_links), dtype=complex)
        return recover_channel_matrix(self.normalized(), self.last_power_,
                                      paths=self.paths, mode=self.recovery)

    def fit(self, X, y, power):
        X = check_received_matrix(X)
        y = check_symbol_vector(y, X.shape[0])
        for i in range(X.shape[0]):
            self.update(X[i], complex(y[i]), power)
        return self
