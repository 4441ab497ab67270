"""Exponentially weighted RLS joint adaptation of filter and allocation.

Both recursions propagate the inverse of a forgetting-weighted sample
covariance through the matrix inversion lemma:

    kate = a^-1 Phi r / (1 + a^-1 r^H Phi r)
    Phi  <- a^-1 Phi - a^-1 k r^H Phi
    w    <- w + k xi*,        xi = b - w^H r   (a priori error)

The allocation recursion runs the same machinery on the effective
regressor u = B^H H^H C^H w with the allocation in place of the filter;
the constraint is enforced by an exact rescale after every step (the
multiplier does not fit inside the inversion lemma). Inverse-covariance
states start at I/delta and are re-Hermitianized each step to control
drift over long packets.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .model import qpsk_hard_decision
from .mmse import rescale_to_budget
from .validation import (as_complex_vector, check_positive, check_received_matrix,
                         check_symbol_vector)


def rls_receiver_step(taps, inv_cov, received, pilot, forgetting: float):
    """One filter recursion; returns (taps, inv_cov, a priori error)."""
    received = as_complex_vector(received, name="received vector")
    phi_r = inv_cov @ received
    denom = forgetting + float(np.real(np.vdot(received, phi_r)))
    gain = phi_r / denom
    inv_cov = (inv_cov - np.outer(gain, phi_r.conj())) / forgetting
    inv_cov = 0.5 * (inv_cov + inv_cov.conj().T)
    error = complex(pilot - np.vdot(taps, received))
    taps = taps + gain * np.conj(error)
    return taps, inv_cov, error


def rls_effective_regressor(symbol_diag, channel_matrix, code_stack, taps) -> np.ndarray:
    """Allocation regressor u = B^H H^H C^H w."""
    q = (np.asarray(code_stack) @ np.asarray(channel_matrix)).conj().T @ taps
    return np.conj(np.asarray(symbol_diag, dtype=complex)) * q


def rls_power_step(power, inv_cov, regressor, pilot, forgetting: float, budget: float,
                   enforce_constraint: bool = True):
    """One allocation recursion; returns (power, inv_cov, a priori error).

    With ``enforce_constraint`` the updated allocation is rescaled onto
    ||a||^2 = budget; disabling it exposes the raw least-squares trajectory
    (used by the batch oracle checks).
    """
    regressor = as_complex_vector(regressor, name="regressor")
    phi_u = inv_cov @ regressor
    denom = forgetting + float(np.real(np.vdot(regressor, phi_u)))
    gain = phi_u / denom
    inv_cov = (inv_cov - np.outer(gain, phi_u.conj())) / forgetting
    inv_cov = 0.5 * (inv_cov + inv_cov.conj().T)
    # innovation paired as b - u^H a: the recursion then reproduces the
    # weighted LS trajectory (sum a^(i-l) u u^H)^-1 (sum a^(i-l) b u), which is
    # what the allocation normal equations accumulate (b enters unconjugated
    # because the regressor already carries the conjugate symbol).
    error = complex(pilot - np.conj(np.vdot(power, regressor)))
    power = power + gain * error
    if enforce_constraint:
        power = rescale_to_budget(power, budget)
    return power, inv_cov, error


class RlsJpaisReceiver(BaseEstimator):
    """RLS joint receiver/allocation estimator for one user.

    Same surface as :class:`~jpais.sg.SgJpaisReceiver`: fit(X, y) trains on
    known symbols, predict(X) runs decision-directed. ``forgetting`` is the
    exponential weight and ``init_delta`` the inverse-covariance
    initialization Phi[0] = I/delta. ``enforce_constraint=False`` exposes
    the unconstrained allocation trajectory for oracle tests.
    """

    def __init__(self, code_stack=None, forgetting=0.998, init_delta=0.01, budget=1.0,
                 channel=None, channel_estimator=None, adapt_power=True,
                 initial_power=None, applied_power=None, enforce_constraint=True):
        self.code_stack = code_stack
        self.forgetting = forgetting
        self.init_delta = init_delta
        self.budget = budget
        self.channel = channel
        self.channel_estimator = channel_estimator
        self.adapt_power = adapt_power
        self.initial_power = initial_power
        self.applied_power = applied_power
        self.enforce_constraint = enforce_constraint

    def _n_links(self) -> int:
        if self.channel is not None:
            return np.asarray(self.channel).shape[1]
        if self.channel_estimator is not None:
            return self.channel_estimator.n_links
        if self.initial_power is not None:
            return len(self.initial_power)
        raise ValueError("cannot infer the number of links: provide channel, "
                         "channel_estimator or initial_power")

    def _channel_matrix(self):
        if self.channel is not None:
            return self.channel
        if self.channel_estimator is not None:
            return self.channel_estimator.matrix()
        raise ValueError("power adaptation needs a channel or a channel estimator")

    def _step(self, received, pilot) -> complex:
        if self.channel_estimator is not None:
            self.channel_estimator.update(received, pilot, self.applied_power_)
        self.taps_, self.inv_cov_, error = rls_receiver_step(
            self.taps_, self.inv_cov_, received, pilot, self.forgetting)
        if self.adapt_power:
            symbol_diag = np.full(self.power_.shape[0], pilot, dtype=complex)
            regressor = rls_effective_regressor(
                symbol_diag, self._channel_matrix(), self.code_stack, self.taps_)
            self.power_, self.power_inv_cov_, _ = rls_power_step(
                self.power_, self.power_inv_cov_, regressor, pilot,
                self.forgetting, self.budget, self.enforce_constraint)
            self.constraint_residuals_.append(
                abs(float(np.linalg.norm(self.power_) ** 2) - self.budget))
        return error

    def _reset(self, dim: int) -> None:
        if not 0 < self.forgetting <= 1:
            raise ValueError("forgetting factor must lie in (0, 1]")
        check_positive(self.init_delta, "init_delta")
        check_positive(self.budget, "budget")
        n_links = self._n_links()
        self.taps_ = np.zeros(dim, dtype=complex)
        self.inv_cov_ = np.eye(dim, dtype=complex) / self.init_delta
        if self.initial_power is not None:
            self.power_ = as_complex_vector(self.initial_power).copy()
        else:
            self.power_ = np.full(n_links, np.sqrt(self.budget / n_links), dtype=complex)
        self.power_inv_cov_ = np.eye(n_links, dtype=complex) / self.init_delta
        self.applied_power_ = (as_complex_vector(self.applied_power).copy()
                               if self.applied_power is not None else self.power_.copy())
        self.constraint_residuals_ = []
        self.training_error_trace_ = np.empty(0)

    def fit(self, X, y):
        X = check_received_matrix(X)
        self._reset(X.shape[1])
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        """Continue supervised training without resetting the state."""
        X = check_received_matrix(X)
        y = check_symbol_vector(y, X.shape[0])
        if not hasattr(self, "taps_"):
            self._reset(X.shape[1])
        trace = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            error = self._step(X[i], complex(y[i]))
            trace[i] = abs(error) ** 2
        self.training_error_trace_ = np.concatenate([self.training_error_trace_, trace])
        return self

    def apply_feedback(self, allocation) -> None:
        self.applied_power_ = as_complex_vector(allocation).copy()

    def predict(self, X) -> np.ndarray:
        X = check_received_matrix(X, dim=self.taps_.shape[0])
        decisions = np.empty(X.shape[0], dtype=complex)
        softs = np.empty(X.shape[0], dtype=complex)
        for i in range(X.shape[0]):
            soft = complex(np.vdot(self.taps_, X[i]))
            softs[i] = soft
            decision = complex(qpsk_hard_decision(soft))
            decisions[i] = decision
            self._step(X[i], decision)
        self.soft_estimates_ = softs
        return decisions
