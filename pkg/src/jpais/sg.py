"""Stochastic-gradient joint adaptation of the receive filter and allocation.

Per symbol the receiver forms the error e = b - w^H r and descends the
instantaneous Lagrangian:

    w <- w + mu e* r
    a <- a + alpha (g + lambda a),   g = B^H H^H C^H w e

Two routes enforce the power constraint. The lambda-quadratic variant
substitutes the update into ||a||^2 = P_A and solves the resulting real
quadratic for the multiplier, picking the admissible root (the one whose
update lands closest to the constraint); an exact rescale then removes the
residual drift. The normalized variant relaxes the constraint (lambda = 0)
and projects back onto it after every step. When the quadratic has no real
root the lambda variant falls back to the projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .model import qpsk_hard_decision
from .validation import (as_complex_vector, check_positive, check_received_matrix,
                         check_symbol_vector)

VARIANTS = ("lambda-quadratic", "normalized")


def prediction_error(taps, received, pilot) -> complex:
    """A priori error e = b - w^H r."""
    return complex(pilot - np.vdot(taps, received))


def update_receiver_taps(taps, received, error, step: float) -> np.ndarray:
    """LMS-style filter update w + mu e* r."""
    return taps + step * np.conj(error) * received


def power_gradient(symbol_diag, channel_matrix, code_stack, taps, error) -> np.ndarray:
    """Allocation gradient term g = B^H H^H C^H w e (multiplier handled by caller)."""
    q = (np.asarray(code_stack) @ np.asarray(channel_matrix)).conj().T @ taps
    return np.conj(np.asarray(symbol_diag, dtype=complex)) * q * error


@dataclass(frozen=True)
class QuadraticCoefficients:
    """Real coefficients of the constraint quadratic a_c l^2 + b_c l + c_c = 0."""

    a_c: float
    b_c: float
    c_c: float


def lambda_quadratic_coefficients(symbol_diag, channel_matrix, code_stack, taps,
                                  power, error, power_step: float,
                                  budget: float) -> QuadraticCoefficients:
    """Coefficients of the multiplier quadratic for the current state.

    Built from the filtered signature response q = H^H C^H w; the printed
    expressions are complex in general, so their real parts are used (the
    exact rescale afterwards absorbs any residual).
    """
    q = (np.asarray(code_stack) @ np.asarray(channel_matrix)).conj().T @ taps
    symbol_diag = np.asarray(symbol_diag, dtype=complex)
    power = np.asarray(power, dtype=complex)
    v = complex(np.vdot(q, symbol_diag * power))   # w^H C H B a
    bb = float(np.sum(np.abs(q) ** 2 * np.abs(symbol_diag) ** 2))
    alpha = float(power_step)
    a_c = float(budget)
    b_c = 2.0 * budget - alpha ** 2 * 2.0 * v.real
    c_c = (alpha * (np.conj(v) * error + v)).real + alpha ** 2 * bb * abs(error) ** 2
    return QuadraticCoefficients(a_c=a_c, b_c=b_c, c_c=c_c)


def solve_lambda_quadratic(coeffs: QuadraticCoefficients):
    """Real roots of the multiplier quadratic, ascending, or None if complex.

    Uses the standard root formula l = (-b +- sqrt(b^2 - 4ac)) / (2a).
    """
    if coeffs.a_c == 0:
        raise ValueError("leading coefficient must be nonzero (it equals the power budget)")
    disc = coeffs.b_c ** 2 - 4.0 * coeffs.a_c * coeffs.c_c
    if disc < 0:
        return None
    root = np.sqrt(disc)
    low = (-coeffs.b_c - root) / (2.0 * coeffs.a_c)
    high = (-coeffs.b_c + root) / (2.0 * coeffs.a_c)
    return (low, high) if low <= high else (high, low)


def update_power_lambda(power, gradient, roots, power_step: float, budget: float) -> np.ndarray:
    """Multiplier-variant allocation update with the admissible root.

    Among the real roots, picks the one whose updated allocation is closest
    to the constraint (ties: smaller |lambda|), then rescales exactly.
    """
    power = as_complex_vector(power, name="allocation")
    best = None
    for lam in roots:
        candidate = power + power_step * (gradient + lam * power)
        violation = abs(float(np.linalg.norm(candidate) ** 2) - budget)
        key = (violation, abs(lam))
        if best is None or key < best[0]:
            best = (key, candidate)
    updated = best[1]
    norm = np.linalg.norm(updated)
    if norm == 0:
        raise ValueError("allocation update collapsed to zero")
    return updated * (np.sqrt(budget) / norm)


def update_power_normalized(power, gradient, power_step: float, budget: float) -> np.ndarray:
    """Relaxed update a + alpha g followed by projection onto ||a||^2 = budget."""
    power = as_complex_vector(power, name="allocation")
    updated = power + power_step * gradient
    norm = np.linalg.norm(updated)
    if norm == 0:
        raise ValueError("allocation update collapsed to zero")
    return updated * (np.sqrt(budget) / norm)


class SgJpaisReceiver(BaseEstimator):
    """Stochastic-gradient joint receiver/allocation estimator for one user.

    fit(X, y) runs the supervised training recursion over the (n_symbols,
    dim) received vectors X and known symbols y; predict(X) continues in
    decision-directed mode and returns hard symbol decisions. The power
    recursion needs a channel matrix: pass the true one via ``channel`` or
    a live estimator (with ``update``/``matrix`` methods) via
    ``channel_estimator``; the estimator is driven during fit and frozen
    during predict. ``adapt_power=False`` freezes the allocation (the
    equal-power and non-cooperative baselines).

    Fitted state: ``taps_``, ``power_``, ``training_error_trace_``,
    ``constraint_residuals_``, and ``soft_estimates_`` after predict.
    """

    def __init__(self, code_stack=None, step=0.025, power_step=0.015, budget=1.0,
                 variant="lambda-quadratic", channel=None, channel_estimator=None,
                 adapt_power=True, initial_power=None, applied_power=None):
        self.code_stack = code_stack
        self.step = step
        self.power_step = power_step
        self.budget = budget
        self.variant = variant
        self.channel = channel
        self.channel_estimator = channel_estimator
        self.adapt_power = adapt_power
        self.initial_power = initial_power
        self.applied_power = applied_power

    # -- plumbing -----------------------------------------------------------

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

    def _initial_allocation(self) -> np.ndarray:
        if self.initial_power is not None:
            return as_complex_vector(self.initial_power, name="initial_power").copy()
        n_links = self._n_links()
        return np.full(n_links, np.sqrt(self.budget / n_links), dtype=complex)

    # -- recursion ----------------------------------------------------------

    def _adapt_power(self, received, pilot, error):
        channel_matrix = self._channel_matrix()
        symbol_diag = np.full(self.power_.shape[0], pilot, dtype=complex)
        gradient = power_gradient(symbol_diag, channel_matrix, self.code_stack,
                                  self.taps_, error)
        if self.variant == "lambda-quadratic":
            coeffs = lambda_quadratic_coefficients(
                symbol_diag, channel_matrix, self.code_stack, self.taps_,
                self.power_, error, self.power_step, self.budget)
            roots = solve_lambda_quadratic(coeffs)
            if roots is None:
                self.power_ = update_power_normalized(
                    self.power_, gradient, self.power_step, self.budget)
            else:
                self.power_ = update_power_lambda(
                    self.power_, gradient, roots, self.power_step, self.budget)
        else:
            self.power_ = update_power_normalized(
                self.power_, gradient, self.power_step, self.budget)
        self.constraint_residuals_.append(
            abs(float(np.linalg.norm(self.power_) ** 2) - self.budget))

    def _step(self, received, pilot) -> complex:
        error = prediction_error(self.taps_, received, pilot)
        if self.channel_estimator is not None:
            self.channel_estimator.update(received, pilot, self.applied_power_)
        if self.adapt_power:
            self._adapt_power(received, pilot, error)
        self.taps_ = update_receiver_taps(self.taps_, received, error, self.step)
        return error

    # -- estimator API ------------------------------------------------------

    def _reset(self, dim: int) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        check_positive(self.budget, "budget")
        if self.step < 0 or self.power_step < 0:
            raise ValueError("step sizes cannot be negative")
        self.taps_ = np.zeros(dim, dtype=complex)
        self.power_ = self._initial_allocation()
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
        """Record the allocation the transmitter now applies (ideal feedback)."""
        self.applied_power_ = as_complex_vector(allocation).copy()

    def predict(self, X) -> np.ndarray:
        """Decision-directed detection; adapts on its own decisions."""
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
