"""Closed-form constrained MMSE design of receive filters and power allocation.

Given the stacked code matrices C_k and the block channel matrix H, the
receiver for user k is w = R^-1 p with

    R = sum_k C_k H E[B_k a_k a_k^H B_k^H] H^H C_k^H + sigma^2 I
    p = C_k H E[b* B_k] a_k

and the allocation solves (R_a + lambda I) a = p_a with

    R_a = E[B_k^H H^H C_k^H w w^H C_k H B_k]
    p_a = E[b B_k^H] H^H C_k^H w

followed by an exact rescale onto the power budget ||a||^2 = P_A. The
symbol matrix B_k = diag(b, b~_1, ..., b~_nr) is random, so expectations
enter through its second-moment matrix: with unit-power symbols and
unit-power relay outputs, E[B_jj B_ll^*] = beta_j beta_l^* off the
diagonal and 1 on it, where beta_j = E[b~_j b^*] is the relay coherence
(beta_0 = 1). Perfect relaying (beta = 1) is the default.

The two linear solves depend on each other and are alternated from the
equal-power initialization (a Jacobi sweep: all filters, then all
allocations, then the covariance is rebuilt).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import as_complex_matrix, as_complex_vector


@dataclass(frozen=True)
class CovariancePair:
    """Destination covariance R and the desired user's cross-correlation p."""

    matrix: np.ndarray
    cross: np.ndarray


@dataclass(frozen=True)
class PowerCovariancePair:
    """Allocation-space normal equations (R_a, p_a) for one user."""

    matrix: np.ndarray
    cross: np.ndarray


@dataclass
class JpaisSolution:
    """Result of the alternating solve."""

    filters: np.ndarray        # (K, (n_r+1)M)
    allocations: np.ndarray    # (K, n_r+1)
    iterations: int
    converged: bool
    mse: np.ndarray            # (K,) final per-user MSE
    w_step_mse: list = field(default_factory=list)  # (before, after) pairs per sweep


def symbol_moment_matrix(beta) -> np.ndarray:
    """Second-moment matrix E[diag(B) diag(B)^H] of the symbol diagonal.

    ``beta`` are the per-link coherences (beta_0 = 1 for the direct link).
    Diagonal entries are exactly 1 because direct symbols have unit energy
    and relay outputs are rescaled to unit average power.
    """
    beta = as_complex_vector(beta, name="coherence vector")
    moment = np.outer(beta, beta.conj())
    np.fill_diagonal(moment, 1.0)
    return moment


def signature_response(code_stack, channel_matrix) -> np.ndarray:
    """(n_r+1)M x (n_r+1) per-link signature response C_k H."""
    return np.asarray(code_stack, dtype=complex) @ np.asarray(channel_matrix, dtype=complex)


def _default_betas(n_users: int, n_links: int) -> np.ndarray:
    return np.ones((n_users, n_links), dtype=complex)


def build_covariance(signatures, amplitudes, sigma2: float, user: int,
                     betas=None) -> CovariancePair:
    """Destination covariance and cross-correlation for the requested user.

    ``signatures`` is the (K, dim, n_r+1) stack of C_k H products and
    ``amplitudes`` the (K, n_r+1) allocations. R is Hermitian and, for
    sigma2 > 0, positive definite.
    """
    if sigma2 < 0:
        raise ValueError("noise variance cannot be negative")
    signatures = np.asarray(signatures, dtype=complex)
    amplitudes = np.asarray(amplitudes, dtype=complex)
    n_users, dim, n_links = signatures.shape
    if betas is None:
        betas = _default_betas(n_users, n_links)
    betas = np.asarray(betas, dtype=complex)
    cov = sigma2 * np.eye(dim, dtype=complex)
    for k in range(n_users):
        weights = np.outer(amplitudes[k], amplitudes[k].conj()) * symbol_moment_matrix(betas[k])
        cov += signatures[k] @ weights @ signatures[k].conj().T
    cov = 0.5 * (cov + cov.conj().T)
    cross = signatures[user] @ (betas[user] * amplitudes[user])
    return CovariancePair(matrix=cov, cross=cross)


def mmse_receiver(cov: CovariancePair) -> np.ndarray:
    """Wiener solution w = R^-1 p; raises on a singular covariance."""
    matrix = as_complex_matrix(cov.matrix, name="covariance")
    cross = as_complex_vector(cov.cross, length=matrix.shape[0], name="cross-correlation")
    try:
        taps = np.linalg.solve(matrix, cross)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "singular covariance (zero-noise degenerate case?)") from exc
    if not np.all(np.isfinite(taps)):
        raise np.linalg.LinAlgError("covariance solve produced non-finite taps")
    return taps


def rescale_to_budget(allocation, budget: float) -> np.ndarray:
    """Scale the allocation onto the power constraint ||a||^2 = budget."""
    allocation = as_complex_vector(allocation, name="allocation")
    norm = np.linalg.norm(allocation)
    if norm == 0:
        raise ValueError("cannot rescale a zero allocation onto the budget")
    return allocation * (np.sqrt(budget) / norm)


def power_normal_equations(signature, taps, beta=None) -> PowerCovariancePair:
    """Allocation-space normal equations for one user given its filter.

    With q = H^H C_k^H w, R_a = (q q^H) elementwise-times conj(moment) and
    p_a = conj(beta) * q.
    """
    signature = np.asarray(signature, dtype=complex)
    taps = as_complex_vector(taps, length=signature.shape[0], name="filter taps")
    n_links = signature.shape[1]
    if beta is None:
        beta = np.ones(n_links, dtype=complex)
    beta = as_complex_vector(beta, length=n_links, name="coherence vector")
    q = signature.conj().T @ taps
    matrix = np.outer(q, q.conj()) * symbol_moment_matrix(beta).conj()
    matrix = 0.5 * (matrix + matrix.conj().T)
    cross = beta.conj() * q
    return PowerCovariancePair(matrix=matrix, cross=cross)


def mmse_power_allocation(pcov: PowerCovariancePair, ridge: float, budget: float) -> np.ndarray:
    """Regularized allocation solve (R_a + ridge I)^-1 p_a, rescaled to the budget.

    The multiplier has no closed form, so ``ridge`` acts as a fixed
    regularizer and feasibility is enforced by the exact rescale.
    """
    matrix = as_complex_matrix(pcov.matrix, name="allocation covariance")
    n_links = matrix.shape[0]
    try:
        allocation = np.linalg.solve(matrix + ridge * np.eye(n_links), pcov.cross)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("regularized allocation solve is singular") from exc
    return rescale_to_budget(allocation, budget)


def model_mse(taps, cov: CovariancePair) -> float:
    """E|b - w^H r|^2 under the covariance model (unit symbol energy)."""
    taps = as_complex_vector(taps, name="filter taps")
    quad = np.real(taps.conj() @ cov.matrix @ taps)
    cross = np.real(np.vdot(taps, cov.cross))
    return float(1.0 - 2.0 * cross + quad)


def alternating_jpais_solve(signatures, sigma2: float, budget: float, ridge: float = 0.02,
                            n_iters: int = 10, tol: float = 1e-6,
                            betas=None) -> JpaisSolution:
    """Alternate the filter and allocation solves from the equal-power start.

    Each sweep rebuilds the covariance at the current allocations, solves
    every user's filter (recording the MSE before/after the exact w-step),
    then refreshes every allocation. Stops when the relative change of all
    filters and allocations drops below ``tol``. Non-convergence is reported
    through the ``converged`` flag, never raised: the joint problem is
    non-convex and the fixed point is whatever the sweep settles on.
    """
    if n_iters < 1:
        raise ValueError("need at least one iteration")
    signatures = np.asarray(signatures, dtype=complex)
    n_users, dim, n_links = signatures.shape
    if betas is None:
        betas = _default_betas(n_users, n_links)
    betas = np.asarray(betas, dtype=complex)

    allocations = np.full((n_users, n_links), np.sqrt(budget / n_links), dtype=complex)
    filters = np.empty((n_users, dim), dtype=complex)
    for k in range(n_users):
        cov = build_covariance(signatures, allocations, sigma2, k, betas)
        cross = cov.cross
        filters[k] = cross / np.linalg.norm(cross)

    solution = JpaisSolution(filters=filters, allocations=allocations, iterations=0,
                             converged=False, mse=np.zeros(n_users))
    for iteration in range(1, n_iters + 1):
        new_filters = np.empty_like(filters)
        step_pairs = []
        for k in range(n_users):
            cov = build_covariance(signatures, allocations, sigma2, k, betas)
            before = model_mse(filters[k], cov)
            new_filters[k] = mmse_receiver(cov)
            after = model_mse(new_filters[k], cov)
            step_pairs.append((before, after))
        new_allocations = np.empty_like(allocations)
        for k in range(n_users):
            pcov = power_normal_equations(signatures[k], new_filters[k], betas[k])
            new_allocations[k] = mmse_power_allocation(pcov, ridge, budget)

        delta_w = np.linalg.norm(new_filters - filters) / max(np.linalg.norm(new_filters), 1e-30)
        delta_a = np.linalg.norm(new_allocations - allocations) / max(
            np.linalg.norm(new_allocations), 1e-30)
        filters, allocations = new_filters, new_allocations
        solution.w_step_mse.append(step_pairs)
        solution.iterations = iteration
        if max(delta_w, delta_a) < tol:
            solution.converged = True
            break

    # final filter refresh so the reported pair (w, a) is mutually consistent
    mse = np.empty(n_users)
    for k in range(n_users):
        cov = build_covariance(signatures, allocations, sigma2, k, betas)
        filters[k] = mmse_receiver(cov)
        mse[k] = model_mse(filters[k], cov)
    solution.filters = filters
    solution.allocations = allocations
    solution.mse = mse
    return solution
