"""Non-cooperative (NCIS) and equal-power cooperative (CIS) references.

Both reuse the MMSE solver with a frozen allocation so that comparisons
against the joint scheme isolate the power allocation: NCIS spends the
whole budget on the direct link and filters only its M-chip window; CIS
splits the budget evenly across the n_r+1 links and filters the full
stacked vector.
"""

from __future__ import annotations

import numpy as np

from . import mmse


def equal_power_allocation(n_relays: int, budget: float) -> np.ndarray:
    """CIS allocation: sqrt(budget/(n_r+1)) on every link."""
    n_links = n_relays + 1
    return np.full(n_links, np.sqrt(budget / n_links), dtype=complex)


def direct_only_allocation(budget: float) -> np.ndarray:
    """NCIS allocation: the full budget on the direct link."""
    return np.array([np.sqrt(budget)], dtype=complex)


def ncis_receive(direct_window, taps) -> complex:
    """Soft symbol w^H r_bd from the direct window alone."""
    return complex(np.vdot(taps, direct_window))


def cis_receive(received, taps) -> complex:
    """Soft symbol w^H r from the stacked destination vector."""
    return complex(np.vdot(taps, received))


def fixed_allocation_filters(signatures, sigma2: float, allocation,
                             betas=None) -> np.ndarray:
    """Per-user MMSE filters with every user's allocation frozen.

    ``signatures`` is the (K, dim, n_links) stack of C_k H responses;
    ``allocation`` the shared frozen vector. This is the CIS solution on
    the full stack and the NCIS solution on single-link signatures.
    """
    signatures = np.asarray(signatures, dtype=complex)
    n_users = signatures.shape[0]
    allocations = np.tile(np.asarray(allocation, dtype=complex), (n_users, 1))
    filters = np.empty((n_users, signatures.shape[1]), dtype=complex)
    for k in range(n_users):
        cov = mmse.build_covariance(signatures, allocations, sigma2, k, betas)
        filters[k] = mmse.mmse_receiver(cov)
    return filters
