"""Compiled inner loop for the feasibility iteration.

The iteration spends essentially all of its time building small Hermitian
covariance matrices and evaluating quadratic forms h^H Phi^-1 h, so the whole
decision loop is JIT-compiled. A pure-numpy reference path lives in
``power``; both are cross-checked in the tests.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap if not (args and callable(args[0])) else args[0]


FEASIBLE = 0
POWER_EXCEEDED = 1
ITERATION_LIMIT = 2
NUMERIC_FAILURE = 3

# Relative slack when comparing an SINR against the threshold; absorbs
# rounding at fixed points that sit exactly on the threshold.
SINR_SLACK = 1e-12


@njit(cache=True)
def _solve_quadratics(gout, hvec, act, powers, noise_mw, phi, chol, y, q):
    """q[a, l] = h^H Phi^-1 h for every active pair/stream at power state `powers`.

    Phi excludes the pair's own stream but keeps its other stream (block
    code). Returns False if any covariance fails the Cholesky factorization
    or produces a nonfinite result.
    """
    n_active = act.shape[0]
    n_streams = hvec.shape[1]
    dim = hvec.shape[2]
    for a in range(n_active):
        ka = act[a]
        for l in range(n_streams):
            # Phi = sum of weighted outer products + noise * I
            for d in range(dim):
                for e in range(dim):
                    phi[d, e] = 0.0 + 0.0j
            for b in range(n_active):
                kb = act[b]
                for m in range(n_streams):
                    if b == a and m == l:
                        continue
                    p = powers[b, m]
                    if p > 0.0:
                        for d in range(dim):
                            for e in range(dim):
                                phi[d, e] += p * gout[ka, kb, m, d, e]
            for d in range(dim):
                phi[d, d] += noise_mw

            # Lower Cholesky factorization in place into `chol`.
            for d in range(dim):
                for e in range(dim):
                    chol[d, e] = phi[d, e]
            ok = True
            for i in range(dim):
                s = chol[i, i].real
                for k2 in range(i):
                    s -= (chol[i, k2] * np.conj(chol[i, k2])).real
                if not (s > 0.0) or not np.isfinite(s):
                    ok = False
                    break
                dii = np.sqrt(s)
                chol[i, i] = dii
                for j in range(i + 1, dim):
                    c = chol[j, i]
                    for k2 in range(i):
                        c -= chol[j, k2] * np.conj(chol[i, k2])
                    chol[j, i] = c / dii
            if not ok:
                return False

            # Forward solve L y = h; then h^H Phi^-1 h = ||y||^2.
            qs = 0.0
            for i in range(dim):
                c = hvec[ka, l, i]
                for k2 in range(i):
                    c -= chol[i, k2] * y[k2]
                y[i] = c / chol[i, i].real
                qs += (y[i] * np.conj(y[i])).real
            if not np.isfinite(qs) or qs <= 0.0:
                return False
            q[a, l] = qs
    return True


@njit(cache=True)
def feasibility_kernel(gout, hvec, rho_kk, act, noise_mw, gamma, pt_mw, imax):
    """Run the power iteration from zero and decide feasibility.

    gout:   (K, K, L, D, D) gain-weighted outer products
    hvec:   (K, L, D) desired effective vectors
    rho_kk: (K,) direct-link gains
    act:    (A,) active pair indices, 0-based

    Returns (status, iterations, powers (A, L), sinrs (A, L)).
    """
    n_active = act.shape[0]
    n_streams = hvec.shape[1]
    dim = hvec.shape[2]

    p_next = np.zeros((n_active, n_streams))
    q_cur = np.empty((n_active, n_streams))
    q_next = np.empty((n_active, n_streams))
    sinr = np.zeros((n_active, n_streams))
    phi = np.empty((dim, dim), dtype=np.complex128)
    chol = np.empty((dim, dim), dtype=np.complex128)
    y = np.empty(dim, dtype=np.complex128)

    # At the all-zero start the covariance is noise * I.
    for a in range(n_active):
        ka = act[a]
        for l in range(n_streams):
            s = 0.0
            for d in range(dim):
                s += (hvec[ka, l, d] * np.conj(hvec[ka, l, d])).real
            q_cur[a, l] = s / noise_mw

    threshold = gamma * (1.0 - SINR_SLACK)
    for n in range(1, imax + 1):
        # Target-tracking update: the MMSE weight at the current state turns
        # the interferer sum plus noise into gamma / (rho_kk * q).
        for a in range(n_active):
            ka = act[a]
            for l in range(n_streams):
                p_next[a, l] = gamma / (rho_kk[ka] * q_cur[a, l])

        # Any pair over the cap can never recover (iterates only grow).
        for a in range(n_active):
            total = 0.0
            for l in range(n_streams):
                total += p_next[a, l]
            if total > pt_mw:
                return POWER_EXCEEDED, n, p_next, sinr

        if not _solve_quadratics(gout, hvec, act, p_next, noise_mw,
                                 phi, chol, y, q_next):
            return NUMERIC_FAILURE, n, p_next, sinr

        supported = True
        for a in range(n_active):
            ka = act[a]
            for l in range(n_streams):
                s = p_next[a, l] * rho_kk[ka] * q_next[a, l]
                sinr[a, l] = s
                if s < threshold:
                    supported = False
        if supported:
            return FEASIBLE, n, p_next, sinr

        q_cur, q_next = q_next, q_cur

    return ITERATION_LIMIT, imax, p_next, sinr
