"""Compiled kernels: xoshiro256** stream and the dual coordinate descent SVM solver."""

import numpy as np
from numba import njit

from .rng import seed_state

_U64 = np.uint64


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << _U64(k)) | (x >> _U64(64 - k))


@njit(cache=True)
def xo_next(s):
    result = _rotl(s[1] * _U64(5), 7) * _U64(9)
    t = s[1] << _U64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def xo_below(s, n):
    un = _U64(n)
    threshold = (_U64(0) - un) % un
    while True:
        x = xo_next(s)
        if x >= threshold:
            return np.int64(x % un)


@njit(cache=True)
def xo_shuffle(s, arr):
    for i in range(arr.shape[0] - 1, 0, -1):
        j = xo_below(s, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


def state_array(seed: int) -> np.ndarray:
    return np.array(seed_state(seed), dtype=np.uint64)


@njit(cache=True)
def _primal(indptr, indices, data, y, w, C):
    d = w.shape[0] - 1
    reg = 0.0
    for j in range(w.shape[0]):
        reg += w[j] * w[j]
    loss = 0.0
    for i in range(y.shape[0]):
        s = w[d]
        for p in range(indptr[i], indptr[i + 1]):
            s += w[indices[p]] * data[p]
        m = 1.0 - y[i] * s
        if m > 0.0:
            loss += m
    return 0.5 * reg + C * loss


@njit(cache=True)
def _dot(a, b):
    s = 0.0
    for j in range(a.shape[0]):
        s += a[j] * b[j]
    return s


@njit(cache=True, nogil=True)
def dual_cd(indptr, indices, data, y, C, tol, max_epochs, state, w, alpha, objective, dual):
    """Hinge-loss SVM by dual coordinate descent, bias as a constant feature 1.

    ``w`` has one extra trailing slot for the bias.  Variables stuck at a
    bound are shrunk out of the active set (liblinear heuristic); once the
    active set converges, all variables are restored and the run only ends
    after a full pass whose largest projected-gradient violation is below
    ``tol``.

    Coordinate steps decrease the dual objective but not necessarily the
    primal one, so the iterate with the lowest primal objective seen at the
    end of any epoch is kept and written back to ``w`` and ``alpha`` on
    return.  When non-empty, ``objective`` receives that incumbent's primal
    value and ``dual`` the current iterate's dual value
    ``0.5 |w|^2 - sum(alpha)`` after each epoch.  Returns
    ``(epochs_run, final_max_violation)``.
    """
    n = y.shape[0]
    d = w.shape[0] - 1
    qd = np.empty(n)
    for i in range(n):
        q = 1.0
        for p in range(indptr[i], indptr[i + 1]):
            q += data[p] * data[p]
        qd[i] = q
    order = np.arange(n)
    active = n
    pg_max_old = np.inf
    pg_min_old = -np.inf
    track = objective.shape[0] > 0
    best = np.inf
    w_best = w.copy()
    alpha_best = alpha.copy()
    max_viol = np.inf
    epoch = 0
    while epoch < max_epochs:
        xo_shuffle(state, order[:active])
        pg_max = -np.inf
        pg_min = np.inf
        max_viol = 0.0
        k = 0
        while k < active:
            i = order[k]
            s = w[d]
            for p in range(indptr[i], indptr[i + 1]):
                s += w[indices[p]] * data[p]
            g = y[i] * s - 1.0
            a = alpha[i]
            pg = 0.0
            if a == 0.0:
                if g > pg_max_old:
                    active -= 1
                    order[k] = order[active]
                    order[active] = i
                    continue
                if g < 0.0:
                    pg = g
            elif a == C:
                if g < pg_min_old:
                    active -= 1
                    order[k] = order[active]
                    order[active] = i
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            max_viol = max(max_viol, abs(pg))
            if pg != 0.0:
                na = min(max(a - g / qd[i], 0.0), C)
                delta = (na - a) * y[i]
                alpha[i] = na
                for p in range(indptr[i], indptr[i + 1]):
                    w[indices[p]] += delta * data[p]
                w[d] += delta
            k += 1
        obj = _primal(indptr, indices, data, y, w, C)
        if obj < best:
            best = obj
            w_best[:] = w
            alpha_best[:] = alpha
        if track:
            objective[epoch] = best
            dual[epoch] = 0.5 * _dot(w, w) - np.sum(alpha)
        epoch += 1
        if max_viol < tol:
            if active == n:
                break
            active = n
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    w[:] = w_best
    alpha[:] = alpha_best
    return epoch, max_viol


@njit(cache=True, nogil=True)
def dual_cd_gram(K, y, C, tol, max_epochs, state, alpha, objective, dual):
    """Same iteration and incumbent rule as :func:`dual_cd`, driven by a precomputed Gram matrix.

    ``K[i, j] = x_i . x_j + 1`` (the +1 is the bias feature).  Each update
    costs O(n) instead of O(nnz(x_i)), which wins when there are fewer
    samples than nonzeros per sample.  The caller recovers the weights as
    ``sum_i alpha_i y_i x_i``.
    """
    n = y.shape[0]
    f = np.zeros(n)  # f_i = w . x_i (bias included)
    order = np.arange(n)
    active = n
    pg_max_old = np.inf
    pg_min_old = -np.inf
    track = objective.shape[0] > 0
    best = np.inf
    alpha_best = alpha.copy()
    max_viol = np.inf
    epoch = 0
    while epoch < max_epochs:
        xo_shuffle(state, order[:active])
        pg_max = -np.inf
        pg_min = np.inf
        max_viol = 0.0
        k = 0
        while k < active:
            i = order[k]
            g = y[i] * f[i] - 1.0
            a = alpha[i]
            pg = 0.0
            if a == 0.0:
                if g > pg_max_old:
                    active -= 1
                    order[k] = order[active]
                    order[active] = i
                    continue
                if g < 0.0:
                    pg = g
            elif a == C:
                if g < pg_min_old:
                    active -= 1
                    order[k] = order[active]
                    order[active] = i
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            max_viol = max(max_viol, abs(pg))
            if pg != 0.0:
                na = min(max(a - g / K[i, i], 0.0), C)
                delta = (na - a) * y[i]
                alpha[i] = na
                for j in range(n):
                    f[j] += delta * K[i, j]
            k += 1
        reg = 0.0
        loss = 0.0
        for i in range(n):
            reg += alpha[i] * y[i] * f[i]
            m = 1.0 - y[i] * f[i]
            if m > 0.0:
                loss += m
        obj = 0.5 * reg + C * loss
        if obj < best:
            best = obj
            alpha_best[:] = alpha
        if track:
            objective[epoch] = best
            dual[epoch] = 0.5 * reg - np.sum(alpha)
        epoch += 1
        if max_viol < tol:
            if active == n:
                break
            active = n
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    alpha[:] = alpha_best
    return epoch, max_viol
