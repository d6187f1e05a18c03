"""Hot numeric kernels.

Every kernel has a loop implementation (compiled with numba) and a numpy
implementation (used when ``ANACONDA_SIM_NO_JIT`` is set).  The loop
versions stay importable as ``*_loop`` so tests can compare both paths in
a single process.

Cell sets are stored as rows of a padded ``int32`` matrix ``cells`` with the
valid length of row ``g`` in ``ncells[g]``.  Membership of a running union
is tracked in an ``int64`` scratch array ``mark``: a cell belongs to the
union iff ``mark[cell] == stamp``; bumping ``stamp`` clears it in O(1).
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------- sampling


def sample_index_loop(logw, n, u):
    """Inverse-CDF draw from ``exp(logw[:n])`` normalised; returns (index, prob)."""
    m = logw[0]
    for i in range(1, n):
        if logw[i] > m:
            m = logw[i]
    total = 0.0
    for i in range(n):
        total += np.exp(logw[i] - m)
    target = u * total
    acc = 0.0
    for i in range(n):
        w = np.exp(logw[i] - m)
        acc += w
        if target < acc:
            return i, w / total
    return n - 1, np.exp(logw[n - 1] - m) / total


def sample_index_np(logw, n, u):
    w = np.exp(logw[:n] - logw[:n].max())
    c = np.cumsum(w)
    total = c[-1]
    i = min(int(np.searchsorted(c, u * total, side="right")), n - 1)
    return i, w[i] / total


def distribution_loop(logw, n, out):
    m = logw[0]
    for i in range(1, n):
        if logw[i] > m:
            m = logw[i]
    total = 0.0
    for i in range(n):
        out[i] = np.exp(logw[i] - m)
        total += out[i]
    for i in range(n):
        out[i] /= total
    return out


def distribution_np(logw, n, out):
    w = np.exp(logw[:n] - logw[:n].max())
    out[:n] = w / np.cumsum(w)[-1]
    return out


# ---------------------------------------------------------- weight updates


def mwu_update_loop(logw, rewards, eta):
    for a in range(rewards.shape[0]):
        logw[a] += eta * rewards[a]


def mwu_update_np(logw, rewards, eta):
    logw[: rewards.shape[0]] += eta * rewards


def exp3ix_update_loop(logw, n, chosen, q, reward, eta, gamma):
    """Implicit-exploration estimate then exponential update, in place.

    Non-chosen arms get estimated reward 1; the chosen arm gets
    ``1 - (1 - reward) / (q + gamma)``.  Returns the chosen arm's estimate.
    """
    est = 1.0 - (1.0 - reward) / (q + gamma)
    for j in range(n):
        if j == chosen:
            logw[j] += eta * est
        else:
            logw[j] += eta * 1.0
    return est


def exp3ix_update_np(logw, n, chosen, q, reward, eta, gamma):
    est = 1.0 - (1.0 - reward) / (q + gamma)
    r = np.ones(n)
    r[chosen] = est
    logw[:n] += eta * r
    return est


# ------------------------------------------------------------- cell unions


def mark_cells_loop(mark, row, n, stamp):
    """Add ``row[:n]`` to the union; returns how many cells were new."""
    added = 0
    for c in range(n):
        cell = row[c]
        if mark[cell] != stamp:
            mark[cell] = stamp
            added += 1
    return added


def mark_cells_np(mark, row, n, stamp):
    idx = row[:n]
    added = int(np.count_nonzero(mark[idx] != stamp))
    mark[idx] = stamp
    return added


def count_unmarked_loop(mark, row, n, stamp):
    """Cells of ``row[:n]`` outside the current union."""
    k = 0
    for c in range(n):
        if mark[row[c]] != stamp:
            k += 1
    return k


def count_unmarked_np(mark, row, n, stamp):
    return int(np.count_nonzero(mark[row[:n]] != stamp))


def union_count_loop(cells, ncells, ids, k, mark, stamp):
    total = 0
    for s in range(k):
        g = ids[s]
        total += mark_cells(mark, cells[g], ncells[g], stamp)
    return total


def union_count_np(cells, ncells, ids, k, mark, stamp):
    if k == 0:
        return 0
    parts = [cells[g, : ncells[g]] for g in ids[:k]]
    return int(np.unique(np.concatenate(parts)).size)


if USE_NUMBA:
    sample_index = njit(cache=True, nogil=True)(sample_index_loop)
    distribution = njit(cache=True, nogil=True)(distribution_loop)
    mwu_update = njit(cache=True, nogil=True)(mwu_update_loop)
    exp3ix_update = njit(cache=True, nogil=True)(exp3ix_update_loop)
    mark_cells = njit(cache=True, nogil=True)(mark_cells_loop)
    count_unmarked = njit(cache=True, nogil=True)(count_unmarked_loop)
    union_count = njit(cache=True, nogil=True)(union_count_loop)
else:
    sample_index = sample_index_np
    distribution = distribution_np
    mwu_update = mwu_update_np
    exp3ix_update = exp3ix_update_np
    mark_cells = mark_cells_np
    count_unmarked = count_unmarked_np
    union_count = union_count_np


# ------------------------------------------------------- fused ANACONDA loop


def _simulate_anaconda(
    cells,
    ncells,
    n_grid,
    cell_area,
    n_dirs,
    cand,
    ncand,
    alpha,
    eta1,
    eta2,
    gamma,
    scale,
    u_act,
    u_nb,
    logw_act,
    logw_nb,
    actions,
    draws,
    f_values,
    evals,
    messages,
):
    """Run every round of the coverage game in one call.

    Agent ``i`` owns global actions ``i*n_dirs .. i*n_dirs+n_dirs-1``.  Inputs
    ``u_act[i, t]`` and ``u_nb[i, k, t]`` are the pre-drawn uniforms of the
    per-learner streams.  Outputs are written into ``actions`` (T, n),
    ``draws`` (T, n, alpha_max; agent ids, -1 padded), ``f_values`` (T,),
    ``evals`` (T, n) and ``messages`` (T,).  Returns the reward clamp count.

    The arithmetic mirrors the object-level agents term for term so both
    paths produce identical traces from identical streams.
    """
    n = ncand.shape[0]
    T = u_act.shape[1]
    amax = u_nb.shape[1]
    mark = np.zeros(n_grid, dtype=np.int64)
    stamp = 0
    all_ids = np.empty(n, dtype=np.int64)
    rewards = np.empty(n_dirs)
    picked = np.empty(max(amax, 1), dtype=np.int64)
    probs = np.empty(max(amax, 1))
    clamps = 0

    for t in range(T):
        for i in range(n):
            a, _ = sample_index(logw_act[i], n_dirs, u_act[i, t])
            actions[t, i] = a
            all_ids[i] = i * n_dirs + a

        stamp += 1
        f_values[t] = union_count(cells, ncells, all_ids, n, mark, stamp) * cell_area

        msg = 0
        for i in range(n):
            for k in range(alpha[i]):
                j, q = sample_index(logw_nb[i, k], ncand[i], u_nb[i, k, t])
                picked[k] = j
                probs[k] = q
                draws[t, i, k] = cand[i, j]
            # distinct senders, each delivering its one action
            for k in range(alpha[i]):
                dup = False
                for kk in range(k):
                    if picked[kk] == picked[k]:
                        dup = True
                        break
                if not dup:
                    msg += 1

            own = all_ids[i]
            stamp += 1
            cnt_ctx = 0
            n_own = ncells[own]
            f_a = n_own * cell_area
            mi_prev = 0.0
            for k in range(alpha[i]):
                g = all_ids[cand[i, picked[k]]]
                cnt_ctx += mark_cells(mark, cells[g], ncells[g], stamp)
                cnt_ctx_a = cnt_ctx + count_unmarked(mark, cells[own], n_own, stamp)
                f_ctx = cnt_ctx * cell_area
                f_ctx_a = cnt_ctx_a * cell_area
                mi = f_a - (f_ctx_a - f_ctx)
                r = (mi - mi_prev) / scale[i]
                if r < 0.0:
                    r = 0.0
                    clamps += 1
                elif r > 1.0:
                    r = 1.0
                    clamps += 1
                exp3ix_update(logw_nb[i, k], ncand[i], picked[k], probs[k], r, eta2[i], gamma[i])
                mi_prev = mi

            f_ctx = cnt_ctx * cell_area
            for a in range(n_dirs):
                g = i * n_dirs + a
                f_ctx_a = (cnt_ctx + count_unmarked(mark, cells[g], ncells[g], stamp)) * cell_area
                r = (f_ctx_a - f_ctx) / scale[i]
                if r < 0.0:
                    r = 0.0
                    clamps += 1
                elif r > 1.0:
                    r = 1.0
                    clamps += 1
                rewards[a] = r
            mwu_update(logw_act[i], rewards, eta1[i])
            evals[t, i] = n_dirs + 2 * alpha[i] + 1
        messages[t] = msg
    return clamps


simulate_anaconda = njit(cache=True, nogil=True)(_simulate_anaconda) if USE_NUMBA else _simulate_anaconda
