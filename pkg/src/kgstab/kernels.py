"""Hot inner loops, each in a numba and a numpy flavour.

The public names at the bottom of the module are bound to whichever flavour
``kgstab._accel`` selected.  Both flavours are importable under their
suffixed names so the benchmark and the tests can compare them directly.
"""

import numpy as np

from ._accel import njit, pick


# ---------------------------------------------------------------------------
# integer scan for exact resonances  |sum_j k_j w_j| == target


@njit(cache=True)
def _h3_scan_nb(omegas, order, target, tol):
    n = omegas.shape[0]
    out = []
    vec = np.zeros(n, dtype=np.int64)
    # odometer over [-order, order]^n; pruning on the l1 norm
    for j in range(n):
        vec[j] = -order
    while True:
        l1 = 0
        for j in range(n):
            l1 += abs(vec[j])
        if 0 < l1 <= order:
            s = 0.0
            for j in range(n):
                s += vec[j] * omegas[j]
            if abs(abs(s) - target) < tol:
                out.append(vec.copy())
        j = n - 1
        while j >= 0:
            vec[j] += 1
            if vec[j] <= order:
                break
            vec[j] = -order
            j -= 1
        if j < 0:
            break
    res = np.zeros((len(out), n), dtype=np.int64)
    for i in range(len(out)):
        res[i] = out[i]
    return res


def _h3_scan_np(omegas, order, target, tol):
    n = omegas.shape[0]
    axis = np.arange(-order, order + 1, dtype=np.int64)
    found = []
    # chunk over the leading coordinate to bound memory
    rest = n - 1
    if rest:
        tail = np.stack(np.meshgrid(*([axis] * rest), indexing="ij"), axis=-1).reshape(-1, rest)
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
    tail_l1 = np.abs(tail).sum(axis=1)
    tail_sum = tail @ omegas[1:] if rest else np.zeros(1)
    for k0 in axis:
        l1 = tail_l1 + abs(k0)
        s = tail_sum + k0 * omegas[0]
        keep = (l1 > 0) & (l1 <= order) & (np.abs(np.abs(s) - target) < tol)
        if keep.any():
            block = np.empty((int(keep.sum()), n), dtype=np.int64)
            block[:, 0] = k0
            block[:, 1:] = tail[keep]
            found.append(block)
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate(found)


# ---------------------------------------------------------------------------
# compositions: all nonnegative integer vectors of length d with sum == t


@njit(cache=True)
def _compositions_nb(d, t):
    count = 1
    for i in range(1, d):
        count = count * (t + i) // i
    out = np.zeros((count, d), dtype=np.int64)
    if d == 0:
        return out
    vec = np.zeros(d, dtype=np.int64)
    vec[d - 1] = t
    for row in range(count):
        out[row] = vec
        # lexicographic successor: bump the slot left of the last nonzero
        p = d - 1
        while p > 0 and vec[p] == 0:
            p -= 1
        k = p - 1
        if k < 0:
            break
        vec[k] += 1
        head = 0
        for j in range(k + 1):
            head += vec[j]
        for j in range(k + 1, d):
            vec[j] = 0
        vec[d - 1] = t - head
    return out


def _compositions_np(d, t):
    if d == 0:
        return np.zeros((1 if t == 0 else 0, 0), dtype=np.int64)
    if d == 1:
        return np.array([[t]], dtype=np.int64)
    blocks = []
    for first in range(t + 1):
        sub = _compositions_np(d - 1, t - first)
        block = np.empty((sub.shape[0], d), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = sub
        blocks.append(block)
    return np.concatenate(blocks)


# ---------------------------------------------------------------------------
# resonant pairs (mu, nu) with |nu| = |mu| + 1 at a fixed level |mu| = t
#
# A pair belongs to M(r) when |(mu - nu).w| > thr and some K with nu_K >= 1
# leaves margins (mu, nu - e_K) realisable by a zero-diagonal nonnegative
# integer matrix, i.e.  mu_J + (nu - e_K)_J <= t  for every J.


@njit(cache=True)
def _level_pairs_nb(mus, nus, omegas, thr, tol):
    t = 0
    d = omegas.shape[0]
    if mus.shape[0] > 0:
        for j in range(d):
            t += mus[0, j]
    fm = mus.astype(np.float64) @ omegas
    fn = nus.astype(np.float64) @ omegas
    keep_i = []
    keep_j = []
    keep_k = []
    near_i = []
    near_j = []
    for i in range(mus.shape[0]):
        for j in range(nus.shape[0]):
            f = abs(fm[i] - fn[j])
            if f <= thr - tol:
                continue
            kk = -1
            for K in range(d):
                if nus[j, K] == 0:
                    continue
                ok = True
                for J in range(d):
                    b = nus[j, J] - (1 if J == K else 0)
                    if mus[i, J] + b > t:
                        ok = False
                        break
                if ok:
                    kk = K
                    break
            if kk < 0:
                continue
            if f <= thr + tol:
                near_i.append(i)
                near_j.append(j)
                continue
            keep_i.append(i)
            keep_j.append(j)
            keep_k.append(kk)
    a = np.empty(len(keep_i), dtype=np.int64)
    b = np.empty(len(keep_i), dtype=np.int64)
    c = np.empty(len(keep_i), dtype=np.int64)
    for q in range(len(keep_i)):
        a[q] = keep_i[q]
        b[q] = keep_j[q]
        c[q] = keep_k[q]
    na = np.empty(len(near_i), dtype=np.int64)
    nb = np.empty(len(near_i), dtype=np.int64)
    for q in range(len(near_i)):
        na[q] = near_i[q]
        nb[q] = near_j[q]
    return a, b, c, na, nb


def _level_pairs_np(mus, nus, omegas, thr, tol):
    d = omegas.shape[0]
    t = int(mus[0].sum()) if mus.shape[0] else 0
    f = np.abs((mus @ omegas)[:, None] - (nus @ omegas)[None, :])
    cand_i, cand_j = np.nonzero(f > thr - tol)
    if cand_i.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty, empty
    mu_c = mus[cand_i]
    nu_c = nus[cand_j]
    first_k = np.full(cand_i.size, -1, dtype=np.int64)
    for K in range(d - 1, -1, -1):
        b = nu_c.copy()
        b[:, K] -= 1
        ok = (nu_c[:, K] > 0) & np.all(mu_c + b <= t, axis=1)
        first_k = np.where(ok, K, first_k)
    real = first_k >= 0
    fc = f[cand_i, cand_j]
    near = real & (fc <= thr + tol)
    keep = real & ~near
    return (cand_i[keep], cand_j[keep], first_k[keep],
            cand_i[near], cand_j[near])


# ---------------------------------------------------------------------------
# minimality under componentwise domination


@njit(cache=True)
def _dominated_nb(cand, base):
    out = np.zeros(cand.shape[0], dtype=np.bool_)
    d = cand.shape[1]
    for i in range(cand.shape[0]):
        for j in range(base.shape[0]):
            le = True
            for k in range(d):
                if base[j, k] > cand[i, k]:
                    le = False
                    break
            if le:
                out[i] = True
                break
    return out


def _dominated_np(cand, base):
    if base.shape[0] == 0 or cand.shape[0] == 0:
        return np.zeros(cand.shape[0], dtype=bool)
    out = np.zeros(cand.shape[0], dtype=bool)
    step = max(1, 2_000_000 // max(1, base.shape[0] * cand.shape[1]))
    for s in range(0, cand.shape[0], step):
        blk = cand[s:s + step]
        out[s:s + step] = np.any(np.all(base[None, :, :] <= blk[:, None, :], axis=2), axis=1)
    return out


# ---------------------------------------------------------------------------
# toy model: one Strang step in the Fourier frame
#
# hk    Fourier coefficients of h at the coupling time
# gm    reflected transform of G, so that  int h G dx = scale * sum(hk * gm)
# phase exp(-i |xi|^2 dt) on the grid
# a     impulse amplitude: hk += a * conj(gm)
# returns the updated coupling integral  scale * sum(hk_new * gm)


@njit(cache=True)
def _toy_fourier_step_nb(hk, gm, phase, a, scale):
    acc = 0.0 + 0.0j
    flat_h = hk.ravel()
    flat_g = gm.ravel()
    flat_p = phase.ravel()
    for i in range(flat_h.shape[0]):
        g = flat_g[i]
        v = (flat_h[i] + a * np.conj(g)) * flat_p[i]
        flat_h[i] = v
        acc += v * g
    return acc * scale


def _toy_fourier_step_np(hk, gm, phase, a, scale):
    hk += a * np.conj(gm)
    hk *= phase
    return scale * np.sum(hk * gm)


# ---------------------------------------------------------------------------
# NLKG pointwise kick  v <- v - dt * |u|^2 u / r^2   (w = r u representation)


@njit(cache=True)
def _cubic_kick_nb(u, v, inv_r2, dt):
    for i in range(u.shape[0]):
        a = u[i]
        v[i] -= dt * (a.real * a.real + a.imag * a.imag) * inv_r2[i] * a


def _cubic_kick_np(u, v, inv_r2, dt):
    v -= dt * (np.abs(u) ** 2 * inv_r2) * u


h3_scan = pick(_h3_scan_nb, _h3_scan_np)
compositions = pick(_compositions_nb, _compositions_np)
level_pairs = pick(_level_pairs_nb, _level_pairs_np)
dominated = pick(_dominated_nb, _dominated_np)
toy_fourier_step = pick(_toy_fourier_step_nb, _toy_fourier_step_np)
cubic_kick = pick(_cubic_kick_nb, _cubic_kick_np)
