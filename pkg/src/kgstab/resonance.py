"""Resonant monomials of the mode amplitudes.

Indices are 1-based throughout, J, K in 1..2n, matching the doubled
frequency vector w~ = (w_1..w_n, -w_1..-w_n).  A pair multi-index m assigns
a count m_{JK} >= 0 to every ordered pair J != K and represents the
monomial prod (z_J conj(z_K))^{m_{JK}}.  Together with one extra conj(z_K)
it equals z^mu conj(z)^nu with mu = row sums of m and nu = column sums of m
plus e_K.

Production code never enumerates pair multi-indices beyond small sizes: a
pair (mu, nu) with |nu| = |mu| + 1 = t + 1 arises from some m and K exactly
when (mu, nu - e_K) are the margins of a loopless t-edge multigraph, i.e.
mu_J + (nu - e_K)_J <= t for every J.  The literal enumeration is kept as
``enumerate_M_K`` and serves as the test oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from . import kernels


def pair_list(n: int):
    """Ordered pairs (J, K), J != K, in lexicographic order (1-based)."""
    d = 2 * n
    return [(J, K) for J in range(1, d + 1) for K in range(1, d + 1) if J != K]


@dataclass(frozen=True)
class PairIndex:
    n: int
    entries: tuple  # counts in pair_list(n) order

    def __post_init__(self):
        if len(self.entries) != 2 * self.n * (2 * self.n - 1):
            raise ValueError("wrong number of pair entries")
        if any(e < 0 for e in self.entries):
            raise ValueError("pair multi-index entries must be nonnegative")

    @classmethod
    def from_dict(cls, n, counts: dict):
        pairs = pair_list(n)
        pos = {p: i for i, p in enumerate(pairs)}
        e = [0] * len(pairs)
        for (J, K), c in counts.items():
            e[pos[(J, K)]] += int(c)
        return cls(n, tuple(e))

    def as_dict(self) -> dict:
        return {p: c for p, c in zip(pair_list(self.n), self.entries) if c}

    def __getitem__(self, JK):
        return self.as_dict().get(tuple(JK), 0)

    @property
    def order(self) -> int:
        return int(sum(self.entries))

    def matrix(self) -> np.ndarray:
        d = 2 * self.n
        M = np.zeros((d, d), dtype=np.int64)
        for (J, K), c in zip(pair_list(self.n), self.entries):
            M[J - 1, K - 1] = c
        return M

    def margins(self, K: int = 0):
        """(mu, nu) of  conj(z_K) * Z^m ; K = 0 omits the extra factor."""
        M = self.matrix()
        mu = M.sum(axis=1)
        nu = M.sum(axis=0)
        if K:
            nu = nu.copy()
            nu[K - 1] += 1
        return tuple(int(x) for x in mu), tuple(int(x) for x in nu)

    def frequency(self, omegas) -> float:
        """sum m_{LJ} (w~_L - w~_J)."""
        w = np.asarray(omegas, dtype=float)
        return float(sum(c * (w[L - 1] - w[J - 1]) for (L, J), c in zip(pair_list(self.n), self.entries)))

    def evaluate(self, z) -> complex:
        out = 1.0 + 0j
        for (J, K), c in zip(pair_list(self.n), self.entries):
            if c:
                out *= (z[J - 1] * np.conj(z[K - 1])) ** c
        return out


def monomial(z, mu, nu) -> complex:
    z = np.asarray(z, dtype=complex)
    return complex(np.prod(z ** np.asarray(mu)) * np.prod(np.conj(z) ** np.asarray(nu)))


def enumerate_M_K(omegas, mass: float, K: int, r: int, tol: float | None = None):
    """All pair multi-indices with |m| <= r in the K-th class, by literal enumeration.

    K >= 1: |sum m_{LJ}(w~_L - w~_J) - w~_K| > m (strictly, beyond ``tol``).
    K == 0: the same sum vanishes within ``tol``.
    Returns ``(members, quarantine)``; ``quarantine`` holds those whose value
    lies within ``tol`` of the threshold and is therefore not classified.
    """
    w = np.asarray(omegas, dtype=float)
    d = len(w)
    if d % 2:
        raise ValueError("signed frequency vector must have even length")
    n = d // 2
    if not 0 <= K <= d:
        raise ValueError(f"class index {K} outside 0..{d}")
    tol = 1e-6 * mass if tol is None else tol
    pairs = pair_list(n)
    diffs = np.array([w[L - 1] - w[J - 1] for L, J in pairs])
    members, quarantine = [], []
    for t in range(r + 1):
        comps = kernels.compositions(len(pairs), t)
        vals = comps @ diffs
        if K == 0:
            hit = np.abs(vals) < tol
            near = np.zeros_like(hit)
        else:
            f = np.abs(vals - w[K - 1])
            hit = f > mass + tol
            near = np.abs(f - mass) <= tol
        members.extend(PairIndex(n, tuple(int(x) for x in row)) for row in comps[hit])
        quarantine.extend(PairIndex(n, tuple(int(x) for x in row)) for row in comps[near])
    return members, quarantine


@dataclass(frozen=True)
class MonomialPair:
    mu: tuple
    nu: tuple
    J_tilde: int  # 1-based class index K realising the pair

    @property
    def level(self) -> int:
        return int(sum(self.mu))

    def frequency(self, omegas) -> float:
        """L = (nu - mu) . w~"""
        return float((np.asarray(self.nu) - np.asarray(self.mu)) @ np.asarray(omegas, dtype=float))

    def key(self):
        return (self.mu, self.nu)


@dataclass(frozen=True, eq=False)
class ResonanceTable:
    n: int
    mass: float
    signed_omegas: np.ndarray
    N: int
    order: int  # r in M(r); 2N+4 by default
    M_min: tuple
    M: tuple | None  # None when the full set was too large to list
    quarantine: tuple
    tol: float

    @cached_property
    def Lambda(self) -> tuple:
        vals = sorted(p.frequency(self.signed_omegas) for p in self.M_min)
        out = []
        for v in vals:
            if not out or abs(v - out[-1]) > 1e-9 * max(1.0, self.mass):
                out.append(v)
        return tuple(out)

    def lambda_index(self, L: float) -> int:
        for i, v in enumerate(self.Lambda):
            if abs(v - L) <= 1e-9 * max(1.0, self.mass):
                return i
        raise KeyError(f"{L} is not in Lambda")

    @cached_property
    def M_L(self) -> dict:
        groups = {L: [] for L in self.Lambda}
        for p in self.M_min:
            groups[self.Lambda[self.lambda_index(p.frequency(self.signed_omegas))]].append(p)
        return {L: tuple(v) for L, v in groups.items()}

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "mass": self.mass,
            "signed_omegas": [float(x) for x in self.signed_omegas],
            "N": self.N,
            "order": self.order,
            "M_min": [{"mu": list(p.mu), "nu": list(p.nu), "J_tilde": p.J_tilde} for p in self.M_min],
            "Lambda": list(self.Lambda),
            "M_L": [{"L": L, "members": [[list(p.mu), list(p.nu)] for p in ps]} for L, ps in self.M_L.items()],
            "M_size": None if self.M is None else len(self.M),
            "quarantine": [[list(mu), list(nu)] for mu, nu in self.quarantine],
            "tolerance": self.tol,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _embed(block, cols, d):
    out = np.zeros((block.shape[0], d), dtype=np.int64)
    out[:, cols] = block
    return out


def _full_level(w, mass, t, tol):
    d = len(w)
    mus = kernels.compositions(d, t)
    nus = kernels.compositions(d, t + 1)
    ki, kj, kk, ni, nj = kernels.level_pairs(mus, nus, w, float(mass), float(tol))
    return mus, nus, ki, kj, kk, ni, nj


def _disjoint_level(w, mass, t, tol):
    """Pairs at level t whose supports are disjoint, supp(mu) fixed exactly."""
    d = len(w)
    out_mu, out_nu, out_k, near = [], [], [], []
    for size in range(1, min(t, d - 1) + 1):
        inner = kernels.compositions(size, t - size) + 1
        for A in combinations(range(d), size):
            rest = [c for c in range(d) if c not in A]
            mus = _embed(inner, list(A), d)
            nus = _embed(kernels.compositions(len(rest), t + 1), rest, d)
            ki, kj, kk, ni, nj = kernels.level_pairs(mus, nus, w, float(mass), float(tol))
            if ki.size:
                out_mu.append(mus[ki])
                out_nu.append(nus[kj])
                out_k.append(kk)
            near.extend(zip(map(tuple, mus[ni].tolist()), map(tuple, nus[nj].tolist())))
    if not out_mu:
        e = np.zeros((0, d), dtype=np.int64)
        return e, e, np.zeros(0, dtype=np.int64), near
    return np.concatenate(out_mu), np.concatenate(out_nu), np.concatenate(out_k), near


def _level_count(d, t):
    return math.comb(t + d - 1, d - 1) * math.comb(t + d, d - 1)


def build_table(signed_omegas, mass: float, N: int, order: int | None = None,
                full: bool | None = None, tol: float | None = None,
                full_limit: int = 50_000_000) -> ResonanceTable:
    """M(order) and its minimal elements; order defaults to 2N + 4.

    The full set M is listed only when ``full`` is true, or when ``full`` is
    None and the candidate count stays below ``full_limit``.  M_min is always
    computed, level by level, from pairs with disjoint supports: an element
    of M_min is exactly such a pair that dominates no minimal element of a
    lower level.
    """
    w = np.asarray(signed_omegas, dtype=float)
    d = len(w)
    n = d // 2
    r = 2 * N + 4 if order is None else int(order)
    tol = 1e-6 * mass if tol is None else tol
    if full is None:
        full = sum(_level_count(d, t) for t in range(r + 1)) <= full_limit

    M_all = [] if full else None
    quarantine = []
    minimal = []
    base = np.zeros((0, 2 * d), dtype=np.int64)
    for t in range(r + 1):
        if full:
            mus, nus, ki, kj, kk, ni, nj = _full_level(w, mass, t, tol)
            for i, j, k in zip(ki, kj, kk):
                M_all.append(MonomialPair(tuple(int(x) for x in mus[i]), tuple(int(x) for x in nus[j]), int(k) + 1))
        mu_d, nu_d, k_d, near = _disjoint_level(w, mass, t, tol)
        quarantine.extend(near)
        if full:
            # also record near-threshold pairs with overlapping support
            quarantine.extend((tuple(mus[i].tolist()), tuple(nus[j].tolist())) for i, j in zip(ni, nj)
                              if np.any((mus[i] > 0) & (nus[j] > 0)))
        if mu_d.shape[0] == 0:
            continue
        cand = np.concatenate([mu_d, nu_d], axis=1)
        keep = ~kernels.dominated(cand, base)
        for row, k in zip(cand[keep], k_d[keep]):
            minimal.append(MonomialPair(tuple(int(x) for x in row[:d]), tuple(int(x) for x in row[d:]), int(k) + 1))
        base = np.concatenate([base, cand[keep]])

    minimal.sort(key=lambda p: (p.level, p.mu, p.nu))
    if M_all is not None:
        M_all.sort(key=lambda p: (p.level, p.mu, p.nu))
        M_all = tuple(M_all)
    quarantine = tuple(sorted(set(quarantine)))
    return ResonanceTable(n, float(mass), w.copy(), int(N), r, tuple(minimal), M_all, quarantine, tol)


def table_from_spectrum(spec, N: int | None = None, **kw) -> ResonanceTable:
    from .spectral import check_h3

    if N is None:
        N = check_h3(spec, order_cap=0).N
    return build_table(spec.signed_omegas, spec.mass, N, **kw)


# ---------------------------------------------------------------------------
# splitting of long monomials


def _fold(c: dict, n: int) -> dict:
    """Move every unit of c onto the pair orientation with negative frequency."""
    a = {}
    for (L, J), v in c.items():
        if not v:
            continue
        lo, hi = min(L, J), max(L, J)
        if hi <= n:
            key = (lo, hi)
        else:
            # lo <= n < hi  and  n < lo < hi  both fold onto (hi, lo)
            key = (hi, lo)
        a[key] = a.get(key, 0) + v
    return a


def folded_weight(f: dict, n: int) -> int:
    """Sum of f over the three folded orientations (must equal the total)."""
    tot = 0
    for (L, J), v in f.items():
        if (L < J <= n) or (J <= n < L) or (n < J < L):
            tot += v
    return tot


@dataclass(frozen=True)
class Splitting:
    a: PairIndex
    b: PairIndex
    K: int
    S: int
    c: PairIndex
    d: PairIndex
    rho: tuple  # leftover exponents of z
    sigma: tuple  # leftover exponents of conj(z)


def split_monomial(omegas, mass: float, N: int, J0: int, m: PairIndex) -> Splitting:
    """Factor z_{J0} Z^m into z_{J0} * (z_K Z^a) * (z_S Z^b) * leftover.

    c and d take N + 1 units each from m, greedily in lexicographic pair
    order; a and b are their folded versions.  K is the smallest index
    carried by the leftover z-factor, S the smallest by the conj(z)-factor.
    The frequencies must be in ascending order, which is how the spectrum
    reports them; folding relies on it.
    """
    n = m.n
    if m.order < 2 * N + 3:
        raise ValueError(f"|m| = {m.order} < 2N+3 = {2 * N + 3}")
    if not 1 <= J0 <= 2 * n:
        raise ValueError("J0 out of range")
    pairs = pair_list(n)
    rest = list(m.entries)
    picks = []
    for _ in range(2):
        take = [0] * len(pairs)
        need = N + 1
        for i in range(len(pairs)):
            if need == 0:
                break
            q = min(rest[i], need)
            take[i] += q
            rest[i] -= q
            need -= q
        picks.append(take)
    c = PairIndex(n, tuple(picks[0]))
    d = PairIndex(n, tuple(picks[1]))
    e = PairIndex(n, tuple(rest))
    mu, nu = e.margins()
    K = next(i + 1 for i, x in enumerate(mu) if x > 0)
    S = next(i + 1 for i, x in enumerate(nu) if x > 0)
    a = PairIndex.from_dict(n, _fold(c.as_dict(), n))
    b = PairIndex.from_dict(n, _fold(d.as_dict(), n))
    rho = list(mu)
    rho[K - 1] -= 1
    sigma = list(nu)
    sigma[S - 1] -= 1
    return Splitting(a, b, K, S, c, d, tuple(rho), tuple(sigma))


def frequency_margins(omegas, split: Splitting):
    """Exact rational values of sum f_{LJ}(w~_L - w~_J) - w~_X for (a, K) and (b, S)."""
    w = [Fraction(float(x)) for x in omegas]
    out = []
    for f, X in ((split.a, split.K), (split.b, split.S)):
        s = sum(v * (w[L - 1] - w[J - 1]) for (L, J), v in f.as_dict().items())
        out.append(s - w[X - 1])
    return tuple(out)


def check_split(omegas, mass: float, N: int, m: PairIndex, split: Splitting) -> dict:
    """Assert the three structural properties of a splitting; returns the checks."""
    n = m.n
    res = {}
    ok_struct = True
    for f in (split.a, split.b):
        fd = f.as_dict()
        ok_struct &= folded_weight(fd, n) == N + 1 == f.order
    ma = m.as_dict()
    for (L, J) in pair_list(n):
        ok_struct &= split.a[(L, J)] + split.b[(L, J)] <= ma.get((L, J), 0) + ma.get((J, L), 0)
    res["structure"] = bool(ok_struct)
    mth = Fraction(float(mass))
    res["margins"] = all(v < -mth for v in frequency_margins(omegas, split))
    # exponent bookkeeping: |Z^m| == |z_K Z^a| |z_S Z^b| |z^rho conj(z)^sigma|
    mu_m, nu_m = m.margins()
    mu_a, nu_a = split.a.margins()
    mu_b, nu_b = split.b.margins()
    tot_lhs = np.array(mu_m) + np.array(nu_m)
    tot_rhs = (np.array(mu_a) + np.array(nu_a) + np.array(mu_b) + np.array(nu_b)
               + np.array(split.rho) + np.array(split.sigma))
    tot_rhs[split.K - 1] += 1
    tot_rhs[split.S - 1] += 1
    res["exponents"] = bool(np.array_equal(tot_lhs, tot_rhs) and min(split.rho) >= 0 and min(split.sigma) >= 0)
    return res


__all__ = [
    "PairIndex", "MonomialPair", "ResonanceTable", "Splitting", "pair_list", "monomial",
    "enumerate_M_K", "build_table", "table_from_spectrum", "split_monomial", "frequency_margins",
    "check_split", "folded_weight",
]
