"""Hypothesis-driven invariants."""

import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from kgstab.boundstates import FieldState
from kgstab.decomposition import symplectic_form
from kgstab.dynamics import reduced_decay
from kgstab.fgr import CouplingProfile, check_h4, sample_unit_ball
from kgstab.oracles import h3_N
from kgstab.resonance import PairIndex, check_split, enumerate_M_K, monomial, split_monomial
from kgstab.spectral import Discretization, continuous_projection

SETTINGS = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
DISC = Discretization("radial3d", 64, 10.0)

omegas = st.lists(st.floats(0.3, 0.95), min_size=1, max_size=2, unique=True).filter(
    lambda w: len(w) < 2 or abs(w[0] - w[1]) > 0.05)


def field(seed):
    rng = np.random.default_rng(seed)
    n = DISC.n_points
    return FieldState(rng.standard_normal(n) + 1j * rng.standard_normal(n),
                      rng.standard_normal(n) + 1j * rng.standard_normal(n))


@SETTINGS
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_symplectic_form_is_antisymmetric_and_bilinear(s1, s2, a, b):
    X, Y, Z = field(s1), field(s2), field(s1 ^ s2 ^ 1)
    w = symplectic_form(DISC, X, Y)
    assert abs(w + symplectic_form(DISC, Y, X)) <= 1e-10 * max(1.0, abs(w))
    lhs = symplectic_form(DISC, X.scale(a) + Z.scale(b), Y)
    rhs = a * w + b * symplectic_form(DISC, Z, Y)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


@SETTINGS
@given(st.integers(1, 2), st.data())
def test_monomial_equals_margin_form(n, data):
    d = 2 * n
    e = tuple(data.draw(st.lists(st.integers(0, 2), min_size=d * (d - 1), max_size=d * (d - 1))))
    z = np.array(data.draw(st.lists(st.complex_numbers(max_magnitude=1.0), min_size=d, max_size=d)))
    m = PairIndex(n, e)
    mu, nu = m.margins()
    assert sum(mu) == sum(nu) == m.order
    assert abs(m.evaluate(z) - monomial(z, mu, nu)) <= 1e-12


@SETTINGS
@given(omegas.filter(lambda w: len(w) < 2 or abs(w[0] - w[1]) > 0.15), st.integers(0, 2), st.data())
def test_split_satisfies_all_checks(oms, extra, data):
    oms = sorted(oms)  # folding assumes ascending frequencies, as the spectrum delivers them
    w = np.concatenate([oms, -np.asarray(oms)])
    n = len(oms)
    N = h3_N(oms, 1.0) + extra
    size = 2 * n * (2 * n - 1)
    total = data.draw(st.integers(2 * N + 3, 2 * N + 6))
    slots = data.draw(st.lists(st.integers(0, size - 1), min_size=total, max_size=total))
    e = np.bincount(slots, minlength=size)
    m = PairIndex(n, tuple(int(x) for x in e))
    K = data.draw(st.integers(1, 2 * n))
    s = split_monomial(w, 1.0, N, K, m)
    assert all(check_split(w, 1.0, N, m, s).values())


@SETTINGS
@given(omegas, st.integers(1, 3))
def test_conjugation_relabelling_preserves_classes(oms, r):
    n = len(oms)
    w = np.concatenate([oms, -np.asarray(oms)])
    conj = [(J + n) % (2 * n) for J in range(2 * n)]  # 0-based J <-> J + n
    for K in range(1, 2 * n + 1):
        a = enumerate_M_K(w, 1.0, K, r)[0]
        b = {m.entries for m in enumerate_M_K(w, 1.0, conj[K - 1] + 1, r)[0]}
        mapped = set()
        for m in a:
            counts = {(conj[L - 1] + 1, conj[J - 1] + 1): c for (L, J), c in m.as_dict().items()}
            mapped.add(PairIndex.from_dict(n, counts).entries)
        assert mapped == b


@SETTINGS
@given(st.integers(0, 2**32 - 1))
def test_continuous_projection_is_an_orthogonal_idempotent(well, seed):
    disc, _, spec = well
    rng = np.random.default_rng(seed)
    f = (rng.standard_normal(disc.n_points) + 1j * rng.standard_normal(disc.n_points)) * np.exp(-disc.grid / 4)
    p = continuous_projection(spec, f)
    assert np.max(np.abs(continuous_projection(spec, p) - p)) <= 1e-12 * np.max(np.abs(f))
    for phi in spec.eigenfunctions:
        assert abs(disc.inner(phi, p)) <= 1e-12 * disc.norm(f)


@SETTINGS
@given(st.floats(1e-3, 0.5), st.floats(0.01, 10.0), st.sampled_from([3, 4]))
def test_reduced_decay_is_positive_and_decreasing(y0, c, power):
    y = reduced_decay(y0, c, np.linspace(0, 1e4, 50), power)
    assert y[0] == y0 and np.all(y > 0) and np.all(np.diff(y) < 0)


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 2**32 - 1))
def test_random_profiles_give_nonnegative_constant(well, well_table, seed):
    disc, H, spec = well
    rng = np.random.default_rng(seed)
    raw = {}
    for p in well_table.M_min:
        g = continuous_projection(spec, (rng.standard_normal() + 1j * rng.standard_normal()) * disc.grid
                                  * np.exp(-((disc.grid - rng.uniform(1, 6)) ** 2) / rng.uniform(0.5, 4)))
        z = np.zeros_like(g)
        raw[p.key()] = (z, g) if p.frequency(spec.signed_omegas) > 0 else (g, z)
    rep = check_h4(spec, H, well_table, CouplingProfile.build(spec, raw), zeta_samples=sample_unit_ball(2, 8))
    assert rep.c_certified >= 0 and min(rep.gamma) >= -1e-12
