import math

import numpy as np
import pytest

from kgstab.boundstates import FieldState, phi_derivatives, phi_total
from kgstab.decomposition import decompose, energy, symplectic_form
from kgstab.errors import ConvergenceError
from kgstab.spectral import continuous_projection

# max of (|z| + ||Xi||) / ||(u, v)|| over 20 random near-ansatz states on the
# shared well (seed 7), measured once at 1.50 and frozen with a small margin
DECOMPOSITION_BOUND = 1.6


def random_state(disc, rng, scale=1.0):
    f = rng.standard_normal(disc.n_points) + 1j * rng.standard_normal(disc.n_points)
    g = rng.standard_normal(disc.n_points) + 1j * rng.standard_normal(disc.n_points)
    env = np.exp(-disc.grid / 5)
    return FieldState(scale * f * env, scale * g * env)


def bump(disc, rng):
    r = disc.grid
    c = rng.standard_normal() + 1j * rng.standard_normal()
    return c * r * np.exp(-((r - rng.uniform(1, 8)) ** 2) / rng.uniform(1, 8))


class TestSymplecticForm:
    def test_alternating(self, well, rng):
        disc, _, _ = well
        for _ in range(5):
            X, Y = random_state(disc, rng), random_state(disc, rng)
            assert abs(symplectic_form(disc, X, X)) < 1e-12
            a, b = symplectic_form(disc, X, Y), symplectic_form(disc, Y, X)
            assert abs(a + b) < 1e-12 * max(1.0, abs(a))

    def test_hand_expansion(self, well, rng):
        disc, _, _ = well
        X, Y = random_state(disc, rng), random_state(disc, rng)
        zero = np.zeros(disc.n_points)
        val = symplectic_form(disc, FieldState(X.u, zero), FieldState(zero, Y.u))
        assert val == pytest.approx(-2 * disc.inner(X.u, Y.u), rel=1e-12)

    def test_mismatched_grids(self, well):
        disc, _, _ = well
        with pytest.raises(ValueError):
            symplectic_form(disc, FieldState.zeros(4), FieldState.zeros(5))

    def test_pairing_of_tangent_vectors(self, two_wells):
        # the discrete computation gives 4 w~_J (unit-norm eigenfunctions)
        disc, _, spec, fams = two_wells
        d = phi_derivatives(fams, np.zeros(4))
        for J in range(1, 5):
            val = symplectic_form(disc, d[2 * (J - 1)], d[2 * (J - 1) + 1])
            assert val == pytest.approx(4 * spec.signed_omegas[J - 1], abs=1e-6)


class TestDecompose:
    @pytest.mark.parametrize("z", [[0.3 + 0.2j, 0.1j], [1.0, 0.0], [0.0, 0.45 - 0.3j]])
    def test_round_trip_one_mode(self, well, well_family, z):
        disc, _, _ = well
        z = np.array(z, complex)
        md = decompose(phi_total([well_family], z), [well_family], disc)
        assert np.max(np.abs(md.z - z)) < 1e-9
        assert np.max(np.abs(md.xi.u)) < 1e-9 and np.max(np.abs(md.xi.v)) < 1e-9

    def test_round_trip_two_modes(self, two_wells, rng):
        disc, _, _, fams = two_wells
        z = 0.2 * rng.random(4) * np.exp(2j * np.pi * rng.random(4))
        md = decompose(phi_total(fams, z), fams, disc)
        assert np.max(np.abs(md.z - z)) < 1e-9
        assert md.max_residual < 1e-9

    def test_reconstruction_and_constraints(self, well, well_family, rng):
        disc, _, spec = well
        z = np.array([0.4 + 0.1j, 0.05])
        pert = FieldState(0.02 * continuous_projection(spec, bump(disc, rng)),
                          0.02 * continuous_projection(spec, bump(disc, rng)))
        st = phi_total([well_family], z) + pert
        md = decompose(st, [well_family], disc)
        back = phi_total([well_family], md.z) + md.xi
        assert np.max(np.abs(back.u - st.u)) < 1e-9 and np.max(np.abs(back.v - st.v)) < 1e-9
        for dphi in phi_derivatives([well_family], md.z):
            assert abs(symplectic_form(disc, dphi, md.xi)) < 1e-9

    def test_pure_continuum_gives_no_modes(self, well, well_family, rng):
        disc, _, spec = well
        f = continuous_projection(spec, bump(disc, rng))
        g = continuous_projection(spec, bump(disc, rng))
        for eps in (0.02, 0.08):
            md = decompose(FieldState(eps * f, eps * g), [well_family], disc)
            assert np.max(np.abs(md.z)) < 1e-10 * eps
            assert np.max(np.abs(md.xi.u - eps * f)) < 1e-10

    def test_gauge_quarter_turn(self, well, well_family, rng):
        disc, _, spec = well
        st = phi_total([well_family], np.array([0.35 - 0.2j, 0.1 + 0.1j])) + FieldState(
            0.03 * continuous_projection(spec, bump(disc, rng)), 0.03 * continuous_projection(spec, bump(disc, rng)))
        a = decompose(st, [well_family], disc)
        b = decompose(st.scale(1j), [well_family], disc)
        assert np.max(np.abs(b.z - 1j * a.z)) < 1e-8
        assert np.max(np.abs(b.xi.u - 1j * a.xi.u)) < 1e-8

    def test_bounded_by_state_norm(self, well, well_family):
        disc, _, spec = well
        rng = np.random.default_rng(7)
        for _ in range(20):
            z = 0.5 * rng.random(2) * np.exp(2j * np.pi * rng.random(2))
            f = continuous_projection(spec, bump(disc, rng))
            g = continuous_projection(spec, bump(disc, rng))
            st = phi_total([well_family], z) + FieldState(0.05 * f, 0.05 * g)
            md = decompose(st, [well_family], disc)
            size = math.sqrt(disc.inner(st.u, st.u) + disc.inner(st.v, st.v))
            xi = math.sqrt(disc.inner(md.xi.u, md.xi.u) + disc.inner(md.xi.v, md.xi.v))
            assert np.linalg.norm(md.z) + xi <= DECOMPOSITION_BOUND * size

    def test_outside_ansatz_radius(self, well, well_family):
        disc, _, _ = well
        big = phi_total([well_family], np.array([1.1, 0.0])).scale(3.0)
        with pytest.raises(ConvergenceError):
            decompose(big, [well_family], disc)

    def test_fallback_to_linear_projection(self, well, well_family):
        disc, _, _ = well
        st = phi_total([well_family], np.array([0.8, 0.3j]))
        with pytest.warns(UserWarning):
            md = decompose(st, [well_family], disc, max_iter=1, fallback=True)
        assert not md.converged


class TestEnergy:
    def test_zero_state(self, well):
        disc, H, spec = well
        assert energy(FieldState.zeros(disc.n_points), H, spec.mass) == 0.0

    def test_small_amplitude_coefficient(self, well, well_family):
        disc, H, spec = well
        a = np.geomspace(1e-3, 3e-2, 8)
        E = [energy(phi_total([well_family], np.array([x, 0])), H, spec.mass) for x in a]
        coef = np.polyfit(a**2, E, 2)[1]
        assert coef == pytest.approx(2 * spec.omegas[0] ** 2, rel=1e-6)

    def test_quartic_term(self, well, rng):
        disc, H, spec = well
        st = random_state(disc, rng, 0.1)
        quad = energy(st, H, spec.mass)
        assert energy(st.scale(2.0), H, spec.mass) > 4 * quad
