import math

import numpy as np
import pytest

from kgstab.errors import DomainError, HypothesisViolation
from kgstab.oracles import free_sphere_density, h3_exhaustive, shooting_eigenvalues
from kgstab.spectral import (
    Discretization, PotentialSpec, apply_B_function, assemble_operator, check_h3, continuous_projection,
    point_spectrum, richardson, spectral_density_form, spectral_density_matrix, spectral_density_mollified,
)

from conftest import WELL_DEPTH, WELL_WIDTH


def one_well(n, R=30.0):
    disc = Discretization("radial3d", n, R)
    return assemble_operator(disc, PotentialSpec.gaussian_well(-4.0, 1.0))


class TestAssembly:
    def test_free_line_has_no_negative_eigenvalues(self):
        H = assemble_operator(Discretization("line1d", 400, 30.0), PotentialSpec.zero())
        assert H.eigh[0].min() > 0
        assert point_spectrum(H, 1.0).n == 0

    def test_symmetry(self, rng):
        H = one_well(2048)
        w = H.disc.weight
        for _ in range(10):
            f, g = rng.standard_normal((2, H.n))
            lhs, rhs = w * np.dot(H @ f, g), w * np.dot(f, H @ g)
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)

    def test_coarse_grid_rejected(self):
        with pytest.raises(ValueError, match="too coarse"):
            assemble_operator(Discretization("radial3d", 64, 60.0), PotentialSpec.gaussian_well(-5, 0.5))

    def test_potential_must_decay_at_edge(self):
        with pytest.raises(HypothesisViolation) as exc:
            assemble_operator(Discretization("radial3d", 512, 10.0), PotentialSpec.gaussian_well(-1, 4.0))
        assert exc.value.hypothesis == "H1"

    @pytest.mark.parametrize("kw", [dict(n_points=8), dict(domain_radius=-1.0),
                                    dict(boundary="sponge", sponge_width=50.0, domain_radius=40.0)])
    def test_discretization_invariants(self, kw):
        with pytest.raises(ValueError):
            Discretization(**kw)

    def test_stencils_agree_on_ground_state(self):
        pot = PotentialSpec.gaussian_well(-4.0, 1.0)
        vals = {}
        for st in ("fd2", "fd4", "sine"):
            H = assemble_operator(Discretization("radial3d", 1024, 30.0, stencil=st), pot)
            vals[st] = point_spectrum(H, 1.0).eigenvalues[0]
        assert abs(vals["fd4"] - vals["sine"]) < 1e-6
        # second order is visibly less accurate at the same spacing
        assert abs(vals["fd2"] - vals["sine"]) > abs(vals["fd4"] - vals["sine"])


class TestPointSpectrum:
    def test_one_well_has_a_trapped_mode(self):
        spec = point_spectrum(one_well(2048), 1.0)
        assert spec.n >= 1
        assert np.all((spec.eigenvalues > -1) & (spec.eigenvalues < 0))

    def test_grid_refinement(self):
        coarse = point_spectrum(one_well(2048), 1.0).eigenvalues
        fine = point_spectrum(one_well(8192), 1.0).eigenvalues
        doubled = point_spectrum(one_well(4096), 1.0).eigenvalues
        assert len(coarse) == len(fine)
        assert np.max(np.abs(coarse - fine) / np.abs(fine)) < 1e-4
        assert np.max(np.abs(coarse - doubled) / np.abs(doubled)) < 1e-4

    def test_shooting_oracle_one_well(self):
        e = point_spectrum(one_well(2048), 1.0).eigenvalues[0]
        pot = PotentialSpec.gaussian_well(-4.0, 1.0)
        ref = shooting_eigenvalues(lambda r: float(pot(r)), 30.0, -0.999, -1e-3, n_scan=40)
        assert len(ref) == 1
        assert abs(e - ref[0]) / abs(ref[0]) < 1e-6

    def test_shooting_oracle_deep_well(self):
        pot = PotentialSpec.gaussian_well(WELL_DEPTH, WELL_WIDTH)
        H = assemble_operator(Discretization("radial3d", 4096, 30.0), pot)
        e = point_spectrum(H, 1.0).eigenvalues
        ref = shooting_eigenvalues(lambda r: float(pot(r)), 30.0, -0.999, -1e-3, n_scan=40)
        assert len(e) == len(ref) == 1
        assert abs(e[0] - ref[0]) / abs(ref[0]) < 1e-6

    def test_orthonormal_and_signed_omegas(self, two_wells):
        disc, _, spec, _ = two_wells
        G = np.array([[disc.inner(a, b) for b in spec.eigenfunctions] for a in spec.eigenfunctions])
        assert np.allclose(G, np.eye(spec.n), atol=1e-10)
        w = spec.signed_omegas
        assert np.allclose(w[spec.n:], -w[:spec.n])
        assert spec.eigenvalues[0] < spec.eigenvalues[1]

    def test_degenerate_pair_violates_h2(self):
        disc = Discretization("line1d", 2000, 40.0)
        H = assemble_operator(disc, PotentialSpec.sum_of_gaussians([(-2, 1, -20), (-2, 1, 20)]))
        with pytest.raises(HypothesisViolation) as exc:
            point_spectrum(H, 1.0)
        assert exc.value.hypothesis == "H2"

    def test_asymmetric_wells_pass_h2(self):
        disc = Discretization("line1d", 2000, 40.0)
        H = assemble_operator(disc, PotentialSpec.sum_of_gaussians([(-2, 1, -20), (-1.5, 1, 20)]))
        spec = point_spectrum(H, 1.0)
        assert spec.n == 2 and np.diff(spec.eigenvalues)[0] > 1e-3

    def test_below_mass_reported(self):
        H = assemble_operator(Discretization("radial3d", 600, 40.0), PotentialSpec.gaussian_well(-4.0, 2.0))
        spec = point_spectrum(H, 1.0)
        assert spec.below_mass and all(e <= -1 for e in spec.below_mass)


class TestH3:
    def test_single_mode_example(self):
        rep = check_h3([0.8], mass=1.0)
        assert rep.N == 2 and rep.order == 14 and rep.ok
        assert rep.gap == pytest.approx(1.6)

    def test_exact_resonance_reported(self):
        rep = check_h3([0.5], mass=1.0)
        assert (2,) in rep.violations and (-2,) in rep.violations

    def test_two_mode_example_matches_exhaustive(self):
        rep = check_h3([0.6, 0.9], mass=1.0)
        assert rep.N == 7 and rep.order == 34
        assert rep.gap == pytest.approx(0.3)
        assert list(rep.violations) == h3_exhaustive([0.6, 0.9], 1.0, 34, 1e-6)

    @pytest.mark.parametrize("omegas", [(0.25, 0.5, 0.75), (0.41, 0.66, 0.87), (0.3, 0.45, 0.95)])
    def test_three_modes_match_exhaustive(self, omegas):
        rep = check_h3(list(omegas), mass=1.0, order_cap=16)
        assert list(rep.violations) == h3_exhaustive(omegas, 1.0, 16, 1e-6)

    def test_needs_modes(self):
        with pytest.raises(ValueError):
            check_h3([], mass=1.0)


class TestFunctionalCalculus:
    def test_identity(self, well, rng):
        _, H, spec = well
        U = rng.standard_normal((H.n, 10))
        assert np.max(np.abs(apply_B_function(spec, H, np.ones_like, U) - U)) < 1e-12

    def test_square_is_h_plus_m2(self, well, rng):
        _, H, spec = well
        u = rng.standard_normal(H.n)
        ref = H @ u + u
        out = apply_B_function(spec, H, lambda b: b * b, u)
        assert np.linalg.norm(out - ref) / np.linalg.norm(ref) < 1e-10

    def test_trig_identity(self, well, rng):
        _, H, spec = well
        u = rng.standard_normal(H.n)
        c = apply_B_function(spec, H, lambda b: np.cos(2.3 * b), u)
        s = apply_B_function(spec, H, lambda b: np.sin(2.3 * b), u)
        cc = apply_B_function(spec, H, lambda b: np.cos(2.3 * b), c)
        ss = apply_B_function(spec, H, lambda b: np.sin(2.3 * b), s)
        assert np.max(np.abs(cc + ss - u)) < 1e-10

    def test_lanczos_matches_dense(self, well, rng):
        _, H, spec = well
        u = np.exp(-((H.disc.grid - 5) ** 2)) * H.disc.grid
        f = lambda b: np.exp(-b)  # noqa: E731
        d = apply_B_function(spec, H, f, u, method="dense")
        lz = apply_B_function(spec, H, f, u, method="lanczos")
        assert np.linalg.norm(d - lz) / np.linalg.norm(d) < 1e-8

    def test_singular_function_rejected(self, well):
        _, H, spec = well
        b0 = math.sqrt(H.eigh[0][3] + 1.0)
        with pytest.raises(DomainError):
            apply_B_function(spec, H, lambda b: 1.0 / (b - b0), np.ones(H.n))

    def test_unitary_on_continuum(self, well, rng):
        disc, H, spec = well
        u = continuous_projection(spec, rng.standard_normal(H.n) + 1j * rng.standard_normal(H.n))
        for t in (0.5, 1.0, 3.0):
            for sgn in (1, -1):
                out = apply_B_function(spec, H, lambda b: np.exp(sgn * 1j * t * b), u)
                assert abs(disc.norm(out) - disc.norm(u)) / disc.norm(u) < 1e-8 * t


class TestProjection:
    def test_kills_bound_state_and_its_rotation(self, well):
        disc, _, spec = well
        phi = spec.eigenfunctions[0]
        assert disc.norm(continuous_projection(spec, phi)) < 1e-10
        assert disc.norm(continuous_projection(spec, 1j * phi)) < 1e-10

    def test_idempotent(self, two_wells, rng):
        disc, _, spec, _ = two_wells
        u = rng.standard_normal(disc.n_points) + 1j * rng.standard_normal(disc.n_points)
        p = continuous_projection(spec, u)
        assert disc.norm(continuous_projection(spec, p) - p) < 1e-10 * disc.norm(u)


@pytest.fixture(scope="module")
def free_grid():
    disc = Discretization("radial3d", 8000, 1200.0)
    H = assemble_operator(disc, PotentialSpec.zero())
    return disc, H, point_spectrum(H, 1.0)


class TestDensity:
    def test_nonnegative_and_blind_to_bound_states(self, well, rng):
        disc, H, spec = well
        for lam in (1.3, 2.0):
            u = rng.standard_normal(H.n) * np.exp(-disc.grid / 5)
            assert spectral_density_form(spec, H, u, lam).value >= -1e-8
        est = spectral_density_form(spec, H, spec.eigenfunctions[0], 1.5)
        assert abs(est.value) < 1e-10

    def test_free_case_matches_sphere_quadrature(self, free_grid):
        disc, H, spec = free_grid
        g = lambda r: np.exp(-r * r / 2)  # noqa: E731
        w = disc.from_physical(g(disc.grid))
        for lam in (1.2, 2.0, 2.8):
            est = spectral_density_form(spec, H, w, lam)
            ref = free_sphere_density(g, lam, 1.0, 40.0)
            assert abs(est.value - ref) / ref < 0.02

    def test_density_matrix_hermitian_psd(self, well, rng):
        disc, H, spec = well
        vecs = rng.standard_normal((4, H.n)) * np.exp(-disc.grid / 4)
        mat, _, _, _ = spectral_density_matrix(spec, H, vecs, 1.7)
        assert np.allclose(mat, mat.conj().T, atol=1e-14)
        assert np.linalg.eigvalsh(mat).min() > -1e-10 * np.abs(mat).max()

    def test_principal_value_cancels(self, well):
        # for real u the plus/minus resolvent difference equals 2i Im <R(+) u|u>
        disc, H, spec = well
        u = continuous_projection(spec, disc.grid * np.exp(-disc.grid))
        lam, eps = 1.6, 0.05
        z = lam * lam - 1.0
        plus = H.solve_shifted(z + 1j * eps, u)
        minus = H.solve_shifted(z - 1j * eps, u)
        sym = disc.weight * np.vdot(u, plus - minus) / 2j
        im = disc.weight * np.imag(np.vdot(u, plus))
        assert abs(sym - im) < 1e-12 * abs(im)

    def test_mollified_route_agrees(self):
        # the mollified sum needs the dense eigenbasis, so it gets a smaller grid
        disc = Discretization("radial3d", 2000, 300.0)
        H = assemble_operator(disc, PotentialSpec.zero())
        spec = point_spectrum(H, 1.0)
        g = lambda r: np.exp(-r * r / 2)  # noqa: E731
        w = disc.from_physical(g(disc.grid))
        for lam in (1.5, 2.0):
            mo = spectral_density_mollified(spec, H, w, lam)
            assert abs(mo / free_sphere_density(g, lam, 1.0, 40.0) - 1) < 0.02

    def test_rejects_gap_and_bad_schedule(self, well):
        disc, H, spec = well
        u = disc.grid * np.exp(-disc.grid)
        with pytest.raises(DomainError):
            spectral_density_form(spec, H, u, 0.9)
        with pytest.raises(ValueError):
            spectral_density_form(spec, H, u, 1.5, eps_schedule=[0.01, 0.02])

    def test_small_grid_is_flagged(self):
        disc = Discretization("radial3d", 200, 20.0)
        H = assemble_operator(disc, PotentialSpec.zero())
        spec = point_spectrum(H, 1.0)
        est = spectral_density_form(spec, H, disc.grid * np.exp(-disc.grid ** 2), 1.5)
        assert not est.confident


def test_richardson_exact_for_linear_sequences():
    eps = [0.1, 0.05, 0.025]
    best, err = richardson(eps, [3.0 + 2 * e for e in eps])
    assert best == pytest.approx(3.0, abs=1e-14) and err < 1e-14
