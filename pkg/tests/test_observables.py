import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polturb.grid import FieldPair, Grid2D, Roi, empty_fields, make_grid
from polturb.observables import (
    CoherenceResult,
    RoiSeries,
    ZeroDensityError,
    convergence_error,
    detect_vortices,
    eta_time_average,
    fractions,
    g1,
    interaction_energy,
    kinetic_energy,
    momentum_spectrum,
    snapshot_record,
    ObservableRecord,
)


@pytest.fixture
def grid():
    return make_grid(64, 32.0)


def plane_wave_pair(grid, k_index=4, ratio=1.0):
    X, _ = grid.xy()
    psi = np.exp(1j * grid.kx[k_index] * X)
    return FieldPair(grid, psi.copy(), ratio * psi.copy(), 0.0)


class TestFractions:
    def test_equal_fields_give_half(self, grid):
        f = fractions(plane_wave_pair(grid))
        assert np.abs(f.f_c - 0.5).max() < 1e-12
        assert np.abs(f.f_x - 0.5).max() < 1e-12

    def test_pure_photon(self, grid):
        pair = plane_wave_pair(grid, ratio=0.0)
        f = fractions(pair)
        assert np.abs(f.f_c - 1.0).max() < 1e-12

    def test_vacuum_sentinel(self, grid):
        pair = empty_fields(grid)
        pair.psi_c[0, 0] = 1.0
        f = fractions(pair)
        assert not f.valid[10, 10]
        assert f.f_c[10, 10] == 0.5

    @given(amp_c=st.floats(0.01, 10), amp_x=st.floats(0.01, 10))
    @settings(max_examples=40, deadline=None)
    def test_normalization_property(self, amp_c, amp_x):
        grid = make_grid(16, 8.0)
        pair = empty_fields(grid)
        pair.psi_c += amp_c
        pair.psi_x += amp_x * 1j
        f = fractions(pair)
        total = f.f_c + f.f_x
        assert np.abs(total[f.valid] - 1.0).max() < 1e-12
        assert f.f_c.min() >= 0 and f.f_c.max() <= 1


class TestKineticEnergy:
    def test_balanced_plane_wave(self, grid):
        k = grid.kx[4]
        e = kinetic_energy(plane_wave_pair(grid, 4), Roi(size=(16.0, 16.0)))
        assert e == pytest.approx(0.5 * k * k, rel=1e-10)

    def test_pure_photon_plane_wave(self, grid):
        k = grid.kx[4]
        e = kinetic_energy(plane_wave_pair(grid, 4, ratio=0.0), Roi(size=(16.0, 16.0)))
        assert e == pytest.approx(k * k, rel=1e-10)

    def test_matches_finite_difference_oracle(self):
        # 4th-order FD gradient quadrature on a band-limited random field;
        # band kept well under Nyquist so the FD stencil itself is accurate
        grid = make_grid(32, 32.0)
        rng = np.random.default_rng(8)
        spec = np.zeros((32, 32), complex)
        spec[:4, :4] = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        spec[:4, -3:] = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        spec[-3:, :4] = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        spec[-3:, -3:] = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        psi = np.fft.ifft2(spec)
        pair = FieldPair(grid, psi, 0.3 * psi, 0.0)
        roi = Roi(size=(32.0, 32.0))
        e_spec = kinetic_energy(pair, roi)

        def d4(f, axis):
            h = grid.dx
            return (
                -np.roll(f, -2, axis) + 8 * np.roll(f, -1, axis)
                - 8 * np.roll(f, 1, axis) + np.roll(f, 2, axis)
            ) / (12 * h)

        grad2 = np.abs(d4(psi, 1)) ** 2 + np.abs(d4(psi, 0)) ** 2
        f_c = 1.0 / (1.0 + 0.09)
        e_fd = (f_c * grad2).sum() / (np.abs(psi) ** 2).sum()
        assert e_spec == pytest.approx(e_fd, rel=0.01)

    def test_phase_and_translation_invariance(self, grid):
        rng = np.random.default_rng(3)
        spec = np.zeros((64, 64), complex)
        spec[:6, :6] = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        psi = np.fft.ifft2(spec)
        pair = FieldPair(grid, psi, 0.5 * psi, 0.0)
        roi = Roi(size=(32.0, 32.0))
        e0 = kinetic_energy(pair, roi)
        rotated = FieldPair(grid, psi * np.exp(1j * 0.4), 0.5 * psi * np.exp(1j * 0.4), 0.0)
        assert kinetic_energy(rotated, roi) == pytest.approx(e0, rel=1e-10)
        shifted = FieldPair(grid, np.roll(psi, 5, axis=1), 0.5 * np.roll(psi, 5, axis=1), 0.0)
        assert kinetic_energy(shifted, roi) == pytest.approx(e0, rel=1e-10)

    def test_zero_norm_raises(self, grid):
        with pytest.raises(ZeroDensityError):
            kinetic_energy(empty_fields(grid), Roi(size=(8.0, 8.0)))


class TestInteractionEnergy:
    def test_zero_exciton(self, grid):
        assert interaction_energy(plane_wave_pair(grid, 4, ratio=0.0), Roi(size=(8.0, 8.0))) == 0.0

    def test_balanced_uniform(self, grid):
        rho = 0.7
        pair = empty_fields(grid)
        pair.psi_c += np.sqrt(rho)
        pair.psi_x += np.sqrt(rho)
        e = interaction_energy(pair, Roi(size=(8.0, 8.0)))
        assert e == pytest.approx(0.5 * rho, rel=1e-12)


class TestEtaTimeAverage:
    def records(self, etas, dt=2.0):
        return [
            ObservableRecord(t=i * dt, n_c=1, f_x=0.5, f_c=0.5, e_kin=1.0,
                             e_int=e, eta=e, k_peak=0.0)
            for i, e in enumerate(etas)
        ]

    def test_constant_series(self):
        mean, std = eta_time_average(self.records([3.0] * 50), 60.0)
        assert mean == 3.0
        assert std == 0.0

    def test_window_selection(self):
        etas = [0.0] * 25 + [2.0] * 26
        mean, _ = eta_time_average(self.records(etas), 50.0)
        assert mean == pytest.approx(2.0)

    def test_window_too_long(self):
        with pytest.raises(ValueError, match="window"):
            eta_time_average(self.records([1.0] * 10), 100.0)


class TestMomentumSpectrum:
    def test_uniform_density_no_structure(self, grid):
        pair = empty_fields(grid)
        pair.psi_c += 2.0
        spec = momentum_spectrum(pair, Roi(size=(16.0, 16.0)))
        assert spec.k_peak == 0.0
        assert np.abs(spec.map).max() < 1e-12

    def test_standing_wave_density_at_twice_field_k(self, grid):
        # field standing wave at k0 gives density structure at 2 k0
        X, _ = grid.xy()
        k0 = grid.kx[6]
        pair = empty_fields(grid)
        pair.psi_c = np.cos(k0 * X).astype(complex)
        spec = momentum_spectrum(pair, Roi(size=(16.0, 16.0)))
        assert spec.k_peak == pytest.approx(2 * k0, abs=2 * np.pi / 16.0 / 2)
        assert spec.k_field == pytest.approx(k0, abs=np.pi / 16.0 / 2)
        assert spec.map.max() == pytest.approx(1.0)

    def test_peak_normalization(self, grid):
        rng = np.random.default_rng(2)
        pair = empty_fields(grid)
        pair.psi_c = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        spec = momentum_spectrum(pair, Roi(size=(16.0, 16.0)))
        assert spec.map.max() == pytest.approx(1.0)


def _series(fields_list, t0=0.0, dt=2.0):
    return RoiSeries(
        t=np.array([t0 + i * dt for i in range(len(fields_list))]),
        data=np.array(fields_list),
    )


class TestG1:
    def test_constant_field_full_coherence(self):
        frame = np.full((8, 8), 1.3 + 0.4j)
        res = g1(_series([frame] * 20))
        assert res.g1_scalar == pytest.approx(1.0, abs=1e-12)
        assert np.nanmax(res.g1_map) <= 1.0 + 1e-12

    def test_random_phase_floor(self):
        rng = np.random.default_rng(17)
        n = 250
        frames = [np.exp(1j * rng.uniform(0, 2 * np.pi, (12, 12))) for _ in range(n)]
        res = g1(_series(frames))
        # random-walk expectation: mean |sum of N phasors| ~ sqrt(pi N)/2
        assert res.g1_scalar < 0.1
        assert res.g1_scalar == pytest.approx(np.sqrt(np.pi / (4 * n)), rel=0.35)

    def test_global_phase_invariance(self):
        rng = np.random.default_rng(4)
        frames = [rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
                  for _ in range(15)]
        a = g1(_series(frames))
        b = g1(_series([f * np.exp(1j * 1.1) for f in frames]))
        assert b.g1_scalar == pytest.approx(a.g1_scalar, rel=1e-12)

    def test_bounds_property(self):
        rng = np.random.default_rng(9)
        frames = [rng.standard_normal((5, 5)) * np.exp(1j * rng.uniform(0, 7, (5, 5)))
                  for _ in range(30)]
        res = g1(_series(frames))
        valid = ~np.isnan(res.g1_map)
        assert res.g1_map[valid].min() >= 0.0
        assert res.g1_map[valid].max() <= 1.0 + 1e-12

    def test_dead_pixel_flagged_and_excluded(self):
        frames = [np.ones((4, 4), complex) for _ in range(12)]
        for f in frames:
            f[2, 2] = 0.0
        res = g1(_series(frames))
        assert np.isnan(res.g1_map[2, 2])
        assert res.g1_scalar == pytest.approx(1.0)

    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="10 samples"):
            g1(_series([np.ones((4, 4), complex)] * 9))

    def test_uneven_spacing_rejected(self):
        frames = [np.ones((4, 4), complex)] * 12
        series = _series(frames)
        series.t[5] += 0.5
        with pytest.raises(ValueError, match="evenly spaced"):
            g1(series)

    def test_window_selection(self):
        frames = [np.ones((4, 4), complex) * (1 if i < 10 else 1j) for i in range(20)]
        res = g1(_series(frames), t_start=20.0, t_end=38.0)
        assert res.window[2] == 10
        assert res.g1_scalar == pytest.approx(1.0)


def vortex_field(grid, x0=0.0, y0=0.0, sign=1):
    X, Y = grid.xy()
    zx = X - x0
    zy = (Y - y0) * sign
    return (zx + 1j * zy) * np.exp(-(zx**2 + zy**2) / 25.0)


class TestVortices:
    def test_single_positive_vortex(self, grid):
        # core placed off the lattice so no corner density is exactly zero
        pair = empty_fields(grid)
        pair.psi_c = vortex_field(grid, x0=0.2, y0=0.15)
        found = detect_vortices(pair, Roi(size=(16.0, 16.0)))
        assert len(found) == 1
        x, y, q = found[0]
        assert q == 1
        assert abs(x - 0.2) <= grid.dx and abs(y - 0.15) <= grid.dx

    def test_uniform_phase_empty(self, grid):
        pair = empty_fields(grid)
        pair.psi_c += 1.0
        assert detect_vortices(pair, Roi(size=(16.0, 16.0))) == []

    def test_vortex_antivortex_pair(self, grid):
        pair = empty_fields(grid)
        pair.psi_c = vortex_field(grid, x0=-4.8, y0=0.2) * vortex_field(
            grid, x0=4.8, y0=0.2, sign=-1
        )
        found = detect_vortices(pair, Roi(size=(28.0, 28.0)))
        assert len(found) == 2
        assert sum(q for _, _, q in found) == 0
        xs = sorted(x for x, _, _ in found)
        assert xs[0] == pytest.approx(-4.8, abs=1.0)
        assert xs[1] == pytest.approx(4.8, abs=1.0)

    def test_net_charge_equals_boundary_winding(self, grid):
        rng = np.random.default_rng(12)
        pair = empty_fields(grid)
        field = np.ones((64, 64), complex)
        charges = [(rng.uniform(-8, 8), rng.uniform(-8, 8), s) for s in (1, 1, -1)]
        for x0, y0, s in charges:
            field *= vortex_field(grid, x0, y0, s) + 0.05
        pair.psi_c = field
        roi = Roi(size=(24.0, 24.0))
        found = detect_vortices(pair, roi, density_floor=0.0)
        sy, sx = roi.resolve(grid)
        theta = np.angle(pair.psi_c[sy, sx])

        def wrap(d):
            return (d + np.pi) % (2 * np.pi) - np.pi

        boundary = np.concatenate([
            theta[0, :-1], theta[:-1, -1], theta[-1, ::-1][:-1], theta[::-1, 0][:-1]
        ])
        winding = wrap(np.diff(np.append(boundary, boundary[0]))).sum()
        assert sum(q for _, _, q in found) == pytest.approx(winding / (2 * np.pi), abs=1e-9)

    def test_density_floor_suppresses_vacuum(self, grid):
        pair = empty_fields(grid)
        pair.psi_c = vortex_field(grid) * 1e-30
        pair.psi_c[0, 0] = 1.0  # dominates mean density
        assert detect_vortices(pair, Roi(size=(16.0, 16.0))) == []


class TestConvergenceError:
    def test_identical_snapshots(self, grid):
        pair = plane_wave_pair(grid)
        assert convergence_error(pair, pair.copy()) == 0.0

    def test_quadratic_scaling(self, grid):
        pair = plane_wave_pair(grid)
        scaled = pair.copy()
        scaled.psi_c *= 1 + 1e-3
        scaled.psi_x *= 1 + 1e-3
        assert convergence_error(pair, scaled) == pytest.approx(1e-6, rel=1e-2)

    def test_time_mismatch_rejected(self, grid):
        a = plane_wave_pair(grid)
        b = plane_wave_pair(grid)
        b.t = 1.0
        with pytest.raises(ValueError, match="times differ"):
            convergence_error(a, b)

    def test_grid_nesting_dx(self):
        coarse = make_grid(32, 16.0)
        fine = make_grid(64, 16.0)
        Xc, _ = coarse.xy()
        Xf, _ = fine.xy()
        k0 = coarse.kx[2]
        a = FieldPair(coarse, np.exp(1j * k0 * Xc), np.zeros((32, 32), complex), 0.0)
        b = FieldPair(fine, np.exp(1j * k0 * Xf), np.zeros((64, 64), complex), 0.0)
        assert convergence_error(a, b, window_side=8.0) < 1e-28

    def test_grid_nesting_length(self):
        small = make_grid(32, 16.0)
        big = make_grid(64, 32.0)
        Xs, _ = small.xy()
        Xb, _ = big.xy()
        k0 = small.kx[2]
        a = FieldPair(small, np.exp(1j * k0 * Xs), np.zeros((32, 32), complex), 0.0)
        b = FieldPair(big, np.exp(1j * k0 * Xb), np.zeros((64, 64), complex), 0.0)
        assert convergence_error(a, b, window_side=8.0) < 1e-28

    def test_non_nested_rejected(self):
        a = FieldPair(make_grid(32, 16.0), np.ones((32, 32), complex),
                      np.zeros((32, 32), complex), 0.0)
        b = FieldPair(make_grid(32, 15.0), np.ones((32, 32), complex),
                      np.zeros((32, 32), complex), 0.0)
        with pytest.raises(ValueError, match="does not contain"):
            convergence_error(a, b, window_side=8.0)


class TestSnapshotRecord:
    def test_empty_window_yields_nan_energies(self, grid):
        rec = snapshot_record(empty_fields(grid), Roi(size=(8.0, 8.0)))
        assert np.isnan(rec.e_kin)
        assert rec.n_c == 0.0

    def test_plane_wave_record(self, grid):
        rec = snapshot_record(plane_wave_pair(grid, 4), Roi(size=(16.0, 16.0)))
        k = grid.kx[4]
        assert rec.e_kin == pytest.approx(0.5 * k * k, rel=1e-9)
        assert rec.f_x == pytest.approx(0.5)
        assert rec.n_vortices == 0
