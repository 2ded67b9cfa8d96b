import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polturb.drive import (
    DisorderResolutionWarning,
    DisorderSpec,
    PumpSpec,
    cut_gaussian,
    measured_lobe_distance,
    pump_envelope_1d,
    pump_profile,
    ramp,
    sample_disorder,
)
from polturb.grid import make_grid

# golden envelope peak positions for the default geometry, frozen from a dense
# 1d scan at build time
GOLDEN_PEAK_X = 15.17
GOLDEN_PEAK_AMP = 0.6139


@pytest.fixture
def grid():
    return make_grid(256, 128.0)


class TestPumpProfile:
    def test_zero_amplitude_is_zero_field(self, grid):
        F = pump_profile(PumpSpec(f_inc=0.0), grid)
        assert np.abs(F).max() == 0.0

    def test_lobe_center_line_fully_cut(self):
        # the cutting function equals the Gaussian on x = 0
        spec = PumpSpec()
        y = np.linspace(-60, 60, 301)
        assert np.abs(cut_gaussian(0.0, y, spec)).max() == 0.0

    def test_envelope_small_at_origin(self):
        # the center sits in the gap between the lobes; only Gaussian tails
        # and the residual of the cut reach it
        spec = PumpSpec(f_inc=1.0)
        x = np.linspace(-100, 100, 4001)
        peak = np.abs(pump_envelope_1d(spec, x)).max()
        assert abs(pump_envelope_1d(spec, 0.0)) < 0.25 * peak

    def test_two_symmetric_envelope_maxima(self):
        spec = PumpSpec(f_inc=1.0)
        x = np.linspace(-100, 100, 40001)
        env = np.abs(pump_envelope_1d(spec, x))
        x_pos = x[x > 0][np.argmax(env[x > 0])]
        x_neg = x[x < 0][np.argmin(np.abs(-x[x < 0] - x_pos))]
        assert x_pos == pytest.approx(GOLDEN_PEAK_X, abs=0.05)
        assert env.max() == pytest.approx(GOLDEN_PEAK_AMP, rel=1e-3)
        assert pump_envelope_1d(spec, x_pos) == pytest.approx(
            pump_envelope_1d(spec, x_neg), rel=1e-6
        )

    def test_measured_lobe_distance(self):
        assert measured_lobe_distance(PumpSpec()) == pytest.approx(
            2 * GOLDEN_PEAK_X, abs=0.1
        )

    def test_pump_even_in_x_and_y(self, grid):
        F = pump_profile(PumpSpec(f_inc=1.0), grid)
        flip_x = np.empty_like(F)
        flip_x[:, 0] = F[:, 0]
        flip_x[:, 1:] = F[:, :0:-1]
        assert np.abs(F - flip_x).max() < 1e-12
        flip_y = np.empty_like(F)
        flip_y[0] = F[0]
        flip_y[1:] = F[:0:-1]
        assert np.abs(F - flip_y).max() < 1e-12

    def test_conjugate_momentum_mirror(self, grid):
        spec = PumpSpec(f_inc=1.0)
        F = pump_profile(spec, grid)
        F_rev = pump_profile(PumpSpec(f_inc=1.0, k_p=-spec.k_p), grid)
        assert np.abs(np.conj(F) - F_rev).max() < 1e-12

    def test_isolated_lobe_phase_gradient(self, grid):
        # a single lobe carries a clean plane-wave factor; the leftward lobe
        # advances its phase by -k_p per unit x
        spec = PumpSpec(f_inc=1.0)
        X, Y = grid.xy()
        lobe = spec.f_inc * cut_gaussian(X - spec.d, Y, spec) * np.exp(-1j * spec.k_p * X)
        iy = grid.n // 2
        ix = int(np.argmax(np.abs(lobe[iy])))
        dphi = np.angle(lobe[iy, ix]) - np.angle(lobe[iy, ix + 1])
        dphi = (dphi + np.pi) % (2 * np.pi) - np.pi
        assert dphi == pytest.approx(spec.k_p * grid.dx, abs=1e-9)

    def test_momentum_content_at_pump_wavevector(self, grid):
        spec = PumpSpec(f_inc=1.0)
        F = pump_profile(spec, grid)
        row = np.abs(np.fft.fft2(F))[0]
        kx = 2 * np.pi * np.fft.fftfreq(grid.n, d=grid.dx)
        k_dom = abs(kx[np.argmax(row)])
        assert k_dom == pytest.approx(spec.k_p, abs=2 * np.pi / grid.length)

    def test_invalid_spec_rejected(self, grid):
        with pytest.raises(ValueError):
            pump_profile(PumpSpec(f_inc=-1.0), grid)
        with pytest.raises(ValueError):
            pump_profile(PumpSpec(sigma_x=0.0), grid)


class TestRamp:
    def test_zero_at_zero(self):
        assert ramp(0.0, 70.0) == 0.0

    def test_95_percent_at_three_tau(self):
        assert ramp(210.0, 70.0) == pytest.approx(0.9502, abs=1e-4)

    def test_one_over_e_at_tau(self):
        assert ramp(70.0, 70.0) == pytest.approx(0.6321, abs=1e-4)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            ramp(-1.0, 70.0)

    def test_instant_on(self):
        assert ramp(5.0, 0.0) == 1.0

    @given(t=st.floats(0.0, 1e4), tau=st.floats(1e-3, 1e3))
    @settings(max_examples=100, deadline=None)
    def test_bounded_and_monotone(self, t, tau):
        # strictly below 1 mathematically; equality only by float saturation
        v = ramp(t, tau)
        assert 0.0 <= v <= 1.0
        assert ramp(t + 1.0, tau) >= v

    def test_initial_slope(self):
        tau = 70.0
        h = 1e-6
        assert (ramp(h, tau) - ramp(0.0, tau)) / h == pytest.approx(1 / tau, rel=1e-5)


class TestDisorder:
    def test_zero_amplitude(self, grid):
        assert np.abs(sample_disorder(DisorderSpec(w0=0.0), grid)).max() == 0.0

    def test_rms_is_exact(self, grid):
        with pytest.warns(DisorderResolutionWarning):
            w = sample_disorder(DisorderSpec(w0=1.43e-3, sigma_w=0.36, seed=9), grid)
        assert w.std() == pytest.approx(1.43e-3, rel=1e-12)
        assert abs(w.mean()) < 1e-12

    def test_seed_reproducible(self, grid):
        spec = DisorderSpec(seed=77)
        with pytest.warns(DisorderResolutionWarning):
            a = sample_disorder(spec, grid)
            b = sample_disorder(spec, grid)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self, grid):
        with pytest.warns(DisorderResolutionWarning):
            a = sample_disorder(DisorderSpec(seed=1), grid)
            b = sample_disorder(DisorderSpec(seed=2), grid)
        assert np.abs(a - b).max() > 0

    def test_resolved_sigma_no_warning(self):
        import warnings

        g = make_grid(64, 32.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            sample_disorder(DisorderSpec(sigma_w=1.0), g)

    def test_correlation_shape_well_resolved(self):
        # direct real-space correlation estimator against the Gaussian target
        g = make_grid(128, 64.0)
        sigma = 1.5
        acc = np.zeros((128, 128))
        n_seeds = 60
        for s in range(n_seeds):
            w = sample_disorder(DisorderSpec(w0=1.0, sigma_w=sigma, seed=s), g)
            wf = np.fft.fft2(w)
            acc += np.fft.ifft2(np.abs(wf) ** 2).real / w.size
        acc /= n_seeds
        rs, vals = [], []
        for di in range(6):
            for dj in range(6):
                r = np.hypot(di, dj) * g.dx
                if r <= 4 * sigma:
                    rs.append(r)
                    vals.append(acc[di, dj])
        rs = np.array(rs)
        vals = np.array(vals)
        model = np.exp(-(rs**2) / (4 * sigma**2))
        resid = vals - model
        r2 = 1 - (resid**2).sum() / ((vals - vals.mean()) ** 2).sum()
        assert r2 > 0.98

    def test_stationarity_across_windows(self):
        g = make_grid(128, 64.0)
        w = sample_disorder(DisorderSpec(w0=1.0, sigma_w=1.0, seed=3), g)
        # nearest-neighbor correlation estimated in disjoint half-domains
        def nn_corr(block):
            return (block[:, :-1] * block[:, 1:]).mean() / (block**2).mean()

        top = nn_corr(w[: 64 - 8])
        bottom = nn_corr(w[64 + 8 :])
        assert top == pytest.approx(bottom, abs=0.1)

    def test_invalid_spec_rejected(self, grid):
        with pytest.raises(ValueError):
            sample_disorder(DisorderSpec(w0=-1.0), grid)
        with pytest.raises(ValueError):
            sample_disorder(DisorderSpec(sigma_w=0.0), grid)
