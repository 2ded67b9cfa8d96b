import json

import numpy as np
import pytest

from polturb.config import ConfigBundle, load_config
from polturb.drive import DisorderSpec, sample_disorder
from polturb.fieldio import (
    MAGIC_COMPLEX,
    read_field_dump,
    read_observables_csv,
    read_real_dump,
    save_heatmap,
    write_field_dump,
    write_metadata,
    write_observables_csv,
    write_real_dump,
)
from polturb.grid import FieldPair, make_grid
from polturb.observables import ObservableRecord


class TestFieldDump:
    def test_round_trip(self, tmp_path):
        grid = make_grid(16, 8.0)
        rng = np.random.default_rng(2)
        fields = FieldPair(
            grid,
            rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)),
            rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)),
            t=12.5,
        )
        path = write_field_dump(tmp_path / "snap.bin", fields)
        back = read_field_dump(path)
        assert back.t == 12.5
        assert back.grid == grid
        assert np.array_equal(back.psi_c, fields.psi_c)
        assert np.array_equal(back.psi_x, fields.psi_x)

    def test_header_layout(self, tmp_path):
        grid = make_grid(8, 4.0)
        fields = FieldPair(grid, np.zeros((8, 8), complex), np.zeros((8, 8), complex), 3.0)
        path = write_field_dump(tmp_path / "s.bin", fields)
        raw = path.read_bytes()
        assert raw[:4] == MAGIC_COMPLEX
        assert int.from_bytes(raw[4:8], "little") == 8
        assert np.frombuffer(raw[8:16], "<f8")[0] == 4.0
        assert np.frombuffer(raw[16:24], "<f8")[0] == 3.0
        assert int.from_bytes(raw[24:28], "little") == 2
        # interleaved (re, im) float64 payload
        assert len(raw) == 28 + 2 * 8 * 8 * 16

    def test_real_dump_round_trip(self, tmp_path):
        grid = make_grid(16, 8.0)
        w = sample_disorder(DisorderSpec(w0=1.0, sigma_w=1.0, seed=5), grid)
        path = write_real_dump(tmp_path / "w.bin", w, grid)
        back, grid2, t = read_real_dump(path)
        assert np.array_equal(back, w)
        assert grid2.n == 16

    def test_real_dump_supports_roi_shapes(self, tmp_path):
        from polturb.grid import Grid2D

        arr = np.arange(48.0 * 48).reshape(48, 48)
        path = write_real_dump(tmp_path / "m.bin", arr, Grid2D(48, 24.0))
        back, grid, _ = read_real_dump(path)
        assert np.array_equal(back, arr)
        assert grid.length == 24.0

    def test_wrong_magic_rejected(self, tmp_path):
        p = tmp_path / "bad.bin"
        p.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ValueError, match="magic"):
            read_field_dump(p)

    def test_metadata_sidecar(self, tmp_path):
        path = tmp_path / "snap.bin"
        meta_path = write_metadata(path, {"seed": 7, "arr": np.arange(3)})
        data = json.loads(meta_path.read_text())
        assert data["seed"] == 7
        assert data["arr"] == [0, 1, 2]
        assert meta_path.suffix == ".json"


class TestObservablesCsv:
    def test_round_trip(self, tmp_path):
        records = [
            ObservableRecord(t=2.0 * i, n_c=0.1 * i, f_x=0.5, f_c=0.5,
                             e_kin=1.0, e_int=2.0, eta=2.0, k_peak=1.3,
                             vortices=[(0.0, 0.0, 1)] * i)
            for i in range(5)
        ]
        path = write_observables_csv(tmp_path / "obs.csv", records)
        data = read_observables_csv(path)
        assert np.allclose(data["t"], [0, 2, 4, 6, 8])
        assert np.allclose(data["n_vortices"], [0, 1, 2, 3, 4])
        assert np.allclose(data["eta"], 2.0)

    def test_deterministic_text(self, tmp_path):
        records = [ObservableRecord(t=0.1, n_c=1 / 3, f_x=0.5, f_c=0.5,
                                    e_kin=np.pi, e_int=1.0, eta=1 / np.pi,
                                    k_peak=0.7)]
        a = write_observables_csv(tmp_path / "a.csv", records).read_text()
        b = write_observables_csv(tmp_path / "b.csv", records).read_text()
        assert a == b


class TestHeatmap:
    def test_png_written_with_metadata(self, tmp_path):
        arr = np.random.default_rng(0).random((32, 32))
        path = save_heatmap(tmp_path / "map.png", arr, extent=(0, 1, 0, 1),
                            cmap="inferno", label="g1", vmin=0, vmax=1)
        raw = path.read_bytes()
        assert raw[1:4] == b"PNG"
        assert b"inferno" in raw


CONFIG_TEXT = """
[model]
delta_lp = 0.3
gamma_c = 0.05
gamma_x = 0.05

[pump]
f_inc = 1.5
k_p = 0.6

[disorder]
seed = 42

[solver]
n = 128
length = 64.0
dt = 0.01
t_end = 10.0
dealias = off

[sweep]
f_inc = 0.5, 1.0
delta = 0.1 0.2
workers = 2
"""


class TestConfig:
    def test_load_sections(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text(CONFIG_TEXT)
        bundle = load_config(path)
        assert bundle.model.delta_lp == 0.3
        assert bundle.model.gamma_c == 0.05
        # detunings follow the new delta_lp
        assert bundle.model.delta_c == pytest.approx(0.3 - 2.0)
        assert bundle.pump.f_inc == 1.5
        assert bundle.disorder.seed == 42
        assert bundle.solver.dt == 0.01
        assert bundle.solver.dealias == "off"
        assert bundle.grid_n == 128
        assert bundle.grid_length == 64.0
        assert bundle.sweep.f_inc == [0.5, 1.0]
        assert bundle.sweep.delta == [0.1, 0.2]
        assert bundle.sweep.workers == 2

    def test_defaults_without_file_sections(self, tmp_path):
        path = tmp_path / "empty.ini"
        path.write_text("[model]\ndelta_lp = 0.22\n")
        bundle = load_config(path)
        assert bundle.solver.dt == 0.02
        assert bundle.pump.sigma_y == 20.0
        assert bundle.grid_n == 512

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[turbo]\nx = 1\n")
        with pytest.raises(ValueError, match="unknown config section"):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[pump]\nf_ink = 1\n")
        with pytest.raises(ValueError, match="unknown key"):
            load_config(path)

    def test_explicit_frame_detunings_kept(self, tmp_path):
        path = tmp_path / "над.ini"
        path.write_text("[model]\ndelta_lp = 0.3\ndelta_c = -1.5\ndelta_x = -1.5\n")
        bundle = load_config(path)
        assert bundle.model.delta_c == -1.5
