import numpy as np
import pytest

import relqtraj as rq
from relqtraj.snapshot_io import ConfigError, SNAPSHOT_COLUMNS

from conftest import baseline_config

BASELINE_TEXT = """
# wavepacket benchmark
mass = 1
hbar = 1
c = 3
weight.kind = gaussian
weight.a = 0.5
grid.min = -5
grid.max = 5
grid.n = 25
time.final = 10
tol.invariant = 1e-3
"""


class TestParseConfig:
    def test_baseline_accepted(self):
        cfg = rq.parse_config(BASELINE_TEXT)
        assert cfg.c == 3.0
        assert cfg.weight.kind == "gaussian"
        assert cfg.weight.params == (0.5,)
        assert cfg.grid.n_points == 25
        assert cfg.grid.spacing == pytest.approx(10 / 24)
        assert cfg.t_final == 10.0
        # documented defaults fill the rest
        assert cfg.dt == 1e-3
        assert cfg.stencil_order == 4
        assert cfg.residual_tol == 1e-5
        assert cfg.invariant_tol == 1e-3

    def test_empty_requires_weight_kind(self):
        with pytest.raises(ConfigError, match="weight.kind"):
            rq.parse_config("")

    def test_small_grid_rejected(self):
        text = BASELINE_TEXT.replace("grid.n = 25", "grid.n = 4")
        with pytest.raises(ConfigError, match="9"):
            rq.parse_config(text)

    def test_unknown_key_with_line_number(self):
        with pytest.raises(ConfigError, match="line 2.*frobnicate"):
            rq.parse_config("c = 1\nfrobnicate = 7\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            rq.parse_config(BASELINE_TEXT + "\nc = 4\n")

    def test_bad_value_names_key_and_line(self):
        text = BASELINE_TEXT.replace("c = 3", "c = fast")
        with pytest.raises(ConfigError, match="c"):
            rq.parse_config(text)

    def test_missing_equals_sign(self):
        with pytest.raises(ConfigError, match="line 1"):
            rq.parse_config("c 3")

    def test_gaussian_needs_width(self):
        text = BASELINE_TEXT.replace("weight.a = 0.5\n", "")
        with pytest.raises(ConfigError, match="weight.a"):
            rq.parse_config(text)

    def test_stray_weight_parameter_rejected(self):
        with pytest.raises(ConfigError, match="weight.kappa"):
            rq.parse_config(BASELINE_TEXT + "\nweight.kappa = 1\n")

    def test_uniform_and_exponential_kinds(self):
        base = "c = 1\ngrid.min = 0\ngrid.max = 1\ngrid.n = 11\ntime.final = 1\n"
        cfg = rq.parse_config(base + "weight.kind = uniform\n")
        assert cfg.weight.kind == "uniform"
        cfg = rq.parse_config(base + "weight.kind = exponential\nweight.kappa = 0.3\n")
        assert cfg.weight.params == (0.3,)

    def test_round_trip_through_text(self):
        cfg = rq.parse_config(BASELINE_TEXT)
        again = rq.parse_config(rq.config_to_text(cfg))
        assert again.c == cfg.c
        assert again.dt == cfg.dt
        assert again.grid.n_points == cfg.grid.n_points
        assert again.weight.kind == cfg.weight.kind
        assert again.invariant_tol == cfg.invariant_tol


@pytest.fixture(scope="module")
def short_series():
    return rq.integrate(baseline_config(t_final=2.0), cadence=0.5)


class TestSnapshotRoundTrip:
    def test_bitwise_round_trip(self, short_series, tmp_path):
        out = tmp_path / "snaps"
        paths = rq.write_snapshots(short_series, str(out), code_version="x")
        assert any(p.endswith("manifest.tsv") for p in paths)
        back = rq.read_snapshots(str(out))
        assert len(back) == len(short_series)
        for a, b in zip(short_series, back):
            assert a.tau_ensemble == b.tau_ensemble
            assert np.array_equal(a.state.t, b.state.t)
            assert np.array_equal(a.state.x, b.state.x)
            assert np.array_equal(a.state.u0, b.state.u0)
            assert np.array_equal(a.state.u1, b.state.u1)
            assert np.array_equal(a.quantum.Q, b.quantum.Q)

    def test_manifest_reconstructs_config(self, short_series, tmp_path):
        out = tmp_path / "snaps"
        rq.write_snapshots(short_series, str(out))
        back = rq.read_snapshots(str(out))
        cfg = back.config
        assert cfg.c == short_series.config.c
        assert cfg.invariant_tol == short_series.config.invariant_tol
        assert cfg.grid.n_points == short_series.config.grid.n_points

    def test_rerun_from_manifest_is_bitwise(self, short_series, tmp_path):
        out1 = tmp_path / "a"
        rq.write_snapshots(short_series, str(out1))
        cfg = rq.read_snapshots(str(out1)).config
        series2 = rq.integrate(cfg, cadence=0.5)
        out2 = tmp_path / "b"
        rq.write_snapshots(series2, str(out2))
        for p1 in sorted(out1.glob("snap_*.tsv")):
            p2 = out2 / p1.name
            assert p2.read_bytes() == p1.read_bytes()

    def test_header_and_precision(self, short_series, tmp_path):
        out = tmp_path / "snaps"
        rq.write_snapshots(short_series, str(out))
        first = (out / "snap_T0.tsv").read_text().splitlines()
        assert first[0].split("\t") == list(SNAPSHOT_COLUMNS)
        # 17 significant digits round-trip doubles exactly
        val = first[1].split("\t")[3]
        assert float(val) == short_series.snapshots[0].state.x[0]

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            rq.read_snapshots(str(tmp_path / "nope"))


class TestReport:
    def test_report_rows(self, tmp_path):
        series = rq.integrate(baseline_config(t_final=1.0), cadence=1.0)
        rep = rq.evaluate_invariants(series, include_residual=False)
        out = tmp_path / "report.tsv"
        rq.write_report(rep, str(out))
        lines = out.read_text().splitlines()
        assert lines[0].split("\t") == [
            "name", "max_violation", "T_at_max", "C_at_max", "tolerance", "pass"]
        names = [ln.split("\t")[0] for ln in lines[1:]]
        assert "four_velocity_norm" in names
        assert "simultaneity_g01" in names
