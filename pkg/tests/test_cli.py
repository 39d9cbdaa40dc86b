import numpy as np

from relqtraj.cli import main

GAUSS_CFG = """
c = 3
weight.kind = gaussian
weight.a = 0.5
grid.min = -5
grid.max = 5
grid.n = 25
time.final = 2
tol.invariant = 1e-3
"""

EXP_CFG = """
c = 2
weight.kind = exponential
weight.kappa = 0.25
grid.min = -2
grid.max = 2
grid.n = 25
time.final = 2
tol.invariant = 1e-6
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestSimulate:
    def test_run_and_outputs(self, tmp_path, capsys):
        cfg = _write(tmp_path, "g.cfg", GAUSS_CFG)
        out = tmp_path / "out"
        code = main(["simulate", "--config", cfg, "--out", str(out)])
        # snapshots exist regardless of whether every invariant met tolerance
        snaps = sorted(out.glob("snap_*.tsv"))
        assert len(snaps) == 3  # T = 0, 1, 2
        assert (out / "manifest.tsv").exists()
        assert code in (0, 2)
        assert "simulate:" in capsys.readouterr().out

    def test_exponential_run_passes(self, tmp_path):
        cfg = _write(tmp_path, "e.cfg", EXP_CFG)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0

    def test_bad_config_is_validation_error(self, tmp_path):
        cfg = _write(tmp_path, "bad.cfg", "c = 3\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 1

    def test_unknown_key_is_validation_error(self, tmp_path):
        cfg = _write(tmp_path, "bad.cfg", GAUSS_CFG + "\nwhat = 1\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


class TestAnalyticVerify:
    def test_inertial_snapshot_verify_all_pass(self, tmp_path):
        out = tmp_path / "inertial"
        code = main([
            "analytic", "--kind", "inertial", "--beta0", "0.6", "--c", "2",
            "--grid-min", "-2", "--grid-max", "2", "--grid-n", "25",
            "--times", ",".join(str(0.1 * k) for k in range(13)),
            "--out", str(out),
        ])
        assert code == 0
        assert main(["verify", "--snapshots", str(out),
                     "--tol-invariant", "1e-8"]) == 0
        report = (out / "report.tsv").read_text().splitlines()
        rows = {ln.split("\t")[0]: ln.split("\t")[-1] for ln in report[1:]}
        assert rows["four_velocity_norm"] == "pass"
        assert rows["simultaneity_g01"] == "pass"
        assert rows["pde_residual_t"] == "pass"

    def test_verify_rejects_at_unreachable_tolerance(self, tmp_path):
        out = tmp_path / "inertial"
        main(["analytic", "--kind", "inertial", "--beta0", "0.6", "--c", "2",
              "--grid-min", "-2", "--grid-max", "2", "--grid-n", "25",
              "--times", "0,0.5,1.0", "--out", str(out)])
        assert main(["verify", "--snapshots", str(out),
                     "--tol-invariant", "1e-18"]) == 2

    def test_exponential_analytic_round_trip(self, tmp_path):
        out = tmp_path / "exp"
        assert main(["analytic", "--kind", "exponential", "--kappa", "0.3",
                     "--c", "1", "--grid-min", "-2", "--grid-max", "2",
                     "--grid-n", "25", "--times", "0,1,2", "--out", str(out)]) == 0
        txt = sorted(out.glob("snap_*.tsv"))[-1].read_text().splitlines()
        cols = txt[0].split("\t")
        x = [float(r.split("\t")[cols.index("x")]) for r in txt[1:]]
        C = [float(r.split("\t")[cols.index("C")]) for r in txt[1:]]
        assert x == C  # trajectories at rest

    def test_hyperbolic_kinds(self, tmp_path):
        out = tmp_path / "h1"
        assert main(["analytic", "--kind", "hyperbolic-gamma-one", "--B", "1",
                     "--c", "1", "--grid-min", "0.5", "--grid-max", "2.5",
                     "--grid-n", "25", "--times", "0,0.4,0.8", "--out", str(out)]) == 0
        out2 = tmp_path / "h2"
        assert main(["analytic", "--kind", "hyperbolic-gamma-t", "--A", "0.5",
                     "--c", "2", "--grid-min", "-1", "--grid-max", "1",
                     "--grid-n", "25", "--times", "0.5,1.0", "--out", str(out2)]) == 0
        # degenerate T = 0 slice is refused
        assert main(["analytic", "--kind", "hyperbolic-gamma-t", "--A", "0.5",
                     "--c", "2", "--grid-min", "-1", "--grid-max", "1",
                     "--grid-n", "25", "--times", "0,1", "--out", str(out2)]) == 1

    def test_verify_missing_directory(self, tmp_path):
        assert main(["verify", "--snapshots", str(tmp_path / "none")]) == 1


class TestCompareLimits:
    def test_nonrel_comparison_runs(self, tmp_path, capsys):
        cfg = _write(tmp_path, "c100.cfg", """
c = 100
weight.kind = gaussian
weight.a = 0.5
grid.min = -2.5
grid.max = 2.5
grid.n = 25
time.final = 2
tol.invariant = 1e-6
""")
        assert main(["compare-limits", "--config", cfg, "--nonrel"]) == 0
        out = capsys.readouterr().out
        assert "max |x difference|" in out

    def test_needs_a_comparison_target(self, tmp_path):
        cfg = _write(tmp_path, "g.cfg", GAUSS_CFG)
        assert main(["compare-limits", "--config", cfg]) == 1


class TestFigures:
    def test_figure_files(self, tmp_path):
        cfg = _write(tmp_path, "g.cfg", GAUSS_CFG)
        out = tmp_path / "out"
        main(["simulate", "--config", cfg, "--out", str(out)])
        figs = tmp_path / "figs"
        assert main(["figures", "--snapshots", str(out), "--out", str(figs)]) == 0
        for name in ("fig_trajectories.tsv", "fig_simultaneity.tsv",
                     "fig_gamma.tsv", "fig_q.tsv"):
            assert (figs / name).exists()
        # the quantum-potential family crosses zero near +-sqrt(2) at every T
        rows = (figs / "fig_q.tsv").read_text().splitlines()[1:]
        data = {}
        for r in rows:
            T, C, Q = (float(v) for v in r.split("\t"))
            data.setdefault(T, []).append((C, Q))
        for T, pts in data.items():
            pts.sort()
            C = np.array([p[0] for p in pts])
            Q = np.array([p[1] for p in pts])
            sign_changes = C[:-1][np.sign(Q[:-1]) != np.sign(Q[1:])]
            assert any(1.0 < abs(cc) < 1.9 for cc in sign_changes)
