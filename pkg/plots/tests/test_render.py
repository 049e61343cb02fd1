import shutil
import subprocess
import sys

import numpy as np
import pytest

from slowdecay_plots import FigureKind, PlotDataError, PlotSpec, render

CSV_COLUMNS = (
    "t", "norm_u", "norm_Pu", "norm_Qu", "norm_v", "norm_A12u", "F_pot",
    "E0", "F0", "E_tilde", "E_hat_basic", "E_big", "E_hat_eps",
    "G", "G_hat", "Q_p",
)


def write_run_csv(path, n=60, t_end=1e4, metadata=None, norm_u=None, g_value=0.03):
    """Handcrafted file following the simulator's CSV schema."""
    t = np.power(1.0 + t_end, np.arange(n) / (n - 1)) - 1.0
    u = norm_u if norm_u is not None else 0.1 * (1.0 + t) ** -0.5
    e = u**4
    meta = {"p": "2", "problem": "synthetic"}
    meta.update(metadata or {})
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(CSV_COLUMNS))
    for i in range(n):
        row = {
            "t": t[i], "norm_u": u[i], "norm_Pu": u[i], "norm_Qu": 0.0,
            "norm_v": 0.0, "norm_A12u": 0.0, "F_pot": e[i] / 4.0,
            "E0": e[i] / 4.0, "F0": e[i] / 2.0, "E_tilde": e[i],
            "E_hat_basic": e[i], "E_big": e[i], "E_hat_eps": e[i],
            "G": g_value, "G_hat": g_value, "Q_p": 0.0,
        }
        lines.append(",".join(format(row[c], ".17g") for c in CSV_COLUMNS))
    path.write_text("\n".join(lines) + "\n")
    return path


CERT_META = {
    "cert_member": "1",
    "cert_sigma1": "565.19",
    "cert_delta": "0.4759",
    "cert_R": "1",
    "cert_y0": "0.01",
    "cert_envelope_rate": "95.1",
}


class TestNormDecay:
    def test_renders_with_reference_and_envelope(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv", metadata=CERT_META)
        out = tmp_path / "norm.png"
        info = render(PlotSpec(FigureKind.NORM_DECAY, (str(csv),), str(out)))
        assert out.exists() and out.stat().st_size > 1000
        assert info.reference_exponent == -0.5

    def test_p_flag_overrides_metadata(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv")
        out = tmp_path / "norm.png"
        info = render(PlotSpec(FigureKind.NORM_DECAY, (str(csv),), str(out), p=4.0))
        assert info.reference_exponent == -0.25

    def test_deterministic_bytes(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv")
        out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
        render(PlotSpec(FigureKind.NORM_DECAY, (str(csv),), str(out1)))
        render(PlotSpec(FigureKind.NORM_DECAY, (str(csv),), str(out2)))
        assert out1.read_bytes() == out2.read_bytes()

    def test_multiple_csvs(self, tmp_path):
        a = write_run_csv(tmp_path / "a.csv")
        b = write_run_csv(tmp_path / "b.csv", norm_u=None, t_end=1e3)
        out = tmp_path / "norm.png"
        info = render(PlotSpec(FigureKind.NORM_DECAY, (str(a), str(b)), str(out)))
        assert info.n_curves == 2

    def test_empty_data_is_an_error_and_no_file(self, tmp_path):
        t = np.linspace(0, 10, 20)
        csv = write_run_csv(tmp_path / "run.csv", n=20, norm_u=np.zeros(20))
        out = tmp_path / "norm.png"
        with pytest.raises(PlotDataError, match="no positive"):
            render(PlotSpec(FigureKind.NORM_DECAY, (str(csv),), str(out)))
        assert not out.exists()

    def test_missing_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("# p=2\nt,value\n0,1\n1,0.5\n")
        with pytest.raises(PlotDataError, match="missing columns"):
            render(PlotSpec(FigureKind.NORM_DECAY, (str(bad),),
                            str(tmp_path / "x.png")))


class TestEnergyDecay:
    def test_reference_exponent(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv")
        out = tmp_path / "energy.png"
        info = render(PlotSpec(FigureKind.ENERGY_DECAY, (str(csv),), str(out)))
        assert out.exists()
        assert info.reference_exponent == -2.0


class TestQuotientCeiling:
    def test_ceiling_from_metadata(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv", metadata=CERT_META)
        out = tmp_path / "quotient.png"
        info = render(PlotSpec(FigureKind.QUOTIENT_CEILING, (str(csv),), str(out)))
        assert out.exists() and info.n_curves == 1

    def test_ceiling_from_flag(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv")
        out = tmp_path / "quotient.png"
        render(PlotSpec(FigureKind.QUOTIENT_CEILING, (str(csv),), str(out),
                        sigma1=565.0))
        assert out.exists()

    def test_no_ceiling_available(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv")
        with pytest.raises(PlotDataError, match="sigma1"):
            render(PlotSpec(FigureKind.QUOTIENT_CEILING, (str(csv),),
                            str(tmp_path / "x.png")))

    def test_all_nan_quotients_error(self, tmp_path):
        csv = write_run_csv(tmp_path / "run.csv", g_value=float("nan"),
                            metadata=CERT_META)
        with pytest.raises(PlotDataError, match="no finite"):
            render(PlotSpec(FigureKind.QUOTIENT_CEILING, (str(csv),),
                            str(tmp_path / "x.png")))


class TestSweepSummary:
    def test_renders_classified_points(self, tmp_path):
        csv = tmp_path / "summary.csv"
        csv.write_text(
            "# runs=3\n"
            "index,amplitude,exponent,r_squared,classification\n"
            "0,0.001,-0.5,0.999,slow\n"
            "1,0.01,-0.52,0.995,slow\n"
            "2,0.1,-1.4,0.8,inconclusive\n"
        )
        out = tmp_path / "sweep.png"
        info = render(PlotSpec(FigureKind.SWEEP_SUMMARY, (str(csv),), str(out), p=2.0))
        assert out.exists()
        assert info.reference_exponent == -0.5


class TestCli:
    def test_command_line_roundtrip(self, tmp_path, capsys):
        from slowdecay_plots.cli import main

        csv = write_run_csv(tmp_path / "run.csv")
        out = tmp_path / "norm.png"
        code = main(["--kind", "norm_decay", "--csv", str(csv), "--out", str(out)])
        assert code == 0 and out.exists()

    def test_error_exit_code(self, tmp_path):
        from slowdecay_plots.cli import main

        assert main(["--kind", "norm_decay", "--csv", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "x.png")]) == 1


@pytest.mark.skipif(
    shutil.which(sys.executable) is None
    or subprocess.run(
        [sys.executable, "-c", "import slowdecay"], capture_output=True
    ).returncode
    != 0,
    reason="simulator CLI not installed",
)
class TestAgainstSimulatorOutput:
    """Secondary acceptance: the three run figures from a certified-run CSV."""

    def test_certified_run_figures(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "problem = nonlocal_rank1\n"
            "p = 2\n"
            "u0_spec = const:0.0012\n"
            "rho = 1.0\n"
            "t_end = 2000\n"
            "sample_count = 150\n"
        )
        csv = tmp_path / "run.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "slowdecay.cli", "simulate",
             "--config", str(cfg), "--out", str(csv)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr

        norm = render(PlotSpec(FigureKind.NORM_DECAY, (str(csv),),
                               str(tmp_path / "norm.png")))
        energy = render(PlotSpec(FigureKind.ENERGY_DECAY, (str(csv),),
                                 str(tmp_path / "energy.png")))
        quotient = render(PlotSpec(FigureKind.QUOTIENT_CEILING, (str(csv),),
                                   str(tmp_path / "quotient.png")))
        ok = (
            norm.reference_exponent == -0.5
            and energy.reference_exponent == -2.0
            and quotient.n_curves == 1
        )
        print(f"ACCEPTANCE certified-run figures: {'PASS' if ok else 'FAIL'}")
        assert ok
        for name in ("norm.png", "energy.png", "quotient.png"):
            assert (tmp_path / name).stat().st_size > 1000
