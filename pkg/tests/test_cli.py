import subprocess
import sys

import pytest

from kreinlab import __version__, cli
from kreinlab import krein_verify as kv

SIM = ["simulate", "--kind", "radial-ou", "--delta", "1", "--mu", "1", "--x0", "1", "--step", "1e-3",
       "--horizon", "0.5", "--seed", "7"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestExamples:
    def test_verify_whittaker_c(self, capsys, tmp_path):
        code, out, err = run(["verify", "--identity", "whittaker-c", "--alpha", "0.5", "--out", str(tmp_path / "r.csv")],
                             capsys)
        assert code == 0
        assert out.startswith("whittaker-c: PASS max_rel_err=")
        text = (tmp_path / "r.csv").read_text()
        assert text.startswith(f"# kreinlab {__version__}\n# command=verify\n")
        assert "name,params,metric,value,tolerance,pass" in text

    def test_levy_table(self, capsys, tmp_path):
        path = tmp_path / "t.csv"
        argv = ["levy-table", "--family", "sinh", "--mu", "1", "--alpha", "0.5", "--k", "0", "--lambdas", "0.5,1,2",
                "--out", str(path)]
        code, out, err = run(argv, capsys)
        assert code == 0
        lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "lambda,psi" and len(lines) == 4
        psi = [float(l.split(",")[1]) for l in lines[1:]]
        want = [1.1340009551582319, 2.0137231850147857, 3.3888523391759163]
        assert psi == pytest.approx(want, rel=1e-10)

    def test_simulate_reproducible(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(SIM + ["--out", str(a)], capsys)[0] == 0
        assert run(SIM + ["--out", str(b)], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        text = a.read_text()
        assert "# seed=7" in text and f"# kreinlab {__version__}" in text

    def test_simulate_stdout(self, capsys):
        code, out, _ = run(SIM, capsys)
        assert code == 0 and out.startswith("#") and "\nt,x\n" in out

    def test_hit_times(self, capsys, tmp_path):
        path = tmp_path / "h.csv"
        argv = ["hit-times", "--kind", "bessel", "--delta", "1", "--x0", "1", "--n", "50", "--seed", "3",
                "--out", str(path)]
        assert run(argv, capsys)[0] == 0
        rows = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        assert len(rows) == 51

    def test_sweep_small(self, capsys, tmp_path):
        code, out, _ = run(["sweep", "--n", "2000", "--seed", "100", "--out", str(tmp_path / "s.csv")], capsys)
        assert code == 0 and out.count("\n") == 18


class TestConfig:
    def test_file_and_flag_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("# run\nkind=radial-ou\ndelta=1\nmu=1\nx0=1\nstep=1e-3\nhorizon=0.5\nseed=1\n")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(["simulate", "--config", str(cfg), "--seed", "7", "--out", str(a)], capsys)[0] == 0
        assert run(SIM + ["--out", str(b)], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_aliases(self, capsys, tmp_path):
        path = tmp_path / "t.csv"
        argv = ["levy-table", "--family", "gamma", "--mu", "1", "--lambda-grid", "1", "--out-path", str(path)]
        assert run(argv, capsys)[0] == 0 and path.exists()

    def test_unknown_key_in_file(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("bogus=1\n")
        code, _, err = run(["simulate", "--config", str(cfg)], capsys)
        assert code == 2 and "constraint violated" in err

    def test_config_object(self):
        c = cli.config_from_args(["verify", "--identity", "m-i"])
        assert c.command == "verify" and c.get("identity") == "m-i"


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv, fragment",
        [
            (["simulate", "--kind", "radial-ou", "--delta", "1", "--mu", "1", "--x0", "1", "--horizon", "1"], "seed"),
            (["simulate", "--kind", "bessel", "--delta", "3", "--x0", "1", "--horizon", "1", "--seed", "1"],
             "0 < delta < 2"),
            (["simulate", "--kind", "radial-ou", "--delta", "1", "--mu", "1", "--x0", "1", "--horizon", "1",
              "--step", "0", "--seed", "1"], "step > 0"),
            (["levy-table", "--family", "sinh", "--mu", "1", "--alpha", "0.5", "--k", "2", "--lambdas", "1"], "k < 1"),
            (["levy-table", "--family", "cauchy", "--lambdas", "1"], "family"),
            (["verify", "--identity", "nonsense"], "identity"),
            (["verify", "--identity", "bessel-t0", "--n", "10"], "seed"),
            (["hit-times", "--kind", "bessel-up", "--delta", "1", "--nu", "1", "--x0", "1", "--n", "5", "--seed", "1"],
             "kind reaches 0"),
            (["simulate", "--delta", "abc", "--seed", "1"], "delta"),
        ],
    )
    def test_config_errors(self, capsys, argv, fragment):
        code, _, err = run(argv, capsys)
        assert code == 2
        assert err.startswith("error: constraint violated:") and fragment in err

    def test_censoring_is_failure(self, capsys):
        argv = ["hit-times", "--kind", "bessel-down", "--delta", "1", "--nu", "0.1", "--x0", "1", "--horizon", "0.5",
                "--n", "200", "--seed", "1"]
        assert run(argv, capsys)[0] == 1

    def test_failed_check(self, capsys, monkeypatch):
        failing = lambda: kv.VerificationReport("whittaker-c", "max_rel_err", 1.0, 1e-9)
        monkeypatch.setitem(cli.IDENTITIES, "whittaker-c", (failing, {}))
        code, out, _ = run(["verify", "--identity", "whittaker-c"], capsys)
        assert code == 1 and "FAIL" in out


def test_module_entry_point(tmp_path):
    path = tmp_path / "r.csv"
    proc = subprocess.run([sys.executable, "-m", "kreinlab", "identities", "--identity", "m-i", "--out", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "m-i: PASS" in proc.stdout and path.exists()
