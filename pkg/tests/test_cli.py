import subprocess
import sys

from bmcsweep.cli import main

from conftest import write_c, write_fixture

OUT = ("Violated property:\nfile x.c line 2 function f\ndivision by zero\n\n"
       "VERIFICATION FAILED\n")


def test_violations_exit_code(tmp_path, capsys):
    write_c(tmp_path / "src", "x.c", "int f(int a)\n{ return 1 / a; }\n")
    fx = write_fixture(tmp_path, [("x.c", "f", 1, "o.txt")], {"o.txt": OUT})
    out = tmp_path / "out"
    code = main(["-d", str(tmp_path / "src"), "-f", "--mock-backend", fx, "--output-dir", str(out)])
    assert code == 10
    assert (out / "report.csv").read_text().splitlines()[1] == "x.c,failed,f,2,DZ"
    assert "1 violations" in capsys.readouterr().err


def test_clean_exit_code(tmp_path):
    write_c(tmp_path, "x.c", "int main(void) { return 0; }\n")
    fx = write_fixture(tmp_path, [])
    assert main(["-fl", str(tmp_path / "x.c"), "--mock-backend", fx,
                 "--output-dir", str(tmp_path / "o")]) == 0


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["-fl", "a.c", "-d", "b"]) == 2
    assert "mutually exclusive" in capsys.readouterr().err
    assert main(["--bogus"]) == 2


def test_missing_inputs_exit_2(tmp_path):
    fx = write_fixture(tmp_path, [])
    assert main(["-d", str(tmp_path / "nope"), "--mock-backend", fx,
                 "--output-dir", str(tmp_path / "o")]) == 2
    assert main(["-d", str(tmp_path), "--backend", "no-such-checker-xyz"]) == 2


def test_unwritable_output_exit_3(tmp_path):
    write_c(tmp_path, "x.c", "int main(void) { return 0; }\n")
    fx = write_fixture(tmp_path, [])
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["-d", str(tmp_path), "--mock-backend", fx,
                 "--output-dir", str(blocker / "sub")]) == 3


def test_module_entry_point_help():
    r = subprocess.run([sys.executable, "-m", "bmcsweep", "-h"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "-fp" in r.stdout and "--mock-backend" in r.stdout
