import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from qtpoles import __version__, catalog, cli

pytestmark = pytest.mark.filterwarnings("error::RuntimeWarning")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out)


# ---------------------------------------------------------------------------
# list


def test_list_has_every_kind(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert sum(1 for line in out.splitlines() if not line.startswith(" ")) == 9


def test_list_json_and_kind(capsys):
    code, out, _ = run(capsys, "list", "--json")
    entries = json.loads(out)
    assert code == 0 and len(entries) == 9
    assert {e["kind"] for e in entries} == set(catalog.KINDS)
    code, out, _ = run(capsys, "list", "--kind", "eckart", "--json")
    (entry,) = json.loads(out)
    assert "sech^2" in entry["potential"] and "eta" in entry["spectrum"]


# ---------------------------------------------------------------------------
# transmission


def test_transmission_delta_row(capsys):
    code, out, _ = run(capsys, "transmission", "--potential", "delta", "--V0", "2",
                       "--emin", "1", "--emax", "1", "--samples", "1")
    assert code == 0
    assert out == "E,T,R\n1.0,0.5,0.5\n"


def test_transmission_barrier_header_and_resonance(capsys):
    code, out, _ = run(capsys, "transmission", "--potential", "square-barrier", "--U0", "25", "--a", "1",
                       "--emin", "34.8696044", "--emax", "34.8696044", "--samples", "1")
    header, row = out.splitlines()
    assert code == 0 and header == "E,That"
    assert abs(float(row.split(",")[1]) - 1.0) < 1e-9


def test_transmission_confining_well_fails(capsys):
    code, _, err = run(capsys, "transmission", "--potential", "harmonic", "--omega", "2")
    assert code == 1 and "NoScatteringStates" in err


def test_transmission_spacing(capsys):
    _, out, _ = run(capsys, "transmission", "--potential", "eckart", "--emin", "1", "--emax", "100",
                    "--samples", "3", "--log")
    assert [float(r.split(",")[0]) for r in out.splitlines()[1:]] == pytest.approx([1, 10, 100])
    _, out, _ = run(capsys, "transmission", "--potential", "eckart", "--emin", "1", "--emax", "3",
                    "--samples", "3")
    assert [float(r.split(",")[0]) for r in out.splitlines()[1:]] == [1.0, 2.0, 3.0]


def test_transmission_json_validates(capsys):
    code, report = run_json(capsys, "transmission", "--potential", "scarf2", "--format", "json", "--samples", "5")
    assert code == 0
    cli.validate(report, "transmission")
    assert len(report["results"]) == 5


@pytest.mark.parametrize("argv", [
    ("transmission", "--potential", "delta", "--emin", "-1"),
    ("transmission", "--potential", "delta", "--emin", "2", "--emax", "1"),
    ("transmission", "--potential", "delta", "--samples", "0"),
    ("transmission", "--potential", "delta", "--V0", "-2"),
    ("transmission", "--potential", "delta", "--V0", "nan"),
    ("transmission", "--potential", "nowhere"),
    ("poles", "--potential", "square-barrier"),
    ("eigen", "--potential", "eckart", "--methods", "analytic,magic"),
    ("eigen", "--potential", "delta", "--methods", "analytic,pole,numerov"),
    ("verify", "--tol-eigen", "-1"),
    ("frobnicate",),
    (),
])
def test_input_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err.startswith("qtpoles")


def test_help_exits_cleanly(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0


# ---------------------------------------------------------------------------
# poles


def test_poles_scarf(capsys):
    code, report = run_json(capsys, "poles", "--potential", "scarf2", "--A", "2.5", "--B", "1")
    cli.validate(report, "poles")
    classes = [p["classification"] for p in report["results"]]
    assert code == 0 and len(classes) == 5
    assert classes.count("Physical") == 3 and classes.count("ConjugateArtifact") == 2
    kappas = [p["kappa"] for p in report["results"]]
    assert kappas == sorted(kappas)


def test_poles_morse(capsys):
    _, report = run_json(capsys, "poles", "--potential", "morse", "--V0", "6.25", "--a", "1")
    phys = sorted(p["E"] for p in report["results"] if p["classification"] == "Physical")
    assert phys == pytest.approx([-4, -1], rel=1e-12)


def test_poles_shallow_square(capsys):
    _, report = run_json(capsys, "poles", "--potential", "square", "--V0", "0.0001", "--a", "1")
    assert [p["classification"] for p in report["results"]] == ["Physical"]


def test_poles_csv(capsys):
    code, out, _ = run(capsys, "poles", "--potential", "harmonic", "--nmax", "3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "kappa,E,n,classification"
    assert len(out.splitlines()) == 4


# ---------------------------------------------------------------------------
# eigen


def test_eigen_eckart(capsys):
    code, report = run_json(capsys, "eigen", "--potential", "eckart", "--V0", "6", "--a", "1",
                            "--methods", "analytic,pole,numerov")
    assert code == 0 and report["pass"] is True
    assert [s["E"] for s in report["results"]["spectra"]["analytic"]] == [-4.0, -1.0]
    assert max(report["results"]["max_abs_deviation"].values()) < 1e-6
    assert set(report) == {"spec", "results", "pass", "tolerances", "version"}
    assert report["version"]["generated_by"] == f"qtpoles {__version__}"


def test_eigen_harmonic_csv(capsys):
    code, out, _ = run(capsys, "eigen", "--potential", "harmonic", "--omega", "2", "--nmax", "5",
                       "--methods", "analytic,pole", "--format", "csv")
    assert code == 0
    assert out == "n,analytic,pole\n0,1.0,1.0\n1,3.0,3.0\n2,5.0,5.0\n3,7.0,7.0\n4,9.0,9.0\n"


def test_eigen_all_methods_scarf_lists_rejections(capsys):
    code, report = run_json(capsys, "eigen", "--potential", "scarf2")
    assert code == 0
    assert set(report["results"]["spectra"]) == {"analytic", "pole", "numerov", "matrix"}
    assert report["tolerances"] == {"pole_rel": 1e-8, "pole_abs": 1e-10, "numerov": 1e-6, "matrix": 5e-4}


def test_eigen_failure_exit_2(capsys):
    code, report = run_json(capsys, "eigen", "--potential", "morse", "--tol-eigen", "1e-20")
    assert code == 2 and report["pass"] is False


def test_eigen_custom_grid(capsys):
    code, report = run_json(capsys, "eigen", "--potential", "eckart", "--methods", "analytic,matrix",
                            "--x-min", "-18", "--x-max", "18", "--n-points", "6001")
    assert code == 0


def test_eigen_round_trip_preserves_every_bit(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "eigen", "--potential", "square", "--format", "json", "--output", str(path))
    report = json.loads(path.read_text())
    jsonschema.validate(report, cli.load_schema("eigen"))
    args = cli.build_parser().parse_args(["eigen", "--potential", "square"])
    direct = cli.compare(cli.make_config(args), list(cli.METHODS))
    assert report["results"]["spectra"] == direct.spectra
    assert report["results"]["deviations"] == direct.deviations


# ---------------------------------------------------------------------------
# verify


def test_verify_only_filter(capsys):
    code, report = run_json(capsys, "verify", "--only", "scarf2", "--no-timing")
    cli.validate(report, "verify")
    assert code == 0 and report["pass"] is True
    assert report["results"] and all(r["kind"] == "scarf2" for r in report["results"])
    assert all(r["seconds"] is None for r in report["results"])


def test_verify_unattainable_tolerance_fails(capsys):
    code, report = run_json(capsys, "verify", "--only", "eckart", "--tol-eigen", "1e-20")
    assert code == 2
    failed = {r["id"] for r in report["results"] if r["status"] == "fail"}
    assert {"2/eckart/numerov", "2/eckart/matrix"} <= failed


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--criterion", "6", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "id,status,measured,tolerance,seconds"
    assert len(out.splitlines()) == 4


# ---------------------------------------------------------------------------
# plumbing


def test_output_is_byte_identical(capsys, tmp_path):
    for argv in (("eigen", "--potential", "eckart"), ("poles", "--potential", "scarf2"),
                 ("transmission", "--potential", "square"), ("verify", "--criterion", "3", "--no-timing")):
        a, b = tmp_path / "a", tmp_path / "b"
        run(capsys, *argv, "--output", str(a))
        run(capsys, *argv, "--output", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()


def test_config_file_preloads_and_flags_win(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# reference Eckart run\npotential = eckart\nV0 = 12\nmethods = analytic,pole\nformat = csv\n")
    _, out, _ = run(capsys, "eigen", "--config", str(cfg))
    assert out.splitlines()[1].startswith("0,-9.")  # V0 = 12: eta = 3.5, E0 = -9
    _, out, _ = run(capsys, "eigen", "--config", str(cfg), "--V0", "6")
    assert out.splitlines()[1] == "0,-4.0,-4.0"


def test_config_file_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("potential eckart\n")
    assert run(capsys, "eigen", "--config", str(bad))[0] == 1
    assert run(capsys, "eigen", "--config", str(tmp_path / "missing.cfg"))[0] == 1


def test_units_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(cli.UNITS_ENV, "si-like")
    _, report = run_json(capsys, "transmission", "--potential", "delta", "--V0", "2e-28",
                         "--emin", "1e-20", "--emax", "1e-20", "--samples", "1", "--format", "json")
    assert report["spec"]["units"] == {"hbar": catalog.SI_LIKE.hbar, "mass": catalog.SI_LIKE.mass}
    _, report = run_json(capsys, "transmission", "--potential", "delta", "--units", "natural", "--samples", "2",
                         "--format", "json")
    assert report["spec"]["units"] == {"hbar": 1.0, "mass": 0.5}
    monkeypatch.setenv(cli.UNITS_ENV, "imperial")
    assert run(capsys, "transmission", "--potential", "delta")[0] == 1


def test_mass_and_hbar_flags(capsys):
    # m = 1 doubles the binding energy of the delta well relative to m = 1/2
    _, report = run_json(capsys, "eigen", "--potential", "delta", "--mass", "1", "--methods", "analytic,pole")
    assert report["results"]["spectra"]["analytic"][0]["E"] == pytest.approx(-2.0)


def test_debug_env_validates_on_emit(capsys, monkeypatch):
    monkeypatch.setenv(cli.DEBUG_ENV, "1")
    assert run(capsys, "poles", "--potential", "eckart")[0] == 0


def test_console_script():
    exe = shutil.which("qtpoles")
    argv = [exe] if exe else [sys.executable, "-m", "qtpoles.cli"]
    res = subprocess.run([*argv, "transmission", "--potential", "delta", "--emin", "1", "--emax", "1",
                          "--samples", "1"], capture_output=True, text=True, timeout=60)
    assert res.returncode == 0 and res.stdout == "E,T,R\n1.0,0.5,0.5\n"
