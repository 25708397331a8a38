import csv
import io
import json
import logging

import pytest
from click.testing import CliRunner
from hypothesis import given, settings
from hypothesis import strategies as st

from pucci_phase.cli import EXIT_NUMERIC, EXIT_USAGE, RunConfig, main, portrait_svg
from pucci_phase.params import make_params

PLUS4 = ["--lambda", "1", "--Lambda", "2", "--op", "plus", "--N", "4", "--a", "0"]


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, args, code=0):
    res = runner.invoke(main, args)
    assert res.exit_code == code, (res.output, res.exception)
    return res


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


# -- exponents ------------------------------------------------------------------

def test_exponents_plus4(runner):
    out = json.loads(run(runner, ["exponents", *PLUS4]).output)
    assert out["p_serrin"] == 5 and out["p_pseudo"] == 9 and out["p_sobolev"] == 3
    assert out["alpha"] is None and out["ordering_holds"]


def test_exponents_equal_ellipticity(runner):
    out = json.loads(run(runner, ["exponents", "--lambda", "1", "--Lambda", "1", "--N", "3",
                                  "--p", "3"]).output)
    assert out["p_serrin"] == 3 and out["p_sobolev"] == 5
    assert out["alpha"] == pytest.approx(1.0)


def test_exponents_degenerate_dimension(runner):
    res = run(runner, ["exponents", "--lambda", "1", "--Lambda", "2", "--op", "plus", "--N", "3"],
              EXIT_USAGE)
    assert "Ñ₊ ≤ 2" in res.output


@pytest.mark.parametrize("args", [["exponents", "--N", "three"], ["exponents", "--p", "0.5"],
                                  ["classify"], ["sweep", "--p-from", "2", "--p-to", "3",
                                                 "--steps", "0"]])
def test_usage_errors(runner, args):
    run(runner, args, EXIT_USAGE)


# -- orbit ----------------------------------------------------------------------

def test_orbit_gamma_starts_in_rplus(runner, tmp_path):
    out = tmp_path / "g.csv"
    res = run(runner, ["orbit", "--p", "5", "--seed", "gamma", "--out", str(out)])
    rows = rows_of(out.read_text())
    assert rows[0] == ["t", "X", "Z", "region"]
    assert rows[1][3] == "RPlus"
    summary = json.loads(res.output)
    assert summary["verdict"] == "ToStationary" and summary["n_samples"] == len(rows) - 1
    events = json.loads((tmp_path / "g.csv.events.json").read_text())
    assert all(set(e) == {"kind", "t", "X", "Z", "detail"} for e in events)


def test_orbit_point_at_p(runner, tmp_path):
    out = tmp_path / "p.csv"
    run(runner, ["orbit", "--p", "5", "--seed", "point", "0.2,2",
                 "--out", str(out)])
    events = json.loads((tmp_path / "p.csv.events.json").read_text())
    first = events[0]
    assert first["kind"] in ("ZNullclineCross", "ConcavityCross")
    assert first["t"] == 0 and first["detail"] == "at P"


@pytest.mark.parametrize("seed", [["--seed", "1,2,3"], ["--seed", "point"], ["--seed", "x,y"],
                                  ["--seed", "-0.5,0.5"], ["--seed", "nan,1"]])
def test_orbit_malformed_seed(runner, seed):
    run(runner, ["orbit", "--p", "5", *seed], EXIT_USAGE)


def test_orbit_stdout_csv_and_determinism(runner):
    a = run(runner, ["orbit", "--p", "7", "--seed", "0.3,1.0"]).stdout
    b = run(runner, ["orbit", "--p", "7", "--seed", "0.3,1.0"]).stdout
    assert a == b and a.startswith("t,X,Z,region\n")
    assert "\r" not in a


# -- classify, critical, sweep --------------------------------------------------

def test_classify_at_pseudo_endpoint(runner):
    out = json.loads(run(runner, ["classify", *PLUS4, "--p", "9"]).output)
    assert out["class"] == "P"


def test_critical_laplacian(runner):
    out = json.loads(run(runner, ["critical", "--N", "3", "--tol", "1e-4"]).output)
    assert out["p_star"] == pytest.approx(5.0, abs=1e-4)
    lo, hi = out["bracket"]
    assert lo <= out["p_star"] <= hi and hi - lo <= 1e-4


def test_sweep_is_order_deterministic(runner, tmp_path):
    args = ["sweep", *PLUS4, "--p-from", "4", "--p-to", "10", "--steps", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(runner, [*args, "--jobs", "1", "--out", str(a)])
    run(runner, [*args, "--jobs", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    rows = rows_of(a.read_text())
    assert rows[0] == ["p", "class", "detail"]
    classes = [r[1] for r in rows[1:]]
    assert [float(r[0]) for r in rows[1:]] == [4, 5, 6, 7, 8, 9, 10]
    assert classes[:5] == ["C"] * 5 and classes[5] == "P" and classes[6] == "S"


# -- portrait, shoot, dulac, exterior, singular ---------------------------------

def test_portrait_elements(runner, tmp_path):
    out = tmp_path / "p.svg"
    run(runner, ["portrait", "--p", "5", "--grid", "10x8", "--out", str(out)])
    svg = out.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    for tag in ('id="field"', 'class="concavity"', 'class="x-nullcline"',
                'class="z-nullcline-upper"', 'class="wall"', 'class="gamma"', "M0 Center"):
        assert tag in svg, tag
    assert svg.count('class="cycle"') >= 3
    assert svg.count("marker-end") == 80
    assert "http://" not in svg.replace('xmlns="http://www.w3.org/2000/svg"', "")


def test_portrait_deterministic():
    prm = make_params(1, 2, "plus", 4, 0)
    assert portrait_svg(8.9, prm, 6, 5) == portrait_svg(8.9, prm, 6, 5)


def test_portrait_bad_grid(runner):
    run(runner, ["portrait", "--p", "5", "--grid", "1x5"], EXIT_USAGE)


def test_shoot_ends_at_zero(runner, tmp_path):
    out = tmp_path / "s.csv"
    res = run(runner, ["shoot", "--gamma", "1", "--p", "4", "--out", str(out)])
    rows = rows_of(out.read_text())
    assert rows[0] == ["r", "u", "du", "ddu"]
    assert float(rows[-1][1]) <= 1e-12
    summary = json.loads(res.output)
    assert summary["wall_radius"] == pytest.approx(float(rows[-1][0]))
    assert summary["classification"]["at_infinity"] == "vanishes"


def test_dulac_at_sobolev(runner):
    res = run(runner, ["dulac", *PLUS4, "--p", "3"])
    assert res.output.splitlines()[0] == "Φ=0 in R+; Φ>0 in R−"


def test_dulac_polygon(runner):
    res = run(runner, ["dulac", *PLUS4, "--p", "7", "--samples", "50",
                       "--polygon", "0.1,0.5;1,0.5;1,1.5;0.1,1.5"])
    body = json.loads(res.output.split("\n", 1)[1])
    assert body["line_integral"] != 0
    run(runner, ["dulac", "--p", "7", "--polygon", "0.1,0.5;1,0.5"], EXIT_USAGE)


def test_exterior_verdict(runner):
    res = run(runner, ["exterior", "--p", "4.5"])
    assert res.output.splitlines()[0] == "Nonexistence"


def test_singular_json(runner):
    cat = json.loads(run(runner, ["singular", *PLUS4, "--p", "4"]).output)
    assert cat["operator"] == "plus"
    assert [e["at_infinity"] for e in cat["entries"]] == ["ball (Dirichlet)"]


def test_numeric_failure_exit_code(runner):
    # no saddle at A0 below the Serrin exponent, so Upsilon is unavailable
    run(runner, ["orbit", *PLUS4, "--p", "4", "--seed", "upsilon"], EXIT_NUMERIC)


# -- config and logging ---------------------------------------------------------

def test_config_file_defaults_and_override(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# plus operator in four dimensions\nlambda = 1\nLambda = 2\nN = 4\n")
    out = json.loads(run(runner, ["--config", str(cfg), "exponents"]).output)
    assert out["p_serrin"] == 5
    run(runner, ["--config", str(cfg), "exponents", "--N", "3"], EXIT_USAGE)
    bad = tmp_path / "bad.cfg"
    bad.write_text("lambda 1\n")
    run(runner, ["--config", str(bad), "exponents"], EXIT_USAGE)


keys = st.text(alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"),
                                      whitelist_characters="_-"), min_size=1, max_size=12)
vals = st.text(alphabet=st.characters(blacklist_characters="#\n\r=",
                                      blacklist_categories=("Cs", "Zl", "Zp", "Cc")),
               max_size=20).map(str.strip)


@given(st.dictionaries(keys, vals, max_size=8))
@settings(max_examples=100, deadline=None)
def test_run_config_roundtrip(values):
    cfg = RunConfig(values)
    assert RunConfig.parse(cfg.dump()).values == values


@pytest.mark.parametrize("level,expected", [("debug", logging.DEBUG), ("error", logging.ERROR),
                                            ("bogus", logging.WARNING)])
def test_loglevel_env(runner, monkeypatch, level, expected):
    monkeypatch.setenv("LOGLEVEL", level)
    run(runner, ["exponents"])
    assert logging.getLogger("pucci_phase").level == expected
