import io
import json
import math

import pytest

from ginibre_tails.cli import main


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_rate():
    code, text = run(["rate", "--beta", "2", "--t", "1.3"])
    body = json.loads(text)
    assert code == 0 and body["finite"] is True
    assert body["rate"] == pytest.approx(0.1652715, abs=1e-7)
    code, text = run(["rate", "--beta", "1", "--t", "0.9"])
    assert json.loads(text) == {"beta": 1, "finite": False, "rate": None, "t": 0.9}


def test_invalid_beta_exit_2(capsys):
    code, _ = run(["rate", "--beta", "3", "--t", "1"])
    assert code == 2
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and err.startswith("error:")


def test_exact_tail_and_counts():
    code, text = run(["exact-tail", "--ensemble", "complex", "--stat", "radius", "--n", "2", "--t", "1"])
    body = json.loads(text)
    assert code == 0 and body["kind"] == "exact"
    assert body["p"] == pytest.approx(1 - (1 - math.exp(-2)) * (1 - 3 * math.exp(-2)), rel=1e-12)
    assert body["p"] == pytest.approx(math.exp(body["log_p"]), rel=1e-15)
    code, text = run(["expected-count", "--ensemble", "complex", "--stat", "radius", "--n", "2", "--t", "1"])
    assert json.loads(text)["count"] == pytest.approx(0.5413411, abs=1e-7)


def test_real_n_precondition():
    assert run(["expected-count", "--ensemble", "real", "--stat", "real", "--n", "2", "--t", "1"])[0] == 2
    assert run(["exact-tail", "--ensemble", "real", "--stat", "real", "--n", "20", "--t", "1"])[0] == 2


def test_tail_bracket_json_roundtrip():
    code, text = run(["tail-bracket", "--ensemble", "real", "--stat", "real", "--n", "40", "--t", "1.2"])
    body = json.loads(text)
    assert code == 0
    assert json.loads(json.dumps(body, sort_keys=True)) == body
    assert json.dumps(body, sort_keys=True) + "\n" == text
    assert body["upper"]["log_p"] - body["lower"]["log_p"] == pytest.approx(math.log(40))


def test_ldp_curve_csv(tmp_path):
    path = tmp_path / "ldp.csv"
    fig = tmp_path / "ldp.png"
    code, text = run(
        ["ldp-curve", "--ensemble", "complex", "--stat", "radius", "--t", "1.3", "--n-list", "100,200,400", "--output", str(path), "--figure", str(fig)]
    )
    assert code == 0 and fig.stat().st_size > 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# {") and json.loads(lines[0][2:])["t"] == 1.3
    assert lines[1] == "n,minus_log_p_over_n,rate_target,gap,route"
    gaps = [float(l.split(",")[3]) for l in lines[2:]]
    assert len(gaps) == 3 and gaps == sorted(gaps, reverse=True)
    assert json.loads(text)["rows"] == 3


def test_mdp_scaling_schema(tmp_path):
    path = tmp_path / "m.csv"
    code, _ = run(["mdp-scaling", "--t-grid", "0.5,1", "--n-list", "1000", "--output", str(path)])
    assert code == 0
    assert path.read_text().splitlines()[1] == "n,t,d,value,target,regime_ok"


def test_gumbel_schema(tmp_path):
    path = tmp_path / "g.csv"
    code, text = run(["gumbel", "--n", "2000", "--output", str(path)])
    assert code == 0
    assert path.read_text().splitlines()[1] == "grid_t,empirical_or_exact_cdf,limit_cdf"
    assert {"ks_stat", "location_fit", "scale_fit"} <= set(json.loads(text))
    assert run(["gumbel", "--n", "100"])[0] == 2


def test_saturn_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["saturn", "--n", "40", "--trials", "30", "--threshold", "1.1", "--seed", "42"]
    c1, j1 = run(base + ["--workers", "1", "--output", str(a)])
    c2, j2 = run(base + ["--workers", "3", "--output", str(b)])
    assert c1 == c2 == 0
    assert a.read_bytes() == b.read_bytes()
    assert j1 == j2
    assert a.read_text().splitlines()[1] == "trial,real_max,complex_max_modulus,rightmost"


def test_sample_rows_and_cap(tmp_path):
    path = tmp_path / "s.csv"
    code, _ = run(["sample", "--ensemble", "real", "--n", "12", "--trials", "5", "--output", str(path)])
    rows = path.read_text().splitlines()[2:]
    assert code == 0 and len(rows) == 60
    for trial in range(5):
        assert sum(r.startswith(f"{trial},") for r in rows) == 12
    code, _ = run(["sample", "--ensemble", "complex", "--n", "6", "--trials", "2", "--output", str(path)])
    assert all(r.endswith(",0") for r in path.read_text().splitlines()[2:])
    assert run(["sample", "--n", "100", "--trials", "100", "--row-cap", "50"])[0] == 2


def test_mc_summary(tmp_path):
    path = tmp_path / "mc.csv"
    code, text = run(
        ["mc", "--ensemble", "complex", "--stat", "radius", "--n", "10", "--t", "1.0", "--trials", "200", "--route", "kostlan", "--output", str(path)]
    )
    body = json.loads(text)
    assert code == 0 and body["trials"] == 200 and 0 <= body["p_hat"] <= 1
    assert path.read_text().splitlines()[1] == "trial,value,hit"


def test_bad_list_and_missing_args():
    assert run(["ldp-curve", "--t", "1.3", "--n-list", "a,b"])[0] == 2
    assert run(["exact-tail", "--n", "3"])[0] == 2
    assert run(["rate", "--beta", "2", "--t", "0"])[0] == 2
