"""CLI: exit codes, determinism, artifacts, figures."""

import json

import pytest

from qprism.cli import main


def run(args):
    return main(args)


def test_check_suite_passes(tmp_path):
    out = tmp_path / "r.json"
    rc = run(["check", "delta-axioms", "--p", "3", "--prec", "2", "--seed", "7",
              "--samples", "40", "--output", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["passed"] is True
    assert data["property"] == "delta-ring-axioms"
    assert data["seed"] == 7


def test_check_corrupt_exits_one():
    assert run(["check", "delta-axioms", "--p", "2", "--prec", "2",
                "--samples", "5", "--corrupt"]) == 1


def test_unknown_suite_exits_two(capsys):
    assert run(["check", "no-such-suite"]) == 2


def test_bad_input_exits_two(tmp_path):
    missing = tmp_path / "nope.json"
    assert run(["qhiggs", "--input", str(missing), "--task", "integrable"]) == 2


def test_reports_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["check", "envelope", "--p", "2", "--prec", "2", "--d", "1",
            "--seed", "3", "--samples", "10"]
    assert run(args + ["--output", str(a)]) == 0
    assert run(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_envelope_table_format(tmp_path):
    out = tmp_path / "t.txt"
    rc = run(["envelope", "--p", "2", "--prec", "1", "--vars", "1",
              "--max-level", "0", "--format", "table", "--output", str(out)])
    assert rc == 0
    assert "rewrite_table" in out.read_text()


def test_pd_command(tmp_path):
    out = tmp_path / "pd.json"
    rc = run(["pd", "--p", "2", "--prec", "1", "--depth", "1",
              "--output", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert "normalization_unit" in data
    assert "delta^1(tau_0)" in data["images"]


@pytest.fixture()
def chart_module(tmp_path):
    from qprism.base import BaseRing
    from qprism.chart import ChartRing
    from qprism.instances import random_integrable
    import random

    A = ChartRing(BaseRing(2, 1), 1, degree_cap=64)
    M = random_integrable(A, 2, random.Random(5))
    spec = {
        "host": {"kind": "chart", "p": 2, "n": 1, "mode": "q", "d": 1,
                 "degree_cap": 64},
        "order": [0],
        "rank": 2,
        "theta": {"0": [[e.to_json() for e in row] for row in M.theta[0]]},
    }
    path = tmp_path / "mod.json"
    path.write_text(json.dumps(spec))
    return path


def test_qhiggs_tasks(chart_module, tmp_path):
    for task in ("integrable", "tensor", "frobenius", "pullback"):
        assert run(["qhiggs", "--input", str(chart_module), "--task", task,
                    "--output", str(tmp_path / f"{task}.json")]) == 0
    fig = tmp_path / "cx.svg"
    assert run(["qhiggs", "--input", str(chart_module), "--task", "complex",
                "--weight-cap", "5", "--figure", str(fig),
                "--output", str(tmp_path / "cx.json")]) == 0
    assert fig.exists()


@pytest.fixture()
def env_module(tmp_path):
    from qprism.base import BaseRing
    from qprism.envelope import EnvRing

    Rq = BaseRing(2, 3, "q1")
    E = EnvRing(Rq, [("zero",)], weight_cap=12)
    v = E.from_int(2) * E.const(Rq.from_int(3))
    spec = {
        "host": {"kind": "envelope", "p": 2, "n": 3, "mode": "q1",
                 "centers": [["zero"]], "weight_cap": 12},
        "order": [0],
        "rank": 1,
        "theta": {"0": [[v.to_json()]]},
    }
    path = tmp_path / "env_mod.json"
    path.write_text(json.dumps(spec))
    return path


def test_strat_tasks(env_module, tmp_path):
    for task in ("build", "cocycle", "roundtrip", "frobenius", "ca-h0"):
        rc = run(["strat", "--module", str(env_module), "--task", task,
                  "--output", str(tmp_path / f"{task}.json")])
        assert rc == 0, task


def test_cohomology_qdr_with_figure(tmp_path):
    fig = tmp_path / "qdr.svg"
    out = tmp_path / "qdr.json"
    rc = run(["cohomology", "--task", "qdr", "--p", "2", "--prec", "1",
              "--degree", "6", "--figure", str(fig), "--output", str(out)])
    assert rc == 0
    assert fig.exists() and fig.stat().st_size > 0
    data = json.loads(out.read_text())
    assert data["passed"] is True


def test_cohomology_poincare(tmp_path):
    fig = tmp_path / "poin.png"
    rc = run(["cohomology", "--task", "poincare", "--p", "2", "--prec", "1",
              "--depth", "4", "--d", "1", "--figure", str(fig),
              "--output", str(tmp_path / "p.json")])
    assert rc == 0
    assert fig.exists()


def test_exhausted_exit_code(tmp_path, chart_module):
    spec = json.loads(chart_module.read_text())
    # degree-raising Theta escapes a tiny weight cap -> exit 3
    from qprism.base import BaseRing
    from qprism.chart import ChartRing

    A = ChartRing(BaseRing(2, 1), 1, degree_cap=64)
    u = (A.tau(0) ** 3 * A.const(A.base.mu())).to_json()
    spec["theta"] = {"0": [[u, u], [u, u]]}
    path = chart_module.parent / "deg.json"
    path.write_text(json.dumps(spec))
    rc = run(["qhiggs", "--input", str(path), "--task", "complex",
              "--weight-cap", "2"])
    assert rc == 3
