import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dualunitary import gates, linalg
from dualunitary.cli import main
from oracles import cnot


def run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_gen_non_ergodic_report(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, _ = run(["gen", "--q", 6, "--class", "non-ergodic", "--n", 2, "--seed", 7, "--out", out], capsys)
    assert code == 0
    report = json.loads((tmp_path / "g.report.json").read_text())
    assert report["n_unit_one"] == 3 and report["class"] == "non_ergodic"
    assert report["dual_unitary"] and report["svd_check"]
    U, meta = gates.load_gate(out)
    assert meta == {"q": 6, "class": "non_ergodic", "seed": 7}


def test_gen_dft(tmp_path, capsys):
    out = tmp_path / "dft.json"
    assert run(["gen", "--q", 3, "--class", "dft", "--out", out], capsys)[0] == 0
    U, _ = gates.load_gate(out)
    assert np.allclose(U, gates.dft_kicked_gate(3), atol=0)


def test_gen_qubit_swap_case(tmp_path, capsys):
    out = tmp_path / "qb.json"
    assert run(["gen", "--q", 2, "--class", "qubit", "--J", 0.7854, "--out", out], capsys)[0] == 0
    U, _ = gates.load_gate(out)
    phase = U[0, 0]
    assert np.allclose(U / phase, linalg.swap_gate(2), atol=1e-4)


def test_verify_swap_and_cnot(tmp_path, capsys):
    gates.save_gate(tmp_path / "swap.json", linalg.swap_gate(2), "swap")
    code, out = run(["verify", tmp_path / "swap.json"], capsys)
    report = json.loads(out.out)
    assert code == 0 and report["dual_unitary"] and report["class"] == "non_interacting"
    gates.save_gate(tmp_path / "cnot.json", cnot(), "cnot")
    code, out = run(["verify", tmp_path / "cnot.json"], capsys)
    assert code == 1 and json.loads(out.out)["dual_unitary"] is False


def test_verify_not_unitary(tmp_path, capsys):
    gates.save_gate(tmp_path / "bad.json", 2 * np.eye(4))
    code, out = run(["verify", tmp_path / "bad.json"], capsys)
    assert code == 1 and json.loads(out.out)["unitary"] is False


def test_verify_corrupt_and_missing(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["verify", bad], capsys)[0] == 2
    assert run(["verify", tmp_path / "missing.json"], capsys)[0] == 2


def test_gen_invalid_spec_exit_2(tmp_path, capsys):
    code, out = run(["gen", "--q", 3, "--class", "non-ergodic", "--n", 3, "--out", tmp_path / "x.json"], capsys)
    assert code == 2 and "n = q-1" in out.err
    code, _ = run(["gen", "--q", 3, "--class", "qubit", "--J", 0.1, "--out", tmp_path / "x.json"], capsys)
    assert code == 2


def test_argparse_error_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["gen", "--q", "three"])
    assert info.value.code == 2


_CLASS_ARGS = st.sampled_from(
    ["ergodic-mixing", "non-ergodic", "non-ergodic-noncommuting", "ergodic-nonmixing", "non-interacting",
     "prethermal", "dft", "swap"]
)


@st.composite
def gen_args(draw):
    q = draw(st.integers(2, 8))
    cls = draw(_CLASS_ARGS)
    args = ["--q", q, "--class", cls, "--seed", draw(st.integers(0, 10**6))]
    if cls in ("non-ergodic", "non-ergodic-noncommuting", "prethermal"):
        n = draw(st.integers(1, q - 1))
        args += ["--n", n]
        if cls == "non-ergodic-noncommuting":
            args += ["--m", draw(st.integers(0, n)), "--phi", draw(st.sampled_from([0.0, 0.3, 1.1]))]
        if cls == "prethermal":
            args += ["--epsilon", draw(st.floats(0, 1))]
    return args


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(args=gen_args())
def test_gen_verify_round_trip(tmp_path, capsys, args):
    out = tmp_path / "fuzz.json"
    assert run(["gen", *args, "--out", out], capsys)[0] == 0
    code, res = run(["verify", out], capsys)
    assert code == 0, res.out


def _read_tree(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def test_correlate_outputs_and_rerun(tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        argv = ["correlate", "--q", 4, "--class", "non-ergodic", "--n", 2, "--seed", 5, "--t-max", 200,
                "--unit-overlap", "--gnuplot", "--out", d / "c.csv"]
        assert run(argv, capsys)[0] == 0
        outs.append(_read_tree(d))
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"c.csv", "c.json", "c.gp"}
    meta = json.loads(outs[0]["c.json"])
    lines = outs[0]["c.csv"].decode().splitlines()
    assert lines[0] == "t,re,im" and len(lines) == 202
    assert float(lines[1].split(",")[1]) == pytest.approx(1.0)
    last = complex(*map(float, lines[-1].split(",")[1:]))
    assert abs(last - complex(*meta["gge_value"])) <= 1e-8
    assert abs(last - complex(*meta["steady_value"])) <= 1e-8


def test_correlate_from_gate_file(tmp_path, capsys):
    gates.save_gate(tmp_path / "g.json", gates.dft_kicked_gate(3), "dft")
    code, _ = run(["correlate", "--gate", tmp_path / "g.json", "--sigma", "identity", "--out", tmp_path / "c.csv"],
                  capsys)
    assert code == 0
    meta = json.loads((tmp_path / "c.json").read_text())
    assert meta["class"] == "dft" and meta["thermal_value"] == [1.0, 0.0]


def test_correlate_operator_file(tmp_path, capsys):
    (tmp_path / "s.json").write_text(json.dumps({"re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]}))
    code, _ = run(["correlate", "--q", 2, "--sigma", tmp_path / "s.json", "--out", tmp_path / "c.csv"], capsys)
    assert code == 0
    (tmp_path / "s3.json").write_text(json.dumps({"re": [[1]], "im": [[0]]}))
    assert run(["correlate", "--q", 2, "--sigma", tmp_path / "s3.json", "--out", tmp_path / "c.csv"], capsys)[0] == 2
    assert run(["correlate", "--out", tmp_path / "c.csv"], capsys)[0] == 2


def test_mixing_and_nonmixing_recipe(tmp_path, capsys):
    # q=6, traceless σ: mixing decays to zero, non-mixing oscillates with period 6.
    for cls in ("ergodic-mixing", "ergodic-nonmixing"):
        out = tmp_path / f"{cls}.csv"
        assert run(["correlate", "--q", 6, "--class", cls, "--t-max", 120, "--unit-overlap", "--out", out],
                   capsys)[0] == 0
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        v = data[:, 1] + 1j * data[:, 2]
        if cls == "ergodic-mixing":
            assert abs(v[-1]) < 1e-6
        else:
            assert np.max(np.abs(v[100:115] - v[106:121])) <= 1e-8


def test_gge_command(tmp_path, capsys):
    code, out = run(["gge", "--q", 5, "--class", "non-ergodic", "--n", 2, "--seed", 1], capsys)
    payload = json.loads(out.out)
    assert code == 0 and len(payload["mu_a"]) == 2
    assert payload["iterated_limit_deviation"] <= 1e-8
    assert run(["gge", "--q", 5, "--class", "ergodic-mixing"], capsys)[0] == 2


def test_prethermal_command_rerun(tmp_path, capsys):
    trees = []
    for k in range(2):
        d = tmp_path / f"p{k}"
        argv = ["prethermal", "--q", 4, "--n", 1, "--epsilons", 0.01, 0.1, "--t-max", 50, "--unit-overlap",
                "--gnuplot", "--out-dir", d]
        assert run(argv, capsys)[0] == 0
        trees.append(_read_tree(d))
    assert trees[0] == trees[1]
    assert set(trees[0]) == {"series_eps0.csv", "series_eps0.01.csv", "series_eps0.1.csv", "summary.json", "plot.gp"}
    summary = json.loads(trees[0]["summary.json"])
    assert summary["runs"][0]["decay_time"] is None
    assert summary["runs"][1]["decay_time"] > summary["runs"][2]["decay_time"]
    assert b"set arrow" in trees[0]["plot.gp"]


def test_levelstats_command(tmp_path, capsys):
    out = tmp_path / "r.json"
    argv = ["levelstats", "--q", 2, "--L", 6, "--class", "prethermal", "--n", 1, "--epsilons", 0.01, 0.5,
            "--realizations", 3, "--method", "cayley", "--out", out]
    assert run(argv, capsys)[0] == 0
    first = out.read_bytes()
    assert run(argv, capsys)[0] == 0
    assert out.read_bytes() == first
    reps = json.loads(first)
    assert [r["epsilon"] for r in reps] == [0.01, 0.5]
    assert all(0 <= r["mean_r"] <= 1 for r in reps)
    assert run(["levelstats", "--q", 4, "--L", 8, "--realizations", 1], capsys)[0] == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dualunitary", "gen", "--q", "2", "--class", "swap",
                          "--out", str(tmp_path / "s.json")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "s.report.json").exists()
