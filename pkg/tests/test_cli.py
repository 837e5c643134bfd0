import json
import subprocess
import sys

from prefset.cli import EXIT_INPUT, EXIT_OK, EXIT_TIMEOUT, EXIT_UNSAT, main, save_problem
from prefset.harness.fixtures import senators_gai
from prefset.harness.generators import gen_atomic


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_solve_example_json(capsys):
    code, out = _run(capsys, "solve", "--example", "senators-gai", "--engine", "subset", "--json")
    assert code == EXIT_OK
    data = json.loads(out.out)
    assert data["value"] == 11
    assert data["witness"] in (["o1", "o2", "o4"], ["o1", "o3", "o4"], ["o2", "o3", "o4"])
    assert "nodes_generated" in data and "nodes_until_opt" in data


def test_solve_csp_flags(capsys):
    code, out = _run(capsys, "solve", "--example", "senators-tcp", "--engine", "csp", "--no-warm-start",
                     "--no-sibling", "--no-nogoods", "--no-fc", "--no-can-must", "--json")
    data = json.loads(out.out)
    assert code == EXIT_OK
    assert data["assignment"] == {"P1": True, "P2": True, "P3": True}
    assert {"csps_solved", "property_backtracks", "witness"} <= set(data)


def test_gen_then_solve_and_oracle(tmp_path, capsys):
    d = tmp_path / "vc"
    assert main(["gen", "vertex-cover", "--edges", "0-1,1-2,0-2", "--out", str(d)]) == EXIT_OK
    capsys.readouterr()
    code, out = _run(capsys, "oracle", "--instance", str(d), "--json")
    assert code == EXIT_OK and json.loads(out.out)["assignment"]["SUM"] == 2
    code, out = _run(capsys, "solve", "--catalog", str(d / "catalog.json"), "--props", str(d / "props.json"),
                     "--model", str(d / "model.json"), "--json")
    assert code == EXIT_OK and json.loads(out.out)["assignment"]["SUM"] == 2


def test_auto_routes_to_greedy(tmp_path, capsys):
    inst = gen_atomic(10, 3, 5)
    save_problem(inst.problem, tmp_path)
    code, out = _run(capsys, "solve", "--instance", str(tmp_path), "--engine", "auto", "--explain-class", "--json")
    assert code == EXIT_OK
    assert json.loads(out.out)["engine"] == "greedy"
    assert json.loads(out.err)["greedy_eligible"]


def test_explain_class_text(capsys):
    code, out = _run(capsys, "explain-class", "--example", "senators-tcp")
    assert code == EXIT_OK and "greedy: not eligible" in out.out


def test_exit_codes(tmp_path, capsys):
    prob = senators_gai(cardinality=7)
    save_problem(prob, tmp_path)
    code, out = _run(capsys, "solve", "--instance", str(tmp_path))
    assert code == EXIT_UNSAT and "no feasible subset" in out.out
    code, _ = _run(capsys, "solve", "--example", "movies:P14''", "--variant", "BB-S", "--timeout", "0.5")
    assert code == EXIT_TIMEOUT
    code, out = _run(capsys, "solve", "--example", "senators-gai", "--engine", "greedy")
    assert code == EXIT_INPUT and "attributes" in out.err
    code, out = _run(capsys, "solve", "--catalog", str(tmp_path / "missing.json"), "--props", "x", "--model", "y")
    assert code == EXIT_INPUT


def test_bench_tsv(capsys):
    code, out = _run(capsys, "bench", "--suite", "senators", "--variants", "subset-dfs,BB-S+ng", "--timeout", "5")
    assert code == EXIT_OK
    lines = out.out.strip().splitlines()
    assert lines[0].startswith("instance\tvariant") and len(lines) == 5


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "prefset.cli", "solve", "--example", "senators-gai"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "value:      11" in out.stdout
