import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from steinerls.cli import main
from steinerls.errors import BadParams, ParseError, ValidationError
from steinerls.forest import Forest
from steinerls.io import (
    RunRecord,
    figure1_costs,
    forests_to_dot,
    gen_figure1,
    gen_random,
    parse_instance,
    parse_instance_file,
    serialize_instance,
)

MINIMAL = """SECTION Graph
Nodes 2
Edges 1
E 1 2 7
END
SECTION Terminals
Pairs 1
TP 1 2
END
EOF
"""

K4_TEXT = """SECTION Comment
Name "k4"
END
SECTION Graph
Nodes 4
Edges 6
E 1 2 2
E 3 4 2
E 1 3 1
E 2 4 1
E 1 4 3
E 2 3 3
END
SECTION Terminals
Pairs 2
TP 1 2
TP 3 4
END
EOF
"""


def test_minimal_parse():
    g, terms, pairs = parse_instance(MINIMAL)
    assert g.vertex_count == 2 and g.edges == ((1, 2, 7),)
    assert terms == (1, 2) and pairs == ((1, 2),)


def test_negative_weight():
    with pytest.raises(ValidationError):
        parse_instance(MINIMAL.replace("E 1 2 7", "E 1 2 -7"))


def test_pair_node_zero():
    with pytest.raises(ValidationError):
        parse_instance(MINIMAL.replace("TP 1 2", "TP 0 2"))


def test_parse_errors_carry_line():
    with pytest.raises(ParseError) as exc:
        parse_instance(MINIMAL.replace("Edges 1", "Edges one"))
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        parse_instance(MINIMAL.replace("END\nEOF", "EOF"))
    with pytest.raises(ParseError):
        parse_instance(MINIMAL.replace("Pairs 1", "Pairs 2"))


def test_no_pairs():
    with pytest.raises(ValidationError):
        parse_instance(MINIMAL.replace("Pairs 1\nTP 1 2\n", ""))


def test_figure1_generator():
    f = gen_figure1(4, 2)
    assert f.graph.vertex_count == 8 and len(f.pairs) == 4
    chain, blue = figure1_costs(4, 2)
    assert (chain, blue) == (22, 14)
    assert f.comment("Chain") == "22" and f.comment("Optimum") == "14"
    assert sum(w for *_, w in f.graph.edges) == chain + 4 * 2
    gen_figure1(3, 2)
    with pytest.raises(BadParams):
        gen_figure1(3, 3)


def test_random_generator():
    a = serialize_instance(gen_random(8, 3, (1, 100), seed=5))
    assert a == serialize_instance(gen_random(8, 3, (1, 100), seed=5))
    assert a != serialize_instance(gen_random(8, 3, (1, 100), seed=6))
    with pytest.raises(ValidationError):
        gen_random(8, 0)
    with pytest.raises(BadParams):
        gen_random(4, 3)
    unit = gen_random(6, 2, (1, 1), seed=1).to_instance()
    assert {x for row in unit.dist for x in row} == {0, 1}
    shared = gen_random(4, 5, seed=2, allow_shared=True)
    assert len(set(shared.pairs)) == 5


@given(st.integers(2, 9), st.integers(0, 10**6), st.booleans())
def test_round_trip(n, seed, shared):
    p = max(1, n // 2) if not shared else min(n * (n - 1) // 2, 1 + seed % n)
    f = gen_random(n, p, (0, 50), seed, allow_shared=shared)
    assert parse_instance_file(serialize_instance(f)) == f


@given(st.integers(2, 15), st.integers(1, 5))
def test_figure1_round_trip(l, k):
    if l <= k:
        return
    f = gen_figure1(l, k)
    assert parse_instance_file(serialize_instance(f)) == f


def test_run_record_rejects_ratio_below_one():
    with pytest.raises(ValidationError):
        RunRecord("x", "d", {}, final_cost=3, oracle_cost=4, ratio=0.75)
    rec = RunRecord("x", "d", {}, final_cost=4, oracle_cost=4, ratio=1.0)
    assert json.loads(rec.to_json())["schema_version"] == 1


def test_dot_has_both_clusters(k4_inst):
    f = Forest.from_labels(k4_inst, [(1, 2), (3, 4)])
    dot = forests_to_dot(f, f)
    assert "cluster_final" in dot and "cluster_opt" in dot and dot.count("--") == 4


def _solve(tmp_path, text, *extra):
    src = tmp_path / "in.txt"
    src.write_text(text)
    out = tmp_path / "out.json"
    code = main(["solve", "--input", str(src), "--json-out", str(out), *extra])
    return code, json.loads(out.read_text())


def test_cli_solve_k4(tmp_path):
    code, rec = _solve(tmp_path, K4_TEXT, "--oracle", "--dot-out", str(tmp_path / "g.dot"))
    assert code == 0 and rec["final_cost"] == 4 and rec["oracle_cost"] == 4 and rec["ratio"] == 1.0
    assert (tmp_path / "g.dot").read_text().startswith("graph")


def test_cli_exit_codes(tmp_path):
    code, rec = _solve(tmp_path, MINIMAL.replace("E 1 2 7", "E 1 2 -7"))
    assert code == 2 and rec["error"] == "ValidationError"
    code, rec = _solve(tmp_path, MINIMAL.replace("Edges 1", "Edges x"))
    assert code == 2 and rec["error"] == "ParseError"
    disconnected = MINIMAL.replace("Nodes 2", "Nodes 3").replace("TP 1 2", "TP 1 3")
    code, rec = _solve(tmp_path, disconnected)
    assert code == 3
    big = serialize_instance(gen_random(12, 4, seed=1))
    code, rec = _solve(tmp_path, big, "--oracle")
    assert code == 4 and rec["error"] == "BudgetExceeded"


def test_cli_gen_and_figure1_pipeline(tmp_path):
    path = tmp_path / "fig.txt"
    assert main(["gen", "figure1", "--l", "12", "--k", "3", "-o", str(path)]) == 0
    code, rec = _solve(tmp_path, path.read_text(), "--oracle")
    assert code == 0 and rec["ratio"] <= 2
    code, rec = _solve(tmp_path, path.read_text(), "--oracle", "--start-chain", "--neighborhoods", "edge_edge")
    assert rec["ratio"] >= 12 / (4 * 3)


def test_cli_verify(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["verify", "--random", "20", "--seed", "3", "--csv", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("instance,") and len(lines) == 21
    assert all(line.endswith(",") for line in lines[1:])  # empty "failed" column


def test_cli_bench(tmp_path):
    d = tmp_path / "insts"
    d.mkdir()
    for s in range(3):
        (d / f"r{s}.txt").write_text(serialize_instance(gen_random(6, 2, seed=s)))
    out = tmp_path / "b.csv"
    assert main(["bench", "--dir", str(d), "--csv", str(out), "--oracle", "--workers", "2"]) == 0
    assert len(out.read_text().strip().splitlines()) == 4
