import json
import subprocess
import sys

import pytest

from orbitdec.cli import _load_spec, main, parse_element, parse_matrix, parse_vector, run
from orbitdec.extension import g_conjugate
from orbitdec.coset_enum import parse_presentation
from orbitdec.lattice import IntMatrix, tcp_zn
from orbitdec.stallings import core_graph, evaluate_expression
from orbitdec.words import FreeAutomorphism, conjugacy_free, format_word, parse_word


KLEIN = json.dumps({"fiber": {"type": "free_abelian", "n": 1}, "action": [[[-1]]], "od": "finite_closure"})
SL2 = json.dumps({"fiber": {"type": "free_abelian", "n": 2}, "action": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]],
                  "od": "gcd_full_sl"})
EXIT = {"yes": 0, "no": 1, "unknown": 2, "overflow": 2}

CORPUS = [
    ["od", "--strategy", "cyclic", "--matrix", "[[1,1],[0,1]]", "--u", "[1,0]", "--v", "[1,-3]"],
    ["od", "--strategy", "cyclic", "--matrix", "[[1,1],[0,1]]", "--u", "[1,0]", "--v", "[0,1]"],
    ["od", "--strategy", "gcd", "--u", "[2,4]", "--v", "[6,2]"],
    ["od", "--strategy", "gl2", "--matrix", "[[1,1],[0,1]]", "--u", "[1,0]", "--v", "[1,7]"],
    ["cip-free", "--x", "a", "--A", "a^2", "--y", "", "--B", "a^3"],
    ["cip-free", "--x", "a", "--A", "a^2", "--y", "", "--B", "a^2"],
    ["cp-ext", "--spec", KLEIN, "--g", "t:0", "--gp", "t:2"],
    ["cp-ext", "--spec", KLEIN, "--g", "t:0", "--gp", "t:1"],
    ["cp-ext", "--spec", SL2, "--g", '{"t":"t1","f":[0,0]}', "--gp", '{"t":"t1","f":[0,5]}'],
    ["tcp-zn", "--matrix", "[[-1,0],[0,-1]]", "--u", "[0,0]", "--v", "[2,0]"],
    ["tcp-zn", "--matrix", "[[-1,0],[0,-1]]", "--u", "[0,0]", "--v", "[1,0]"],
    ["whitehead-orbit", "--rank", "2", "--u", "aab", "--v", "a"],
    ["whitehead-orbit", "--rank", "2", "--u", "a", "--v", "a^2"],
    ["stallings", "--gens", "a^2", "--gens", "b", "--member", "a^4 b"],
    ["stallings", "--gens", "a^2", "--gens", "b", "--member", "a b"],
    ["todd-coxeter", "--presentation", "<a | a^5>"],
    ["miller-gen", "--presentation", "<a,b | [a,b]>"],
    ["mihailova", "--pair", "ab|ba"],
    ["mihailova", "--pair", "a|b"],
    ["gl4-embed"],
    ["cip-gl2", "--x", "[[1,0],[0,1]]", "--A", "[[1,1],[1,2]]", "--y", "[[1,0],[0,1]]", "--B", "[[2,1],[1,1]]"],
]


def test_parsers_round_trip():
    assert parse_matrix("[[1,0],[0,1]]") == IntMatrix.identity(2)
    assert parse_vector("[1,-3]") == (1, -3)
    assert parse_word("a b^-1", rank=2).letters == (1, -2)
    assert parse_presentation("<a | a^5>").rank == 1
    M = IntMatrix.of([[2, 1], [1, 1]])
    assert parse_matrix(json.dumps(M.tolist())) == M


@pytest.mark.parametrize("argv", CORPUS, ids=lambda a: " ".join(a[:1] + a[1:3]))
def test_exit_code_matches_answer(argv):
    code, payload = run(argv + ["--json"])
    assert "elapsed_ms" in payload
    if "answer" in payload:
        assert code == EXIT[payload["answer"]]
    else:
        assert code == 0


def test_pinned_examples():
    code, p = run(CORPUS[0])
    assert code == 0 and p["witness"] == -3
    code, p = run(CORPUS[4])
    assert code == 0 and p["witness"] == "a^3"
    assert run(CORPUS[7])[0] == 1


def test_usage_and_data_errors():
    assert run(["bogus"])[0] == 64
    assert run([])[0] == 64
    assert run(["od", "--strategy", "cyclic"])[0] == 64
    assert run(["od", "--strategy", "cyclic", "--matrix", "[[1,1],[0]]", "--u", "[1,0]", "--v", "[1,0]"])[0] == 65
    assert run(["tcp-zn", "--matrix", "[[2,0],[0,1]]", "--u", "[0,0]", "--v", "[1,0]"])[0] == 65
    assert run(["cip-free", "--x", "a(", "--A", "a", "--y", "", "--B", "a"])[0] == 65
    assert run(["todd-coxeter", "--presentation", "<a | a^5"])[0] == 65
    assert run(["cp-ext", "--spec", "{not json", "--g", "t:0", "--gp", "t:1"])[0] == 65
    assert run(["od", "--strategy", "cyclic", "--matrix", "[[1,1],[0,1]]", "--u", "[1,0]", "--v", "[1,0]",
                "--search-budget", "0"])[0] == 64


def test_witnesses_reverify():
    # cp-ext: c^-1 g c = g'
    code, p = run(CORPUS[8])
    assert code == 0
    c = p["witness"]
    spec = _load_spec(SL2)
    ce = parse_element(spec, json.dumps(c))
    g, g2 = parse_element(spec, CORPUS[8][4]), parse_element(spec, CORPUS[8][6])
    assert g_conjugate(spec, g, ce) == g2
    # tcp-zn: v = u + x (I - A)
    code, p = run(CORPUS[9])
    A = parse_matrix(CORPUS[9][2])
    x = tuple(p["witness"])
    assert tuple(a - b for a, b in zip(x, x @ A)) == (2, 0)
    assert tcp_zn(A, (0, 0), (2, 0)).is_yes
    # whitehead: the chain of generator images maps u to a conjugate of v
    code, p = run(CORPUS[11])
    chain = [FreeAutomorphism(2, [parse_word(s, rank=2) for s in imgs]) for imgs in p["witness"]]
    u, v = parse_word("aab", rank=2), parse_word("a", rank=2)
    out = u
    for phi in chain:
        out = phi.apply(out)
    assert conjugacy_free(out, v).is_yes
    # stallings: the expression over the listed generators spells the member
    code, p = run(CORPUS[13])
    gens = [parse_word("a^2", rank=2), parse_word("b", rank=2)]
    basis = core_graph(gens, 2).basis()
    assert p["basis"] == [format_word(b) for b in basis]
    assert evaluate_expression(basis, p["witness"], 2) == parse_word("a^4 b", rank=2)


def test_human_output(capsys):
    assert main(CORPUS[0]) == 0
    out = capsys.readouterr().out
    assert out.startswith("YES")


def test_batch_stdin():
    lines = [
        {"argv": CORPUS[0]},
        {"command": "tcp-zn", "matrix": [[-1, 0], [0, -1]], "u": [0, 0], "v": [1, 0]},
        {"command": "stallings", "gens": ["a^2", "b"], "member": "a^4 b"},
        {"command": "bogus"},
    ]
    text = "\n".join(json.dumps(x) for x in lines) + "\n"
    r = subprocess.run([sys.executable, "-m", "orbitdec", "batch", "--jobs", "2"], input=text,
                       capture_output=True, text=True, timeout=120)
    results = [json.loads(ln) for ln in r.stdout.splitlines()]
    assert [x["exit"] for x in results] == [0, 1, 0, 64]
    assert results[0]["witness"] == -3
    assert r.returncode == 65


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "orbitdec", "cp-ext", "--spec", KLEIN, "--g", "t:0", "--gp", "t:1",
                        "--json"], capture_output=True, text=True, timeout=60)
    assert r.returncode == 1
    assert json.loads(r.stdout)["answer"] == "no"
