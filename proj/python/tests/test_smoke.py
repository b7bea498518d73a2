import json
from pathlib import Path

import pytest

import hierarch

FIXTURES = Path(__file__).resolve().parents[2] / "fixtures"
CHAMPION2 = "2; 1,0 -> 1,R,2 | 1,1 -> 1,L,2 | 2,0 -> 1,L,1 | 2,1 -> 1,R,H"


def fixture(name):
    return (FIXTURES / name).read_text()


def test_run_machine():
    r = hierarch.run_machine(CHAMPION2, 50)
    assert r["halted"] and r["steps"] == 6 and r["ones"] == 4
    assert not hierarch.run_machine("1; 1,0 -> 0,R,1 | 1,1 -> 0,R,1", 100)["halted"]


def test_busy_beaver():
    r = hierarch.busy_beaver(2, 50, workers=2)
    assert r["best_steps"] == 6
    assert r["unresolved"] == 0
    for champion in r["champions"]:
        assert hierarch.run_machine(champion, 50)["steps"] == 6


def test_oracle_machine():
    r = hierarch.run_oracle_machine(CHAMPION2, 10, 50)
    assert r["steps"] == 6 and r["transcript"] == []


def test_pairing_uses_python_ints():
    assert hierarch.pair(2, 3) == 12
    assert hierarch.unpair(12) == (2, 3)
    big = hierarch.pair(2**100, 5)
    assert hierarch.unpair(big) == (2**100, 5)
    with pytest.raises(hierarch.HierarchError):
        hierarch.pair(0, 1)


def test_formulas():
    formula = fixture("sigma3_geq3.json")
    assert hierarch.classify(formula) == "Sigma_3"
    assert hierarch.bounded_eval(formula, {"n": 5, "m": 5, "k": 5}) == (True, 3)


def test_markers():
    kernel = fixture("geq3.json")
    on = hierarch.run_markers(kernel, 500, dummy=True)
    off = hierarch.run_markers(kernel, 500, dummy=False)
    assert on["cardinality"] == 3 and off["cardinality"] == 2
    assert hierarch.brute_force_min_n(kernel, 10, 1, 1) == 3
    assert hierarch.staged_betti(on["events"], on["stages"], on["stages"], 20) == 3


def test_groups():
    assert hierarch.betti_one(fixture("genus2.pres")) == (4, [])
    assert hierarch.betti_one(fixture("z2.pres")) == (0, [2])
    s = hierarch.suspension(fixture("z.pres"), ["a"])
    assert s["generators"] == 8 and len(s["relators"]) == 9
    assert hierarch.betti_one(s["text"])[0] == 0
    assert hierarch.amalgam(fixture("z.pres"), fixture("z.pres"), ["a"], ["aa"])["relators"] == ["ab'b'"]
    assert len(hierarch.census(4)) == 20
    snf = hierarch.smith_normal_form([[2, 0], [0, 3]])
    assert snf["D"] == [[1, 0], [0, 6]]


def test_cli_in_process():
    code, out, _ = hierarch.cli(["pres", "b1", "--in", str(FIXTURES / "trefoil.pres")])
    assert code == 0
    record = json.loads(out)
    assert record["kind"] == "betti-one" and record["b1"] == 1
    assert hierarch.cli(["nonsense"])[0] == 2
