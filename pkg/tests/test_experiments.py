import json
import math
from fractions import Fraction

import pytest

from permconc.experiments import (
    SweepConfig,
    extremal_search,
    kendall_trend,
    records_csv,
    run_sweep,
    scaling_study,
    summarize,
    write_outputs,
)
from permconc.numerics import PreconditionError
from permconc.poset import stanley_width


def test_config_round_trip(tmp_path):
    cfg = SweepConfig.from_dict({"statement": "main", "generator": {"kind": "random", "seed": 3, "count": 20},
                                 "n_values": [3, 4], "lengths": ["0", "1/2"]})
    p = tmp_path / "c.json"
    p.write_text(cfg.dumps())
    again = SweepConfig.load(p)
    assert again == cfg


def test_config_errors(tmp_path):
    with pytest.raises(PreconditionError):
        SweepConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(PreconditionError):
        SweepConfig.load(bad)
    with pytest.raises(PreconditionError):
        SweepConfig.from_dict({"statement": "nonsense", "n_values": [3]})


def test_pawlowski_sweep_small_grid():
    cfg = SweepConfig.from_dict({"statement": "pawlowski", "generator": {"kind": "grid"}, "n_values": [3, 4]})
    records, summary = run_sweep(cfg)
    assert summary["violations"] == [] and summary["pass"]
    assert summary["fitted_constant"] == 1.0


def test_empty_grid_errors():
    cfg = SweepConfig.from_dict({"statement": "main", "generator": {"kind": "explicit", "instances": []},
                                 "n_values": [3]})
    with pytest.raises(PreconditionError):
        run_sweep(cfg)


def test_sweep_is_deterministic_across_workers(tmp_path):
    d = {"statement": "main", "generator": {"kind": "random", "seed": 1, "count": 40},
         "n_values": [3, 4, 5], "lengths": ["0", "2"]}
    r1, s1 = run_sweep(SweepConfig.from_dict(d))
    r2, s2 = run_sweep(SweepConfig.from_dict({**d, "workers": 2}))
    assert records_csv(r1) == records_csv(r2)
    cfg = SweepConfig.from_dict({**d, "output": str(tmp_path / "out")})
    write_outputs(cfg, r1, s1)
    assert (tmp_path / "out.csv").read_text().startswith("descriptor,")
    assert json.loads((tmp_path / "out.summary.json").read_text())["records"] == len(r1)


def test_lemma_with_sweep_is_stable():
    cfg = SweepConfig.from_dict({"statement": "lemma-with", "generator": {"family": "range"},
                                 "n_values": list(range(20, 101, 20)), "k_rule": "all"})
    _, summary = run_sweep(cfg)
    assert not summary["trend_increasing"]


def test_kendall_trend():
    assert kendall_trend([1, 2, 3, 4, 5, 6, 7, 8], [1, 2, 3, 4, 5, 6, 7, 8]).increasing
    assert not kendall_trend([1, 2, 3, 4, 5, 6, 7, 8], [8, 7, 6, 5, 4, 3, 2, 1]).increasing
    assert not kendall_trend([1, 2, 3], [2, 2, 2]).increasing


def test_summarize_rejects_empty():
    with pytest.raises(PreconditionError):
        summarize("main", [])


@pytest.mark.parametrize("n,value", [(2, Fraction(1, 2)), (3, Fraction(1, 3)), (4, Fraction(1, 3))])
def test_extremal_search_exhaustive(n, value):
    res = extremal_search(n, 2)
    assert res.value == value and res.mode == "exhaustive"


def test_extremal_search_hill_climb_runs():
    res = extremal_search(6, 3, restarts=3, seed=1)
    assert res.mode == "hill-climb" and 0 < res.value <= Fraction(1, 5)


def test_scaling_k1_and_stanley_consistency():
    rows = scaling_study("with", [10, 12], "one")
    assert all(r["max_point_mass"] == Fraction(1, r["n"]) and r["ratio"] == 1 for r in rows)
    for n in (10, 11, 16):
        (row,) = scaling_study("without", [n], "half")
        assert row["max_point_mass"] == Fraction(stanley_width(n, n // 2), math.comb(n, n // 2))


def test_scaling_with_k_equals_n_bounded():
    # local limit theorem: n*sqrt(n) * max mass -> sqrt(6/pi) from below
    rows = scaling_study("with", range(10, 101, 10), "n")
    assert max(float(r["ratio"]) for r in rows) <= math.sqrt(6 / math.pi)
