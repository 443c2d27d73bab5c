import csv
import json
import math

import numpy as np
import pytest

from clipcs import cli
from clipcs.harness import (
    SWEEP_COLUMNS,
    ExperimentSpec,
    capacity_sweep,
    inclusion_probability,
    nmse_zeta,
    run_cells,
    run_sweep,
    timing_ccdf,
)
from clipcs.metrics import aggregate
from clipcs.ofdm import OfdmConfig
from clipcs.simulation import ReceiverSettings, draw_trial, run_trial

CFG = OfdmConfig(seed=3)


def small(**kw):
    base = dict(cfg=CFG, gamma_grid=(2.0, 2.4), methods=("none", "lasso"), n_trials=6)
    base.update(kw)
    return ExperimentSpec(**base)


class TestSpec:
    def test_scheme_case(self):
        assert small(scheme="dmc", zeta=0.8).scheme == "DMC"

    @pytest.mark.parametrize("kw", [
        dict(gamma_grid=()),
        dict(gamma_grid=(0.0,)),
        dict(methods=()),
        dict(methods=("magic",)),
        dict(n_trials=0),
        dict(workers=0),
        dict(scheme="DMC"),
        dict(scheme="soft"),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            small(**kw)

    def test_dict_round_trip(self):
        s = small(settings=ReceiverSettings(refine="lmmse"), zeta=0.5)
        assert ExperimentSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            ExperimentSpec.from_dict({"trials": 3})


class TestDeterminism:
    def test_trial_independent_of_order(self):
        a = run_trial(CFG, 4, 0.9, ["lasso"])
        run_trial(CFG, 0, 0.9, ["lasso"])
        b = run_trial(CFG, 4, 0.9, ["lasso"])
        assert a[0].ser == b[0].ser and a[0].nmse == b[0].nmse

    def test_trials_differ(self):
        t0, t1 = draw_trial(CFG, 0, 1.0), draw_trial(CFG, 1, 1.0)
        assert not np.array_equal(t0.x, t1.x)

    def test_sweep_bytes_stable(self, tmp_path):
        p1 = run_sweep(small(output_path=str(tmp_path / "a.csv")))
        p2 = run_sweep(small(output_path=str(tmp_path / "b.csv")))
        assert p1.read_bytes() == p2.read_bytes()

    def test_workers_agree(self):
        one = run_cells(small(n_trials=4))
        two = run_cells(small(n_trials=4, workers=2))
        assert one.keys() == two.keys()
        for k in one:
            assert [(r.trial, r.ser, r.nmse) for r in one[k]] == [(r.trial, r.ser, r.nmse) for r in two[k]]


def test_sweep_csv(tmp_path):
    path = run_sweep(small(output_path=str(tmp_path / "s.csv")))
    with open(path) as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 4
    assert all(r["wall_ms_median"] == "nan" for r in rows)
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta["experiment"] == "sweep" and meta["spec"]["n_trials"] == 6


def test_output_is_directory(tmp_path):
    with pytest.raises(ValueError):
        run_sweep(small(output_path=str(tmp_path)))


def test_none_ser_grows_as_threshold_drops():
    cells = run_cells(small(gamma_grid=(1.6, 2.0, 2.6), methods=("none",), n_trials=40))
    sers = [aggregate(cells[(g, "none")])["ser"] for g in (1.6, 2.0, 2.6)]
    assert sers[0] > sers[1] > sers[2]


def test_recovery_beats_nothing():
    cells = run_cells(small(gamma_grid=(2.2,), methods=("none", "wpal"), n_trials=30))
    assert aggregate(cells[(2.2, "wpal")])["ser"] < aggregate(cells[(2.2, "none")])["ser"]


def test_refinement_helps():
    # unconstrained LS on supports near m inflates noise below 2.2 sigma; the
    # phase-constrained fit has twice the equations and helps everywhere
    cases = {2.0: ("wpal",), 2.2: ("lasso", "wl", "wpal")}
    for g, methods in cases.items():
        spec = small(gamma_grid=(g,), methods=methods, n_trials=500)
        raw = run_cells(spec.replace(settings=ReceiverSettings(refine="none")))
        ls = run_cells(spec)
        for m in methods:
            assert aggregate(ls[(g, m)])["nmse"] < aggregate(raw[(g, m)])["nmse"], (g, m)


def test_inclusion_full_pool():
    sigma = CFG.envelope_sigma
    assert inclusion_probability(CFG, 2.0 * sigma, 1.0, 10) == 1.0
    assert inclusion_probability(CFG, 2.0 * sigma, 0.05, 10) <= inclusion_probability(CFG, 2.0 * sigma, 0.3, 10)
    with pytest.raises(ValueError):
        inclusion_probability(CFG, sigma, 0.0, 1)


def test_nmse_zeta_rows():
    rows = nmse_zeta(small(gamma_grid=(2.3,), methods=("pal_rts",), n_trials=3), [0.6, 1.0])
    assert [r["zeta"] for r in rows] == [0.6, 1.0]
    assert all(r["gamma"] == 2.3 and r["nmse"] >= 0 for r in rows)


def test_timing_ccdf_valid():
    table = timing_ccdf(small(gamma_grid=(2.2,), n_trials=3))
    top = max(t.max() for t, _ in table.values())
    assert math.isclose(top, 1.0)
    for t, p in table.values():
        assert np.all(np.diff(t) >= 0) and np.all(np.diff(p) <= 0) and p[-1] == 0


def test_capacity_rows():
    rows = capacity_sweep(small(gamma_grid=(2.3,), methods=("wpal",), n_trials=5), [30.0, 40.0])
    assert [r["snr_db"] for r in rows] == [30.0, 40.0]
    for r in rows:
        assert r["justified"] == (r["c2"] > r["c1"])


class TestCli:
    def test_sweep(self, tmp_path, capsys):
        out = tmp_path / "x.csv"
        code = cli.main(["sweep", "--trials", "2", "--gammas", "2.0:2.2:0.2", "--methods", "none,wl",
                         "--out", str(out)])
        assert code == 0
        assert capsys.readouterr().out.strip() == str(out)
        assert out.exists() and out.with_suffix(".json").exists()

    def test_config_file(self, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"n_trials": 2, "gamma_grid": [2.1], "methods": ["none"],
                                    "cfg": {"seed": 9}}))
        out = tmp_path / "y.csv"
        assert cli.main(["sweep", "--config", str(conf), "--out", str(out)]) == 0
        meta = json.loads(out.with_suffix(".json").read_text())
        assert meta["spec"]["cfg"]["seed"] == 9

    def test_papr_ccdf(self, tmp_path):
        out = tmp_path / "p.csv"
        assert cli.main(["papr-ccdf", "--trials", "100", "--gammas", "2.0", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 101

    @pytest.mark.parametrize("argv", [
        ["sweep", "--methods", "bogus"],
        ["sweep", "--trials", "0"],
        ["sweep", "--config", "/nonexistent/file.json"],
        ["sweep", "--scheme", "dmc"],
    ])
    def test_bad_input(self, argv, capsys):
        assert cli.main(argv) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_json(self, tmp_path):
        conf = tmp_path / "bad.json"
        conf.write_text("{")
        assert cli.main(["sweep", "--config", str(conf)]) == 2

    def test_parse_range(self):
        assert cli._floats("0.4:0.8:0.2") == pytest.approx([0.4, 0.6, 0.8])
        assert cli._floats("1,2.5") == [1.0, 2.5]
