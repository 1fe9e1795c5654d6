import csv
import io
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from aoi_cae import (
    GridSpec,
    SimConfig,
    SrpPolicy,
    average_aoi,
    cae_coefficients,
    expected_cae,
    expected_cost,
    solve_srp,
    stationary_distribution,
    success_probabilities,
    success_rate,
    sweep_bounds,
    sweep_costs,
    table1,
    tradeoff_scan,
)
from aoi_cae.sweeps import METRICS, sweep_grid

from _instances import make_instance


def csv_text(table):
    buf = io.StringIO()
    table.write_csv(buf)
    return buf.getvalue()


def test_grid_spec_validation():
    assert GridSpec("c0", 0, 2, 5).values().tolist() == [0, 0.5, 1, 1.5, 2]
    with pytest.raises(ValueError):
        GridSpec("c0", 0, 1, 1)
    with pytest.raises(ValueError):
        GridSpec("c0", 1, 0, 3)
    with pytest.raises(ValueError):
        GridSpec("nope", 0, 1, 3)


def test_two_by_two_row_major():
    t = sweep_bounds(table1(), GridSpec("c0", 0.5, 1.0, 2), GridSpec("d0", 0.0, 1.0, 2))
    assert len(t) == 4
    assert [(r["c0"], r["d0"]) for r in t.records] == [(0.5, 0.0), (0.5, 1.0), (1.0, 0.0), (1.0, 1.0)]


def test_csv_header_and_format():
    t = sweep_bounds(table1(), GridSpec("c0", 0.0, 0.63, 2), GridSpec("d0", 0.2, 1.0, 2))
    rows = list(csv.reader(io.StringIO(csv_text(t))))
    assert rows[0] == ["c0", "d0", "status", "p_ns", "p_sr", "p_sp", "psi", "aoi", "cae", "cost", "ratio"]
    infeasible = rows[1]
    assert infeasible[2] == "InfeasibleCost"
    assert infeasible[3:] == [""] * 8
    feasible = rows[3]
    assert feasible[:3] == ["0.63", "0.2", "Feasible"]
    assert feasible[7] == format(solve_srp(table1()).aoi, ".9g")
    assert "nan" not in csv_text(t).lower()


def test_cost_sweep_header():
    t = sweep_costs(table1(), GridSpec("c_sr", 0.5, 0.9, 2), GridSpec("c_sp", 0.5, 0.9, 2))
    assert csv_text(t).splitlines()[0] == "c_sr,c_sp," + ",".join(METRICS)


def test_serial_and_concurrent_identical():
    grids = (GridSpec("c0", 0.0, 2.0, 9), GridSpec("d0", -1.5, 1.5, 7))
    serial = sweep_bounds(table1(), *grids)
    with ThreadPoolExecutor(4) as ex:
        parallel = sweep_bounds(table1(), *grids, executor=ex)
    assert csv_text(serial) == csv_text(parallel)


def test_records_self_consistent():
    base = table1()
    t = sweep_bounds(base, GridSpec("c0", 0.0, 2.0, 21), GridSpec("d0", -1.5, 1.5, 21))
    mu, nu = success_probabilities(base.channel)
    dist = stationary_distribution(base.source)
    coeffs = cae_coefficients(base.penalty, dist)
    seen = 0
    for r in t.records:
        if r["status"] != "Feasible":
            assert all(r[m] is None for m in METRICS[1:])
            continue
        seen += 1
        p = SrpPolicy(r["p_ns"], r["p_sr"], r["p_sp"])
        psi = success_rate(p, mu, nu)
        assert abs(psi - r["psi"]) <= 1e-12
        assert abs(average_aoi(psi, base.weights, dist.pi1) - r["aoi"]) <= 1e-12
        assert abs(expected_cae(coeffs, psi) - r["cae"]) <= 1e-12
        assert abs(expected_cost(p, base.costs) - r["cost"]) <= 1e-12
        assert r["cost"] <= r["c0"] + 1e-9 and r["cae"] <= r["d0"] + 1e-9
    assert seen > 50


def test_feasible_set_upward_closed():
    t = sweep_bounds(table1(), GridSpec("c0", 0.0, 2.0, 41), GridSpec("d0", -1.5, 1.5, 31))
    ok = t.grid("psi") > 0  # NaN compares False
    ok &= np.array(t.column("status")).reshape(ok.shape) == "Feasible"
    for i, j in zip(*np.nonzero(ok)):
        assert ok[i:, j:].all()


def test_bounds_sweep_regions():
    base = table1()
    t = sweep_bounds(base, GridSpec("c0", 0.0, 2.0, 41), GridSpec("d0", -1.5, 1.5, 31))
    for r in t.records:
        if r["c0"] < base.costs.c_ns:
            assert r["status"] == "InfeasibleCost"
    zeta = cae_coefficients(base.penalty, stationary_distribution(base.source)).zeta
    aoi = t.grid("aoi")
    for j, d0 in enumerate(t.grids[1].values()):
        if d0 < zeta:
            continue
        col = aoi[:, j]
        col = col[~np.isnan(col)]
        assert np.all(np.diff(col) <= 1e-12)


def test_cost_sweep_processed_dominates_when_affordable():
    base = table1()
    t = sweep_costs(base, GridSpec("c_sr", 0.5, 0.9, 9), GridSpec("c_sp", 0.5, 0.9, 9))
    coeffs = cae_coefficients(base.penalty, stationary_distribution(base.source))
    _, nu = success_probabilities(base.channel)
    hits = 0
    for r in t.records:
        if r["c_sp"] <= base.bounds.c0 and coeffs.zeta + coeffs.xi * nu <= base.bounds.d0:
            hits += 1
            assert r["p_sp"] > 0.9
    assert hits > 0


def test_cost_sweep_raw_dominates_when_processed_expensive():
    t = sweep_costs(table1(), GridSpec("c_sr", 0.5, 0.6, 3), GridSpec("c_sp", 1.5, 2.0, 3))
    for r in t.records:
        assert r["status"] == "Feasible"
        # leftover budget may buy a little SP, but SR carries most of the mass
        assert r["p_sr"] > 0.5 and r["p_sr"] > 3 * r["p_sp"]


def test_cost_sweep_tie_break():
    base = make_instance(0.3, 0.5, (0.5, 0.8, 0.8, 0.8, 0.8), (0.1, 0.5, 0.5), (-0.25, 1, 1, -0.25), (1, 1), (0.3, 1.0))
    t = sweep_costs(base, GridSpec("c_sr", 0.5, 0.7, 3), GridSpec("c_sp", 0.5, 0.7, 3))
    for r in t.records:
        if r["c_sr"] == r["c_sp"]:
            assert r["p_sr"] == 0.0 and r["p_sp"] > 0


def test_tradeoff_empty():
    t = tradeoff_scan([], table1())
    assert t.records == []
    assert csv_text(t).splitlines() == ["p01,p10,p_chnl," + ",".join(METRICS)]


def test_tradeoff_monotone_in_channel():
    chans = (0.95, 0.8, 0.6, 0.4, 0.2, 0.05)
    for p01, p10 in ((0.35, 0.75), (0.5, 0.5), (0.1, 0.9), (0.9, 0.9)):
        t = tradeoff_scan([(p01, p10, c) for c in chans], table1().replace(**{"bounds.d0": 1.0}))
        aoi, cae = t.column("aoi"), t.column("cae")
        assert all(s == "Feasible" for s in t.column("status"))
        assert all(b >= a - 1e-12 for a, b in zip(aoi, aoi[1:]))
        assert all(b >= a - 1e-12 for a, b in zip(cae, cae[1:]))


def test_tradeoff_asymmetric_source_lower_cae():
    base = table1().replace(**{"bounds.d0": 1.0})
    sym, asym = tradeoff_scan([(0.5, 0.5, 0.6), (0.1, 0.9, 0.6)], base).records
    assert asym["cae"] < sym["cae"]


def test_tradeoff_infeasible_recorded():
    t = tradeoff_scan([(0.5, 0.5, 0.6)], table1().replace(**{"bounds.d0": -1.0}))
    assert t.records[0]["status"] == "InfeasibleCae"
    assert t.records[0]["aoi"] is None


def test_attached_simulation_columns():
    t = sweep_grid(table1(), (GridSpec("c0", 0.6, 0.7, 2),), simulate=SimConfig(slots=20_000, seed=1))
    assert t.columns[-4:] == ("sim_aoi", "sim_cae", "sim_cost", "sim_psi")
    for r in t.records:
        assert r["sim_aoi"] == pytest.approx(r["aoi"], rel=0.1)
