import json
import math

import numpy as np
import pytest

from hybridqb.dynamics import Backend, EvolutionMode
from hybridqb.errors import InvariantViolation, RunError, UnknownPreset, UnsupportedCombination
from hybridqb.scenario import (
    CSV_HEADER,
    PRESET_NAMES,
    Row,
    Scenario,
    audit_branch,
    discrepancy_report,
    load_config,
    parse_number,
    preset,
    random_grid,
    read_csv,
    run,
    scenario_from_mapping,
    scenario_report,
    to_csv,
    to_json,
    write,
)
from hybridqb.spin_model import BatteryParams


def small(name="fig2", **kw):
    values = {"preset": name, "n_steps": 101, "t_max": 5}
    values.update(kw)
    return scenario_from_mapping(values)


def test_presets_exist_and_flag_guessed_values():
    for name in PRESET_NAMES:
        s = preset(name)
        assert s.name == name
        assert "Delta" in s.artifact_chosen
    assert preset("nickel").units == "kelvin"
    assert preset("nickel").battery.mu_B == pytest.approx(0.67171)
    assert preset("fig3").sweep == ("T", (1.0, 2.0, 3.0, 4.0))
    with pytest.raises(UnknownPreset):
        preset("fig5")


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(n_steps=1)
    with pytest.raises(ValueError):
        Scenario(t_max=-1)
    with pytest.raises(ValueError):
        Scenario(sweep=("bogus", (1.0,)))
    with pytest.raises(UnsupportedCombination):
        Scenario(mode=EvolutionMode.TOTAL, backend=Backend.CLOSED_FORM)


def test_point_routes_sweep_axes():
    s = preset("fig3")
    assert s.point(3.0)[2].T == 3.0
    s = small(sweep_param="theta", sweep_values="0,pi/2")
    assert s.point(math.pi / 2)[1].theta == pytest.approx(math.pi / 2)
    assert small().point(2.0)[0].D == 2.0


def test_run_shapes_and_order():
    s = small()
    table = run(s)
    assert len(table.rows) == 4 * 101
    assert [r.sweep_value for r in table.rows[::101]] == [0.5, 1.0, 1.5, 2.0]
    assert table.metadata["columns"] == list(CSV_HEADER)
    for v in s.sweep_values():
        branch = table.branch(v)
        assert branch[0].t == 0.0 and branch[0].W == 0.0


def test_workers_do_not_change_output():
    s = small()
    assert to_csv(run(s, workers=1)) == to_csv(run(s, workers=4))


def test_unswept_scenario_runs():
    table = run(small("nickel"))
    assert {r.sweep_param for r in table.rows} == {"none"}
    assert len(table.rows) == 101


def test_theta_zero_charges():
    table = run(small(theta=0.0))
    w = [r.W for r in table.rows]
    assert max(abs(x) for x in w) > 1e-3


def test_audit_branch_rejects_bad_rows():
    good = Row("none", 0.0, 0.0, 0.0, 0.0, 1.0, 0.1, 0.1, 0.0)
    audit_branch([good, good._replace(t=1.0)])
    with pytest.raises(InvariantViolation):
        audit_branch([good._replace(W=1e-17)])
    with pytest.raises(InvariantViolation):
        audit_branch([good, good._replace(K=1.1)])
    with pytest.raises(InvariantViolation):
        audit_branch([good, good._replace(negativity=0.6)])
    with pytest.raises(InvariantViolation):
        audit_branch([good, good._replace(C_l1=-0.1)])


def test_run_error_carries_location(monkeypatch):
    import hybridqb.scenario as sc

    def boom(*a, **k):
        raise InvariantViolation("synthetic")

    monkeypatch.setattr(sc, "audit_branch", boom)
    with pytest.raises(RunError) as info:
        run(small())
    assert info.value.sweep_value == 0.5
    assert "synthetic" in str(info.value)


def test_csv_round_trip_is_bit_exact():
    table = run(small(theta=0.3))
    rows = read_csv(to_csv(table))
    assert rows == table.rows
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


def test_json_round_trip():
    table = run(small(theta=0.3))
    doc = json.loads(to_json(table))
    assert doc["metadata"]["scenario"]["name"] == "fig2"
    assert [Row(**r) for r in doc["rows"]] == table.rows


def test_write_files_and_sidecar(tmp_path):
    table = run(small("nickel"))
    out = tmp_path / "r.csv"
    write(table, "csv", out)
    assert out.read_text() == to_csv(table)
    meta = json.loads((tmp_path / "r.csv.meta.json").read_text())
    assert meta["scenario"]["units"] == "kelvin"
    write(table, "json", tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["rows"][0]["t"] == 0.0
    with pytest.raises(OSError):
        write(table, "csv", tmp_path / "missing" / "r.csv")
    with pytest.raises(ValueError):
        write(table, "xml", out)


def test_parse_number():
    assert parse_number("pi/4") == pytest.approx(math.pi / 4)
    assert parse_number("0.5*pi") == pytest.approx(math.pi / 2)
    assert parse_number("-pi") == pytest.approx(-math.pi)
    assert parse_number("2pi/3") == pytest.approx(2 * math.pi / 3)
    assert parse_number("1e-3") == 1e-3
    with pytest.raises(ValueError):
        parse_number("pie")


def test_config_file(tmp_path):
    cfg = tmp_path / "s.ini"
    cfg.write_text("# charging at theta = 0\npreset = fig2\ntheta = 0  # override\nT = 2\n"
                   "sweep_param = B\nsweep_values = 1, 2\nn_steps = 11\n")
    s = scenario_from_mapping(load_config(cfg))
    assert s.charger.theta == 0.0
    assert s.thermal.T == 2.0
    assert s.sweep == ("B", (1.0, 2.0))
    assert s.n_steps == 11
    assert s.battery.J == 1.0
    cfg.write_text("[scenario]\nJ = 2\nbogus = 1\n")
    with pytest.raises(ValueError):
        load_config(cfg)


def test_mapping_can_drop_sweep():
    s = scenario_from_mapping({"preset": "fig2", "sweep_param": "none"})
    assert s.sweep is None


def test_random_grid_is_reproducible():
    a, b = random_grid(5, 3), random_grid(5, 3)
    assert a == b
    assert all(0.5 <= T <= 5 for _, T in a)


def test_discrepancy_report_contents():
    rep = discrepancy_report(random_grid(20, 1))
    assert rep["closed_form_agrees"]
    assert rep["partition_function_max_rel_diff"] < 1e-9
    entries = rep["printed_thermal_entries"]
    assert entries["rho22"]["points_disagreeing"] > 0
    assert entries["rho11"]["points_disagreeing"] == 0
    assert rep["eigenvalues"]["closed_form_max_abs_diff"] < 1e-9
    assert rep["eigenvalues"]["printed_minus_closed_max_abs_diff"]["lambda1"] < 1e-12
    json.dumps(rep, allow_nan=False)


def test_scenario_report():
    rep = scenario_report(small())
    assert rep["n_points"] == 4
    assert rep["closed_form_agrees"]


def test_degenerate_point_in_report_is_counted():
    rep = discrepancy_report([(BatteryParams(J=0, D=0, B=0), 1.0)])
    assert rep["degenerate_eta_fallbacks"] == 1


def test_closed_form_backend_scenario_runs():
    table = run(small(backend="closed-form", theta=0.0))
    ref = run(small(theta=0.0))
    np.testing.assert_allclose([r.W for r in table.rows], [r.W for r in ref.rows], atol=1e-12)
