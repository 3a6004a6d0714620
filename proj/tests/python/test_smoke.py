import pytest

psma = pytest.importorskip("psma")


def test_design_space():
    designs = psma.enumerate_designs()
    assert len(designs) == 72
    assert len({d["design_id"] for d in designs}) == 72
    assert len(psma.enumerate_designs("bg=BS-L2")) == 9


def test_presets():
    assert len(psma.preset_names()) == 8
    bb = psma.preset("BitBlade")
    assert bb["design_id"] == "IS-OS/FU-L3-OS"
    assert psma.validate(bb) == []
    with pytest.raises(psma.UnsupportedPreset, match="BS-L1"):
        psma.preset("UNPU")


def test_validate_reports_violations():
    cfg = psma.preset("BitBlade")
    cfg["l2"] = "IS"
    assert len(psma.validate(cfg)) == 1


@pytest.mark.parametrize("design", ["BitFusion", "Loom", "Envision", "OS-HS/FU-L3-HS"])
def test_simulate_matches_golden(design):
    for p in psma.supported_precisions(design):
        r = psma.simulate(design, p, 8, 8, 64, seed=3)
        assert r["oracle_pass"]
        assert r["outputs"] == psma.golden(p, 8, 8, 64, 3)


def test_swu_utilization():
    util = [psma.simulate("ST", p, 64, 64, 4096, max_cycles=64)["utilization"]
            for p in ("8x8", "4x4", "2x2")]
    assert util == [1.0, 0.5, 0.25]


def test_cost_report():
    r = psma.cost_report("Stripes")
    assert r["layout"]["bs_internal_regs"] == 256
    assert r["layout"]["bs_internal_bits"] == 14


def test_bench_is_deterministic():
    a, ok = psma.bench("l4=OS,l3=OS", ["2x2"], [1], 8, 8, 32)
    b, _ = psma.bench("l4=OS,l3=OS", ["2x2"], [1], 8, 8, 32)
    assert ok
    assert a == b
    assert a.count("\n") == 1 + 8


def test_errors_are_typed():
    with pytest.raises(psma.PsmaError):
        psma.simulate("ST", "8x4")
