"""Tests for CSV and SVG report rendering."""

import pytest

from zombie_cache_sim.attacks.models import AttackKind, AttackReport
from zombie_cache_sim.experiments import reports
from zombie_cache_sim.hierarchy.models import MitigationMode


@pytest.fixture
def aes_report():
    return AttackReport(
        kind=AttackKind.AES,
        mode=MitigationMode.BASELINE,
        hit_counts=[[0, 3], [1, 0]],
        heatmap=[[0.0, 1.0], [1 / 3, 0.0]],
        metadata={"p0_values": [16, 32]},
    )


@pytest.fixture
def fw_report():
    return AttackReport(
        kind=AttackKind.FW,
        mode=MitigationMode.ZBM,
        confusion=[[50.0, 50.0], [100.0 / 3, 200.0 / 3]],
    )


@pytest.mark.unit
def test_to_csv_uses_lf_and_exact_floats():
    text = reports.to_csv(("a", "b"), [(1, 0.1), ("x,y", 2.5)])
    assert text == 'a,b\n1,0.1\n"x,y",2.5\n'
    assert "\r" not in text


@pytest.mark.unit
def test_to_csv_header_only():
    assert reports.to_csv(reports.ALARM_HEADER, []) == "cycle,spy_core,victim_core\n"


@pytest.mark.unit
def test_aes_rows(aes_report):
    """One row per (p0, line) with the real p0 value."""
    assert reports.aes_rows(aes_report) == [
        (16, 0, 0, 0.0),
        (16, 1, 3, 1.0),
        (32, 0, 1, 0.333333),
        (32, 1, 0, 0.0),
    ]


@pytest.mark.unit
def test_fw_rows(fw_report):
    rows = reports.fw_rows(fw_report)
    assert len(rows) == 4
    assert rows[2] == (1, 0, 33.3333)


@pytest.mark.unit
def test_heatmap_svg(aes_report):
    """A well-formed SVG with one rect per cell and an escaped title."""
    svg = reports.render_heatmap_svg(aes_report, "aes <base>")

    assert svg.startswith('<?xml version="1.0"')
    assert 'version="1.1"' in svg
    assert svg.count("<rect ") == 4
    assert "aes &lt;base&gt;" in svg
    assert svg.rstrip().endswith("</svg>")


@pytest.mark.unit
def test_confusion_svg(fw_report):
    svg = reports.render_confusion_svg(fw_report, "fw")
    assert svg.count("<rect ") == 4
    assert "66.7%" in svg


@pytest.mark.unit
@pytest.mark.parametrize("value,expected", [(0.0, "rgb(255,255,255)"), (1.0, "rgb(135,0,0)"), (2.0, "rgb(135,0,0)")])
def test_shade_ramp(value, expected):
    assert reports._shade(value) == expected
