import json
import math

import pytest

from topoanomaly.detector import DetectorConfig, Label, Verdict
from topoanomaly.evaluate import evaluate
from topoanomaly.formats import (
    SchemaError,
    parse_domain,
    read_labels_csv,
    read_metrics_csv,
    read_trajectory_csv,
    read_verdicts_csv,
    write_labels_csv,
    write_metrics_csv,
    write_report_json,
    write_trajectory_csv,
    write_verdicts_csv,
)
from topoanomaly.metrics import SnapshotMetrics, snapshot_metrics
from topoanomaly.simulate import AttackSchedule, simulate_attack_curve


def test_nan_metrics_roundtrip(tmp_path):
    rows = [SnapshotMetrics(0, 3, 0, 1 / 3, math.nan, math.nan, math.nan, None)]
    write_metrics_csv(tmp_path / "m.csv", rows)
    (back,) = read_metrics_csv(tmp_path / "m.csv")
    assert back.degenerate and math.isnan(back.d_max) and math.isnan(back.sp)


def test_metrics_roundtrip(tmp_path, p5, k4):
    rows = [snapshot_metrics(p5.with_bin(3)), snapshot_metrics(k4.with_bin(4))]
    path = tmp_path / "m.csv"
    write_metrics_csv(path, rows, header=["seed=0"])
    back = read_metrics_csv(path)
    assert back[0] == rows[0]
    assert back[1].degenerate and back[1].bin_id == 4
    assert back[1].r is None and back[1].d_max == back[1].sp == 1.0
    assert path.read_text().startswith("# seed=0\n")


def test_metrics_schema_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("bin_id,r\n0,0.5\n")
    with pytest.raises(SchemaError):
        read_metrics_csv(path)


def test_verdicts_roundtrip(tmp_path):
    verdicts = [Verdict(0, 0.5, Label.NORMAL, ()),
                Verdict(1, 0.7, Label.ABNORMAL, ((0.46, 0.54), (0.6, 0.65))),
                Verdict(2, None, Label.SKIPPED, ((0.46, 0.54),))]
    path = tmp_path / "v.csv"
    write_verdicts_csv(path, verdicts)
    assert read_verdicts_csv(path) == verdicts


def test_parse_domain():
    assert parse_domain("") == ()
    assert parse_domain("0.1..0.2;0.3..0.4") == ((0.1, 0.2), (0.3, 0.4))


def test_labels_roundtrip(tmp_path):
    path = tmp_path / "l.csv"
    write_labels_csv(path, [0, 1, 2], [False, True, False])
    assert read_labels_csv(path) == ([0, 1, 2], [False, True, False])
    path.write_text("tick,label\n0,SKIPPED\n")
    with pytest.raises(SchemaError):
        read_labels_csv(path)


def test_trajectory_csv(tmp_path):
    points = simulate_attack_curve(200, 2, AttackSchedule(step_fraction=0.05, max_fraction=0.1))
    path = tmp_path / "t.csv"
    write_trajectory_csv(path, points)
    rows = read_trajectory_csv(path)
    assert len(rows) == 3
    assert float(rows[1]["removed_fraction"]) == pytest.approx(0.05)


def test_report_json(tmp_path):
    stream = [SnapshotMetrics(i, 10, 9, 1.0, 4.0, 3.0, 2.0, 0.5) for i in range(40)]
    report = evaluate(stream, [False] * 40, DetectorConfig(k=12))
    doc = json.loads(write_report_json(tmp_path / "r.json", report))
    assert doc["counts"] == {"tp": 0, "fp": 0, "tn": 40, "fn": 0}
    assert doc["scores"]["precision"] is None
    assert doc["config"]["lambda"] == 1.96
