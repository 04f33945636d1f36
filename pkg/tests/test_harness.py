import itertools

import numpy as np
import pytest

from sftpair import harness
from sftpair.dft import FrequencyPeak
from sftpair.predictor import predict_warp
from sftpair.harness import SweepConfig


def test_default_counts():
    assert SweepConfig.default("scale_x").count == 101
    assert SweepConfig.default("shear_yx").count == 150
    assert SweepConfig.default("rotation").count == 361
    assert SweepConfig.default("translate_x").count == 26
    assert SweepConfig.default("warp_xz").count == 201
    v = SweepConfig.default("shear_xy").values()
    assert v[0] == 0.002 and v[-1] == 0.3


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig("spin", 0, 1, 0.1)
    with pytest.raises(ValueError):
        SweepConfig("scale_x", 1, 0, 0.1)
    with pytest.raises(ValueError):
        SweepConfig("scale_x", 0, 1, 0)
    c = SweepConfig.from_dict({"transform_kind": "rotation", "start": 0, "stop": 10,
                               "step": 5, "interpolation": "sum"})
    assert c.count == 3 and c.interpolation == "sum"
    assert harness.with_interpolation(c, "bilinear").interpolation == "bilinear"


def test_translation_needs_tiling():
    cfg = SweepConfig.default("translate_x", tiling=(1, 1))
    with pytest.raises(ValueError):
        harness.simulate(cfg, 1)


def test_translation_window_matches_roll():
    cfg = SweepConfig.default("translate_xy")
    base = harness.encode_peaks(cfg.pattern).samples
    img = harness.simulate(cfg, 7).samples
    assert np.array_equal(img, np.roll(base, (7, -7), axis=(0, 1)))


def test_identity_sample():
    r = harness.run_sample(SweepConfig.default("rotation"), 0.0)
    assert r.congruent and not r.degraded
    assert sorted(r.captured) == [(-6, -6), (-6, 6), (6, -6), (6, 6)]


def test_rotation_zero_equals_full_turn():
    cfg = SweepConfig.default("rotation")
    a, b = harness.run_sample(cfg, 0.0), harness.run_sample(cfg, 360.0)
    assert sorted(a.captured) == sorted(b.captured)
    assert np.allclose(a.measured_magnitude, b.measured_magnitude, atol=1e-6)


def test_vertices():
    recs = [harness.SweepRecord(v, c, [], [], [], [], [], [], [], [])
            for v, c in [(0, [(6, 6)]), (1, [(6, 6)]), (2, [(7, 6)]), (3, [(7, 7)])]]
    assert harness.vertices(recs) == [2, 3]


def test_check_translation_sweep():
    cfg = SweepConfig.default("translate_x")
    chk = harness.check_sweep(cfg, harness.run_sweep(cfg))
    assert chk.passed, chk.detail


def test_same_set_and_calculated():
    assert harness._same_set([(1, 2), (3, 4)], [(3, 4), (1, 2)], 0)
    assert not harness._same_set([(1, 2)], [(1, 2), (1, 2)], 0)
    # an integral golden point may be the binned prediction
    assert harness.calculated_matches([(5, 6)], [(4.8, 6.0)], [(5, 6)])
    assert harness.calculated_matches([(4.8, 6)], [(4.8, 6.0)], [(5, 6)])
    assert not harness.calculated_matches([(4.7, 6)], [(4.8, 6.0)], [(5, 6)])


@pytest.mark.parametrize("tid", ["2", "3"])
def test_scale_shear_rotation_tables_reproduce(tid):
    rows = harness.reproduce_table(tid)
    assert all(r.captured_ok and r.calculated_ok for r in rows), \
        harness.render_table(tid, rows)


def test_table_estimates():
    rows = {r.label: r for r in harness.reproduce_table("3")}
    est = rows["theta=30"].estimate
    assert est["kind"] == "rotation"
    assert est["coefficients"]["theta"] == pytest.approx(30.96, abs=0.01)


def test_warp_table_calculated_column():
    rows = harness.reproduce_table("4")
    assert all(r.calculated_ok for r in rows)
    assert rows[0].captured_ok and rows[-1].captured_ok


def test_render_and_bad_table():
    text = harness.render_table("2", harness.reproduce_table("2"))
    assert text.startswith("Table 2") and "chi_x=1.25" in text
    with pytest.raises(ValueError):
        harness.reproduce_table("9")


def test_no_single_anchor_reproduces_warp_table():
    # a uniform local scale s(x, y) multiplies both coordinates, but the golden
    # column moves u and v in opposite directions; no anchor can do that
    golden = harness.load_golden()["4"]["rows"]
    row = next(r for r in golden if len(r["transform"]) == 2)
    pxz, pyz = row["transform"]["psi_xz"], row["transform"]["psi_yz"]
    want = sorted(map(tuple, row["calculated"]))
    for x, y in itertools.product(range(-50, 75), repeat=2):
        got = [predict_warp(pxz, pyz, FrequencyPeak(u, v), anchor=(x, y))
               for u, v in [(6, 6), (-6, -6), (6, -6), (-6, 6)]]
        assert not harness._same_set([(g.u, g.v) for g in got], want, 1e-3)


def test_figure_columns():
    peaks = harness.base_pattern_spec().peaks
    cols = harness.figure_columns("shear_yx", peaks)
    assert cols[0] == "Shear_Y" and "Mag_X[6 6]" in cols and cols[-1] == "degraded"
    cols = harness.figure_columns("translate_x", peaks)
    assert cols[-3:] == ["Est_Tx", "Est_Ty", "degraded"]


def test_export_is_deterministic(tmp_path):
    cfg = SweepConfig("scale_x", 0.9, 1.1, 0.05)
    for d in ("a", "b"):
        harness.export_figures({"scale_x": harness.run_sweep(cfg)}, tmp_path / d)
    a = (tmp_path / "a" / "Scale_X.csv").read_bytes()
    assert a == (tmp_path / "b" / "Scale_X.csv").read_bytes()
    lines = a.decode().splitlines()
    assert len(lines) == 6 and len(lines[0].split(",")) == len(lines[1].split(","))


def test_dump_images(tmp_path):
    paths = harness.dump_images(SweepConfig("rotation", 0, 10, 10), tmp_path)
    assert len(paths) == 4 and all(p.exists() for p in paths)
