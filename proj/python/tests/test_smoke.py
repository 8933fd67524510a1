import math

import numpy as np
import pytest

import oritube


def default_tube(n_units=1):
    return oritube.generate_tube(oritube.quad_section(15, 15, 0, 90), n_units=n_units)


def test_square_admissible_kite_not():
    assert oritube.check_admissible(np.array([[0, 0], [10, 0], [10, 10], [0, 10]], float)).admissible
    kite = oritube.check_admissible(np.array([[0, 0], [3, -1], [6, 0], [3, 4]], float))
    assert not kite.admissible
    assert kite.violations


def test_tube_stl_sizes():
    tube = default_tube()
    open_stl = tube.stl(closed=False)
    assert len(open_stl) == 84 + 50 * 16
    closed = tube.stl()
    n = int.from_bytes(closed[80:84], "little")
    assert len(closed) == 84 + 50 * n
    assert n == 24


def test_fold_flat_ends_and_rigid():
    tube = default_tube()
    sweep = oritube.fold_sweep(tube, 11)
    assert len(sweep) == 11
    assert sweep[0].enclosed_volume == pytest.approx(0, abs=1e-9)
    assert sweep[-1].enclosed_volume == pytest.approx(0, abs=1e-9)
    mid = oritube.fold(tube, 0.5)
    assert mid.enclosed_volume > 0
    edge, planarity = oritube.rigidity_residual(tube, mid)
    assert edge < 1e-9 and planarity < 1e-9


def test_fit_recovers_parameters():
    p = oritube.OgdenParams(7e5, 2.3)
    strain = np.linspace(0.01, 1.0, 60)
    stress = [oritube.uniaxial_stress(p, 1 + e) for e in strain]
    fit = oritube.fit_ogden(list(strain), stress)
    assert fit.params.mu1 == pytest.approx(7e5, rel=1e-3)
    assert fit.params.alpha1 == pytest.approx(2.3, rel=1e-3)


def test_bundled_tensile_data_fits():
    strain, stress = oritube.load_utm_csv(oritube.data_dir() / "utm_synthetic.csv")
    fit = oritube.fit_ogden(strain, stress)
    assert fit.params.mu1 == pytest.approx(708211, rel=0.02)
    assert fit.r2 > 0.99


def test_tensile_curve_starts_at_zero():
    curve = oritube.tensile_curve(default_tube(), [0.0, 0.5])
    assert curve[0] == (0.0, pytest.approx(0.0, abs=1e-9))
    assert curve[1][1] > 0
    assert math.isfinite(curve[1][1])


def test_catalog_and_force_trace():
    entries = oritube.materials()
    assert len(entries) == 8
    assert {"name", "shore_a", "problems"} <= set(entries[0])
    rec = oritube.load_experiment_csv(oritube.data_dir() / "force_trace.csv")
    summary = oritube.force_summary(rec)
    assert 41 < summary.max_force < 43


def test_errors_carry_code():
    with pytest.raises(oritube.OritubeError) as info:
        oritube.generate_tube(np.array([[0, 0], [1, 1]], float))
    assert info.value.code == "DegeneratePolygon"
    assert isinstance(info.value, RuntimeError)
