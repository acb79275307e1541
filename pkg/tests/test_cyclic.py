import numpy as np
import pytest

from phaserec.signals import ComplexSignal, to_polar
from phaserec.zeros import classify, find_zeros, fit_trig_polynomial
from phaserec.cyclic import (FourierPair, coefficients_from_samples,
                             coefficients_from_zeros, compare,
                             detrend_cyclic_phase, phase_winding,
                             write_fourier_csv)

from conftest import period_grid


def zero_product_signal(roots, n=2048, omega=1.0):
    grid = period_grid(n, 2 * np.pi / omega)
    z = np.exp(1j * omega * grid.times())
    values = np.ones_like(z)
    for r in roots:
        values = values * (1.0 - z / r)
    return ComplexSignal(grid, values)


def pipeline(signal, n_max, axis_tol=1e-6):
    poly = fit_trig_polynomial(signal)
    zs = classify(find_zeros(poly), axis_tol)
    polar = detrend_cyclic_phase(to_polar(signal))
    return poly, zs, polar


def test_single_outside_zero():
    # one zero at z = 2: both sums collapse and A_n = B_n = 2^-n / n
    sig = zero_product_signal([2.0])
    _, zs, polar = pipeline(sig, 3)
    pair = coefficients_from_zeros(zs, 3)
    n = np.arange(1, 4)
    assert abs(pair.A[0]) < 1e-12
    assert np.max(np.abs(pair.A[1:] - 2.0**-n / n)) < 1e-12
    assert np.max(np.abs(pair.B - pair.A[1:])) < 1e-14
    samples = coefficients_from_samples(polar, 3)
    assert compare(pair, samples).max_abs < 1e-8


def test_single_inside_zero():
    # zero at z = 1/2: A_n = 2^-n/n, B_n = -(2^-n - 2(-1)^n)/n, A0 = ln 2
    sig = zero_product_signal([0.5])
    _, zs, polar = pipeline(sig, 5)
    pair = coefficients_from_zeros(zs, 5)
    n = np.arange(1, 6)
    assert abs(pair.A[0] - np.log(2.0)) < 1e-10
    assert np.max(np.abs(pair.A[1:] - 2.0**-n / n)) < 1e-10
    assert np.max(np.abs(pair.B - (-(2.0**-n - 2 * (-1.0)**n) / n))) < 1e-10
    samples = coefficients_from_samples(polar, 5)
    assert compare(pair, samples).max_abs < 1e-8


def test_all_outside_exact_identity():
    # no zeros inside the circle: A_n = B_n exactly, degree 20
    rng = np.random.default_rng(11)
    half = 1.5 + rng.random(10) + 1j * rng.normal(scale=0.8, size=10)
    roots = np.concatenate([half, np.conj(half)])  # conjugate-closed, degree 20
    sig = zero_product_signal(roots, n=4096)
    _, zs, polar = pipeline(sig, 12)
    assert all(e.half_plane == "lower" for e in zs.entries)
    pair = coefficients_from_zeros(zs, 12)
    assert np.max(np.abs(pair.A[1:] - pair.B)) < 1e-12
    samples = coefficients_from_samples(polar, 12)
    assert compare(pair, samples).max_abs < 1e-8


def test_two_state_cross_method(two_state_8, two_state_signal):
    # zero side and sample side agree; the axis doubles and the interior
    # winding enter the sample-side corrections explicitly
    poly = fit_trig_polynomial(two_state_signal)
    zs = classify(find_zeros(poly), 1e-6)
    polar = detrend_cyclic_phase(to_polar(two_state_signal))
    interior = sum(e.multiplicity for e in zs.entries if e.half_plane == "upper")
    axis = tuple((e.t.real, e.multiplicity) for e in zs.entries
                 if e.half_plane == "axis")
    assert interior == 30 and len(axis) == 2
    from_z = coefficients_from_zeros(zs, 16)
    from_s = coefficients_from_samples(polar, 16, secular_count=interior,
                                       axis_zeros=axis,
                                       log_scale=float(np.log(abs(poly.coeffs[0]))))
    report = compare(from_z, from_s, zs)
    assert report.max_abs < 1e-3
    assert len(report.axis_proximity) == 2  # |z+1| for the two axis doubles


def test_a0_equals_mean_log_modulus():
    sig = zero_product_signal([2.0, 1.7 + 0.4j, 1.7 - 0.4j, 0.3])
    _, zs, polar = pipeline(sig, 4)
    pair = coefficients_from_zeros(zs, 4)
    assert abs(pair.A[0] - np.mean(polar.log_modulus)) < 1e-8


def test_coefficient_decay_bound():
    roots = [2.0, 0.4, -1.5 + 0.5j, -1.5 - 0.5j]
    sig = zero_product_signal(roots, n=1024)
    _, zs, _ = pipeline(sig, 20)
    pair = coefficients_from_zeros(zs, 20)
    n = np.arange(1, 21)
    r = np.array([min(abs(z), 1 / abs(z)) for z in roots])
    bound = np.sum(r[:, None] ** n, axis=0) / n
    assert np.all(np.abs(pair.A[1:]) <= bound + 1e-12)


def test_far_near_zeros_negligible():
    eps = 1e-3
    big = zero_product_signal([2.0, 1.0 / eps])
    small = zero_product_signal([2.0])
    _, zs_big, _ = pipeline(big, 8)
    _, zs_small, _ = pipeline(small, 8)
    pa = coefficients_from_zeros(zs_big, 8)
    pb = coefficients_from_zeros(zs_small, 8)
    n = np.arange(1, 9)
    assert np.all(np.abs(pa.A[1:] - pb.A[1:]) <= eps**n / n + 1e-14)


def test_compare_identical_and_case_b():
    sig = zero_product_signal([2.0, -1.0 + 0.05j, -1.0 - 0.05j], n=4096)
    _, zs, _ = pipeline(sig, 6)
    pair = coefficients_from_zeros(zs, 6)
    rep = compare(pair, pair, zs)
    assert rep.max_abs == 0.0 and rep.l2 == 0.0
    assert min(rep.axis_proximity) < 0.06  # near-(-1) zeros surfaced


def test_near_minus_one_bound():
    # single zero just inside at z = -0.99: |A_n - B_n| <= 2 * 0.01
    sig = zero_product_signal([-0.99], n=1024)
    _, zs, _ = pipeline(sig, 8)
    assert zs.entries[0].half_plane == "upper"
    pair = coefficients_from_zeros(zs, 8)
    diff = np.abs(pair.A[1:] - pair.B)
    assert np.all(diff <= 2.0 * 0.01 + 1e-12)


def test_winding_and_detrend(two_state_signal):
    polar = to_polar(two_state_signal)
    assert phase_winding(polar) == 15.0
    detrended = detrend_cyclic_phase(polar)
    assert abs(detrended.trend.linear_slope("phase") - 7.5) < 1e-12
    # detrended phase is periodic: endpoints agree
    assert abs(detrended.phase[0] - detrended.phase[-1]) < 0.1


def test_sample_side_errors(two_state_signal):
    polar = to_polar(two_state_signal)  # not detrended, winding 15
    with pytest.raises(ValueError, match="secular"):
        coefficients_from_samples(polar, 8)
    detrended = detrend_cyclic_phase(polar)
    with pytest.raises(ValueError, match="too few"):
        coefficients_from_samples(detrended, detrended.grid.n)


def test_from_zeros_needs_conjugate_closure():
    sig = zero_product_signal([0.5 + 0.5j], n=512)  # not closed under conj
    _, zs, _ = pipeline(sig, 4)
    with pytest.raises(ValueError, match="conjugation"):
        coefficients_from_zeros(zs, 4)


def test_fourier_pair_validation():
    with pytest.raises(ValueError):
        FourierPair(np.zeros(4), np.zeros(4), 4, "from_zeros")  # A too short
    with pytest.raises(ValueError):
        compare(FourierPair(np.zeros(3), np.zeros(2), 2, "a"),
                FourierPair(np.zeros(4), np.zeros(3), 3, "b"))


def test_fourier_csv(tmp_path):
    pair = FourierPair(np.array([0.5, 0.25, 0.1]), np.array([0.2, -0.1]), 2,
                       "from_zeros")
    path = tmp_path / "pair.csv"
    write_fourier_csv(pair, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,A_n,B_n,provenance"
    assert lines[1].startswith("0,0.5,,")
    assert len(lines) == 4
