import math

import numpy as np
import pytest

from hypbergman import (
    UhpPoint,
    built_in_group,
    kernel_estimates,
    kernel_norm,
    kernel_trace,
    majorant_sum,
    parabolic_sum,
    tail_bound,
)
from hypbergman.kernel import log_tail_bound, required_radius, separation_radius

from oracles import gamma0_4_series, mp_parabolic_sum, mp_tail_integral

I = UhpPoint(0.0, 1.0)


@pytest.fixture(scope="module")
def gamma2():
    return built_in_group("gamma2_width1")


def c(k):
    return (2 * k - 1) / (4 * math.pi)


def test_trivial_group_single_term():
    G = built_in_group("trivial")
    est = kernel_norm(G, I, UhpPoint(0, 2), 2)
    assert est.value == pytest.approx(0.188627, abs=2e-6)
    assert est.value == pytest.approx(c(2) / math.cosh(math.log(2) / 2) ** 4, rel=1e-14)
    assert est.tail == 0 and est.certified


def test_weight_validation(gamma2):
    for k in (1, 2.5, 0):
        with pytest.raises(ValueError):
            kernel_norm(gamma2, I, I, k)


def test_off_diagonal_against_direct_sum(gamma2):
    k = 3
    norm, maj = kernel_estimates(gamma2, I, UhpPoint(4, 1), [k], 1e-6)[k]
    S, _, mags = gamma0_4_series(1j, 4 + 1j, k)
    assert norm.certified and maj.certified
    assert norm.value == pytest.approx(c(k) * abs(S), rel=1e-6)
    assert maj.value == pytest.approx(c(k) * mags.sum(), rel=1e-6)


def test_diagonal_positive_and_matches(gamma2):
    k = 3
    S, _, _ = gamma0_4_series(1j, 1j, k)
    # the identity term is (2y / (z - conj z))^2k = (-1)^k; the sum is real with that sign
    S *= (-1) ** k
    assert abs(S.imag) < 1e-10 * abs(S.real) and S.real > 0
    est = kernel_norm(gamma2, I, I, k)
    assert est.value > 0
    assert est.value == pytest.approx(c(k) * S.real, rel=1e-6)


@pytest.mark.parametrize("z,w,k", [(0.2 + 0.7j, -0.3 + 0.4j, 4), (0.45 + 0.2j, 0.1 + 1.8j, 6)])
def test_random_pairs_against_direct_sum(gamma2, z, w, k):
    norm, maj = kernel_estimates(gamma2, UhpPoint.from_complex(z), UhpPoint.from_complex(w), [k],
                                 1e-8)[k]
    S, _, mags = gamma0_4_series(z, w, k)
    assert norm.value == pytest.approx(c(k) * abs(S), rel=1e-7)
    assert maj.value == pytest.approx(c(k) * mags.sum(), rel=1e-7)
    assert maj.lower <= c(k) * mags.sum() * (1 + 1e-12)


def test_invariance_under_group(gamma2):
    z, w = UhpPoint(0.2, 0.5), UhpPoint(-0.3, 0.9)
    g = gamma2.generators[0] @ gamma2.generators[1]
    a = kernel_norm(gamma2, z, w, 4).value
    assert kernel_norm(gamma2, g(z), w, 4).value == pytest.approx(a, rel=1e-8)
    assert kernel_norm(gamma2, w, z, 4).value == pytest.approx(a, rel=1e-8)


def test_majorant_dominates(gamma2):
    z, w = UhpPoint(0.2, 0.5), UhpPoint(-0.3, 0.9)
    for k in (3, 5, 8):
        est = kernel_estimates(gamma2, z, w, [k])[k]
        assert est[0].value <= est[1].value
        assert est[1].value == majorant_sum(gamma2, z, w, k).value


def test_large_weight_finite():
    G = built_in_group("bolza")
    est = kernel_estimates(G, UhpPoint(0.1, 0.9), UhpPoint(-0.3, 1.4), [200, 400])
    for k, (norm, maj) in est.items():
        assert math.isfinite(norm.value) and math.isfinite(maj.value) and maj.value > 0
        assert norm.certified


def test_parabolic_sum_example():
    est = parabolic_sum(I, I, 2)
    assert est.value == pytest.approx(3.1418899167, rel=1e-10)
    assert est.value == pytest.approx(float(mp_parabolic_sum(1j, 1j, 2)), rel=1e-12)


@pytest.mark.parametrize("z,w,k,h", [(0.3 + 0.2j, -0.1 + 2.5j, 3, 1.0),
                                     (0.0 + 5j, 0.4 + 7j, 4, 1.0),
                                     (0.1 + 0.5j, 0.2 + 0.5j, 2, 2.5)])
def test_parabolic_sum_against_mpmath(z, w, k, h):
    est = parabolic_sum(UhpPoint.from_complex(z), UhpPoint.from_complex(w), k, h)
    ref = float(mp_parabolic_sum(z, w, k, h))
    assert est.value == pytest.approx(ref, rel=1e-10)
    assert est.certified


def test_tail_closed_form_against_quadrature():
    assert tail_bound(1.0, 5.0, 3) == pytest.approx(mp_tail_integral(1.0, 5.0, 3), rel=1e-8)
    for r, R, k in [(0.5, 3, 2), (3.05, 8, 5), (0.49, 12, 8), (2.0, 4.0, 20)]:
        assert tail_bound(r, R, k) == pytest.approx(mp_tail_integral(r, R, k), rel=1e-8)


def test_tail_log_space():
    lt = log_tail_bound(0.5, 80.0, 500)
    assert math.isfinite(lt) and lt < -1000
    with pytest.raises(ValueError):
        log_tail_bound(0.0, 3.0, 3)


def test_required_radius_monotone():
    Rs = [required_radius(0.5, 3, t) for t in (1e-2, 1e-4, 1e-6)]
    assert Rs == sorted(Rs)
    for t, R in zip((1e-2, 1e-4, 1e-6), Rs):
        assert tail_bound(0.5, R, 3) <= t
        assert tail_bound(0.5, R - 1e-5, 3) > t


def test_separation_radius_shrinks_in_cusp(gamma2):
    r = separation_radius(gamma2, I, I)
    high = separation_radius(gamma2, UhpPoint(0, 10), I)
    assert high == pytest.approx(2 * math.asinh(1 / 20))
    assert high < r


@pytest.mark.parametrize("R", [3.0, 4.0, 5.0])
def test_tail_dominates_omitted_mass(gamma2, R):
    z, w = UhpPoint(0.1, 0.8), UhpPoint(-0.25, 0.35)
    r = separation_radius(gamma2, z, w)
    _, dist, mags = gamma0_4_series(z.z, w.z, 2, Q=2e3, M=2000)
    for k in (2, 3, 5):
        omitted = np.sum(mags[dist > R] ** (k / 2))
        assert omitted <= tail_bound(r, R, k)


def test_fixed_radius_reports_incomplete(gamma2):
    est = kernel_estimates(gamma2, I, I, [3], radius=12.0, max_elements=1000)[3]
    assert not est[0].certified


def test_trace_gamma2_k3(gamma2):
    res = kernel_trace(gamma2, 3, mesh=0.1)
    assert res.expected == 1
    assert res.value == pytest.approx(1.0, rel=0.02)
