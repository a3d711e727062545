import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fujita_lab import steady
from fujita_lab.zeronum import (IdenticalProfilesError, intersection_number, sign_change_locations, sign_changes,
                                zero_number)


def test_cosine():
    zc = zero_number(np.cos, (0.0, 10.0))
    assert zc.count == 3
    np.testing.assert_allclose(zc.crossing_locations, [math.pi / 2, 3 * math.pi / 2, 5 * math.pi / 2], atol=1e-10)


def test_phi_one_below_singular_state(p12):
    zc = zero_number(lambda r: steady.phi_alpha(p12, 1.0, r) - p12.phi_inf(r), (0.01, 100.0), spacing="log")
    assert zc.count == 0


def test_member_crosses_twice(p6, member_a2):
    zc = steady.count_against_phi_inf(p6, member_a2.value, 1e-3, 4 * member_a2.trusted_radius, 8000)
    assert zc.count == 2 == member_a2.k


def test_identical_rejected():
    with pytest.raises(IdenticalProfilesError):
        intersection_number(np.sin, np.sin, (0.0, 3.0))


def test_kappa_against_singular_state(p12):
    zc = intersection_number(lambda r: np.full_like(r, p12.kappa), p12.phi_inf, (0.1, 50.0))
    assert zc.count == 1
    assert zc.crossing_locations[0] == pytest.approx((p12.L / p12.kappa) ** 2, rel=1e-10)
    assert zc.crossing_locations[0] == pytest.approx(4.3589, abs=1e-4)


def test_ordered_family(p12):
    zc = intersection_number(lambda r: steady.phi_alpha(p12, 1.0, r), lambda r: steady.phi_alpha(p12, 3.0, r),
                             (0.0, 60.0))
    assert zc.count == 0


def test_tangency_is_flagged_not_counted():
    zc = zero_number(lambda x: (x - 1.0) ** 2, (0.0, 2.0), n_coarse=2001)
    assert zc.count == 0
    assert zc.tangency_flag


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.05, 0.95), min_size=1, max_size=6, unique=True))
def test_polynomial_roots_counted(roots):
    roots = sorted(roots)
    if min(np.diff(roots), default=1.0) < 1e-3:
        return
    f = lambda x: np.prod([x - r for r in roots], axis=0)  # noqa: E731
    zc = zero_number(f, (0.0, 1.0), n_coarse=4000)
    assert zc.count == len(roots)
    np.testing.assert_allclose(zc.crossing_locations, roots, atol=1e-9)


@pytest.mark.parametrize("values,count", [([1, -1, 1], 2), ([1, 0, 1], 0), ([1, 0, -1], 1), ([], 0)])
def test_sign_changes(values, count):
    assert sign_changes(values) == count


def test_sign_change_locations():
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(sign_change_locations(x, x - 0.55), [0.55])
