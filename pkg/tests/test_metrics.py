import pytest
from hypothesis import given
from hypothesis import strategies as st

from phcsim.metrics import alpha, delta_rho, mape, occupancy, replicate_summary


def test_occupancy_examples():
    assert occupancy(480, 1, 480) == 1.0
    assert occupancy(240, 1, 480) == 0.5
    # doctor busy 240 of the 480 OPD minutes in a 1440-minute day
    assert occupancy(240, 1, 480) == 0.5
    with pytest.raises(ValueError):
        occupancy(0, 1, 0)


def test_alpha_examples():
    assert alpha([130, 50, 121], 120) == pytest.approx(2 / 3)
    assert alpha([0, 0, 0]) == 0
    assert alpha([120, 120]) == 0
    assert alpha([]) is None


@given(st.lists(st.floats(0, 1e4), min_size=1), st.floats(1, 500), st.floats(0, 500))
def test_alpha_monotone_in_threshold(waits, t, extra):
    assert alpha(waits, t + extra) <= alpha(waits, t)


def test_delta_rho_against_facility_table():
    assert delta_rho(0.627, 0.658) == pytest.approx(4.71, abs=5e-3)
    assert delta_rho(0.470, 0.923) == pytest.approx(49.08, abs=5e-3)
    assert delta_rho(0.4, 0.4) == 0 and delta_rho(0, 0) == 0
    assert delta_rho(0.658, 0.627) == delta_rho(0.627, 0.658)


@given(st.floats(0.01, 1), st.floats(0.01, 1), st.floats(0.1, 10))
def test_delta_rho_scale_invariant(a, b, c):
    assert delta_rho(a * c, b * c) == pytest.approx(delta_rho(a, b), abs=1e-9)


def test_mape_examples():
    assert mape([(100, 90), (200, 220)]) == pytest.approx(10.0)
    assert mape([(5, 5), (7, 7)]) == 0
    assert mape([(100, 0)]) == 100.0
    assert mape([(0, 50), (100, 110)]) == pytest.approx(10.0)
    assert mape([(0, 3)]) is None


def test_replicate_summary_examples():
    assert replicate_summary([1, 1, 1]) == (1, 0)
    m, h = replicate_summary([0, 2])
    assert m == 1 and h == pytest.approx(12.706, abs=1e-3)
    assert replicate_summary([3.5]) == (3.5, None)
