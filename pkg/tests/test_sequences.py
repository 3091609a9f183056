import numpy as np
import pytest
from hypothesis import given, strategies as st

from wvn_spectral import SequenceFamily


@pytest.mark.parametrize("spec", ["zero", "geometric:0.5", "geometric:-0.3:2.0", "power:2.5", "list:1,2,-3"])
def test_parse_spec_round_trip(spec):
    s = SequenceFamily.parse(spec)
    assert SequenceFamily.parse(s.spec()) == s
    assert SequenceFamily.from_dict(s.to_dict()) == s


@pytest.mark.parametrize("bad", ["geometric:1.5", "power:0.5", "cubic:2", "geometric:x"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        SequenceFamily.parse(bad)


def test_window_values():
    assert np.allclose(SequenceFamily.geometric(0.5).window(1, 4), [0.5, 0.25, 0.125])
    assert np.allclose(SequenceFamily.power(2.0, 3.0).window(2, 4), [0.75, 3.0 / 9])
    lst = SequenceFamily.from_list([1.0, 2.0])
    assert np.allclose(lst.window(1, 5), [1, 2, 0, 0])
    assert np.allclose(lst.window(2, 3), [2])
    assert lst(1) == 1.0 and lst(7) == 0.0


def test_window_rejects_zero_index():
    with pytest.raises(ValueError):
        SequenceFamily.zero().window(0, 3)


@given(st.sampled_from(["geometric:0.7:1.3", "geometric:-0.4", "power:1.5", "power:3:0.2", "list:1,-2,0.5"]),
       st.integers(1, 60))
def test_tail_l1_is_an_upper_bound(spec, n):
    s = SequenceFamily.parse(spec)
    brute = np.abs(s.window(n, n + 200000)).sum()
    assert s.tail_l1(n) >= brute * (1 - 1e-12)


def test_support_end():
    g = SequenceFamily.geometric(0.5)
    end = g.support_end()
    assert g(end) == 0.0 and g(end - 40) > 0.0
    assert SequenceFamily.from_list([1, 2, 3]).support_end() == 4
    assert SequenceFamily.power(2.0).support_end() is None
