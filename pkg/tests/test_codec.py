import pytest
from hypothesis import given, strategies as st

from congestlab.codec import pack, unpack
from congestlab.sim import CONGEST


@given(st.integers(0, 255), st.lists(st.integers(0, 2**64)))
def test_round_trip(tag, values):
    assert unpack(pack(tag, *values)) == (tag, values)


def test_sizes():
    assert pack(3) == b"\x03"
    assert len(pack(1, 127)) == 2
    assert len(pack(1, 128)) == 3


@pytest.mark.parametrize("logn", range(1, 25))
def test_tag_and_two_ids_fit_congest(logn):
    n = 2 ** logn
    assert 8 * len(pack(255, n, n)) <= CONGEST.limit(n)


@pytest.mark.parametrize("bad", [b"", b"\x01\x80"])
def test_unpack_rejects(bad):
    with pytest.raises(ValueError):
        unpack(bad)


def test_pack_rejects():
    with pytest.raises(ValueError):
        pack(256)
    with pytest.raises(ValueError):
        pack(1, -1)
