"""Multi-frame XYZ parsing, writing, and the lossless round trip."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leftnet.errors import ParseError, UnknownElement
from leftnet.xyz import (ELEMENTS, SYMBOL_TO_Z, XyzFrameRecord, format_xyz,
                         parse_xyz, symbol_for)


def test_element_table_has_118_unique_symbols():
    assert len(ELEMENTS) == 118
    assert len(set(ELEMENTS)) == 118
    assert SYMBOL_TO_Z["H"] == 1
    assert SYMBOL_TO_Z["C"] == 6
    assert SYMBOL_TO_Z["Og"] == 118
    assert symbol_for(26) == "Fe"


def test_symbol_for_rejects_out_of_range():
    for z in (0, -1, 119):
        with pytest.raises(UnknownElement):
            symbol_for(z)


def test_minimal_single_atom_frame():
    frames = parse_xyz("1\n\nH 0 0 0\n")
    assert len(frames) == 1
    assert frames[0].atomic_numbers == (1,)
    assert np.array_equal(frames[0].positions, [[0.0, 0.0, 0.0]])
    assert frames[0].energy is None
    assert frames[0].forces is None


def test_energy_comment_and_forces_parse():
    text = ("2\n"
            "energy=-1.5 whatever else\n"
            "O 0 0 0  0.25 0 0\n"
            "H 1 0 0 -0.25 0 0\n")
    (frame,) = parse_xyz(text)
    assert frame.energy == -1.5
    assert frame.atomic_numbers == (8, 1)
    assert np.allclose(frame.forces, [[0.25, 0, 0], [-0.25, 0, 0]])


def test_multi_frame_with_blank_separators():
    text = "1\nc1\nH 0 0 0\n\n\n1\nc2\nHe 1 2 3\n"
    frames = parse_xyz(text)
    assert [f.atomic_numbers for f in frames] == [(1,), (2,)]
    assert frames[1].comment == "c2"


def test_count_mismatch_names_the_line():
    with pytest.raises(ParseError, match="line 1"):
        parse_xyz("3\ncomment\nH 0 0 0\nH 1 0 0\n")


def test_garbage_count_line():
    with pytest.raises(ParseError, match="atom count"):
        parse_xyz("nope\ncomment\n")


def test_unknown_element_names_line():
    with pytest.raises(UnknownElement, match="line 3"):
        parse_xyz("1\ncomment\nXx 0 0 0\n")


def test_bad_coordinate_and_nonfinite():
    with pytest.raises(ParseError, match="coordinate"):
        parse_xyz("1\n\nH 0 zero 0\n")
    with pytest.raises(ParseError, match="non-finite"):
        parse_xyz("1\n\nH 0 inf 0\n")


def test_bad_energy_value():
    with pytest.raises(ParseError, match="energy"):
        parse_xyz("1\nenergy=oops\nH 0 0 0\n")


def test_wrong_field_count():
    with pytest.raises(ParseError, match="fields"):
        parse_xyz("1\n\nH 0 0\n")


def test_inconsistent_force_columns():
    text = "2\n\nH 0 0 0 1 1 1\nH 1 0 0\n"
    with pytest.raises(ParseError, match="inconsistent"):
        parse_xyz(text)


def test_missing_comment_line():
    with pytest.raises(ParseError, match="comment"):
        parse_xyz("2\n")


def test_case_tolerant_symbols():
    (frame,) = parse_xyz("2\n\nFE 0 0 0\nhe 3 0 0\n")
    assert frame.atomic_numbers == (26, 2)


def test_record_validates_shapes():
    with pytest.raises(ValueError):
        XyzFrameRecord((1, 1), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        XyzFrameRecord((1,), np.array([[0.0, np.nan, 0.0]]))
    with pytest.raises(ValueError):
        XyzFrameRecord((1,), np.zeros((1, 3)), forces=np.zeros((2, 3)))


def _random_frame(rng, with_forces: bool, with_energy: bool):
    n = int(rng.integers(1, 9))
    return XyzFrameRecord(
        atomic_numbers=tuple(int(z) for z in rng.integers(1, 119, n)),
        positions=rng.normal(scale=50.0, size=(n, 3)),
        energy=float(rng.normal(scale=100.0)) if with_energy else None,
        forces=rng.normal(scale=10.0, size=(n, 3)) if with_forces else None)


@pytest.mark.parametrize("with_forces,with_energy",
                         [(False, False), (True, True), (True, False),
                          (False, True)])
def test_round_trip_100_random_frames(with_forces, with_energy):
    rng = np.random.default_rng(hash((with_forces, with_energy)) % 2 ** 31)
    frames = [_random_frame(rng, with_forces, with_energy)
              for _ in range(100)]
    back = parse_xyz(format_xyz(frames))
    assert len(back) == 100
    for a, b in zip(frames, back):
        assert a.atomic_numbers == b.atomic_numbers
        # %.17g makes this exact, comfortably beating the 1e-12 contract
        assert np.array_equal(a.positions, b.positions)
        if with_forces:
            assert np.array_equal(a.forces, b.forces)
        if with_energy:
            assert a.energy == b.energy
        else:
            assert b.energy is None


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False,
                          width=64, min_value=-1e8, max_value=1e8),
                min_size=3, max_size=3),
       st.integers(min_value=1, max_value=118))
def test_round_trip_is_bitwise_for_any_coordinate(coords, z):
    frame = XyzFrameRecord((z,), np.array([coords]))
    (back,) = parse_xyz(format_xyz([frame]))
    assert back.positions.tolist() == frame.positions.tolist()
    assert back.atomic_numbers == (z,)


def test_whitespace_tolerance():
    text = "  1  \n comment \n   H\t 1.0   2.0\t3.0  \n"
    (frame,) = parse_xyz(text)
    assert np.array_equal(frame.positions, [[1.0, 2.0, 3.0]])
