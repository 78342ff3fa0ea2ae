# tests/test_lattice.py
import math
import os
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from logic_blocks.errors import ConfigurationError, ParameterError, UnsupportedDimensionError
from logic_blocks.lattice import (
    FamilyTag,
    QuantizerKind,
    barnes_wall_generator,
    cubic_generator,
    dump_shells_csv,
    enumerate_by_power,
    enumerate_shell,
    is_member,
    lattice_from_generator,
    members_mask,
    nested_check,
    nested_voronoi_set,
    quantize,
    scaled_cubic,
    shortest_vectors,
)


def test_cubic_generator_constants():
    spec = cubic_generator(4)
    assert spec.generator == tuple(tuple(int(i == j) for j in range(4)) for i in range(4))
    assert spec.d2min == 1 and spec.volume == 1 and spec.coding_gain == 1
    assert spec.kissing == 8
    one = cubic_generator(1)
    assert one.generator == ((1,),)
    assert one.kissing == 2


def test_cubic_kissing_by_enumeration():
    assert len(enumerate_shell(cubic_generator(8), 1)) == 16


def test_bw4_generator_and_constants():
    spec = barnes_wall_generator(1)
    assert spec.generator == ((2, 0, 0, 0), (1, 1, 0, 0), (1, 0, 1, 0), (1, 1, 1, 1))
    assert spec.family_tag is FamilyTag.BARNES_WALL
    assert spec.d2min == 2
    assert spec.volume == 2
    assert spec.coding_gain == pytest.approx(math.sqrt(2))


def test_bw2_is_two_dimensional_cubic():
    spec = barnes_wall_generator(0)
    assert spec.generator == ((1, 0), (1, 1))
    assert spec.volume == 1
    assert len(enumerate_shell(spec, 1)) == 4


@pytest.mark.parametrize("m", [0, 1, 2])
def test_closed_forms_match_enumeration(m):
    spec = barnes_wall_generator(m)
    d2 = 2 ** m
    for p in range(1, d2):
        assert len(enumerate_shell(spec, p)) == 0
    shell = enumerate_shell(spec, d2)
    assert len(shell) == spec.kissing == math.prod(2 ** i + 2 for i in range(1, m + 2))
    assert spec.coding_gain == pytest.approx(d2 / float(spec.volume) ** (2 / spec.dimension))


def test_bw8_kissing_is_240():
    assert len(shortest_vectors(barnes_wall_generator(2))) == 240


@pytest.mark.skipif(not os.environ.get("SLM_RUN_SLOW"), reason="dimension-16 enumeration")
@pytest.mark.slow
def test_bw16_kissing_is_4320():
    spec = barnes_wall_generator(3)
    assert len(shortest_vectors(spec)) == 4320
    assert float(spec.volume) == 2 ** 12


def test_coding_gains_in_db():
    gains = [barnes_wall_generator(m).coding_gain_db for m in (1, 2, 3)]
    assert gains == pytest.approx([1.51, 3.01, 4.52], abs=0.01)


def test_dimension_cap():
    with pytest.raises(UnsupportedDimensionError):
        barnes_wall_generator(4)


def test_is_member_examples():
    spec = barnes_wall_generator(1)
    assert is_member(spec, [1, 1, 0, 0])
    assert not is_member(spec, [1, 0, 0, 0])
    assert is_member(spec, [0, 0, 0, 0])
    assert is_member(barnes_wall_generator(2), [0] * 8)
    with pytest.raises(ParameterError):
        is_member(spec, [1, 1])


def test_members_mask_agrees_with_exact_membership():
    spec = barnes_wall_generator(2)
    rng = np.random.default_rng(7)
    vecs = rng.integers(-2, 3, size=(300, 8))
    mask = members_mask(spec, vecs)
    assert mask.tolist() == [is_member(spec, v.tolist()) for v in vecs]


def test_enumerate_bw4_up_to_six():
    spec = barnes_wall_generator(1)
    vecs = enumerate_by_power(spec, 6)
    assert len(vecs) == 145
    power = (vecs ** 2).sum(axis=1)
    assert [int((power == p).sum()) for p in (0, 2, 4, 6)] == [1, 24, 24, 96]
    assert np.all(np.diff(power) >= 0)


def test_enumerate_shell_two_is_signed_pairs():
    shell = enumerate_shell(barnes_wall_generator(1), 2)
    assert len(shell) == 24
    assert all(sorted(np.abs(v).tolist()) == [0, 0, 1, 1] for v in shell)


def test_enumerate_power_zero():
    vecs = enumerate_by_power(barnes_wall_generator(2), 0)
    assert vecs.tolist() == [[0] * 8]


def test_enumeration_order_is_lexicographic_within_shell():
    vecs = enumerate_by_power(barnes_wall_generator(1), 4)
    shell = [tuple(v) for v in vecs if (np.asarray(v) ** 2).sum() == 4]
    assert shell == sorted(shell)


def test_closure_and_reflection():
    spec = barnes_wall_generator(1)
    p_max = 8
    vecs = enumerate_by_power(spec, p_max)
    found = {tuple(v) for v in vecs.tolist()}
    for v in found:
        assert tuple(-x for x in v) in found
    for u in list(found)[:40]:
        for v in found:
            s = tuple(a + b for a, b in zip(u, v))
            if sum(x * x for x in s) <= p_max:
                assert s in found


def test_membership_and_enumeration_agree():
    spec = barnes_wall_generator(1)
    found = {tuple(v) for v in enumerate_by_power(spec, 6).tolist()}
    for v in np.ndindex(5, 5, 5, 5):
        vec = tuple(x - 2 for x in v)
        if sum(x * x for x in vec) <= 6:
            assert (vec in found) == is_member(spec, list(vec))


def test_d4_fast_quantizer_trace():
    spec = barnes_wall_generator(1)
    q = quantize(spec, QuantizerKind.DN_FAST, [1.32, -2.51, -0.41, 2.70])
    assert q.tolist() == [1, -2, 0, 3]


def test_rounding_quantizer():
    q = quantize(cubic_generator(2), QuantizerKind.ROUND_TO_INTEGER, [0.4, -0.4])
    assert q.tolist() == [0, 0]


def test_rounding_ties_go_up():
    q = quantize(cubic_generator(3), QuantizerKind.ROUND_TO_INTEGER, [0.5, -0.5, 1.5])
    assert q.tolist() == [1, 0, 2]


def test_fast_quantizer_matches_exact_search():
    spec = barnes_wall_generator(1)
    x = np.random.default_rng(11).uniform(-4, 4, size=(2_000, 4))
    fast = quantize(spec, QuantizerKind.DN_FAST, x)
    d_fast = ((x - fast) ** 2).sum(axis=1)
    for i in range(len(x)):
        exact = quantize(spec, QuantizerKind.EXACT_ENUMERATION, x[i])
        assert is_member(spec, exact.tolist())
        assert d_fast[i] == pytest.approx(((x[i] - exact) ** 2).sum(), abs=1e-9)


def test_exact_quantizer_is_optimal_in_bw8():
    spec = barnes_wall_generator(2)
    members = enumerate_by_power(spec, 8).astype(float)
    rng = np.random.default_rng(3)
    for x in rng.uniform(-0.5, 0.5, size=(40, 8)):
        q = quantize(spec, QuantizerKind.EXACT_ENUMERATION, x)
        best = ((members - x) ** 2).sum(axis=1).min()
        assert ((q - x) ** 2).sum() == pytest.approx(best, abs=1e-9)


def test_quantizer_lattice_mismatch():
    with pytest.raises(ConfigurationError):
        quantize(barnes_wall_generator(1), QuantizerKind.ROUND_TO_INTEGER, [0.1] * 4)
    with pytest.raises(ConfigurationError):
        quantize(barnes_wall_generator(2), QuantizerKind.DN_FAST, [0.1] * 8)


def test_nested_check_examples():
    z4 = cubic_generator(4)
    assert nested_check(z4, scaled_cubic(4, 3))
    assert not nested_check(z4, z4)
    assert nested_check(z4, barnes_wall_generator(1))
    assert not nested_check(barnes_wall_generator(1), z4)
    with pytest.raises(ParameterError):
        nested_check(z4, cubic_generator(2))


def test_nested_voronoi_cell_of_cubic_nesting():
    cell = nested_voronoi_set(cubic_generator(4), scaled_cubic(4, 3))
    assert len(cell) == 81
    assert set(np.unique(cell).tolist()) == {-1, 0, 1}


def test_custom_generator_constants_by_enumeration():
    spec = lattice_from_generator([[2, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 1, 1]])
    assert spec.family_tag is FamilyTag.CUSTOM
    assert spec.d2min == Fraction(2)
    assert spec.kissing == 24
    with pytest.raises(ParameterError):
        lattice_from_generator([[1, 0], [2, 0]])
    with pytest.raises(ParameterError):
        lattice_from_generator([[0.5, 0], [0, 1]])


def test_dump_shells_csv(tmp_path):
    path = dump_shells_csv(barnes_wall_generator(1), 4, tmp_path / "shells.csv")
    df = pd.read_csv(path)
    assert list(df.columns) == ["power", "x0", "x1", "x2", "x3"]
    assert len(df) == 49
    assert df["power"].tolist() == sorted(df["power"].tolist())
