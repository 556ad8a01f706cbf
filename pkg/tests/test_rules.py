import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nidwca.errors import DimensionError, UnknownRuleError
from nidwca.rules import (CODES, RuleId, RuleVector, build_dependency_matrix,
                          format_dependency_matrix, rule_next_state)

ALL_RULES = [RuleId(c, f) for c in CODES for f in (False, True)]
unit = st.floats(0.0, 1.0, allow_nan=False)


def wolfram_bit(number, l, s, r):
    """Classical elementary-CA lookup: bit (4l + 2s + r) of the rule number."""
    return (number >> (4 * l + 2 * s + r)) & 1


@pytest.mark.parametrize("rule,l,s,r,expected", [
    (0, 0.3, 0.8, 0.9, 0.0),
    (204, 0.9, 0.3, 0.1, 0.3),
    (238, 0.4, 0.5, 0.7, 1.0),
    (51, 0.0, 0.3, 0.0, 0.7),
])
def test_next_state_examples(rule, l, s, r, expected):
    assert rule_next_state(rule, l, s, r) == pytest.approx(expected, abs=1e-15)


def test_rule_0_is_zero_everywhere():
    for l, s, r in itertools.product((0.0, 0.25, 1.0), repeat=3):
        assert rule_next_state(0, l, s, r) == 0.0


def test_unknown_rule_rejected():
    with pytest.raises(UnknownRuleError):
        rule_next_state(30, 0.1, 0.2, 0.3)
    with pytest.raises(UnknownRuleError):
        RuleId(17)  # a complemented number is not a base code
    with pytest.raises(UnknownRuleError):
        RuleVector.from_numbers([238, 110])


def test_rule_numbers_and_complements():
    assert [RuleId(c, True).number for c in CODES] == [255, 85, 51, 17, 15, 5, 3, 1]
    for r in ALL_RULES:
        assert RuleId.from_number(r.number) == r
        assert RuleId.from_gene(r.gene) == r


def test_rule_15_reads_left_only():
    # complement of the left neighbour
    assert rule_next_state(15, 0.2, 0.9, 0.9) == pytest.approx(0.8)


@given(l=unit, s=unit, r=unit, rule=st.sampled_from(ALL_RULES))
def test_closure(rule, l, s, r):
    v = rule_next_state(rule, l, s, r)
    assert 0.0 <= v <= 1.0


@given(l=unit, s=unit, r=unit, code=st.sampled_from(CODES))
def test_complement_duality(code, l, s, r):
    plain = rule_next_state(RuleId(code), l, s, r)
    comp = rule_next_state(RuleId(code, True), l, s, r)
    assert abs(comp - (1.0 - plain)) <= 1e-12


@pytest.mark.parametrize("rule", ALL_RULES, ids=str)
def test_boolean_restriction(rule):
    for l, s, r in itertools.product((0, 1), repeat=3):
        assert rule_next_state(rule, float(l), float(s), float(r)) == wolfram_bit(rule.number, l, s, r)


def test_figure1_matrix(figure1_rules):
    expected = [[1, 1, 0, 0], [1, 1, 1, 0], [0, 0, 1, 1], [0, 0, 1, 1]]
    assert build_dependency_matrix(figure1_rules).tolist() == expected
    assert format_dependency_matrix(build_dependency_matrix(figure1_rules)).splitlines() == [
        "1 1 0 0", "1 1 1 0", "0 0 1 1", "0 0 1 1"]


def test_identity_and_shift_matrices():
    assert (build_dependency_matrix(RuleVector.from_numbers([204] * 3)) == np.eye(3)).all()
    m = build_dependency_matrix(RuleVector.from_numbers([170] * 4))
    assert m.tolist() == [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 0, 0, 0]]


def test_matrix_rows_follow_rule_reads():
    expected_rows = {0: (0, 0, 0), 170: (0, 0, 1), 204: (0, 1, 0), 238: (0, 1, 1),
                     240: (1, 0, 0), 250: (1, 0, 1), 252: (1, 1, 0), 254: (1, 1, 1)}
    for code, row in expected_rows.items():
        for comp in (False, True):
            m = build_dependency_matrix(RuleVector((RuleId(204), RuleId(code, comp), RuleId(204))))
            assert tuple(m[1]) == row


def test_empty_rule_vector_rejected():
    with pytest.raises(DimensionError):
        RuleVector(())


@given(st.lists(st.sampled_from(ALL_RULES), min_size=1, max_size=6),
       st.data())
def test_dependency_matrix_soundness(rules, data):
    """Changing a cell the matrix marks as unread never changes the next state."""
    from nidwca.engine import step
    rv = RuleVector(tuple(rules))
    n = rv.n_cells
    m = build_dependency_matrix(rv)
    x = np.array(data.draw(st.lists(unit, min_size=n, max_size=n)))
    j = data.draw(st.integers(0, n - 1))
    y = x.copy()
    y[j] = data.draw(unit)
    a, b = step(x, rv, backend="numpy"), step(y, rv, backend="numpy")
    for i in range(n):
        if m[i, j] == 0:
            assert a[i] == b[i]
