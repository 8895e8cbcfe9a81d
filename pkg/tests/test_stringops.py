"""Kernel parity and properties: the compiled backend must behave exactly
like the pure one."""

import pytest
from hypothesis import given, strategies as st

from paramdoc import stringops
from paramdoc.stringops import _pure

text = st.text(max_size=40)
han = st.text(alphabet=st.characters(min_codepoint=0x4E00, max_codepoint=0x9FFF), max_size=8)


def backends():
    marks = []
    if stringops.BACKEND == "python":
        marks.append(pytest.param(stringops, id="active-python"))
    else:
        marks.append(pytest.param(stringops, id="active-cython"))
    marks.append(pytest.param(_pure, id="pure"))
    return marks


@pytest.mark.parametrize("ops", backends())
class TestKernels:
    def test_levenshtein_basics(self, ops):
        assert ops.levenshtein("", "") == 0
        assert ops.levenshtein("abc", "") == 3
        assert ops.levenshtein("", "abc") == 3
        assert ops.levenshtein("Phone Number", "Phone Numbers") == 1
        assert ops.levenshtein("kitten", "sitting") == 3

    def test_char_classes_table(self, ops):
        assert ops.char_classes("123") == "ddd"
        assert ops.char_classes("SMS_41515455") == "XXX_dddddddd"
        assert ops.char_classes("abcXYZ") == "xxxXXX"
        assert ops.char_classes("中文ok") == "zzxx"
        assert ops.char_classes("a-b c.d") == "x-x x.x"
        assert ops.char_classes("") == ""

    def test_collapse_runs(self, ops):
        assert ops.collapse_runs("ddd") == "d"
        assert ops.collapse_runs("XXX_dddddddd") == "X_d"
        assert ops.collapse_runs("XxXx") == "XxXx"
        assert ops.collapse_runs("--") == "-"
        assert ops.collapse_runs("") == ""
        assert ops.collapse_runs("a") == "a"

    def test_containment_counts(self, ops):
        values = ["SMS_1", "SMS_22", "abc", "xSMS_x"]
        assert ops.count_containing(values, "SMS_") == 3
        assert ops.count_containing(values, "zzz") == 0
        assert ops.count_containing([], "a") == 0
        assert ops.weighted_count_containing(["SMS_1", "abc"], [994, 6], "SMS_") == 994
        assert ops.weighted_count_containing(["SMS_1", "abc"], [994, 6], "") == 1000


@given(a=text, b=text)
def test_levenshtein_parity(a, b):
    assert stringops.levenshtein(a, b) == _pure.levenshtein(a, b)


@given(v=st.one_of(text, han))
def test_char_classes_parity(v):
    assert stringops.char_classes(v) == _pure.char_classes(v)


@given(v=text)
def test_collapse_runs_parity(v):
    assert stringops.collapse_runs(v) == _pure.collapse_runs(v)


@given(values=st.lists(text, max_size=12), needle=text)
def test_count_parity(values, needle):
    assert stringops.count_containing(values, needle) == _pure.count_containing(values, needle)


@given(a=text, b=text, c=text)
def test_levenshtein_metric_properties(a, b, c):
    dab = stringops.levenshtein(a, b)
    assert dab == stringops.levenshtein(b, a)
    assert (dab == 0) == (a == b)
    assert dab <= stringops.levenshtein(a, c) + stringops.levenshtein(c, b)
