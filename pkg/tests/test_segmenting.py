from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from xlinstruct.errors import BoundaryOutOfRange
from xlinstruct.segmenting import reassemble, segment_pair, segment_text

text_strategy = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=200)


def test_segment_text_splits_on_newline():
    assert segment_text("a\nb\nc") == ["a", "b", "c"]


def test_segment_text_preserves_empty_lines():
    assert segment_text("a\n\nb") == ["a", "", "b"]


def test_segment_text_single_line():
    assert segment_text("single line") == ["single line"]


def test_segment_text_empty_string():
    assert segment_text("") == [""]


def test_segment_pair_concatenates_with_boundary():
    segmented = segment_pair("Fix this:\nHe go.", "He goes.", "s1")
    assert list(segmented.segments) == ["Fix this:", "He go.", "He goes."]
    assert segmented.instruction_segment_count == 2
    assert segmented.source_id == "s1"


def test_segment_pair_empty_strings():
    segmented = segment_pair("", "", "s1")
    assert list(segmented.segments) == ["", ""]
    assert segmented.instruction_segment_count == 1


def test_reassemble_examples():
    assert reassemble(["a", "b", "c"], 2) == ("a\nb", "c")
    assert reassemble(["x"], 0) == ("", "x")


def test_reassemble_boundary_out_of_range():
    with pytest.raises(BoundaryOutOfRange):
        reassemble(["a"], 2)
    with pytest.raises(BoundaryOutOfRange):
        reassemble(["a"], -1)


def test_segment_accessors():
    segmented = segment_pair("a\nb", "c", "s1")
    assert segmented.instruction_segments == ("a", "b")
    assert segmented.response_segments == ("c",)


@given(text=text_strategy)
def test_join_inverts_segment_text(text):
    assert "\n".join(segment_text(text)) == text


@given(instruction=text_strategy, response=text_strategy)
def test_reassemble_inverts_segment_pair(instruction, response):
    segmented = segment_pair(instruction, response, "x")
    assert all("\n" not in s for s in segmented.segments)
    assert reassemble(segmented.segments, segmented.instruction_segment_count) == (
        instruction,
        response,
    )
