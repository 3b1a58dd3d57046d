"""Lossless newline segmentation of (instruction, response) pairs.

Splitting is on the single newline character only; empty lines become empty
segments so that joining the segments with newline reproduces the original
text byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BoundaryOutOfRange


def segment_text(text: str) -> list[str]:
    """Split on the newline character, preserving empty lines."""
    return text.split("\n")


@dataclass(frozen=True)
class SegmentedSample:
    """Ordered segment array plus the instruction/response boundary."""

    segments: tuple[str, ...]
    instruction_segment_count: int
    source_id: str

    @property
    def instruction_segments(self) -> tuple[str, ...]:
        return self.segments[: self.instruction_segment_count]

    @property
    def response_segments(self) -> tuple[str, ...]:
        return self.segments[self.instruction_segment_count :]


def segment_pair(instruction: str, response: str, source_id: str) -> SegmentedSample:
    instruction_part = segment_text(instruction)
    response_part = segment_text(response)
    return SegmentedSample(
        segments=tuple(instruction_part + response_part),
        instruction_segment_count=len(instruction_part),
        source_id=source_id,
    )


def reassemble(segments: list[str] | tuple[str, ...], instruction_segment_count: int) -> tuple[str, str]:
    """Exact inverse of :func:`segment_pair` on its image."""
    if not 0 <= instruction_segment_count <= len(segments):
        raise BoundaryOutOfRange(instruction_segment_count, len(segments))
    instruction = "\n".join(segments[:instruction_segment_count])
    response = "\n".join(segments[instruction_segment_count:])
    return instruction, response
