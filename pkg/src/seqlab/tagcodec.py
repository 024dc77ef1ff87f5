"""Encoding, decoding and conversion of BIO / IOBES tag sequences.

Tags are ``O`` or ``PREFIX-TYPE`` with a single-hyphen separator; types
may themselves contain hyphens (split on the first hyphen only).
Decoding is total and lenient: a dangling ``I-``/``E-`` tag opens a new
segment, a type change closes the open one, which matches the usual
CoNLL evaluation convention and keeps downstream scoring total.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InvalidInputError


class TagScheme(enum.Enum):
    BIO = "BIO"
    IOBES = "IOBES"

    @property
    def prefixes(self) -> frozenset[str]:
        if self is TagScheme.BIO:
            return frozenset({"B", "I"})
        return frozenset({"B", "I", "E", "S"})


@dataclass(frozen=True, order=True)
class Segment:
    """Typed span of tokens; ``end`` is exclusive."""

    start: int
    end: int
    label: str


def split_tag(tag: str) -> tuple[str, str] | None:
    """Return (prefix, type) for a prefixed tag, None for anything else."""
    if len(tag) >= 3 and tag[1] == "-" and tag[0] in "BIES":
        return tag[0], tag[2:]
    return None


def encode_segments(segments: list[Segment], length: int, scheme: TagScheme) -> list[str]:
    """Encode sorted, non-overlapping segments as per-token tags."""
    tags = ["O"] * length
    prev_end = 0
    for seg in segments:
        if not (0 <= seg.start < seg.end <= length):
            raise InvalidInputError(f"segment {seg} outside [0, {length})")
        if seg.start < prev_end:
            raise InvalidInputError(f"segment {seg} overlaps its predecessor")
        prev_end = seg.end
        if scheme is TagScheme.IOBES and seg.end - seg.start == 1:
            tags[seg.start] = f"S-{seg.label}"
            continue
        tags[seg.start] = f"B-{seg.label}"
        for i in range(seg.start + 1, seg.end):
            tags[i] = f"I-{seg.label}"
        if scheme is TagScheme.IOBES:
            tags[seg.end - 1] = f"E-{seg.label}"
    return tags


def decode_segments(tags: list[str], scheme: TagScheme) -> list[Segment]:
    """Decode tags into segments, repairing malformed sequences.

    Total function: unknown tag strings behave like ``O``. The scheme
    argument documents the caller's intent; the repair rules treat the
    five prefixes uniformly, so malformed output of either scheme (or a
    softmax head mixing both) decodes without error.
    """
    segments: list[Segment] = []
    open_start: int | None = None
    open_label: str | None = None

    def close(end: int) -> None:
        nonlocal open_start, open_label
        if open_start is not None:
            segments.append(Segment(open_start, end, open_label))
        open_start = open_label = None

    for i, tag in enumerate(tags):
        parsed = split_tag(tag)
        if parsed is None:  # "O" or unparseable
            close(i)
            continue
        prefix, label = parsed
        if prefix == "B":
            close(i)
            open_start, open_label = i, label
        elif prefix == "S":
            close(i)
            segments.append(Segment(i, i + 1, label))
        elif prefix == "I":
            if open_label != label:
                close(i)
                open_start, open_label = i, label
        else:  # "E"
            if open_label == label:
                close(i + 1)
            else:
                close(i)
                segments.append(Segment(i, i + 1, label))
    close(len(tags))
    return segments


def convert_scheme(tags: list[str], src: TagScheme, dst: TagScheme) -> list[str]:
    """Re-encode a tag sequence under another scheme (via decode)."""
    return encode_segments(decode_segments(tags, src), len(tags), dst)
