from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqlab.errors import InvalidInputError
from seqlab.tagcodec import Segment, TagScheme, convert_scheme, decode_segments, encode_segments

LABELS = ["PER", "LOC", "ORG", "X-Y"]  # last one has a hyphen in the type


def segments_strategy(max_len=12):
    @st.composite
    def build(draw):
        length = draw(st.integers(min_value=0, max_value=max_len))
        segs = []
        pos = 0
        while pos < length:
            start = draw(st.integers(min_value=pos, max_value=length))
            if start >= length:
                break
            end = draw(st.integers(min_value=start + 1, max_value=length))
            segs.append(Segment(start, end, draw(st.sampled_from(LABELS))))
            pos = end
        return segs, length

    return build()


class TestEncode:
    def test_bio_basic(self):
        assert encode_segments([Segment(0, 2, "PER")], 3, TagScheme.BIO) == ["B-PER", "I-PER", "O"]

    def test_iobes_basic(self):
        assert encode_segments([Segment(0, 2, "PER")], 3, TagScheme.IOBES) == ["B-PER", "E-PER", "O"]

    def test_iobes_singleton(self):
        assert encode_segments([Segment(1, 2, "LOC")], 2, TagScheme.IOBES) == ["O", "S-LOC"]

    def test_overlap_rejected(self):
        with pytest.raises(InvalidInputError):
            encode_segments([Segment(0, 2, "A"), Segment(1, 3, "B")], 4, TagScheme.BIO)

    def test_end_beyond_length_rejected(self):
        with pytest.raises(InvalidInputError):
            encode_segments([Segment(0, 5, "A")], 3, TagScheme.BIO)


class TestDecode:
    def test_wellformed_bio(self):
        assert decode_segments(["B-PER", "I-PER", "O"], TagScheme.BIO) == [Segment(0, 2, "PER")]

    def test_dangling_i_opens_segment(self):
        assert decode_segments(["I-LOC", "I-LOC", "O"], TagScheme.BIO) == [Segment(0, 2, "LOC")]

    def test_type_change_closes(self):
        assert decode_segments(["B-PER", "I-LOC"], TagScheme.BIO) == [
            Segment(0, 1, "PER"),
            Segment(1, 2, "LOC"),
        ]

    def test_dangling_e_is_singleton(self):
        assert decode_segments(["O", "E-PER"], TagScheme.IOBES) == [Segment(1, 2, "PER")]

    def test_open_at_end_closes(self):
        assert decode_segments(["B-ORG", "I-ORG"], TagScheme.IOBES) == [Segment(0, 2, "ORG")]

    def test_hyphenated_type(self):
        assert decode_segments(["B-X-Y", "I-X-Y"], TagScheme.BIO) == [Segment(0, 2, "X-Y")]


class TestConvert:
    def test_bio_to_iobes(self):
        assert convert_scheme(["B-PER", "I-PER", "O"], TagScheme.BIO, TagScheme.IOBES) == [
            "B-PER",
            "E-PER",
            "O",
        ]

    def test_all_o_identity(self):
        assert convert_scheme(["O", "O"], TagScheme.BIO, TagScheme.IOBES) == ["O", "O"]

    def test_singleton_to_s(self):
        assert convert_scheme(["B-LOC"], TagScheme.BIO, TagScheme.IOBES) == ["S-LOC"]


@given(segments_strategy())
@settings(max_examples=300)
def test_round_trip_both_schemes(case):
    segs, length = case
    for scheme in TagScheme:
        assert decode_segments(encode_segments(segs, length, scheme), scheme) == segs


ALPHABET = ["O", "B-PER", "I-PER", "E-PER", "S-PER", "B-LOC", "I-LOC", "E-LOC", "S-LOC", "junk", "B", ""]


@given(st.lists(st.sampled_from(ALPHABET), max_size=15), st.sampled_from(list(TagScheme)))
@settings(max_examples=300)
def test_decode_total_and_invariants(tags, scheme):
    segs = decode_segments(tags, scheme)
    prev_end = 0
    for s in segs:
        assert 0 <= s.start < s.end <= len(tags)
        assert s.start >= prev_end
        prev_end = s.end


@given(st.lists(st.sampled_from(ALPHABET), max_size=15))
@settings(max_examples=300)
def test_conversion_idempotence(tags):
    """convert(convert(t, A, B), B, A) equals the canonical repair of t."""
    canonical = encode_segments(decode_segments(tags, TagScheme.BIO), len(tags), TagScheme.BIO)
    there = convert_scheme(tags, TagScheme.BIO, TagScheme.IOBES)
    back = convert_scheme(there, TagScheme.IOBES, TagScheme.BIO)
    assert back == canonical
