"""Quantizer, Huffman coding, and the image wire format."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnc.codec.huffman import (ChannelCodeTable, build_huffman_tables,
                               canonical_codes, huffman_code_lengths,
                               load_tables, save_tables)
from pnc.codec.image_codec import (ChannelSegment, EncodedImage,
                                   deserialize_image, encode_channel,
                                   encode_latent, pack_raw6, serialize_image,
                                   unpack_raw6)
from pnc.codec.quantizer import (MAX_SYMBOL, NUM_LEVELS, dequantize_channel,
                                 quantize_channel)
from pnc.errors import ConfigError, DecodeError, ParseError, \
    QuantizationRangeError


class TestQuantizer:
    def test_zero_maps_to_symbol_zero(self):
        assert quantize_channel(np.array([0.0]))[0] == 0

    def test_one_maps_to_top_symbol(self):
        assert quantize_channel(np.array([1.0]))[0] == 63

    def test_half_rounds_up_to_32(self):
        # round-half-up: round(0.5 * 63) = round(31.5) = 32
        assert quantize_channel(np.array([0.5]))[0] == 32

    def test_out_of_range_rejected(self):
        with pytest.raises(QuantizationRangeError):
            quantize_channel(np.array([1.2]))
        with pytest.raises(QuantizationRangeError):
            quantize_channel(np.array([-0.1]))

    def test_round_trip_identity_over_all_symbols(self):
        symbols = np.arange(NUM_LEVELS, dtype=np.uint8)
        assert np.array_equal(quantize_channel(dequantize_channel(symbols)),
                              symbols)

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1,
                    max_size=64))
    @settings(max_examples=60, deadline=None)
    def test_dequantization_error_bounded(self, values):
        arr = np.array(values)
        restored = dequantize_channel(quantize_channel(arr))
        assert np.max(np.abs(restored - arr)) <= 1.0 / 126.0 + 1e-12


def _exhaustive_optimal_expected_length(probs):
    """Minimal expected length over all prefix-code length assignments."""
    n = len(probs)
    best = np.inf
    for lengths in itertools.product(range(1, n + 1), repeat=n):
        if sum(2.0 ** -l for l in lengths) <= 1.0 + 1e-12:
            best = min(best, sum(p * l for p, l in zip(probs, lengths)))
    return best


class TestHuffmanLengths:
    def test_half_quarter_quarter_gives_1_2_2(self):
        lengths = huffman_code_lengths([0.5, 0.25, 0.25])
        assert sorted(lengths) == [1, 2, 2]
        assert lengths[0] == 1
        # exhaustive oracle agrees this is optimal
        expected = sum(p * l for p, l in zip([0.5, 0.25, 0.25], lengths))
        assert expected == pytest.approx(
            _exhaustive_optimal_expected_length([0.5, 0.25, 0.25]))

    def test_uniform_64_symbols_all_length_6(self):
        lengths = huffman_code_lengths([1] * 64)
        assert lengths == [6] * 64

    def test_matches_exhaustive_search_up_to_4_symbols(self):
        rng = np.random.default_rng(99)
        for n in (2, 3, 4):
            for _ in range(40):
                probs = rng.random(n) + 1e-3
                probs /= probs.sum()
                lengths = huffman_code_lengths(probs.tolist())
                got = sum(p * l for p, l in zip(probs, lengths))
                best = _exhaustive_optimal_expected_length(probs.tolist())
                assert got == pytest.approx(best, abs=1e-12)

    @given(st.lists(st.integers(min_value=1, max_value=10_000), min_size=2,
                    max_size=64))
    @settings(max_examples=60, deadline=None)
    def test_expected_length_at_least_entropy_and_kraft_holds(self, counts):
        total = sum(counts)
        probs = [c / total for c in counts]
        lengths = huffman_code_lengths(counts)
        kraft = sum(2.0 ** -l for l in lengths)
        assert kraft <= 1.0 + 1e-12
        entropy = -sum(p * np.log2(p) for p in probs)
        expected = sum(p * l for p, l in zip(probs, lengths))
        assert expected >= entropy - 1e-9

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ConfigError):
            huffman_code_lengths([1, 0, 2])


class TestCanonicalCodes:
    def test_codes_are_prefix_free(self):
        lengths = huffman_code_lengths([50, 20, 15, 10, 5])
        codes = canonical_codes(lengths)
        bits = [format(code, f"0{length}b") for code, length in codes]
        for a, b in itertools.permutations(bits, 2):
            assert not b.startswith(a)

    def test_assignment_ordered_by_length_then_symbol(self):
        codes = canonical_codes([2, 1, 2])
        assert codes[1] == (0, 1)          # shortest code to symbol 1
        assert codes[0] == (0b10, 2)       # then ties by symbol value
        assert codes[2] == (0b11, 2)


def _table_from_counts(counts, channel=1):
    return ChannelCodeTable(channel, huffman_code_lengths(counts))


class TestChannelCoding:
    def test_round_trip_random_symbols(self):
        rng = np.random.default_rng(5)
        counts = rng.integers(1, 500, NUM_LEVELS).tolist()
        table = _table_from_counts(counts)
        symbols = rng.integers(0, NUM_LEVELS, 64).astype(np.uint8)
        payload, bits = table.encode_bits(symbols)
        assert np.array_equal(table.decode_bits(payload, bits, 64), symbols)

    def test_all_same_symbol_payload_size(self):
        table = _table_from_counts([1] * NUM_LEVELS)   # all codes length 6
        symbols = np.full(64, 17, dtype=np.uint8)
        payload, bits = table.encode_bits(symbols)
        assert bits == 6 * 64
        assert len(payload) == (bits + 7) // 8

    def test_truncated_payload_raises_decode_error(self):
        rng = np.random.default_rng(6)
        table = _table_from_counts(rng.integers(1, 99, NUM_LEVELS).tolist())
        symbols = rng.integers(0, NUM_LEVELS, 32).astype(np.uint8)
        payload, bits = table.encode_bits(symbols)
        with pytest.raises(DecodeError):
            table.decode_bits(payload[:-1], bits, 32)

    def test_zero_bits_with_expected_symbols_raises(self):
        table = _table_from_counts([1] * NUM_LEVELS)
        with pytest.raises(DecodeError):
            table.decode_bits(b"", 0, 4)

    def test_bit_count_not_covering_whole_codewords_raises(self):
        table = _table_from_counts([1] * NUM_LEVELS)
        symbols = np.array([1, 2, 3], dtype=np.uint8)
        payload, bits = table.encode_bits(symbols)
        with pytest.raises(DecodeError):
            table.decode_bits(payload, bits - 2, 3)

    @given(st.lists(st.integers(0, MAX_SYMBOL), min_size=1, max_size=200),
           st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, symbols, seed):
        rng = np.random.default_rng(seed)
        table = _table_from_counts(rng.integers(1, 1000, NUM_LEVELS).tolist())
        arr = np.array(symbols, dtype=np.uint8)
        payload, bits = table.encode_bits(arr)
        assert np.array_equal(table.decode_bits(payload, bits, len(arr)), arr)


class TestRaw6:
    def test_exactly_three_quarters_of_byte_packing(self):
        symbols = np.arange(64, dtype=np.uint8)
        payload, bits = pack_raw6(symbols)
        assert bits == 6 * 64
        assert len(payload) == 48          # vs 64 bytes at 8 bits per symbol
        assert len(payload) / 64 == 0.75

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        symbols = rng.integers(0, NUM_LEVELS, 100).astype(np.uint8)
        payload, bits = pack_raw6(symbols)
        assert np.array_equal(unpack_raw6(payload, bits, 100), symbols)

    def test_bit_length_mismatch_raises(self):
        with pytest.raises(DecodeError):
            unpack_raw6(b"\x00\x00", 12, 3)


class TestModeFallback:
    def test_raw_mode_chosen_when_table_mismatches_data(self):
        # table trained on symbol 0 only: rare symbols get very long codes
        counts = [100_000] + [1] * (NUM_LEVELS - 1)
        table = _table_from_counts(counts)
        rng = np.random.default_rng(8)
        symbols = rng.integers(32, NUM_LEVELS, 64).astype(np.uint8)
        segment = encode_channel(symbols, table)
        assert segment.mode == 1
        assert segment.bit_length == 6 * 64
        assert np.array_equal(segment.decode(table, 64), symbols)

    def test_huffman_mode_chosen_when_table_fits(self):
        counts = [100_000] + [1] * (NUM_LEVELS - 1)
        table = _table_from_counts(counts)
        symbols = np.zeros(64, dtype=np.uint8)
        segment = encode_channel(symbols, table)
        assert segment.mode == 0
        assert segment.bit_length < 6 * 64


class TestWireFormat:
    def _image(self, rng, channels=3, image_id=4242):
        tables = {}
        segments = []
        for ch in range(1, channels + 1):
            counts = rng.integers(1, 300, NUM_LEVELS).tolist()
            tables[ch] = _table_from_counts(counts, channel=ch)
            symbols = rng.integers(0, NUM_LEVELS, 16).astype(np.uint8)
            segments.append(encode_channel(symbols, tables[ch]))
        return EncodedImage(image_id, segments), tables

    def test_serialize_round_trip(self):
        image, _ = self._image(np.random.default_rng(9))
        data = serialize_image(image)
        assert len(data) == image.total_size
        back = deserialize_image(data)
        assert back.image_id == image.image_id
        assert back.channels == image.channels

    def test_header_only_image_round_trips(self):
        image = EncodedImage(7, [])
        back = deserialize_image(serialize_image(image))
        assert back.image_id == 7
        assert back.channels == []

    def test_corrupt_magic_raises_parse_error(self):
        image, _ = self._image(np.random.default_rng(10))
        data = bytearray(serialize_image(image))
        data[0] = 0x51
        with pytest.raises(ParseError):
            deserialize_image(bytes(data))

    def test_truncated_payload_raises_parse_error(self):
        image, _ = self._image(np.random.default_rng(11))
        data = serialize_image(image)
        with pytest.raises(ParseError):
            deserialize_image(data[:-3])

    def test_trailing_garbage_raises_parse_error(self):
        image, _ = self._image(np.random.default_rng(12))
        with pytest.raises(ParseError):
            deserialize_image(serialize_image(image) + b"x")

    def test_non_ascending_channels_raise(self):
        image, _ = self._image(np.random.default_rng(13), channels=2)
        swapped = EncodedImage(1, [image.channels[1], image.channels[0]])
        with pytest.raises(ParseError):
            deserialize_image(serialize_image(swapped))

    def test_encode_latent_orders_channels_by_importance(self):
        rng = np.random.default_rng(14)
        latent = rng.random((4, 3, 3))
        tables = {ch: _table_from_counts(rng.integers(1, 50, NUM_LEVELS).tolist(),
                                         channel=ch) for ch in range(1, 5)}
        image = encode_latent(latent, tables, image_id=1)
        assert [seg.channel_index for seg in image.channels] == [1, 2, 3, 4]


class TestTables:
    def test_build_requires_nonempty_corpus(self):
        with pytest.raises(ConfigError):
            build_huffman_tables({})

    def test_smoothing_keeps_unseen_symbols_encodable(self):
        corpus = {1: [np.zeros(100, dtype=np.uint8)]}   # only symbol 0 seen
        tables = build_huffman_tables(corpus)
        symbols = np.array([63], dtype=np.uint8)
        payload, bits = tables[1].encode_bits(symbols)
        assert np.array_equal(tables[1].decode_bits(payload, bits, 1), symbols)

    def test_table_file_round_trip(self, tmp_path):
        rng = np.random.default_rng(15)
        corpus = {ch: [rng.integers(0, NUM_LEVELS, 200).astype(np.uint8)]
                  for ch in (1, 2, 3)}
        tables = build_huffman_tables(corpus)
        path = tmp_path / "tables.json"
        save_tables(path, tables)
        loaded = load_tables(path)
        assert set(loaded) == {1, 2, 3}
        for ch in loaded:
            assert loaded[ch].lengths == tables[ch].lengths
            assert loaded[ch].codes == tables[ch].codes

    def test_expected_length_definition(self):
        table = _table_from_counts([1] * NUM_LEVELS)
        probs = np.full(NUM_LEVELS, 1.0 / NUM_LEVELS)
        assert table.expected_length(probs) == pytest.approx(6.0)
