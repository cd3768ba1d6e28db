"""Canonical Huffman coding, one static table per bottleneck channel.

Tables are built from add-one-smoothed symbol counts so every symbol stays
encodable, converted to canonical form (codes assigned in (length, symbol)
order), and serialized as just the 64 code lengths per channel.
"""

import heapq
import json

import numpy as np

from pnc.errors import ConfigError, DecodeError
from pnc.codec.quantizer import NUM_LEVELS


def huffman_code_lengths(weights) -> list:
    """Optimal prefix-code lengths for positive weights.

    Ties are broken by insertion order (leaves first, in symbol order), which
    makes the lengths deterministic. A single-symbol alphabet gets length 1.
    """
    weights = list(weights)
    if any(w <= 0 for w in weights):
        raise ConfigError("all weights must be positive")
    n = len(weights)
    if n == 0:
        raise ConfigError("empty alphabet")
    if n == 1:
        return [1]
    heap = [(w, i, i) for i, w in enumerate(weights)]
    heapq.heapify(heap)
    parent = {}
    next_id = n
    while len(heap) > 1:
        w1, _, a = heapq.heappop(heap)
        w2, _, b = heapq.heappop(heap)
        parent[a] = next_id
        parent[b] = next_id
        heapq.heappush(heap, (w1 + w2, next_id, next_id))
        next_id += 1
    lengths = []
    for i in range(n):
        depth = 0
        node = i
        while node in parent:
            node = parent[node]
            depth += 1
        lengths.append(depth)
    return lengths


def canonical_codes(lengths) -> list:
    """Assign canonical codewords (as ints) from code lengths.

    Symbols are ordered by (length, symbol value); codes of each length are
    consecutive. Returns [(code, length)] indexed by symbol; length 0 marks a
    symbol with no codeword.
    """
    order = sorted((l, s) for s, l in enumerate(lengths) if l > 0)
    codes = [(0, 0)] * len(lengths)
    code = 0
    prev_len = 0
    for length, symbol in order:
        code <<= (length - prev_len)
        codes[symbol] = (code, length)
        code += 1
        prev_len = length
    return codes


class ChannelCodeTable:
    """Encode/decode state for one channel's canonical code."""

    def __init__(self, channel_index: int, lengths):
        if len(lengths) != NUM_LEVELS:
            raise ConfigError(f"expected {NUM_LEVELS} code lengths")
        if any(l < 1 for l in lengths):
            raise ConfigError("every symbol needs a codeword")
        kraft = sum(2.0 ** -l for l in lengths)
        if kraft > 1.0 + 1e-12:
            raise ConfigError(f"Kraft sum {kraft} exceeds 1")
        self.channel_index = channel_index
        self.lengths = list(lengths)
        self.codes = canonical_codes(self.lengths)
        # canonical decode tables: first code value and symbol list per length
        self.max_length = max(self.lengths)
        by_length = {}
        for length, symbol in sorted((l, s) for s, l in enumerate(self.lengths)):
            by_length.setdefault(length, []).append(symbol)
        self._first_code = {}
        self._symbols_at = by_length
        code = 0
        prev_len = 0
        for length in sorted(by_length):
            code <<= (length - prev_len)
            self._first_code[length] = code
            code += len(by_length[length])
            prev_len = length

    def expected_length(self, probs) -> float:
        return float(sum(p * l for p, l in zip(probs, self.lengths)))

    def encode_bits(self, symbols):
        """Pack symbols into (payload bytes, bit count), MSB-first."""
        acc = 0
        nbits = 0
        codes = self.codes
        for s in symbols:
            code, length = codes[s]
            acc = (acc << length) | code
            nbits += length
        pad = (-nbits) % 8
        acc <<= pad
        return acc.to_bytes((nbits + pad) // 8, "big"), nbits

    def decode_bits(self, payload: bytes, bit_length: int, count: int):
        """Recover exactly ``count`` symbols from ``bit_length`` bits.

        Raises DecodeError if the payload is too short, a codeword is cut
        mid-stream, or the bit count does not line up with whole codewords.
        """
        if bit_length > len(payload) * 8:
            raise DecodeError("payload shorter than declared bit length")
        stream = int.from_bytes(payload, "big")
        total_bits = len(payload) * 8
        out = np.empty(count, dtype=np.uint8)
        pos = 0
        first_code = self._first_code
        symbols_at = self._symbols_at
        for i in range(count):
            code = 0
            length = 0
            while True:
                if pos >= bit_length:
                    raise DecodeError("bitstream ended mid-codeword")
                code = (code << 1) | ((stream >> (total_bits - 1 - pos)) & 1)
                pos += 1
                length += 1
                if length in first_code:
                    offset = code - first_code[length]
                    if 0 <= offset < len(symbols_at[length]):
                        out[i] = symbols_at[length][offset]
                        break
                if length > self.max_length:
                    raise DecodeError("invalid codeword")
        if pos != bit_length:
            raise DecodeError(
                f"decoded {count} symbols in {pos} bits, declared {bit_length}")
        return out


def build_huffman_tables(corpus_by_channel: dict) -> dict:
    """Train one table per channel from arrays of quantized symbols.

    corpus_by_channel maps 1-based channel index to an iterable of symbol
    arrays. Counts get add-one smoothing so unseen symbols remain encodable.
    """
    if not corpus_by_channel:
        raise ConfigError("empty corpus")
    tables = {}
    for channel, arrays in sorted(corpus_by_channel.items()):
        counts = np.ones(NUM_LEVELS, dtype=np.int64)
        seen = 0
        for arr in arrays:
            counts += np.bincount(np.asarray(arr).reshape(-1), minlength=NUM_LEVELS)
            seen += 1
        if seen == 0:
            raise ConfigError(f"channel {channel} has no corpus samples")
        lengths = huffman_code_lengths(counts.tolist())
        tables[channel] = ChannelCodeTable(channel, lengths)
    return tables


TABLE_FORMAT = "pnc-huffman-tables"
TABLE_VERSION = 1


def save_tables(path, tables: dict) -> None:
    doc = {
        "format": TABLE_FORMAT,
        "version": TABLE_VERSION,
        "symbols": NUM_LEVELS,
        "channels": {str(ch): t.lengths for ch, t in sorted(tables.items())},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_tables(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != TABLE_FORMAT or doc.get("version") != TABLE_VERSION:
        raise ConfigError(f"not a {TABLE_FORMAT} v{TABLE_VERSION} file: {path}")
    return {int(ch): ChannelCodeTable(int(ch), lengths)
            for ch, lengths in doc["channels"].items()}
