"""Per-image encoding: quantized channels entropy-coded into a wire image.

Wire layout (big-endian, bit-exact):

    magic   3 bytes  0x50 0x4E 0x43 ("PNC")
    version 1 byte   currently 1
    image_id 4 bytes uint32
    channel_count 1 byte
    then per channel, in ascending (importance) order:
        channel_index 1 byte   1..254 (255 reserved for the stop escape)
        mode          1 byte   0 = huffman, 1 = raw 6-bit packing
        bit_length    4 bytes  uint32, payload bits before padding
        payload       ceil(bit_length / 8) bytes, MSB-first, zero padded

Each channel is stored with whichever of the trained Huffman code or plain
6-bit packing is smaller, so a pathological channel never expands past its
fixed-rate size.
"""

from dataclasses import dataclass, field

import numpy as np

from pnc.codec.huffman import ChannelCodeTable
from pnc.codec.quantizer import MAX_SYMBOL, quantize_channel
from pnc.errors import ConfigError, DecodeError, ParseError

MAGIC = b"PNC"
WIRE_VERSION = 1
MODE_HUFFMAN = 0
MODE_RAW6 = 1
IMAGE_HEADER_SIZE = 9
CHANNEL_HEADER_SIZE = 6
MAX_CHANNEL_INDEX = 254


def pack_raw6(symbols) -> tuple:
    """Fixed 6-bit packing, MSB-first: exactly 75% of one byte per symbol."""
    acc = 0
    for s in symbols:
        acc = (acc << 6) | int(s)
    nbits = 6 * len(symbols)
    pad = (-nbits) % 8
    acc <<= pad
    return acc.to_bytes((nbits + pad) // 8, "big"), nbits


def unpack_raw6(payload: bytes, bit_length: int, count: int) -> np.ndarray:
    if bit_length != 6 * count:
        raise DecodeError(f"raw6 bit length {bit_length} != 6 * {count}")
    if bit_length > len(payload) * 8:
        raise DecodeError("payload shorter than declared bit length")
    stream = int.from_bytes(payload, "big")
    total_bits = len(payload) * 8
    out = np.empty(count, dtype=np.uint8)
    for i in range(count):
        shift = total_bits - 6 * (i + 1)
        out[i] = (stream >> shift) & MAX_SYMBOL
    return out


@dataclass(frozen=True)
class ChannelSegment:
    channel_index: int
    mode: int
    bit_length: int
    payload: bytes

    @property
    def wire_size(self) -> int:
        return CHANNEL_HEADER_SIZE + len(self.payload)

    def decode(self, table: ChannelCodeTable, count: int) -> np.ndarray:
        if self.mode == MODE_HUFFMAN:
            return table.decode_bits(self.payload, self.bit_length, count)
        if self.mode == MODE_RAW6:
            return unpack_raw6(self.payload, self.bit_length, count)
        raise DecodeError(f"unknown channel mode {self.mode}")


@dataclass(frozen=True)
class EncodedImage:
    image_id: int
    channels: list = field(default_factory=list)

    @property
    def total_size(self) -> int:
        return IMAGE_HEADER_SIZE + sum(c.wire_size for c in self.channels)


def encode_channel(symbols: np.ndarray, table: ChannelCodeTable) -> ChannelSegment:
    """Entropy-code one channel, falling back to raw 6-bit when smaller."""
    symbols = np.asarray(symbols).reshape(-1)
    if symbols.size == 0:
        raise ConfigError("channel must contain at least one symbol")
    huff_payload, huff_bits = table.encode_bits(symbols)
    raw_bits = 6 * symbols.size
    if huff_bits <= raw_bits:
        return ChannelSegment(table.channel_index, MODE_HUFFMAN, huff_bits,
                              huff_payload)
    raw_payload, raw_bits = pack_raw6(symbols)
    return ChannelSegment(table.channel_index, MODE_RAW6, raw_bits, raw_payload)


def encode_latent(latent: np.ndarray, tables: dict, image_id: int) -> EncodedImage:
    """Quantize and encode an (M, h, w) latent, channels in importance order."""
    if latent.ndim != 3:
        raise ConfigError(f"latent must be (channels, h, w), got {latent.shape}")
    segments = []
    for ch in range(latent.shape[0]):
        index = ch + 1
        if index > MAX_CHANNEL_INDEX:
            raise ConfigError(f"channel index {index} exceeds {MAX_CHANNEL_INDEX}")
        if index not in tables:
            raise ConfigError(f"no entropy table for channel {index}")
        symbols = quantize_channel(latent[ch].reshape(-1))
        segments.append(encode_channel(symbols, tables[index]))
    return EncodedImage(image_id, segments)


def serialize_image(image: EncodedImage) -> bytes:
    if len(image.channels) > 255:
        raise ConfigError("too many channels for one wire image")
    parts = [MAGIC, bytes([WIRE_VERSION]),
             int(image.image_id).to_bytes(4, "big"),
             bytes([len(image.channels)])]
    for seg in image.channels:
        if not 1 <= seg.channel_index <= MAX_CHANNEL_INDEX:
            raise ConfigError(f"channel index {seg.channel_index} out of range")
        parts.append(bytes([seg.channel_index, seg.mode]))
        parts.append(seg.bit_length.to_bytes(4, "big"))
        parts.append(seg.payload)
    return b"".join(parts)


def deserialize_image(data: bytes) -> EncodedImage:
    """Parse one complete wire image; raises ParseError on any malformation."""
    if len(data) < IMAGE_HEADER_SIZE:
        raise ParseError("data shorter than image header")
    if data[:3] != MAGIC:
        raise ParseError(f"bad magic {data[:3]!r}")
    if data[3] != WIRE_VERSION:
        raise ParseError(f"unsupported wire version {data[3]}")
    image_id = int.from_bytes(data[4:8], "big")
    channel_count = data[8]
    pos = IMAGE_HEADER_SIZE
    segments = []
    prev_index = 0
    for _ in range(channel_count):
        if pos + CHANNEL_HEADER_SIZE > len(data):
            raise ParseError("truncated channel header")
        index = data[pos]
        mode = data[pos + 1]
        bit_length = int.from_bytes(data[pos + 2:pos + 6], "big")
        pos += CHANNEL_HEADER_SIZE
        nbytes = (bit_length + 7) // 8
        if pos + nbytes > len(data):
            raise ParseError("truncated channel payload")
        if index <= prev_index or index > MAX_CHANNEL_INDEX:
            raise ParseError(f"channel indices not ascending at {index}")
        prev_index = index
        segments.append(ChannelSegment(index, mode, bit_length,
                                       data[pos:pos + nbytes]))
        pos += nbytes
    if pos != len(data):
        raise ParseError(f"{len(data) - pos} trailing bytes after image")
    return EncodedImage(image_id, segments)
