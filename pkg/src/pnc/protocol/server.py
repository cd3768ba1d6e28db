"""Receiver side: stream parsing, stop detection, prefix decode, assembly.

The parser consumes the byte stream in chunks that never cross a position
where a stop frame may legally appear (image start, channel-header starts,
and block boundaries). At each such position it peeks for the stop escape
before consuming further, so truncated and complete images interleave on one
stream without desynchronizing.

Only the longest decodable prefix of channels is kept: a channel counts as
received when its header and full payload arrived and its payload decodes
cleanly; everything after the first failure is discarded and later
zero-filled by assemble_latent.
"""

from dataclasses import dataclass, field

import numpy as np

from pnc.codec.image_codec import (CHANNEL_HEADER_SIZE, IMAGE_HEADER_SIZE,
                                   MAGIC, WIRE_VERSION, ChannelSegment)
from pnc.codec.quantizer import dequantize_channel
from pnc.errors import ConfigError, DecodeError
from pnc.protocol.framing import (BLOCK_SIZE, STOP_FRAME_SIZE,
                                  parse_stop_frame)


@dataclass
class ReceivedImage:
    image_id: int
    raw: bytes
    channels: list = field(default_factory=list)
    complete: bool = False
    stop_seen: bool = False

    @property
    def channels_used(self) -> int:
        return len(self.channels)

    @property
    def bytes_received(self) -> int:
        return len(self.raw)


class _BufferedReader:
    def __init__(self, transport):
        self._transport = transport
        self._buf = bytearray()
        self._eof = False

    def _fill(self, n: int) -> None:
        while len(self._buf) < n and not self._eof:
            chunk = self._transport.read(max(n - len(self._buf), 1024))
            if not chunk:
                self._eof = True
                return
            self._buf.extend(chunk)

    def peek(self, n: int) -> bytes:
        self._fill(n)
        return bytes(self._buf[:n])

    def take(self, n: int) -> bytes:
        self._fill(n)
        out = bytes(self._buf[:n])
        del self._buf[:len(out)]
        return out

    def at_eof(self) -> bool:
        self._fill(1)
        return self._eof and not self._buf


def _scan_structure(raw: bytes):
    """Structural positions known from a wire-image prefix.

    Returns (image_id, unit_starts, next_target, total): the channel-header
    start positions covered so far, the next byte position the parser needs
    to learn more, and the total image size once every header is visible.
    """
    n = len(raw)
    if n < IMAGE_HEADER_SIZE:
        return None, set(), IMAGE_HEADER_SIZE, None
    image_id = int.from_bytes(raw[4:8], "big")
    count = raw[8]
    pos = IMAGE_HEADER_SIZE
    unit_starts = set()
    for _ in range(count):
        unit_starts.add(pos)
        if pos + CHANNEL_HEADER_SIZE > n:
            return image_id, unit_starts, pos + CHANNEL_HEADER_SIZE, None
        bit_length = int.from_bytes(raw[pos + 2:pos + 6], "big")
        pos += CHANNEL_HEADER_SIZE + (bit_length + 7) // 8
        if pos > n:
            return image_id, unit_starts, pos, None
    return image_id, unit_starts, pos, pos


def _read_one_image(reader: _BufferedReader, block_size: int):
    """Pull bytes for one image; returns (raw, image_id, complete, stop_seen)
    or None at clean end of stream. Resynchronizes on malformed headers."""
    # locate an image or orphan stop at the stream head
    while True:
        head = reader.peek(max(STOP_FRAME_SIZE, 4))
        if not head:
            return None
        stop_id = parse_stop_frame(head)
        if stop_id is not None:
            reader.take(STOP_FRAME_SIZE)
            return b"", stop_id, False, True
        if head[:3] == MAGIC and len(head) >= 4 and head[3] == WIRE_VERSION:
            break
        if len(head) < 4:
            reader.take(len(head))  # trailing garbage shorter than any header
            return None
        reader.take(1)  # malformed: resync at the next header magic

    raw = bytearray()
    while True:
        image_id, unit_starts, next_target, total = _scan_structure(bytes(raw))
        pos = len(raw)
        if total is not None and pos >= total:
            return bytes(raw), image_id, True, False
        # stop frames may sit at block boundaries and channel-header starts
        if pos % block_size == 0 or pos in unit_starts:
            probe = reader.peek(STOP_FRAME_SIZE)
            stop_id = parse_stop_frame(probe)
            if stop_id is not None and (image_id is None or stop_id == image_id):
                reader.take(STOP_FRAME_SIZE)
                return bytes(raw), image_id if image_id is not None else stop_id, \
                    False, True
        next_boundary = pos + (block_size - pos % block_size)
        target = min(next_target, next_boundary)
        if total is not None:
            target = min(target, total)
        chunk = reader.take(target - pos)
        raw.extend(chunk)
        if len(chunk) < target - pos:
            # transport ended mid-image with no stop frame
            image_id, _, _, total = _scan_structure(bytes(raw))
            complete = total is not None and len(raw) >= total
            return bytes(raw), image_id, complete, False


def decode_channel_prefix(raw: bytes, tables: dict, symbols_per_channel: int):
    """Longest decodable channel prefix [1..K'] contained in a raw prefix."""
    channels = []
    if len(raw) < IMAGE_HEADER_SIZE or raw[:3] != MAGIC or raw[3] != WIRE_VERSION:
        return channels
    count = raw[8]
    pos = IMAGE_HEADER_SIZE
    for expected_index in range(1, count + 1):
        if pos + CHANNEL_HEADER_SIZE > len(raw):
            break
        index = raw[pos]
        mode = raw[pos + 1]
        bit_length = int.from_bytes(raw[pos + 2:pos + 6], "big")
        payload_len = (bit_length + 7) // 8
        if index != expected_index or pos + CHANNEL_HEADER_SIZE + payload_len > len(raw):
            break
        payload = raw[pos + CHANNEL_HEADER_SIZE:pos + CHANNEL_HEADER_SIZE + payload_len]
        segment = ChannelSegment(index, mode, bit_length, payload)
        table = tables.get(index)
        if table is None:
            break
        try:
            channels.append(segment.decode(table, symbols_per_channel))
        except DecodeError:
            break
        pos += CHANNEL_HEADER_SIZE + payload_len
    return channels


def server_receive(transport, tables: dict, symbols_per_channel: int,
                   block_size: int = BLOCK_SIZE):
    """Receive and decode the next image off the transport; None at EOF."""
    reader = _BufferedReader(transport)
    return _next_image(reader, tables, symbols_per_channel, block_size)


def _next_image(reader, tables, symbols_per_channel, block_size):
    result = _read_one_image(reader, block_size)
    if result is None:
        return None
    raw, image_id, complete, stop_seen = result
    channels = decode_channel_prefix(raw, tables, symbols_per_channel)
    return ReceivedImage(image_id=image_id if image_id is not None else -1,
                         raw=raw, channels=channels, complete=complete,
                         stop_seen=stop_seen)


def read_stream(transport, tables: dict, symbols_per_channel: int,
                block_size: int = BLOCK_SIZE):
    """Yield every image on the stream until EOF."""
    reader = _BufferedReader(transport)
    while True:
        image = _next_image(reader, tables, symbols_per_channel, block_size)
        if image is None:
            return
        yield image


def parse_stream(data: bytes, tables: dict, symbols_per_channel: int,
                 block_size: int = BLOCK_SIZE):
    """Parse a fully captured byte stream into received images."""
    from pnc.protocol.transport import InMemoryTransport
    transport = InMemoryTransport()
    transport.write(data)
    transport.close()
    return list(read_stream(transport, tables, symbols_per_channel, block_size))


def assemble_latent(received: ReceivedImage, num_channels: int, h: int, w: int):
    """Dequantize the received prefix into an (M, h, w) latent, zero tail."""
    if received.channels_used > num_channels:
        raise ConfigError(
            f"received {received.channels_used} channels, model has {num_channels}")
    latent = np.zeros((num_channels, h, w), dtype=np.float64)
    for i, symbols in enumerate(received.channels):
        if symbols.size != h * w:
            raise ConfigError(
                f"channel {i + 1} has {symbols.size} symbols, expected {h * w}")
        latent[i] = dequantize_channel(symbols).reshape(h, w)
    return latent
