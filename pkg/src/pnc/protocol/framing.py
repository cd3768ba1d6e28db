"""Byte-budget truncation, deadlines, block framing, and the stop escape.

A transmission is a serialized wire image cut into blocks of at most
BLOCK_SIZE bytes; only an image's final block may be short. When a
transmission is preempted, the sender appends a 9-byte stop frame:

    0xFF  'S' 'T' 'O' 'P'  image_id (uint32 BE)

0xFF can never open an image header (magic starts 0x50) or a channel header
(index 255 is reserved), so the receiver can test for the escape at image
start and at channel-header starts exactly, and at block boundaries inside a
payload with negligible ambiguity (a payload would have to reproduce all
nine escape bytes at a block boundary to collide).
"""

BLOCK_SIZE = 64
STOP_MAGIC = bytes([0xFF]) + b"STOP"
STOP_FRAME_SIZE = len(STOP_MAGIC) + 4


def truncate(data: bytes, budget: int) -> bytes:
    """First min(len(data), budget) bytes; the identity when data fits."""
    if budget < 0:
        raise ValueError(f"byte budget must be >= 0, got {budget}")
    if len(data) <= budget:
        return data
    return data[:budget]


def compute_deadline(t_capture: float, period: float,
                     next_encode_latency: float) -> float:
    """Instant the next image's features are ready, ending this transmission."""
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")
    return t_capture + period + next_encode_latency


def stop_frame(image_id: int) -> bytes:
    return STOP_MAGIC + int(image_id).to_bytes(4, "big")


def parse_stop_frame(data: bytes):
    """Return the stopped image id if data begins with a stop frame, else None."""
    if len(data) >= STOP_FRAME_SIZE and data[:5] == STOP_MAGIC:
        return int.from_bytes(data[5:9], "big")
    return None


def iter_blocks(data: bytes, block_size: int = BLOCK_SIZE):
    """Split data into blocks of block_size; only the last may be shorter."""
    if block_size < 1:
        raise ValueError(f"block size must be >= 1, got {block_size}")
    for i in range(0, len(data), block_size):
        yield data[i:i + block_size]
