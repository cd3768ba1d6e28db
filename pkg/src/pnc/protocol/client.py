"""Sender side: block-by-block transmission with preemption between blocks."""

from dataclasses import dataclass

from pnc.codec.image_codec import EncodedImage, serialize_image
from pnc.protocol.framing import BLOCK_SIZE, iter_blocks, stop_frame


@dataclass
class ClientState:
    image_id: int
    payload_bytes_sent: int = 0
    blocks_sent: int = 0
    truncated: bool = False
    stop_sent: bool = False
    transport_error: str | None = None

    @property
    def complete(self) -> bool:
        return not self.truncated


def client_send(image, transport, probe=None, block_size: int = BLOCK_SIZE) -> ClientState:
    """Send one encoded image in blocks, consulting ``probe`` before each.

    ``probe(next_block_len)`` returning True means the next image's features
    are ready: transmission stops, a single stop frame is appended, and the
    image is recorded as truncated. A transport failure also truncates, at
    the last fully written block, without a stop frame.
    """
    if isinstance(image, EncodedImage):
        data = serialize_image(image)
        image_id = image.image_id
    else:
        raise TypeError(f"expected EncodedImage, got {type(image).__name__}")

    state = ClientState(image_id=image_id)
    for block in iter_blocks(data, block_size):
        if probe is not None and probe(len(block)):
            state.truncated = True
            try:
                transport.write(stop_frame(image_id))
                state.stop_sent = True
            except OSError as exc:
                state.transport_error = str(exc)
            return state
        try:
            transport.write(block)
        except OSError as exc:
            state.truncated = True
            state.transport_error = str(exc)
            return state
        state.payload_bytes_sent += len(block)
        state.blocks_sent += 1
    return state
