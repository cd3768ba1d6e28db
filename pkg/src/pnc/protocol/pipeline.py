"""Threaded offloading roles for live transports.

Client side runs three roles connected by single-producer single-consumer
queues: encode (image -> latent), entropy-code (latent -> wire image), and
send, which owns the transport and checks for a newly coded image between
blocks. The server pairs a receive role with an inference callback. The
deterministic simulator in pnc.netsim does not use these threads; they exist
for driving a real byte stream end to end.
"""

import queue
import threading

from pnc.codec.image_codec import encode_latent
from pnc.protocol.client import client_send
from pnc.protocol.framing import BLOCK_SIZE
from pnc.protocol.server import read_stream


class PipelinedClient:
    """Encode, entropy-code, and send a sequence of images over a transport."""

    def __init__(self, encoder_fn, tables, transport, block_size: int = BLOCK_SIZE):
        self._encoder_fn = encoder_fn
        self._tables = tables
        self._transport = transport
        self._block_size = block_size
        self._latents = queue.Queue()
        self._coded = queue.Queue()
        self.states = []

    def _encode_role(self, images):
        for image_id, image in enumerate(images):
            self._latents.put((image_id, self._encoder_fn(image)))
        self._latents.put(None)

    def _code_role(self):
        while True:
            item = self._latents.get()
            if item is None:
                self._coded.put(None)
                return
            image_id, latent = item
            self._coded.put(encode_latent(latent, self._tables, image_id))

    def _send_role(self):
        pending = None
        done = False
        while not done or pending is not None:
            if pending is None:
                pending = self._coded.get()
                if pending is None:
                    return

            def next_ready(_block_len):
                return not self._coded.empty()

            self.states.append(client_send(pending, self._transport,
                                           probe=next_ready,
                                           block_size=self._block_size))
            pending = None

    def run(self, images) -> list:
        """Process all images; returns the per-image ClientState list."""
        threads = [
            threading.Thread(target=self._encode_role, args=(images,)),
            threading.Thread(target=self._code_role),
            threading.Thread(target=self._send_role),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        self._transport.close()
        return self.states


class PipelinedServer:
    """Receive role feeding an inference role through a queue."""

    def __init__(self, transport, tables, symbols_per_channel,
                 inference_fn, block_size: int = BLOCK_SIZE):
        self._transport = transport
        self._tables = tables
        self._symbols = symbols_per_channel
        self._inference_fn = inference_fn
        self._block_size = block_size
        self._received = queue.Queue()
        self.results = []

    def _receive_role(self):
        for image in read_stream(self._transport, self._tables, self._symbols,
                                 self._block_size):
            self._received.put(image)
        self._received.put(None)

    def _inference_role(self):
        while True:
            image = self._received.get()
            if image is None:
                return
            self.results.append((image, self._inference_fn(image)))

    def run(self) -> list:
        threads = [
            threading.Thread(target=self._receive_role),
            threading.Thread(target=self._inference_role),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        return self.results
