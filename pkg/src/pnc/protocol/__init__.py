from pnc.protocol.client import ClientState, client_send
from pnc.protocol.framing import (BLOCK_SIZE, STOP_FRAME_SIZE, STOP_MAGIC,
                                  compute_deadline, iter_blocks,
                                  parse_stop_frame, stop_frame, truncate)
from pnc.protocol.pipeline import PipelinedClient, PipelinedServer
from pnc.protocol.server import (ReceivedImage, assemble_latent,
                                 decode_channel_prefix, parse_stream,
                                 read_stream, server_receive)
from pnc.protocol.transport import InMemoryTransport, SocketTransport

__all__ = [
    "BLOCK_SIZE", "ClientState", "InMemoryTransport", "PipelinedClient",
    "PipelinedServer", "ReceivedImage", "STOP_FRAME_SIZE", "STOP_MAGIC",
    "SocketTransport", "assemble_latent", "client_send", "compute_deadline",
    "decode_channel_prefix", "iter_blocks", "parse_stop_frame", "parse_stream",
    "read_stream", "server_receive", "stop_frame", "truncate",
]
