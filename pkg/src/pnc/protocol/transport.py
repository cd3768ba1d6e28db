"""Byte-stream transports: an in-memory binding for simulation and tests,
and a socket binding for live runs. Both expose write / read / close."""

import threading


class InMemoryTransport:
    """FIFO byte buffer. read() returns what is available (or blocks until
    data arrives when constructed with blocking=True); b"" signals EOF."""

    def __init__(self, blocking: bool = False):
        self._buf = bytearray()
        self._pos = 0
        self._closed = False
        self._cond = threading.Condition()
        self._blocking = blocking

    def write(self, data: bytes) -> None:
        with self._cond:
            if self._closed:
                raise BrokenPipeError("transport is closed")
            self._buf.extend(data)
            self._cond.notify_all()

    def read(self, max_bytes: int) -> bytes:
        with self._cond:
            while True:
                available = len(self._buf) - self._pos
                if available > 0:
                    n = min(available, max_bytes)
                    out = bytes(self._buf[self._pos:self._pos + n])
                    self._pos += n
                    return out
                if self._closed or not self._blocking:
                    return b""
                self._cond.wait()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def getvalue(self) -> bytes:
        """Everything ever written, regardless of the read cursor."""
        with self._cond:
            return bytes(self._buf)


class SocketTransport:
    """Thin adapter over a connected socket object."""

    def __init__(self, sock):
        self._sock = sock

    def write(self, data: bytes) -> None:
        self._sock.sendall(data)

    def read(self, max_bytes: int) -> bytes:
        return self._sock.recv(max_bytes)

    def close(self) -> None:
        self._sock.close()
