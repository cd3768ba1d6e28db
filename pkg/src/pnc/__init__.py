"""Progressive neural compression for deadline-bounded image offloading.

A rateless autoencoder whose bottleneck channels are ordered by importance,
a quantization + per-channel Huffman codec, a block-framed offloading
protocol with preemption, and a trace-driven bandwidth simulator with an
experiment harness.
"""

__version__ = "0.1.0"
