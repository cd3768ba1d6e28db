"""Feature quantization: 64 evenly spaced levels over [0, 1].

Symbols are round(value * 63) with round-half-up, so dequantization error is
at most 1/126 per element and quantize(dequantize(s)) == s exactly.
"""

import numpy as np

from pnc.errors import QuantizationRangeError

NUM_LEVELS = 64
MAX_SYMBOL = NUM_LEVELS - 1


def quantize_channel(values: np.ndarray) -> np.ndarray:
    """Map real values in [0, 1] to symbols 0..63 (round-half-up)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise QuantizationRangeError(
            f"values outside [0, 1]: min={values.min()}, max={values.max()}")
    return np.floor(values * MAX_SYMBOL + 0.5).astype(np.uint8)


def dequantize_channel(symbols: np.ndarray) -> np.ndarray:
    """Map symbols 0..63 back to the grid points k/63."""
    symbols = np.asarray(symbols)
    if symbols.size and symbols.max() > MAX_SYMBOL:
        raise QuantizationRangeError(f"symbol {symbols.max()} exceeds {MAX_SYMBOL}")
    return symbols.astype(np.float64) / MAX_SYMBOL
