"""JSON codec for complex vectors and matrices: each entry is an [re, im] pair."""

from __future__ import annotations

import numpy as np

from .errors import ParseError


def encode_complex(values, decimals: int | None = None) -> list:
    """Encode a complex scalar/vector/matrix as nested lists of [re, im]."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 0:
        re, im = float(arr.real), float(arr.imag)
        if decimals is not None:
            re, im = round(re, decimals), round(im, decimals)
        return [re, im]
    return [encode_complex(v, decimals) for v in arr]


def decode_complex(data) -> np.ndarray:
    """Inverse of ``encode_complex``. Raises ParseError on malformed input."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ParseError(f"Not a numeric [re, im] array: {e}") from e
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise ParseError(f"Expected trailing [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def round_probs(probs, decimals: int = 6) -> list[float]:
    return [round(float(p), decimals) for p in probs]
