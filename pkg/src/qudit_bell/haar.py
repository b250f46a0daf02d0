"""Haar-distributed unitary matrices."""
from __future__ import annotations

import numpy as np

from .errors import InvalidDimension
from .rng import as_generator


def haar_unitaries(gen: np.random.Generator, shape: tuple[int, ...], d: int) -> np.ndarray:
    """Array of shape `shape + (d, d)` of independent Haar unitaries.

    Complex Ginibre matrix, QR, then each column of Q is multiplied by the
    phase of the matching diagonal entry of R (without this the QR output is
    not Haar distributed). Gaussians are drawn in C order, so the first k
    matrices do not depend on how many follow them.
    """
    if d < 2:
        raise InvalidDimension(f"dimension must be >= 2, got {d}")
    z = gen.standard_normal(tuple(shape) + (d, d, 2))
    z = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return q * phase[..., None, :]


def haar_unitary(d: int, rng) -> np.ndarray:
    """A single d x d Haar unitary from an RngStream, Generator or seed."""
    return haar_unitaries(as_generator(rng), (), d)
