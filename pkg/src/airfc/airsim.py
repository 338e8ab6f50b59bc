"""Over-the-air forward pass and imitation metrics.

The received signal for an input x is

    y = f2 @ (H_eff @ f1 @ x + n) + b,  n ~ CN(0, sigma2 I),

i.e. the bias is added digitally after combining. Complex Gaussian
convention: variance sigma2 per complex entry, split equally between
the real and imaginary parts.
"""
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, effective_channel
from .numerics import frobenius_norm_sq
from .optimizer import AirFcParams


@dataclass
class AirLayer:
    params: AirFcParams
    cs: ChannelSet
    b: np.ndarray
    sigma2: float

    def __post_init__(self):
        n = self.cs.n
        if self.b.shape != (n,):
            raise ValueError(f"bias must have length {n}")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")


def sample_noise(n: int, sigma2: float, rng: np.random.Generator,
                 count: int = 1) -> np.ndarray:
    """CN(0, sigma2 I) samples, shape (n, count)."""
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal((n, count))
                    + 1j * rng.standard_normal((n, count)))


def forward(layer: AirLayer, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One noisy over-the-air evaluation of the imitated FC layer."""
    x = np.asarray(x, dtype=np.complex128)
    n = layer.cs.n
    if x.shape != (n,):
        raise ValueError(f"input must have length {n}")
    h_eff = effective_channel(layer.cs, layer.params.v)
    noise = sample_noise(n, layer.sigma2, rng)[:, 0]
    return layer.params.f2 @ (h_eff @ (layer.params.f1 @ x) + noise) + layer.b


def imitation_error(params: AirFcParams, cs: ChannelSet, w: np.ndarray) -> float:
    """Squared Frobenius distance between the air chain and the target W."""
    return frobenius_norm_sq(params.f2 @ effective_channel(cs, params.v) @ params.f1 - w)


def expected_noise_power(f2: np.ndarray, sigma2: float) -> float:
    """E||f2 n||^2 = sigma2 * tr(f2 f2^H) for n ~ CN(0, sigma2 I)."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    return sigma2 * frobenius_norm_sq(f2)
