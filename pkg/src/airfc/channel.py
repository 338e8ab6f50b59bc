"""Rician multi-RIS channel generation and rank diagnostics.

Each of the L RISs has M/L reflecting elements. Per RIS i the link is
described by a pair (h_bar_i: transmitter -> RIS, shape (M/L, N)) and
(h_hat_i: RIS -> receiver, shape (N, M/L)). The aggregates stack these
as h_hat = [h_hat_1 ... h_hat_L] (N x M) and h_bar = [h_bar_1; ...] (M x N),
so the end-to-end map for a phase vector v is

    H_eff = h_hat @ diag(v) @ h_bar = sum_i h_hat_i @ diag(v_i) @ h_bar_i.

The LoS component of each link is a rank-1 steering outer product for a
half-wavelength-spaced uniform linear array, with departure/arrival
angles drawn uniformly on (-pi/2, pi/2). No path loss is applied; unit
average entry power throughout.
"""
from dataclasses import dataclass, field

import numpy as np

from .numerics import as_complex_matrix, singular_values

UNIT_MODULUS_TOL = 1e-12


@dataclass
class SystemConfig:
    """Physical dimensions and link parameters.

    n: antenna count at both ends = FC layer width.
    m: total reflecting elements across all RISs (divisible by l).
    l: number of RISs.
    k_db: Rician factor in dB; ignored when los_only is set.
    los_only: pure line-of-sight channels (K -> infinity), exact rank-1 links.
    pmax: transmit power budget, linear scale.
    sigma2: receiver noise variance.
    """
    n: int
    m: int
    l: int
    k_db: float = 10.0
    los_only: bool = False
    pmax: float = 10.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.l < 1:
            raise ValueError("n, m, l must be positive")
        if self.m % self.l != 0:
            raise ValueError(f"m={self.m} must be divisible by l={self.l}")
        if self.pmax <= 0:
            raise ValueError("pmax must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")

    @property
    def m_per_ris(self) -> int:
        return self.m // self.l

    @property
    def k_linear(self) -> float:
        return np.inf if self.los_only else 10.0 ** (self.k_db / 10.0)


@dataclass
class ChannelSet:
    """Per-RIS channel pairs plus stacked aggregates."""
    h_bar: list = field(default_factory=list)  # L matrices, each (M/L, N)
    h_hat: list = field(default_factory=list)  # L matrices, each (N, M/L)

    def __post_init__(self):
        if len(self.h_bar) != len(self.h_hat) or not self.h_bar:
            raise ValueError("need equal, nonzero numbers of h_bar/h_hat blocks")
        n = self.h_bar[0].shape[1]
        mi = self.h_bar[0].shape[0]
        for hb, hh in zip(self.h_bar, self.h_hat):
            if hb.shape != (mi, n) or hh.shape != (n, mi):
                raise ValueError("inconsistent per-RIS channel shapes")

    @property
    def num_ris(self) -> int:
        return len(self.h_bar)

    @property
    def n(self) -> int:
        return self.h_bar[0].shape[1]

    @property
    def m(self) -> int:
        return self.h_bar[0].shape[0] * self.num_ris

    @property
    def h_bar_agg(self) -> np.ndarray:
        """Stacked transmitter->RIS channel, shape (M, N)."""
        return np.vstack(self.h_bar)

    @property
    def h_hat_agg(self) -> np.ndarray:
        """Stacked RIS->receiver channel, shape (N, M)."""
        return np.hstack(self.h_hat)


def steering_vector(n: int, angle: float) -> np.ndarray:
    """ULA steering vector, half-wavelength spacing: entry k = exp(j*pi*k*sin(angle))."""
    if n < 1:
        raise ValueError("n must be positive")
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def gen_rician(rows: int, cols: int, k_linear: float,
               rng: np.random.Generator) -> np.ndarray:
    """Draw one Rician channel matrix with unit average entry power.

    G = sqrt(K/(K+1)) * G_los + sqrt(1/(K+1)) * G_nlos, where G_los is the
    rank-1 steering outer product a_r(theta_r) a_t(theta_t)^H with angles
    uniform on (-pi/2, pi/2), and G_nlos has i.i.d. CN(0, 1) entries.
    k_linear = np.inf returns the pure LoS component.
    """
    if k_linear < 0:
        raise ValueError("Rician factor must be nonnegative")
    theta_r = rng.uniform(-np.pi / 2, np.pi / 2)
    theta_t = rng.uniform(-np.pi / 2, np.pi / 2)
    g_los = np.outer(steering_vector(rows, theta_r),
                     np.conj(steering_vector(cols, theta_t)))
    if np.isinf(k_linear):
        return g_los
    g_nlos = (rng.standard_normal((rows, cols))
              + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    return (np.sqrt(k_linear / (k_linear + 1.0)) * g_los
            + np.sqrt(1.0 / (k_linear + 1.0)) * g_nlos)


def gen_channel_set(cfg: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """Independent Rician draws for each of the 2L per-RIS links.

    Draw order is fixed (h_bar_i then h_hat_i, i = 1..L) so a given
    (cfg, seed) always reproduces the same ChannelSet.
    """
    mi = cfg.m_per_ris
    h_bar, h_hat = [], []
    for _ in range(cfg.l):
        h_bar.append(gen_rician(mi, cfg.n, cfg.k_linear, rng))
        h_hat.append(gen_rician(cfg.n, mi, cfg.k_linear, rng))
    return ChannelSet(h_bar=h_bar, h_hat=h_hat)


def random_phase_vector(m: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus vector with i.i.d. uniform phases."""
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=m))


def check_unit_modulus(v: np.ndarray, tol: float = UNIT_MODULUS_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError("phase vector must be 1-D")
    if np.max(np.abs(np.abs(v) - 1.0)) > tol:
        raise ValueError("phase vector entries must have unit modulus")
    return v


def effective_channel(cs: ChannelSet, v: np.ndarray) -> np.ndarray:
    """End-to-end N x N channel h_hat @ diag(v) @ h_bar."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (cs.m,):
        raise ValueError(f"phase vector length {v.shape} does not match M={cs.m}")
    return cs.h_hat_agg @ (v[:, None] * cs.h_bar_agg)


def numerical_rank(a: np.ndarray, rel_tol: float = 1e-8) -> int:
    """Count of singular values >= rel_tol * sigma_max."""
    s = singular_values(as_complex_matrix(a))
    if s[0] == 0.0:
        return 0
    return int(np.sum(s >= rel_tol * s[0]))
