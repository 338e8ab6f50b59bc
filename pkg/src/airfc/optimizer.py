"""Alternating optimization of precoder, combiner, and RIS phases.

Minimizes

    ||F2 @ H_eff(v) @ F1 - W||_F^2 + sigma2 * tr(F2 F2^H)
    s.t. ||F1||_F^2 <= pmax,  |v_m| = 1,

by cycling exact block updates: the precoder via Lagrange duality with
bisection on the dual variable, the combiner via a closed-form ridge
solve, and the phase vector via a majorize-minimize step under the
unit-modulus constraint. Each block update can only decrease the
objective, so the reported trace is non-increasing.
"""
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, SystemConfig, check_unit_modulus, \
    effective_channel, random_phase_vector
from .numerics import frobenius_norm_sq, hermitian_eig, solve_shifted_hermitian


@dataclass
class AirFcParams:
    """Over-the-air trainables: precoder f1, combiner f2, phase vector v."""
    f1: np.ndarray
    f2: np.ndarray
    v: np.ndarray


@dataclass
class OptimizerOptions:
    max_iters: int = 200
    tol: float = 1e-5
    eps_bisect: float = 1e-8
    inner_iters: int = 1
    seed: int = 0
    # "eig" uses the exact largest eigenvalue of the phase quadratic;
    # "trace" uses tr(Omega), a cheaper valid upper bound.
    lam_max_mode: str = "eig"


@dataclass
class OptimizeReport:
    objective_trace: np.ndarray
    imitation_error: float
    noise_term: float
    lam: float
    iterations: int
    converged: bool


@dataclass
class PrecoderWorkspace:
    """Eigen-form quantities for the power-constrained precoder subproblem.

    upsilon = f2 @ h_hat @ diag(v) @ h_bar; eigvals/eigvecs decompose
    upsilon^H upsilon; d_i are the diagonal entries of
    U^H upsilon^H W W^H upsilon U; lam_up bounds the dual bisection.
    """
    upsilon: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    d: np.ndarray
    proj: np.ndarray  # U^H upsilon^H W
    lam_up: float


def objective(params: AirFcParams, cs: ChannelSet, w: np.ndarray,
              sigma2: float) -> float:
    """Imitation error plus expected combined-noise power, in closed form."""
    h_eff = effective_channel(cs, params.v)
    chain = params.f2 @ h_eff @ params.f1
    if chain.shape != w.shape:
        raise ValueError(f"target shape {w.shape} does not match chain {chain.shape}")
    return frobenius_norm_sq(chain - w) + sigma2 * frobenius_norm_sq(params.f2)


def _precoder_workspace(upsilon: np.ndarray, w: np.ndarray,
                        pmax: float) -> PrecoderWorkspace:
    gram = np.conj(upsilon.T) @ upsilon
    gram = 0.5 * (gram + np.conj(gram.T))  # symmetrize roundoff
    eigvecs, eigvals = hermitian_eig(gram)
    proj = np.conj(eigvecs.T) @ (np.conj(upsilon.T) @ w)
    d = np.sum(np.abs(proj) ** 2, axis=1)
    lam_up = float(np.sqrt(np.sum(d) / pmax))
    return PrecoderWorkspace(upsilon=upsilon, eigvecs=eigvecs,
                             eigvals=eigvals, d=d, proj=proj, lam_up=lam_up)


def precoder_norm_sq_at(lam: float, ws: PrecoderWorkspace) -> float:
    """||F1(lam)||_F^2 = sum_i d_i / (eigval_i + lam)^2, with 0/0 -> 0."""
    denom = ws.eigvals + lam
    out = np.zeros_like(ws.d)
    nz = denom > 0
    out[nz] = ws.d[nz] / denom[nz] ** 2
    return float(np.sum(out))


def _precoder_at(lam: float, ws: PrecoderWorkspace,
                 rcond: float = 1e-12) -> np.ndarray:
    """F1(lam) = (upsilon^H upsilon + lam I)^+ upsilon^H W via the eigenbasis."""
    denom = ws.eigvals + lam
    cutoff = rcond * max(float(np.max(denom)), np.finfo(float).tiny)
    inv = np.where(denom > cutoff, 1.0 / np.where(denom > cutoff, denom, 1.0), 0.0)
    return ws.eigvecs @ (inv[:, None] * ws.proj)


def update_precoder(f2: np.ndarray, v: np.ndarray, cs: ChannelSet,
                    w: np.ndarray, pmax: float, eps: float = 1e-8):
    """Optimal power-constrained precoder and its dual variable.

    Tries lam = 0 first (pseudo-inverse when the Gram matrix is
    singular); if that violates the power budget, bisects lam on
    [0, lam_up] until | ||F1||_F^2 - pmax | <= eps * pmax. The returned
    precoder always satisfies ||F1||_F^2 <= pmax * (1 + eps).
    """
    if pmax <= 0 or eps <= 0:
        raise ValueError("pmax and eps must be positive")
    upsilon = f2 @ effective_channel(cs, v)
    if np.max(np.abs(upsilon)) == 0.0:
        return np.zeros_like(w), 0.0
    ws = _precoder_workspace(upsilon, w, pmax)

    f1 = _precoder_at(0.0, ws)
    if frobenius_norm_sq(f1) <= pmax:
        return f1, 0.0

    # ||F1(lam)||^2 is monotone decreasing; lam_up guarantees <= pmax.
    lo, hi = 0.0, ws.lam_up
    lam = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        nrm = precoder_norm_sq_at(mid, ws)
        if abs(nrm - pmax) <= eps * pmax:
            lam = mid
            break
        if nrm > pmax:
            lo = mid
        else:
            hi = mid
        lam = hi  # feasible side if loop exhausts
    f1 = _precoder_at(lam, ws)
    return f1, float(lam)


def update_combiner(f1: np.ndarray, v: np.ndarray, cs: ChannelSet,
                    w: np.ndarray, sigma2: float) -> np.ndarray:
    """Closed-form combiner: F2 = W Ub^H (Ub Ub^H + sigma2 I)^{-1}.

    Ub = h_hat @ diag(v) @ h_bar @ f1. Minimum-norm convention applies
    when sigma2 = 0 and Ub Ub^H is singular.
    """
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    ub = effective_channel(cs, v) @ f1
    gram = ub @ np.conj(ub.T)
    gram = 0.5 * (gram + np.conj(gram.T))
    # F2^H = (gram + sigma2 I)^{-1} Ub W^H, so solve on the Hermitian side.
    x = solve_shifted_hermitian(gram, sigma2, ub @ np.conj(w.T))
    return np.conj(x.T)


def build_mm_terms(f1: np.ndarray, f2: np.ndarray, cs: ChannelSet,
                   w: np.ndarray):
    """Quadratic form of the phase subproblem.

    Returns (omega, phi) such that for any unit-modulus v,

        v^H omega v - 2 Re(v^T phi) + ||W||_F^2
            = ||f2 @ h_hat @ diag(v) @ h_bar @ f1 - W||_F^2,

    with omega = (h_hat^H f2^H f2 h_hat) * (h_bar f1 f1^H h_bar^H)^T
    (Hermitian PSD by the Schur product theorem) and
    phi_m = [h_bar f1 W^H f2 h_hat]_{m,m}.
    """
    hh = cs.h_hat_agg
    hb = cs.h_bar_agg
    a = f2 @ hh                     # N x M
    left = np.conj(a.T) @ a         # M x M, Hermitian PSD
    b = hb @ f1                     # M x N
    right = b @ np.conj(b.T)        # M x M, Hermitian PSD
    omega = left * right.T
    omega = 0.5 * (omega + np.conj(omega.T))
    phi = np.einsum("ij,ji->i", b @ np.conj(w.T), a)
    return omega, phi


def mm_phase_step(v_r: np.ndarray, omega: np.ndarray, phi: np.ndarray,
                  lam_max_omega: float) -> np.ndarray:
    """One majorize-minimize step for the unit-modulus phase vector.

    v = exp(j * arg(c)) with c = (lam_max_omega I - omega) v_r + conj(phi);
    entries where c = 0 keep the previous phase. Requires lam_max_omega >=
    the largest eigenvalue of omega for the descent guarantee.
    """
    v_r = check_unit_modulus(v_r)
    c = lam_max_omega * v_r - omega @ v_r + np.conj(phi)
    mag = np.abs(c)
    v = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), v_r)
    return v


def phase_quadratic(v: np.ndarray, omega: np.ndarray, phi: np.ndarray) -> float:
    """q(v) = v^H omega v - 2 Re(v^T phi), the variable part of the phase objective."""
    return float(np.real(np.conj(v) @ omega @ v) - 2.0 * np.real(v @ phi))


def lam_max_bound(omega: np.ndarray, mode: str = "eig") -> float:
    """Upper bound on the largest eigenvalue of the PSD matrix omega."""
    if mode == "eig":
        _, d = hermitian_eig(omega)
        return float(d[-1])
    if mode == "trace":
        return float(np.real(np.trace(omega)))
    raise ValueError(f"unknown lam_max mode: {mode}")


def update_phases(v: np.ndarray, f1: np.ndarray, f2: np.ndarray,
                  cs: ChannelSet, w: np.ndarray, inner_iters: int = 1,
                  lam_max_mode: str = "eig") -> np.ndarray:
    """MM descent on the phase vector with omega, phi held fixed."""
    if inner_iters < 1:
        raise ValueError("inner_iters must be >= 1")
    omega, phi = build_mm_terms(f1, f2, cs, w)
    lam_max = lam_max_bound(omega, lam_max_mode)
    for _ in range(inner_iters):
        v = mm_phase_step(v, omega, phi, lam_max)
    return v


def run_alternating(cfg: SystemConfig, cs: ChannelSet, w: np.ndarray,
                    opts: OptimizerOptions = None):
    """Full alternating optimization (precoder -> combiner -> phases).

    Initialization: v has i.i.d. uniform random phases from opts.seed,
    f1 = sqrt(pmax/N) I (meets the power budget with equality), and f2
    is the closed-form combiner response to that start. Stops when the
    per-iteration decrease, relative to max(1, initial objective),
    falls below opts.tol.
    """
    if opts is None:
        opts = OptimizerOptions()
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (cfg.n, cfg.n):
        raise ValueError(f"W must be {cfg.n}x{cfg.n}, got {w.shape}")
    if cs.n != cfg.n or cs.m != cfg.m or cs.num_ris != cfg.l:
        raise ValueError("channel set does not match the system config")

    rng = np.random.default_rng(opts.seed)
    v = random_phase_vector(cfg.m, rng)
    f1 = np.sqrt(cfg.pmax / cfg.n) * np.eye(cfg.n, dtype=np.complex128)
    f2 = update_combiner(f1, v, cs, w, cfg.sigma2)
    params = AirFcParams(f1=f1, f2=f2, v=v)

    trace = [objective(params, cs, w, cfg.sigma2)]
    lam = 0.0
    converged = False
    for _ in range(opts.max_iters):
        params.f1, lam = update_precoder(params.f2, params.v, cs, w,
                                         cfg.pmax, opts.eps_bisect)
        params.f2 = update_combiner(params.f1, params.v, cs, w, cfg.sigma2)
        params.v = update_phases(params.v, params.f1, params.f2, cs, w,
                                 opts.inner_iters, opts.lam_max_mode)
        trace.append(objective(params, cs, w, cfg.sigma2))
        if trace[-2] - trace[-1] < opts.tol * max(1.0, trace[0]):
            converged = True
            break

    h_eff = effective_channel(cs, params.v)
    imit = frobenius_norm_sq(params.f2 @ h_eff @ params.f1 - w)
    noise = cfg.sigma2 * frobenius_norm_sq(params.f2)
    report = OptimizeReport(objective_trace=np.array(trace),
                            imitation_error=imit, noise_term=noise,
                            lam=lam, iterations=len(trace) - 1,
                            converged=converged)
    return params, report
