"""Complex linear-algebra kernels with explicit contracts.

All matrices are dense numpy arrays of dtype complex128 (row-major).
Every function is pure; nothing here keeps state.
"""
import numpy as np

HERMITIAN_TOL = 1e-10


def as_complex_matrix(a) -> np.ndarray:
    """Validate and return a 2-D complex128 array with finite entries."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"matrix dimensions must be positive, got {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix contains non-finite entries")
    return a


def conj_transpose(a: np.ndarray) -> np.ndarray:
    return np.conj(a.T)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions mismatch: {a.shape} x {b.shape}")
    return a @ b


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise product; shapes must match exactly."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch for Hadamard product: {a.shape} vs {b.shape}")
    return a * b


def trace(a: np.ndarray) -> complex:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"trace requires a square matrix, got {a.shape}")
    return complex(np.trace(a))


def frobenius_norm_sq(a: np.ndarray) -> float:
    return float(np.sum(np.abs(a) ** 2))


def _check_hermitian(a: np.ndarray) -> np.ndarray:
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got {a.shape}")
    dev = np.max(np.abs(a - np.conj(a.T)))
    if dev > HERMITIAN_TOL * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return a


def hermitian_eig(a: np.ndarray):
    """Eigendecomposition of a Hermitian matrix.

    Returns (U, d) with d real ascending and A = U diag(d) U^H.
    Raises ValueError for non-square or non-Hermitian input.
    """
    a = _check_hermitian(a)
    d, u = np.linalg.eigh(a)
    return u, d


def solve_shifted_hermitian(a: np.ndarray, lam: float, b: np.ndarray,
                            rcond: float = 1e-12) -> np.ndarray:
    """Solve (A + lam*I) X = B for Hermitian PSD A and lam >= 0.

    When A + lam*I is (numerically) singular, returns the minimum
    Frobenius-norm solution (pseudo-inverse convention): eigenvalues of
    the shifted matrix below rcond * max(shifted spectrum) are dropped.
    """
    a = _check_hermitian(a)
    b = as_complex_matrix(b)
    if lam < 0:
        raise ValueError(f"shift must be nonnegative, got {lam}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: A is {a.shape}, B is {b.shape}")
    u, d = hermitian_eig(a)
    ds = d + lam
    cutoff = rcond * max(float(ds[-1]), np.finfo(float).tiny)
    inv = np.where(ds > cutoff, 1.0 / np.where(ds > cutoff, ds, 1.0), 0.0)
    return u @ (inv[:, None] * (np.conj(u.T) @ b))


def singular_values(a: np.ndarray) -> np.ndarray:
    """Singular values of A, nonnegative and descending."""
    a = as_complex_matrix(a)
    return np.linalg.svd(a, compute_uv=False)
