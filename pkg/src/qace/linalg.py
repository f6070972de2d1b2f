"""Dense complex linear algebra for 2-, 4- and 8-dimensional Hilbert spaces.

Matrices are plain ``numpy`` arrays. Every routine accepts a stack of
matrices with shape ``(..., n, n)`` so that averaging loops can evaluate
thousands of integrand points per call.

The only eigensolver in the package is the cyclic Jacobi method for Hermitian
matrices implemented here.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10
SQRT_NEGATIVE_ATOL = 1e-8
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class NotHermitianError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


class InvalidStateError(ValueError):
    """Raised when an array fails the density-operator invariants."""


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two (stacks of) matrices or vectors.

    Leading batch dimensions broadcast. Vectors (1-D trailing shape) are
    treated as kets.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim >= 1 and b.ndim >= 1 and (a.ndim == 1 or b.ndim == 1):
        out = a[..., :, None] * b[..., None, :]
        return out.reshape(out.shape[:-2] + (a.shape[-1] * b.shape[-1],))
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    ra, ca = a.shape[-2:]
    rb, cb = b.shape[-2:]
    return out.reshape(out.shape[:-4] + (ra * rb, ca * cb))


def kron(*ops: np.ndarray) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = tensor_product(out, op)
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduce ``m`` onto the subsystems listed in ``keep``.

    Args:
        m: square matrix (or stack) acting on ``prod(dims)`` dimensions.
        dims: subsystem dimensions, most significant first.
        keep: indices of the subsystems that survive, in any order; the
            result keeps them in increasing index order.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"partial_trace needs square matrices, got shape {m.shape}")
    if m.shape[-1] != total:
        raise ValueError(f"subsystem dims {dims} do not match matrix dimension {m.shape[-1]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    batch = m.shape[:-2]
    nb = len(batch)
    n = len(dims)
    t = m.reshape(batch + tuple(dims) + tuple(dims))
    # trace from the highest index down so lower axis positions stay valid
    for k in reversed(range(n)):
        if k in keep:
            continue
        n_now = (t.ndim - nb) // 2
        t = np.trace(t, axis1=nb + k, axis2=nb + n_now + k)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(batch + (d_keep, d_keep))


def _check_hermitian(m: np.ndarray, atol: float) -> None:
    dev = np.max(np.abs(m - dagger(m))) if m.size else 0.0
    if dev > atol:
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^H| = {dev:.3e})")


def _jacobi(m: np.ndarray, vectors: bool, tol: float, max_sweeps: int):
    """Cyclic Jacobi on a stack of Hermitian matrices.

    Each (p, q) rotation is G = D R where D removes the phase of a_pq and R is a
    real Givens rotation; the stack is updated in place as A <- G^H A G.
    """
    a = np.array(m, dtype=complex, copy=True)
    batch = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape((-1, n, n))
    a = 0.5 * (a + dagger(a))
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy() if vectors else None
    scale = np.maximum(np.linalg.norm(a.reshape(len(a), -1), axis=1), 1.0)
    off_mask = ~np.eye(n, dtype=bool)

    for sweep in range(max_sweeps + 1):
        off = np.sqrt(np.sum(np.abs(a[:, off_mask]) ** 2, axis=1))
        if np.all(off <= tol * scale):
            break
        if sweep == max_sweeps:
            raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                if not np.any(mag > 0.0):
                    continue
                # componentwise division; complex division overflows for subnormal |a_pq|
                safe = np.where(mag > 0.0, mag, 1.0)
                phase = np.where(mag > 0.0, apq.real / safe + 1j * (apq.imag / safe), 1.0)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                t = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c = np.cos(t)
                s = np.sin(t)
                ph = np.conj(phase)  # e^{-i alpha}

                col_p = a[:, :, p].copy()
                col_q = a[:, :, q].copy()
                a[:, :, p] = c[:, None] * col_p - (s * ph)[:, None] * col_q
                a[:, :, q] = s[:, None] * col_p + (c * ph)[:, None] * col_q
                row_p = a[:, p, :].copy()
                row_q = a[:, q, :].copy()
                a[:, p, :] = c[:, None] * row_p - (s * phase)[:, None] * row_q
                a[:, q, :] = s[:, None] * row_p + (c * phase)[:, None] * row_q
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                if vectors:
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q].copy()
                    v[:, :, p] = c[:, None] * vp - (s * ph)[:, None] * vq
                    v[:, :, q] = s[:, None] * vp + (c * ph)[:, None] * vq

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1).reshape(batch + (n,))
    if not vectors:
        return w, None
    v = np.take_along_axis(v, order[:, None, :], axis=-1).reshape(batch + (n, n))
    return w, v


def hermitian_eigenvalues(
    m: np.ndarray,
    *,
    atol: float = HERMITIAN_ATOL,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix (or stack), in descending order.

    Raises:
        NotHermitianError: if ``max |M - M^H| > atol``.
        ConvergenceError: if the off-diagonal Frobenius norm is still above
            ``tol`` (relative to ``max(1, ||M||_F)``) after ``max_sweeps``.
    """
    m = np.asarray(m)
    _check_hermitian(m, atol)
    return _jacobi(m, vectors=False, tol=tol, max_sweeps=max_sweeps)[0]


def hermitian_eigh(
    m: np.ndarray,
    *,
    atol: float = HERMITIAN_ATOL,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and unitary eigenvector columns."""
    m = np.asarray(m)
    _check_hermitian(m, atol)
    return _jacobi(m, vectors=True, tol=tol, max_sweeps=max_sweeps)


def hermitian_sqrt(m: np.ndarray, *, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-1e-8, 0)`` are treated as roundoff and clamped to zero.
    """
    w, v = hermitian_eigh(m, atol=atol)
    if np.any(w < -SQRT_NEGATIVE_ATOL):
        raise InvalidStateError(f"matrix is not PSD (smallest eigenvalue {np.min(w):.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root[..., None, :]) @ dagger(v)


def validate_density(rho: np.ndarray, *, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking density-operator invariants.

    Checks Hermiticity, unit trace and positivity (eigenvalues >= -atol),
    elementwise over a stack.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim < 2 or rho.shape[-1] != rho.shape[-2]:
        raise InvalidStateError(f"density operator must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density operator has non-finite entries")
    herm = np.max(np.abs(rho - dagger(rho)))
    if herm > atol:
        raise InvalidStateError(f"density operator is not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.max(np.abs(tr - 1.0)) > TRACE_ATOL:
        raise InvalidStateError(f"density operator trace deviates from 1 by {np.max(np.abs(tr - 1.0)):.3e}")
    w = hermitian_eigenvalues(rho, atol=atol)
    if np.min(w) < -PSD_ATOL:
        raise InvalidStateError(f"density operator has negative eigenvalue {np.min(w):.3e}")
    return rho


def is_density(rho: np.ndarray, *, atol: float = HERMITIAN_ATOL) -> bool:
    try:
        validate_density(rho, atol=atol)
    except InvalidStateError:
        return False
    return True


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> np.ndarray | float:
    """Half the sum of absolute eigenvalues of ``rho - sigma``.

    Works elementwise over broadcast stacks; returns a float for single pairs.
    """
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape[-2:] != sigma.shape[-2:]:
        raise ValueError(f"dimension mismatch: {rho.shape[-2:]} vs {sigma.shape[-2:]}")
    diff = rho - sigma
    # absorb tiny anti-Hermitian roundoff from upstream arithmetic
    diff = 0.5 * (diff + dagger(diff))
    lam = hermitian_eigenvalues(diff)
    td = 0.5 * np.sum(np.abs(lam), axis=-1)
    return float(td) if np.ndim(td) == 0 else td
