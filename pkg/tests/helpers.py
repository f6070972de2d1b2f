import numpy as np


def random_hermitian(rng, n, batch=()):
    a = rng.normal(size=batch + (n, n)) + 1j * rng.normal(size=batch + (n, n))
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def random_density(rng, n, batch=(), rank=None):
    rank = n if rank is None else rank
    g = rng.normal(size=batch + (n, rank)) + 1j * rng.normal(size=batch + (n, rank))
    rho = g @ np.conj(np.swapaxes(g, -1, -2))
    return rho / np.trace(rho, axis1=-2, axis2=-1)[..., None, None]


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_ket(rng, n, batch=()):
    z = rng.normal(size=batch + (n,)) + 1j * rng.normal(size=batch + (n,))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)
