"""Reproducible random states and gates.

The bit source is the Philox4x64-10 counter-based generator (Salmon et al.,
SC'11) as shipped in ``numpy.random.Philox``, keyed through
``numpy.random.SeedSequence``. Only its raw 64-bit output is used; the
conversions to floats are defined here so that a stream is fixed by the seed
alone:

* uniform: ``(x >> 11) * 2**-53`` in [0, 1);
* normal: Box-Muller on pairs of uniforms, ``u1`` mapped to (0, 1].

Independent streams come from ``SeedSequence(seed, spawn_key=(k,))``.
"""

from __future__ import annotations

import math

import numpy as np

from qace.linalg import dagger, kron
from qace.quantum import Gate

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0**-53


class SeededRng:
    """Single-stream generator; not safe to share between threads."""

    def __init__(self, seed: int = 0, spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed) & _MASK64
        self.spawn_key = tuple(int(k) for k in spawn_key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._bits = np.random.Philox(ss)

    def child(self, k: int) -> "SeededRng":
        """Independent stream number ``k``, a pure function of (seed, key, k)."""
        return SeededRng(self.seed, self.spawn_key + (int(k),))

    def raw(self, n: int) -> np.ndarray:
        return np.asarray(self._bits.random_raw(int(n)), dtype=np.uint64)

    def uniform(self, size=None) -> np.ndarray | float:
        shape = () if size is None else tuple(np.atleast_1d(size))
        n = int(np.prod(shape, dtype=np.int64))
        u = (self.raw(n) >> np.uint64(11)).astype(np.float64) * _TWO_M53
        return float(u[0]) if size is None else u.reshape(shape)

    def normal(self, size=None) -> np.ndarray | float:
        shape = () if size is None else tuple(np.atleast_1d(size))
        n = int(np.prod(shape, dtype=np.int64))
        m = (n + 1) // 2
        u = self.uniform(2 * m).reshape(m, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        t = 2 * math.pi * u[:, 1]
        z = np.stack([r * np.cos(t), r * np.sin(t)], axis=-1).ravel()[:n]
        return float(z[0]) if size is None else z.reshape(shape)

    def complex_normal(self, size) -> np.ndarray:
        """Complex standard normals with E|z|^2 = 1."""
        shape = tuple(np.atleast_1d(size))
        z = self.normal(shape + (2,))
        return (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2)


def _batch(n: int | None) -> tuple[int, ...]:
    return () if n is None else (int(n),)


def haar_ket(rng: SeededRng, dim: int, n: int | None = None) -> np.ndarray:
    z = rng.complex_normal(_batch(n) + (dim,))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def haar_pure_two_qubit(rng: SeededRng, n: int | None = None) -> np.ndarray:
    """Haar-random two-qubit ket(s), shape (4,) or (n, 4)."""
    return haar_ket(rng, 4, n)


def ginibre_mixed_two_qubit(rng: SeededRng, n: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt random density operator(s): G G^H / tr(G G^H)."""
    g = rng.complex_normal(_batch(n) + (4, 4))
    rho = g @ dagger(g)
    rho = 0.5 * (rho + dagger(rho))
    return rho / np.trace(rho, axis1=-2, axis2=-1).real[..., None, None]


def random_product_kets(rng: SeededRng, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Two independent Haar single-qubit kets (psi, phi)."""
    return haar_ket(rng, 2, n), haar_ket(rng, 2, n)


def random_product_state(rng: SeededRng, n: int | None = None) -> np.ndarray:
    """|psi><psi| x |phi><phi| with psi, phi Haar on the Bloch sphere."""
    psi, phi = random_product_kets(rng, n)
    ket = np.einsum("...i,...j->...ij", psi, phi).reshape(psi.shape[:-1] + (4,))
    return ket[..., :, None] * np.conj(ket[..., None, :])


def haar_unitary_2(rng: SeededRng) -> np.ndarray:
    """Random single-qubit unitary whose first column is a Haar ket."""
    a, b = haar_ket(rng, 2)
    phase = np.exp(2j * math.pi * rng.uniform())
    # columns |k> and its orthogonal partner, then a random global phase
    return phase * np.array([[a, -np.conj(b)], [b, np.conj(a)]])


def random_local_gate(rng: SeededRng) -> Gate:
    """Q x P with Q, P independent random single-qubit unitaries."""
    q = haar_unitary_2(rng)
    p = haar_unitary_2(rng)
    return Gate("LOCAL", kron(q, p), factors=(q, p))
