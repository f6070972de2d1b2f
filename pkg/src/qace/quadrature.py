"""Quadrature rules for Haar averages of trace distances.

The averaged integrands here all have the form ``|R r|`` where ``r`` is the
Bloch vector of the intervention state (on the sphere or on the X-Y equator)
and ``R`` is a real response matrix. Such integrands are not smooth: they have
kinks or near-kinks wherever ``R r`` is small. A plain trapezoidal or tensor
Gauss-Legendre grid converges only algebraically on them.

The rules below therefore work in the principal frame of ``R^T R``. In that
frame ``|R r|^2`` is a diagonal quadratic form, which is even in every
coordinate, so a quarter circle or an octant carries the whole average. The
remaining near-singularity sits at a known endpoint and is resolved by a
geometrically graded composite Gauss-Legendre mesh.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from qace.linalg import hermitian_eigh

GRADED_PANELS = 4
GRADED_RATIO = 0.1


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [a, b]."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@lru_cache(maxsize=64)
def graded_gauss_legendre(
    n: int,
    a: float,
    b: float,
    panels: int = GRADED_PANELS,
    ratio: float = GRADED_RATIO,
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on a geometric mesh refined toward ``b``.

    Breakpoints sit at ``b - (b - a) ratio**j`` for ``j = 0 .. panels - 1``.
    ``n`` nodes are spread evenly across the panels (at least two per panel).
    Intended for integrands of the type sqrt(delta^2 + (b - x)^2) whose
    branch points approach ``b`` as delta -> 0.
    """
    per_panel = max(2, -(-int(n) // panels))
    br = [b - (b - a) * ratio**j for j in range(panels)] + [b]
    xs, ws = [], []
    for lo, hi in zip(br[:-1], br[1:]):
        x, w = gauss_legendre(per_panel, lo, hi)
        xs.append(x)
        ws.append(w)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _principal_frame(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gram = np.einsum("...ki,...kj->...ij", r, r)
    vals, vecs = hermitian_eigh(gram, atol=1e-9)
    # real symmetric input keeps every Jacobi rotation real
    return np.clip(vals, 0.0, None), np.real(vecs)


def circle_mean_norm(r: np.ndarray, n: int = 64) -> np.ndarray:
    """Mean of ``|r @ (cos phi, sin phi)|`` over the uniform circle.

    ``r`` has shape ``(..., m, 2)``. Kinks of the integrand sit at the minor
    principal axis, which is where the graded mesh is refined.
    """
    r = np.asarray(r, dtype=float)
    _, vecs = _principal_frame(r)
    psi, w = graded_gauss_legendre(n, 0.0, math.pi / 2)
    # cos(psi) e_major + sin(psi) e_minor on the quarter circle
    dirs = _quarter_dirs(psi, vecs)
    vals = np.linalg.norm(np.einsum("...mi,...qi->...qm", r, dirs), axis=-1)
    return vals @ w / (math.pi / 2)


def _quarter_dirs(psi: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    c = np.cos(psi)[:, None]
    s = np.sin(psi)[:, None]
    return c * vecs[..., None, :, 0] + s * vecs[..., None, :, 1]


def sphere_mean_norm(r: np.ndarray, n_theta: int = 32, n_phi: int = 64) -> np.ndarray:
    """Mean of ``|r @ u|`` over the uniform unit sphere.

    ``r`` has shape ``(..., m, 3)``. The polar axis is the minor principal axis
    of ``r^T r`` and azimuth zero is the major one, so the octant
    theta, phi in [0, pi/2] covers the average; the azimuthal rule is graded
    toward phi = pi/2 where the form is smallest.
    """
    r = np.asarray(r, dtype=float)
    _, vecs = _principal_frame(r)
    theta, wt = gauss_legendre(n_theta, 0.0, math.pi / 2)
    phi, wp = graded_gauss_legendre(n_phi, 0.0, math.pi / 2)
    st = np.sin(theta)
    local = np.stack(
        [
            np.outer(st, np.cos(phi)).ravel(),
            np.outer(st, np.sin(phi)).ravel(),
            np.repeat(np.cos(theta), len(phi)),
        ],
        axis=-1,
    )
    weights = np.outer(wt * st, wp).ravel() / (math.pi / 2)
    # local coordinates are (major, middle, minor); eigenvector columns are descending
    dirs = np.einsum("...ij,qj->...qi", vecs, local)
    vals = np.linalg.norm(np.einsum("...mi,...qi->...qm", r, dirs), axis=-1)
    return vals @ weights


def oriented_sphere_rule(
    pole: np.ndarray, origin: np.ndarray, n_theta: int, n_phi: int
) -> tuple[np.ndarray, np.ndarray]:
    """Full-sphere product rule in a frame with the given pole and azimuth origin.

    Polar angle: Gauss-Legendre in theta (sin(theta) folded into the weights)
    on the two hemispheres. Azimuth: Gauss-Legendre on four quarter panels.
    Returns unit vectors ``(N, 3)`` and weights summing to one.
    """
    z = np.asarray(pole, dtype=float)
    z = z / np.linalg.norm(z)
    x = np.asarray(origin, dtype=float)
    x = x - z * (x @ z)
    if np.linalg.norm(x) < 1e-8:
        x = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        x = x - z * (x @ z)
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)

    half = max(1, n_theta // 2)
    t1, w1 = gauss_legendre(half, 0.0, math.pi / 2)
    t2, w2 = gauss_legendre(half, math.pi / 2, math.pi)
    theta = np.concatenate([t1, t2])
    wt = np.concatenate([w1, w2]) * np.sin(theta) / 2.0

    quarter = max(1, n_phi // 4)
    ps, pw = [], []
    for k in range(4):
        p, w = gauss_legendre(quarter, k * math.pi / 2, (k + 1) * math.pi / 2)
        ps.append(p)
        pw.append(w)
    phi = np.concatenate(ps)
    wp = np.concatenate(pw) / (2 * math.pi)

    st = np.sin(theta)
    pts = (
        np.outer(st, np.cos(phi))[..., None] * x
        + np.outer(st, np.sin(phi))[..., None] * y
        + np.cos(theta)[:, None, None] * z
    ).reshape(-1, 3)
    return pts, np.outer(wt, wp).ravel()


def trapezoid_circle(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Periodic trapezoid nodes on [0, 2 pi) with weights summing to one."""
    phi = 2 * math.pi * np.arange(n) / n
    return phi, np.full(n, 1.0 / n)


def uniform_sphere_rule(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre in cos(theta) times trapezoid in phi; weights sum to one."""
    u, wu = gauss_legendre(n_theta)
    phi, wp = trapezoid_circle(n_phi)
    s = np.sqrt(1 - u**2)
    pts = np.stack(
        [np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)), np.outer(u, np.ones_like(phi))],
        axis=-1,
    ).reshape(-1, 3)
    return pts, np.outer(wu / 2, wp).ravel()
