"""Quantum average causal effect for gates, the MBQC building block and teleportation.

Every scenario maps a choice of intervention state |a> on qubit A to an output
state of qubit B. The ACE is the average, over a uniformly drawn |a> (and over
the input |b> for gates), of the trace distance between the outputs for |a>
and for its antipode |a_perp>.

Two averaging methods are provided:

* quadrature: the output is an affine function of the Bloch vector ``r`` of
  |a>, so the trace distance equals ``|R r| / 2`` for a real response matrix
  ``R`` whose columns are Bloch-vector differences of actual output states at
  the six axis kets. Averages of ``|R r|`` then go through the rules in
  :mod:`qace.quadrature`.
* Monte Carlo: Haar-random kets, full output density operators, and the Jacobi
  trace distance, with the standard error of the mean as error estimate.

The two routes share only the output-state constructors.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from qace.linalg import dagger, hermitian_eigh, kron, partial_trace, trace_distance, validate_density
from qace.quadrature import (
    circle_mean_norm,
    oriented_sphere_rule,
    sphere_mean_norm,
    trapezoid_circle,
    uniform_sphere_rule,
)
from qace.quantum import (
    HADAMARD,
    IDENTITY,
    KET_0,
    KET_1,
    PAULI_X,
    PAULI_Z,
    Gate,
    bloch_vector,
    equator_kets,
    perp_ket,
    projector,
)
from qace.sampling import SeededRng, haar_ket

MIN_NODES = 4
MIN_MC_SAMPLES = 100
MC_CHUNK = 8192
STATE_CHUNK = 1024
GATE_OUTER_CHUNK = 128
INDEPENDENT_BUDGET = 200_000_000


class Method(str, Enum):
    QUADRATURE = "quadrature"
    MONTE_CARLO = "mc"


class PairMode(str, Enum):
    ANTIPODAL = "antipodal"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class AveragingConfig:
    """Averaging settings shared by all scenarios.

    Quadrature node counts apply per averaged qubit. ``phi_nodes`` is the
    number of azimuthal nodes and ``theta_nodes`` the number of polar nodes.
    ``workers`` only changes wall time: chunking is fixed, so results are
    identical for any worker count.
    """

    method: Method = Method.QUADRATURE
    phi_nodes: int = 64
    theta_nodes: int = 32
    mc_samples: int = 100_000
    seed: int = 0
    pair_mode: PairMode = PairMode.ANTIPODAL
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "pair_mode", PairMode(self.pair_mode))
        if self.phi_nodes < MIN_NODES or self.theta_nodes < MIN_NODES:
            raise ValueError(f"node counts must be at least {MIN_NODES}")
        if self.mc_samples < MIN_MC_SAMPLES:
            raise ValueError(f"mc_samples must be at least {MIN_MC_SAMPLES}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def halved(self) -> "AveragingConfig":
        return replace(self, phi_nodes=max(2, self.phi_nodes // 2), theta_nodes=max(2, self.theta_nodes // 2))


@dataclass(frozen=True)
class AceEstimate:
    """ACE value with its error estimate.

    For quadrature the error is ``|v(n) - v(n/2)|`` under halving of both node
    counts; for Monte Carlo it is the standard error of the mean. Batched
    calls carry arrays in ``value`` and ``error_estimate``.
    """

    value: float | np.ndarray
    method: str
    error_estimate: float | np.ndarray


@dataclass(frozen=True)
class GateScenario:
    gate: Gate


@dataclass(frozen=True)
class MbqcScenario:
    rho_in: np.ndarray


@dataclass(frozen=True)
class TeleportScenario:
    rho_in: np.ndarray


Scenario = Union[GateScenario, MbqcScenario, TeleportScenario]


def ace(scenario: Scenario, cfg: AveragingConfig | None = None) -> AceEstimate:
    cfg = cfg or AveragingConfig()
    if isinstance(scenario, GateScenario):
        return ace_gate(scenario.gate, cfg)
    if isinstance(scenario, MbqcScenario):
        return ace_mbqc(scenario.rho_in, cfg)
    if isinstance(scenario, TeleportScenario):
        return ace_teleport(scenario.rho_in, cfg)
    raise TypeError(f"unknown scenario {scenario!r}")


# ---------------------------------------------------------------------------
# helpers


# axis kets |+x>, |-x>, |+y>, |-y>, |0>, |1>
_AXIS_KETS = np.array(
    [
        [1, 1],
        [1, -1],
        [1, 1j],
        [1, -1j],
        [math.sqrt(2), 0],
        [0, math.sqrt(2)],
    ],
    dtype=complex,
) / math.sqrt(2)


def _as_result(value, err, method: Method):
    value = np.asarray(value, dtype=float)
    err = np.asarray(err, dtype=float)
    if value.ndim == 0:
        return AceEstimate(float(value), method.value, float(err))
    return AceEstimate(value, method.value, err)


def _map_chunks(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _stack_rho(rho_in) -> tuple[np.ndarray, tuple[int, ...]]:
    rho = np.asarray(rho_in, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ValueError(f"expected 4x4 density operators, got shape {rho.shape}")
    validate_density(rho, atol=1e-9)
    batch = rho.shape[:-2]
    return rho.reshape((-1, 4, 4)), batch


def _batched_quadrature(states: np.ndarray, batch: tuple, fn: Callable, cfg: AveragingConfig) -> AceEstimate:
    """Apply ``fn(states_chunk, cfg)`` and ``fn(..., cfg.halved())`` chunkwise."""
    chunks = [states[i : i + STATE_CHUNK] for i in range(0, len(states), STATE_CHUNK)]
    half = cfg.halved()

    def run(chunk):
        return fn(chunk, cfg), fn(chunk, half)

    parts = _map_chunks(run, chunks, cfg.workers)
    v = np.concatenate([p[0] for p in parts]).reshape(batch)
    h = np.concatenate([p[1] for p in parts]).reshape(batch)
    return _as_result(v, np.abs(v - h), Method.QUADRATURE)


def _mc_reduce(sums: list[tuple[float, float, int]]) -> tuple[float, float]:
    total = 0.0
    total_sq = 0.0
    n = 0
    for s, s2, k in sums:
        total += s
        total_sq += s2
        n += k
    mean = total / n
    var = max(total_sq / n - mean**2, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n)


def _mc_average(sample_td: Callable[[SeededRng, int], np.ndarray], cfg: AveragingConfig) -> tuple[float, float]:
    """Mean and standard error of ``sample_td`` over ``cfg.mc_samples`` draws.

    Chunk ``k`` draws from stream ``child(k)`` of the seed, so the estimate
    does not depend on the worker count.
    """
    root = SeededRng(cfg.seed)
    sizes = [min(MC_CHUNK, cfg.mc_samples - i) for i in range(0, cfg.mc_samples, MC_CHUNK)]

    def run(k):
        td = np.asarray(sample_td(root.child(k), sizes[k]), dtype=float)
        return float(np.sum(td)), float(np.sum(td * td)), len(td)

    return _mc_reduce(_map_chunks(run, list(range(len(sizes))), cfg.workers))


def _mc_over_states(rho: np.ndarray, batch: tuple, make_sampler: Callable, cfg: AveragingConfig) -> AceEstimate:
    vals = np.empty(len(rho))
    errs = np.empty(len(rho))
    for i, r in enumerate(rho):
        vals[i], errs[i] = _mc_average(make_sampler(r), cfg)
    return _as_result(vals.reshape(batch), errs.reshape(batch), Method.MONTE_CARLO)


def _check_budget(evaluations: float, what: str) -> None:
    if evaluations > INDEPENDENT_BUDGET:
        raise ValueError(
            f"independent-pair quadrature for {what} needs {evaluations:.2e} integrand evaluations "
            f"(limit {INDEPENDENT_BUDGET:.0e}); use the Monte Carlo method or fewer nodes"
        )


# ---------------------------------------------------------------------------
# gates


def gate_output_state(u, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """tr_A(U (|a><a| x |b><b|) U^H) for kets ``a`` (qubit A) and ``b`` (qubit B)."""
    m = u.matrix if isinstance(u, Gate) else np.asarray(u, dtype=complex)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    psi = np.einsum("...i,...j->...ij", a, b)
    psi = psi.reshape(psi.shape[:-2] + (4,))
    out = np.einsum("ij,...j->...i", m, psi)
    return partial_trace(projector(out), (2, 2), keep=[1])


def gate_response(u) -> tuple[np.ndarray, np.ndarray]:
    """Affine response of a gate: ``M(b) = M0 + sum_k b_k M[k]``.

    ``M(b) @ r`` is the Bloch-vector difference of the outputs for |a> and
    |a_perp>, with ``r`` the Bloch vector of |a> and ``b`` that of the input
    on qubit B.
    """
    a = _AXIS_KETS[:, None, :]
    b = _AXIS_KETS[None, :, :]
    out = bloch_vector(gate_output_state(u, a, b))  # (6 a-axes, 6 b-axes, 3)
    # d[j, m] = Bloch difference between a = +e_j and a = -e_j, at b-axis m
    d = out[0::2] - out[1::2]
    plus = d[:, 0::2]  # (j, k, 3) at b = +e_k
    minus = d[:, 1::2]
    m0 = 0.5 * (plus[:, 2] + minus[:, 2]).T
    mk = 0.5 * np.transpose(plus - minus, (1, 2, 0))  # (k, 3, j)
    return m0, mk


def _sphere_quadratic_argmin(q: np.ndarray, c: np.ndarray) -> np.ndarray:
    """argmin of ``b^T q b + 2 c^T b`` over the unit sphere (trust-region boundary)."""
    lam, v = hermitian_eigh(q.astype(complex), atol=1e-9)
    lam = lam.real
    v = v.real
    ct = v.T @ c
    lmin = lam[-1]
    scale = max(1.0, float(np.max(np.abs(lam))))
    if abs(ct[-1]) <= 1e-12 * scale:
        gap = lam[:-1] - lmin
        bt = np.where(gap > 1e-12 * scale, -ct[:-1] / np.where(gap > 0, gap, 1.0), 0.0)
        nb = float(bt @ bt)
        if nb <= 1.0:
            return v @ np.append(bt, math.sqrt(1.0 - nb))
    lo = lmin - float(np.linalg.norm(c)) - 1.0
    hi = lmin
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        if np.sum(ct**2 / (lam - mu) ** 2) > 1.0:
            hi = mu
        else:
            lo = mu
    bt = -ct / (lam - lo)
    return v @ (bt / np.linalg.norm(bt))


def gate_outer_frame(m0: np.ndarray, mk: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pole and azimuth origin for the average over the input on qubit B.

    The pole sits where ``||M(b)||_F`` is smallest on the sphere, which is
    where the inner average has its worst kink; the azimuth origin follows
    the stiffest direction of that quadratic form, so symmetric kink curves
    fall on the quarter-panel boundaries of the azimuthal rule.
    """
    a = mk.reshape(3, 9).T
    q = a.T @ a
    c = a.T @ m0.ravel()
    pole = _sphere_quadratic_argmin(q, c)
    _, v = hermitian_eigh(q.astype(complex), atol=1e-9)
    v = v.real
    origin = None
    for j in range(3):
        w = v[:, j] - pole * (v[:, j] @ pole)
        if np.linalg.norm(w) > 0.5:
            origin = w
            break
    if origin is None:
        origin = np.zeros(3)
    return pole, origin


def _ace_gate_quadrature(u, cfg: AveragingConfig) -> float:
    m0, mk = gate_response(u)
    pole, origin = gate_outer_frame(m0, mk)
    pts, w = oriented_sphere_rule(pole, origin, cfg.theta_nodes, cfg.phi_nodes)
    chunks = [slice(i, i + GATE_OUTER_CHUNK) for i in range(0, len(w), GATE_OUTER_CHUNK)]

    def run(sl):
        mb = m0 + np.einsum("nk,kij->nij", pts[sl], mk)
        return float(sphere_mean_norm(0.5 * mb, cfg.theta_nodes, cfg.phi_nodes) @ w[sl])

    parts = _map_chunks(run, chunks, cfg.workers)
    total = 0.0
    for p in parts:
        total += p
    return total


def _ace_gate_independent(u, cfg: AveragingConfig) -> float:
    m0, mk = gate_response(u)
    pts, w = uniform_sphere_rule(cfg.theta_nodes, cfg.phi_nodes)
    _check_budget(float(len(w)) ** 3, "a gate")
    diff = (pts[:, None, :] - pts[None, :, :]).reshape(-1, 3)
    wd = np.outer(w, w).ravel()
    total = 0.0
    for bi, wb in zip(pts, w):
        mb = m0 + np.einsum("k,kij->ij", bi, mk)
        total += wb * float(np.linalg.norm(diff @ mb.T, axis=-1) @ wd)
    return 0.25 * total


def ace_gate(u, cfg: AveragingConfig | None = None) -> AceEstimate:
    """Average over |a> and |b> of the output trace distance for a two-qubit gate."""
    cfg = cfg or AveragingConfig()
    m = u.matrix if isinstance(u, Gate) else np.asarray(u, dtype=complex)
    if cfg.method is Method.QUADRATURE:
        fn = _ace_gate_quadrature if cfg.pair_mode is PairMode.ANTIPODAL else _ace_gate_independent
        v = fn(m, cfg)
        h = fn(m, cfg.halved())
        return _as_result(v, abs(v - h), Method.QUADRATURE)

    independent = cfg.pair_mode is PairMode.INDEPENDENT

    def sample(rng: SeededRng, n: int) -> np.ndarray:
        a0 = haar_ket(rng, 2, n)
        b = haar_ket(rng, 2, n)
        a1 = haar_ket(rng, 2, n) if independent else perp_ket(a0)
        return trace_distance(gate_output_state(m, a0, b), gate_output_state(m, a1, b))

    mean, se = _mc_average(sample, cfg)
    return _as_result(mean, se, Method.MONTE_CARLO)


# ---------------------------------------------------------------------------
# MBQC building block


def _mbqc_channel(rho: np.ndarray, proj_a: np.ndarray) -> np.ndarray:
    """tr_A(P rho) + X tr_A((1 - P) rho) X for a measurement projector P on qubit A."""
    p = kron(proj_a, IDENTITY)
    q = kron(IDENTITY - proj_a, IDENTITY)
    keep = partial_trace(p @ rho, (2, 2), keep=[1])
    flip = partial_trace(q @ rho, (2, 2), keep=[1])
    return keep + PAULI_X @ flip @ PAULI_X


def mbqc_output_state(rho_in: np.ndarray, phi_a) -> tuple[np.ndarray, np.ndarray]:
    """Corrected outputs (rho_B(do a), rho_B(do a_perp)) for the equator basis at ``phi_a``.

    The a_perp branch carries the X by-product correction; the two branches
    are subnormalized and add up to a unit-trace state.
    """
    rho = np.asarray(rho_in, dtype=complex)
    a, a_perp = equator_kets(phi_a)
    pa = projector(a)
    pp = projector(a_perp)
    rho = rho.reshape(rho.shape[:-2] + (1,) * np.ndim(phi_a) + (4, 4))
    return _mbqc_channel(rho, pa), _mbqc_channel(rho, pp)


def mbqc_response(rho_in: np.ndarray) -> np.ndarray:
    """Real (3, 2) matrix R with TD(do a, do a_perp) = |R (cos phi, sin phi)| / 2."""
    rho = np.asarray(rho_in, dtype=complex)[..., None, :, :]
    out = bloch_vector(_mbqc_channel(rho, projector(_AXIS_KETS[:4])))  # (..., 4, 3)
    return np.swapaxes(out[..., 0::2, :] - out[..., 1::2, :], -1, -2)


def _mbqc_quadrature(rho: np.ndarray, cfg: AveragingConfig) -> np.ndarray:
    return circle_mean_norm(0.5 * mbqc_response(rho), cfg.phi_nodes)


def _mbqc_independent(rho: np.ndarray, cfg: AveragingConfig) -> np.ndarray:
    phi, w = trapezoid_circle(cfg.phi_nodes)
    r = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    diff = (r[:, None, :] - r[None, :, :]).reshape(-1, 2)
    wd = np.outer(w, w).ravel()
    resp = mbqc_response(rho)
    return 0.25 * np.linalg.norm(np.einsum("nij,qj->nqi", resp, diff), axis=-1) @ wd


def ace_mbqc(rho_in: np.ndarray, cfg: AveragingConfig | None = None) -> AceEstimate:
    """Average over the equator angle of TD(rho_B(do a), rho_B(do a_perp)).

    ``rho_in`` may be a stack of shape (..., 4, 4); the estimate then carries
    arrays of the batch shape.
    """
    cfg = cfg or AveragingConfig()
    rho, batch = _stack_rho(rho_in)
    independent = cfg.pair_mode is PairMode.INDEPENDENT
    if cfg.method is Method.QUADRATURE:
        if independent:
            _check_budget(len(rho) * float(cfg.phi_nodes) ** 2, "MBQC")
        return _batched_quadrature(rho, batch, _mbqc_independent if independent else _mbqc_quadrature, cfg)

    def make_sampler(r):
        def sample(rng: SeededRng, n: int) -> np.ndarray:
            phi0 = 2 * math.pi * rng.uniform(n)
            a0, a0_perp = mbqc_output_state(r, phi0)
            if not independent:
                return trace_distance(a0, a0_perp)
            a1, _ = mbqc_output_state(r, 2 * math.pi * rng.uniform(n))
            return trace_distance(a0, a1)

        return sample

    return _mc_over_states(rho, batch, make_sampler, cfg)


# ---------------------------------------------------------------------------
# teleportation


_CNOT12 = kron(projector(KET_0), IDENTITY, IDENTITY) + kron(projector(KET_1), PAULI_X, IDENTITY)
_TELEPORT_U = kron(HADAMARD, IDENTITY, IDENTITY) @ _CNOT12
_CORRECTIONS = [
    (s1, s2, np.linalg.matrix_power(PAULI_Z, s1) @ np.linalg.matrix_power(PAULI_X, s2))
    for s1 in (0, 1)
    for s2 in (0, 1)
]


def _teleport_channel(rho: np.ndarray, op_a: np.ndarray) -> np.ndarray:
    full = kron(op_a, rho)
    v = _TELEPORT_U @ full @ dagger(_TELEPORT_U)
    v = v.reshape(v.shape[:-2] + (2, 2, 2, 2, 2, 2))
    out = 0
    for s1, s2, c in _CORRECTIONS:
        block = v[..., s1, s2, :, s1, s2, :]
        out = out + c @ block @ dagger(c)
    return out


def teleport_output_state(rho_in: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Bob's corrected output when Alice teleports |a> through the shared ``rho_in``.

    Alice applies CNOT(1 -> 2) then H on qubit 1 and measures qubits 1, 2 in
    the computational basis; Bob applies Z^{s1} X^{s2} on qubit 3.
    """
    return _teleport_channel(np.asarray(rho_in, dtype=complex), projector(np.asarray(a, dtype=complex)))


def teleport_response(rho_in: np.ndarray) -> np.ndarray:
    """Real (3, 3) matrix R with TD(out(a), out(a_perp)) = |R r_a| / 2."""
    rho = np.asarray(rho_in, dtype=complex)[..., None, :, :]
    out = bloch_vector(_teleport_channel(rho, projector(_AXIS_KETS)))  # (..., 6, 3)
    return np.swapaxes(out[..., 0::2, :] - out[..., 1::2, :], -1, -2)


def _teleport_quadrature(rho: np.ndarray, cfg: AveragingConfig) -> np.ndarray:
    return sphere_mean_norm(0.5 * teleport_response(rho), cfg.theta_nodes, cfg.phi_nodes)


def _teleport_independent(rho: np.ndarray, cfg: AveragingConfig) -> np.ndarray:
    pts, w = uniform_sphere_rule(cfg.theta_nodes, cfg.phi_nodes)
    resp = teleport_response(rho)
    out = np.empty(len(rho))
    for i, r in enumerate(resp):
        proj = pts @ r.T
        total = 0.0
        for p0, w0 in zip(proj, w):
            total += w0 * float(np.linalg.norm(p0 - proj, axis=-1) @ w)
        out[i] = 0.25 * total
    return out


def ace_teleport(rho_in: np.ndarray, cfg: AveragingConfig | None = None) -> AceEstimate:
    """Average over the full Bloch sphere of TD(out(a), out(a_perp))."""
    cfg = cfg or AveragingConfig()
    rho, batch = _stack_rho(rho_in)
    independent = cfg.pair_mode is PairMode.INDEPENDENT
    if cfg.method is Method.QUADRATURE:
        if independent:
            n = float(cfg.theta_nodes * cfg.phi_nodes)
            _check_budget(len(rho) * n * n, "teleportation")
        fn = _teleport_independent if independent else _teleport_quadrature
        return _batched_quadrature(rho, batch, fn, cfg)

    def make_sampler(r):
        def sample(rng: SeededRng, n: int) -> np.ndarray:
            a0 = haar_ket(rng, 2, n)
            a1 = haar_ket(rng, 2, n) if independent else perp_ket(a0)
            return trace_distance(teleport_output_state(r, a0), teleport_output_state(r, a1))

        return sample

    return _mc_over_states(rho, batch, make_sampler, cfg)
