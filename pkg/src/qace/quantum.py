"""States, gates and the concurrence for two-qubit causal-effect scenarios.

Kets are 1-D complex arrays (trailing dimension 2 or 4); density operators are
square complex arrays. Qubit ordering is most-significant first, so in
``|ab>`` the first label belongs to qubit A.
"""

from __future__ import annotations

import json
import math
from dataclasses import InitVar, dataclass, field
from os import PathLike
from typing import Sequence

import numpy as np

from qace.linalg import (
    dagger,
    hermitian_eigenvalues,
    hermitian_eigh,
    kron,
    tensor_product,
    validate_density,
)

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)

UNITARY_ATOL = 1e-10
GATE_FILE_ATOL = 1e-8

GATE_NAMES = ("CNOT", "CZ", "B", "SQRT_SWAP", "SWAP", "LOCAL")
FAMILIES = ("F", "G", "H", "ISO", "C", "C'", "C''", "F_SCHMIDT")


class GateValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# single-qubit kets


def bloch_ket(theta, phi) -> np.ndarray:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>, broadcasting over angles."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    c, s, phi = np.broadcast_arrays(c, s, phi)
    return np.stack([c + 0j, np.exp(1j * phi) * s], axis=-1)


def orthogonal_ket(theta, phi) -> np.ndarray:
    """sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>, the antipode of ``bloch_ket``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    c, s, phi = np.broadcast_arrays(c, s, phi)
    return np.stack([s + 0j, -np.exp(1j * phi) * c], axis=-1)


def equator_kets(phi) -> tuple[np.ndarray, np.ndarray]:
    """The X-Y plane measurement pair ((|0> + e^{i phi}|1>)/sqrt2, (|0> - e^{i phi}|1>)/sqrt2)."""
    phi = np.asarray(phi, dtype=float)
    e = np.exp(1j * phi) / math.sqrt(2)
    one = np.full_like(e, 1 / math.sqrt(2))
    return np.stack([one, e], axis=-1), np.stack([one, -e], axis=-1)


def perp_ket(ket: np.ndarray) -> np.ndarray:
    """A ket orthogonal to a single-qubit ``ket`` (fixed phase convention)."""
    ket = np.asarray(ket)
    return np.stack([np.conj(ket[..., 1]), -np.conj(ket[..., 0])], axis=-1)


def bloch_angles(ket: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of ``bloch_ket`` up to global phase: returns (theta, phi)."""
    ket = np.asarray(ket)
    a = np.abs(ket[..., 0])
    b = np.abs(ket[..., 1])
    theta = 2 * np.arctan2(b, a)
    phi = np.mod(np.angle(ket[..., 1]) - np.angle(ket[..., 0]), 2 * np.pi)
    return theta, phi


def projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket)
    return ket[..., :, None] * np.conj(ket[..., None, :])


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """(tr X rho, tr Y rho, tr Z rho) for single-qubit operators."""
    return np.real(np.einsum("kij,...ji->...k", PAULIS, rho))


# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class Gate:
    """A named two-qubit unitary.

    ``factors`` keeps (Q, P) for local gates so their tensor structure can be
    checked after construction.
    """

    name: str
    matrix: np.ndarray = field(repr=False)
    factors: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)
    atol: InitVar[float] = UNITARY_ATOL

    def __post_init__(self, atol: float):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise GateValidationError(f"gate {self.name!r} must be 4x4, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        dev = unitarity_deviation(m)
        if dev > atol:
            raise GateValidationError(
                f"gate {self.name!r} is not unitary: ||U^H U - I||_inf = {dev:.3e}"
            )


def unitarity_deviation(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(dagger(m) @ m - np.eye(m.shape[-1]))))


def _b_gate() -> np.ndarray:
    c = math.cos(math.pi / 8)
    s = math.sin(math.pi / 8)
    return np.array(
        [
            [c, 0, 0, 1j * s],
            [0, s, 1j * c, 0],
            [0, 1j * c, s, 0],
            [1j * s, 0, 0, c],
        ],
        dtype=complex,
    )


def _sqrt_swap() -> np.ndarray:
    e = np.exp(1j * math.pi / 8)
    f = np.exp(-1j * math.pi / 8) / math.sqrt(2)
    return np.array(
        [
            [e, 0, 0, 0],
            [0, f, 1j * f, 0],
            [0, 1j * f, f, 0],
            [0, 0, 0, e],
        ],
        dtype=complex,
    )


def standard_gate(name: str, q: np.ndarray | None = None, p: np.ndarray | None = None) -> Gate:
    """One of the benchmark gates: CNOT, CZ, B, SQRT_SWAP, SWAP or LOCAL.

    ``LOCAL`` builds ``q (x) p`` and needs both single-qubit unitaries.
    """
    key = name.upper().replace("-", "_")
    if key == "CNOT":
        m = kron(projector(KET_0), IDENTITY) + kron(projector(KET_1), PAULI_X)
    elif key == "CZ":
        m = kron(projector(KET_0), IDENTITY) + kron(projector(KET_1), PAULI_Z)
    elif key == "B":
        m = _b_gate()
    elif key in ("SQRT_SWAP", "SQRTSWAP"):
        key = "SQRT_SWAP"
        m = _sqrt_swap()
    elif key == "SWAP":
        m = 0.5 * (kron(IDENTITY, IDENTITY) + sum(kron(s, s) for s in PAULIS))
    elif key == "LOCAL":
        if q is None or p is None:
            raise ValueError("LOCAL gate needs both single-qubit factors q and p")
        q = np.asarray(q, dtype=complex)
        p = np.asarray(p, dtype=complex)
        return Gate("LOCAL", tensor_product(q, p), factors=(q, p))
    else:
        raise ValueError(f"unknown gate {name!r}; expected one of {', '.join(GATE_NAMES)}")
    return Gate(key, m)


def load_gate(path: str | PathLike) -> Gate:
    """Read ``{"name": str, "matrix": 4x4 array of [re, im] pairs}``."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GateValidationError(f"gate file is not valid JSON: {exc}") from None
    return gate_from_json(doc)


def gate_from_json(doc: dict) -> Gate:
    try:
        name = str(doc["name"])
        raw = np.asarray(doc["matrix"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise GateValidationError(f"malformed gate document: {exc}") from exc
    if raw.shape != (4, 4, 2):
        raise GateValidationError(f"gate matrix must be 4x4 [re, im] pairs, got shape {raw.shape}")
    return Gate(name, raw[..., 0] + 1j * raw[..., 1], atol=GATE_FILE_ATOL)


def gate_to_json(gate: Gate) -> dict:
    m = gate.matrix
    return {
        "name": gate.name,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


# ---------------------------------------------------------------------------
# resource states


def graph_state_g2() -> np.ndarray:
    """(|0+> + |1->)/sqrt2 = (1, 1, 1, -1)/2."""
    return (tensor_product(KET_0, KET_PLUS) + tensor_product(KET_1, KET_MINUS)) / math.sqrt(2)


def bell_state() -> np.ndarray:
    """(|00> + |11>)/sqrt2."""
    return np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def _g_eps(eps: float) -> np.ndarray:
    return math.sqrt(eps) * tensor_product(KET_0, KET_PLUS) + math.sqrt(1 - eps) * tensor_product(
        KET_1, KET_MINUS
    )


def classical_params_for(eps: float) -> tuple[float, float, float, float]:
    """Default one-parameter path through the classically correlated states.

    p00 = p11 = eps/2 and p01 = p10 = (1 - eps)/2, so the correlation
    p00 + p11 - p01 - p10 equals 2 eps - 1.
    """
    return (eps / 2, (1 - eps) / 2, (1 - eps) / 2, eps / 2)


def _check_probs(params: Sequence[float]) -> np.ndarray:
    p = np.asarray(params, dtype=float)
    if p.shape != (4,) or np.any(p < 0) or np.any(p > 1) or abs(p.sum() - 1) > 1e-12:
        raise ValueError(f"classical parameters must be 4 probabilities summing to 1, got {params}")
    return p


def _rho_c(params: Sequence[float]) -> np.ndarray:
    # the X-basis sits on the measured qubit; see README "state conventions"
    p = _check_probs(params)
    rho = np.zeros((4, 4), dtype=complex)
    basis = (KET_PLUS, KET_MINUS)
    comp = (KET_0, KET_1)
    for i in range(2):
        for j in range(2):
            ket = tensor_product(basis[i], comp[j])
            rho += p[2 * i + j] * projector(ket)
    return rho


def family_state(family: str, eps: float, params: Sequence[float] | None = None) -> np.ndarray:
    """Density operator of one of the parameterized resource families.

    Families: ``G`` (sqrt(eps)|0+> + sqrt(1-eps)|1->), ``F`` = (H x 1) G,
    ``H`` = (H x H) G, ``ISO`` = eps |G2><G2| + (1 - eps) I/4, the classically
    correlated ``C``, ``C'`` = (H x 1) C (H x 1) and ``C''`` = (H x H) C (H x H),
    and ``F_SCHMIDT`` = sqrt(eps)|00> + sqrt(1-eps)|11>.

    For the ``C`` families ``params`` gives (p00, p01, p10, p11); when omitted,
    ``classical_params_for(eps)`` is used.
    """
    eps = float(eps)
    if not (0.0 <= eps <= 1.0) or math.isnan(eps):
        raise ValueError(f"epsilon must lie in [0, 1], got {eps}")
    key = family.upper()
    hh = kron(HADAMARD, HADAMARD)
    h1 = kron(HADAMARD, IDENTITY)
    if key == "G":
        return projector(_g_eps(eps))
    if key == "F":
        return projector(h1 @ _g_eps(eps))
    if key == "H":
        return projector(hh @ _g_eps(eps))
    if key == "F_SCHMIDT":
        return projector(np.array([math.sqrt(eps), 0, 0, math.sqrt(1 - eps)], dtype=complex))
    if key == "ISO":
        return eps * projector(graph_state_g2()) + (1 - eps) * np.eye(4) / 4
    if key in ("C", "C'", "C''"):
        rho = _rho_c(params if params is not None else classical_params_for(eps))
        if key == "C'":
            return h1 @ rho @ h1
        if key == "C''":
            return hh @ rho @ hh
        return rho
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


# ---------------------------------------------------------------------------
# entanglement


_YY = kron(PAULI_Y, PAULI_Y)


def concurrence(rho: np.ndarray, *, validate: bool = True) -> np.ndarray | float:
    """Wootters concurrence of a two-qubit density operator (or stack).

    With rho = W W^H and W = V sqrt(Lambda) from the eigendecomposition, the
    Wootters lambdas are the singular values of tau = W^T (Y x Y) W. They are
    read off as the positive eigenvalues of the Hermitian dilation
    [[0, tau], [tau^H, 0]], which avoids square roots of roundoff-level
    eigenvalues of sqrt(rho) rho~ sqrt(rho) for nearly pure states.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ValueError(f"concurrence needs 4x4 density operators, got {rho.shape}")
    if validate:
        validate_density(rho)
    w, v = hermitian_eigh(0.5 * (rho + dagger(rho)))
    factor = v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]
    tau = np.swapaxes(factor, -1, -2) @ _YY @ factor
    zero = np.zeros_like(tau)
    dilation = np.concatenate(
        [np.concatenate([zero, tau], axis=-1), np.concatenate([dagger(tau), zero], axis=-1)], axis=-2
    )
    lam = hermitian_eigenvalues(dilation)[..., :4]
    c = np.clip(lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3], 0.0, 1.0)
    return float(c) if np.ndim(c) == 0 else c


def pure_concurrence(psi: np.ndarray) -> np.ndarray | float:
    """2|ad - bc| for amplitudes (a, b, c, d)."""
    psi = np.asarray(psi)
    c = 2 * np.abs(psi[..., 0] * psi[..., 3] - psi[..., 1] * psi[..., 2])
    return float(c) if np.ndim(c) == 0 else c


def schmidt_decomposition(psi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt coefficients and bases of a two-qubit ket.

    Returns ``(s, u, v)`` with ``s`` descending and
    ``psi = sum_k s[k] u[:, k] x v[:, k]``.
    """
    psi = np.asarray(psi, dtype=complex)
    m = psi.reshape(psi.shape[:-1] + (2, 2))
    w, u = hermitian_eigh(m @ dagger(m))
    s = np.sqrt(np.clip(w, 0.0, None))
    # v_k = M^T conj(u_k) / s_k; a vanishing s_k takes the orthogonal partner of v_0
    v = np.swapaxes(m, -1, -2) @ np.conj(u)
    v0 = v[..., :, 0] / s[..., 0, None]
    v1 = np.where(s[..., 1, None] > 1e-12, v[..., :, 1] / np.where(s[..., 1, None] > 1e-12, s[..., 1, None], 1.0), 0)
    partner = np.stack([-np.conj(v0[..., 1]), np.conj(v0[..., 0])], axis=-1)
    v1 = np.where(s[..., 1, None] > 1e-12, v1, partner)
    return s, u, np.stack([v0, v1], axis=-1)


def h_form(psi: np.ndarray) -> np.ndarray:
    """Local rotation of a two-qubit ket onto the H family.

    Maps the Schmidt bases to (|+>, |->) on the first qubit and (|0>, |1>) on
    the second, giving s0 |+0> + s1 |-1>, the H-family state with
    eps = s0^2.
    """
    s, _, _ = schmidt_decomposition(psi)
    return s[..., 0, None] * tensor_product(KET_PLUS, KET_0) + s[..., 1, None] * tensor_product(
        KET_MINUS, KET_1
    )


def h_form_rotation(psi: np.ndarray) -> np.ndarray:
    """The local unitary (V x W) with (V x W) psi = h_form(psi)."""
    _, u, v = schmidt_decomposition(psi)
    target_a = np.stack([KET_PLUS, KET_MINUS], axis=-1)
    target_b = np.stack([KET_0, KET_1], axis=-1)
    return tensor_product(target_a @ dagger(u), target_b @ dagger(v))
