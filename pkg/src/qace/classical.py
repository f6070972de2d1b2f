"""Classical cause-effect models with a latent common cause.

The model has the shape Lambda -> A, Lambda -> B, A -> B with finite
alphabets ``range(n)``. Tables are indexed as

* ``p_lambda[l]``,
* ``p_a_given_lambda[l, a]``,
* ``p_b_given_a_lambda[a, l, b]``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from os import PathLike

import numpy as np

PROB_ATOL = 1e-12


class ModelValidationError(ValueError):
    pass


class ZeroProbabilityError(ValueError):
    """Conditioning on a value of A that has probability zero."""


def check_distribution(p, name: str = "distribution", axis: int = -1) -> np.ndarray:
    """Validate nonnegative rows summing to one along ``axis``."""
    p = np.asarray(p, dtype=float)
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise ModelValidationError(f"{name} must be a nonempty finite table")
    if np.any(p < 0):
        raise ModelValidationError(f"{name} has negative entries")
    dev = np.max(np.abs(p.sum(axis=axis) - 1.0))
    if dev > PROB_ATOL:
        raise ModelValidationError(f"{name} rows do not sum to 1 (deviation {dev:.3e})")
    return p


@dataclass(frozen=True)
class CausalModel:
    p_lambda: np.ndarray
    p_a_given_lambda: np.ndarray
    p_b_given_a_lambda: np.ndarray

    def __post_init__(self):
        pl = check_distribution(self.p_lambda, "p_lambda")
        pa = check_distribution(self.p_a_given_lambda, "p_a_given_lambda")
        pb = check_distribution(self.p_b_given_a_lambda, "p_b_given_a_lambda")
        if pl.ndim != 1 or pa.ndim != 2 or pb.ndim != 3:
            raise ModelValidationError("tables must have shapes (L,), (L, A) and (A, L, B)")
        n_l = pl.shape[0]
        n_a = pa.shape[1]
        if pa.shape[0] != n_l or pb.shape[:2] != (n_a, n_l):
            raise ModelValidationError(
                f"inconsistent cardinalities: p_lambda {pl.shape}, p_a_given_lambda {pa.shape}, "
                f"p_b_given_a_lambda {pb.shape}"
            )
        object.__setattr__(self, "p_lambda", pl)
        object.__setattr__(self, "p_a_given_lambda", pa)
        object.__setattr__(self, "p_b_given_a_lambda", pb)

    @property
    def n_a(self) -> int:
        return self.p_a_given_lambda.shape[1]

    @property
    def n_b(self) -> int:
        return self.p_b_given_a_lambda.shape[2]

    @property
    def n_lambda(self) -> int:
        return self.p_lambda.shape[0]

    def joint(self) -> np.ndarray:
        """p(lambda, a, b) as an (L, A, B) array."""
        pb = np.transpose(self.p_b_given_a_lambda, (1, 0, 2))
        return self.p_lambda[:, None, None] * self.p_a_given_lambda[:, :, None] * pb


def _check_a(model: CausalModel, a: int) -> int:
    a = int(a)
    if not 0 <= a < model.n_a:
        raise ValueError(f"a = {a} outside the alphabet of size {model.n_a}")
    return a


def observational(model: CausalModel, a: int) -> np.ndarray:
    """p(b | a) = sum_l p(l | a) p(b | a, l) with p(l | a) from Bayes' rule."""
    a = _check_a(model, a)
    weights = model.p_lambda * model.p_a_given_lambda[:, a]
    pa = weights.sum()
    if pa <= 0.0:
        raise ZeroProbabilityError(f"p(a = {a}) = 0, so p(b | a) is undefined")
    return (weights / pa) @ model.p_b_given_a_lambda[a]


def interventional(model: CausalModel, a: int) -> np.ndarray:
    """p(b | do(a)) = sum_l p(l) p(b | a, l)."""
    a = _check_a(model, a)
    return model.p_lambda @ model.p_b_given_a_lambda[a]


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"alphabet mismatch: {p.shape} vs {q.shape}")
    return p, q


def tvd(p, q) -> float:
    """Total variation distance 0.5 sum |p - q|."""
    p, q = _pair(p, q)
    return 0.5 * float(np.sum(np.abs(p - q)))


def ace_binary(p1, p0) -> float:
    """|P1(b=1) - P0(b=1)| for binary outcome distributions."""
    p1, p0 = _pair(p1, p0)
    if p1.shape[0] != 2:
        raise ValueError(f"ace_binary needs a binary alphabet, got size {p1.shape[0]}")
    return abs(float(p1[1] - p0[1]))


def ace_max(p1, p0) -> float:
    """max_b |P1(b) - P0(b)|."""
    p1, p0 = _pair(p1, p0)
    return float(np.max(np.abs(p1 - p0)))


def ace_tvd(p1, p0) -> float:
    """ACE maximized over binary coarse-grainings, which is the TVD."""
    return tvd(p1, p0)


def coarse_grain(p, subset) -> np.ndarray:
    """Binary distribution (P(b not in subset), P(b in subset))."""
    p = np.asarray(p, dtype=float)
    inside = float(np.sum(p[list(subset)])) if len(subset) else 0.0
    return np.array([1.0 - inside, inside])


def max_coarse_grained_ace(p1, p0) -> float:
    """Brute force over all 2^|B| subsets; intended for small alphabets."""
    p1, p0 = _pair(p1, p0)
    n = p1.shape[0]
    best = 0.0
    for mask in itertools.product((False, True), repeat=n):
        subset = [i for i in range(n) if mask[i]]
        best = max(best, ace_binary(coarse_grain(p1, subset), coarse_grain(p0, subset)))
    return best


def model_from_json(doc: dict) -> CausalModel:
    """Build a model from ``{"p_lambda", "p_a_given_lambda", "p_b_given_a_lambda"}``.

    An optional ``"cardinalities": {"a", "b", "lambda"}`` block is checked
    against the table shapes.
    """
    try:
        model = CausalModel(
            np.asarray(doc["p_lambda"], dtype=float),
            np.asarray(doc["p_a_given_lambda"], dtype=float),
            np.asarray(doc["p_b_given_a_lambda"], dtype=float),
        )
    except KeyError as exc:
        raise ModelValidationError(f"model is missing table {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelValidationError):
            raise
        raise ModelValidationError(f"malformed probability table: {exc}") from None
    card = doc.get("cardinalities")
    if card is not None:
        got = {"a": model.n_a, "b": model.n_b, "lambda": model.n_lambda}
        for key, val in card.items():
            if key not in got or int(val) != got[key]:
                raise ModelValidationError(f"cardinality {key}={val} does not match the tables ({got})")
    return model


def load_model(path: str | PathLike) -> CausalModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelValidationError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelValidationError("model file must hold a JSON object")
    return model_from_json(doc)


def model_to_json(model: CausalModel) -> dict:
    return {
        "cardinalities": {"a": model.n_a, "b": model.n_b, "lambda": model.n_lambda},
        "p_lambda": model.p_lambda.tolist(),
        "p_a_given_lambda": model.p_a_given_lambda.tolist(),
        "p_b_given_a_lambda": model.p_b_given_a_lambda.tolist(),
    }
