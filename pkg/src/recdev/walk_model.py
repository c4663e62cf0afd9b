"""Skip-free lattice step laws and their probability generating functions.

A right-continuous walk steps +1 with probability q and -n with probability
p_n (n >= 0); a left-continuous walk steps -1 with probability q and +n with
probability p_n. Both share the pgf

    phi(s) = q + sum_n p_n s^(n+1),

whose coefficient vector is [q, p_0, p_1, ...]. Criticality (zero drift) is
phi'(1) = 1. The stable family phi(s) = s + gamma (1-s)^(1+beta) / (1+beta)
is handled in closed form and expanded on demand through the generalized
binomial recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache as _cache

import numpy as np

from .errors import (
    BadStableParamsError,
    DegenerateP0Error,
    DomainError,
    LawValidationError,
    NotCriticalError,
    NotNormalizedError,
    SingularDerivativeError,
    UnknownNameError,
    ZeroQError,
)

__all__ = [
    "Side",
    "Kind",
    "StepLaw",
    "validate_law",
    "builtin_law",
    "builtin_names",
    "pgf_eval",
    "pgf_coefficients",
    "pgf_one_minus",
    "pgf_minus_const",
    "mean_step",
    "p_zero",
    "law_to_json",
]

CRITICALITY_TOL = 1e-9
NORMALIZATION_TOL = 1e-12
MAX_FINITE_SUPPORT = 10**6


class Side(str, Enum):
    RIGHT = "right"
    LEFT = "left"


class Kind(str, Enum):
    FINITE = "finite"
    STABLE = "stable"


@dataclass(frozen=True)
class StepLaw:
    """A validated skip-free step law. Construct via validate_law/builtin_law.

    Immutable and hashable; safe to share across threads.
    """

    side: Side
    kind: Kind
    q: float
    p: tuple = ()
    gamma: float = 0.0
    beta: float = 0.0

    def describe(self) -> str:
        if self.kind is Kind.STABLE:
            return f"stable:{self.gamma!r}:{self.beta!r}:{self.side.value}"
        return f"finite:{self.side.value} q={self.q!r} p={list(self.p)!r}"


_ALLOWED_KEYS = {"side", "kind", "q", "p", "gamma", "beta"}

_BUILTIN = {
    "ssrw_right": {"side": "right", "kind": "finite", "q": 0.5, "p": [0.0, 0.5]},
    "ssrw_left": {"side": "left", "kind": "finite", "q": 0.5, "p": [0.0, 0.5]},
    "skewed_right": {"side": "right", "kind": "finite", "q": 0.5, "p": [0.25, 0.0, 0.25]},
    "skewed_left": {"side": "left", "kind": "finite", "q": 0.5, "p": [0.25, 0.0, 0.25]},
}


def validate_law(raw) -> StepLaw:
    """Validate an unvalidated step-law description (mapping or StepLaw)."""
    if isinstance(raw, StepLaw):
        raw = law_to_json(raw)
    unknown = set(raw) - _ALLOWED_KEYS
    if unknown:
        raise LawValidationError(f"unknown fields: {sorted(unknown)}")
    try:
        side = Side(raw["side"])
        kind = Kind(raw.get("kind", "finite"))
    except (KeyError, ValueError) as exc:
        raise LawValidationError(f"bad side/kind: {exc}") from exc

    if kind is Kind.STABLE:
        return _validate_stable(side, raw)
    return _validate_finite(side, raw)


def _validate_finite(side: Side, raw) -> StepLaw:
    if "gamma" in raw or "beta" in raw:
        raise LawValidationError("finite laws take q and p, not gamma/beta")
    if "q" not in raw or "p" not in raw:
        raise LawValidationError("finite laws require q and p")
    q = float(raw["q"])
    p = tuple(float(v) for v in raw["p"])
    if len(p) > MAX_FINITE_SUPPORT + 1:
        raise LawValidationError(f"support exceeds the cap of {MAX_FINITE_SUPPORT}")
    if not p:
        raise LawValidationError("p must contain at least p_0")
    if q <= 0.0:
        raise ZeroQError(f"q must be positive, got {q}")
    if any(v < 0.0 for v in p):
        raise NotNormalizedError("negative step probabilities")
    if p[0] >= 1.0:
        raise DegenerateP0Error("p_0 = 1 leaves the walk stuck at zero")
    total = q + math.fsum(p)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalizedError(f"q + sum(p) = {total!r}, expected 1")
    deriv1 = math.fsum((n + 1) * v for n, v in enumerate(p))
    if abs(deriv1 - 1.0) > CRITICALITY_TOL:
        raise NotCriticalError(f"phi'(1) = {deriv1!r}, expected 1 (zero drift)")
    return StepLaw(side=side, kind=Kind.FINITE, q=q, p=p)


def _validate_stable(side: Side, raw) -> StepLaw:
    if raw.get("p"):
        raise LawValidationError("stable laws take gamma/beta, not p")
    try:
        gamma = float(raw["gamma"])
        beta = float(raw["beta"])
    except KeyError as exc:
        raise BadStableParamsError("stable laws require gamma and beta") from exc
    if not (0.0 < gamma < 1.0 and 0.0 < beta < 1.0):
        raise BadStableParamsError(f"gamma={gamma}, beta={beta} must lie in (0, 1)")
    q = gamma / (1.0 + beta)
    if "q" in raw and abs(float(raw["q"]) - q) > NORMALIZATION_TOL:
        raise BadStableParamsError(
            f"q={raw['q']} inconsistent with gamma/(1+beta)={q!r}"
        )
    law = StepLaw(side=side, kind=Kind.STABLE, q=q, gamma=gamma, beta=beta)
    head = pgf_coefficients(law, 32)
    if float(np.min(head)) < -1e-15:
        raise BadStableParamsError("expanded coefficients are negative")
    return law


def builtin_law(name: str) -> StepLaw:
    """Look up a named fixture law, e.g. 'ssrw_right' or 'stable:0.6:0.5:right'."""
    if name in _BUILTIN:
        return validate_law(_BUILTIN[name])
    if name.startswith("stable:"):
        parts = name.split(":")
        if len(parts) == 4 and parts[3] in ("right", "left"):
            try:
                gamma, beta = float(parts[1]), float(parts[2])
            except ValueError as exc:
                raise UnknownNameError(name) from exc
            return validate_law(
                {"side": parts[3], "kind": "stable", "gamma": gamma, "beta": beta}
            )
    raise UnknownNameError(name)


def builtin_names() -> list[str]:
    return sorted(_BUILTIN) + ["stable:<gamma>:<beta>:<right|left>"]


def _coeff_vector(law: StepLaw) -> np.ndarray:
    return np.r_[law.q, np.asarray(law.p, dtype=np.float64)]


@_cache
def _horner_tuples(law: StepLaw) -> tuple:
    """Reversed plain-float coefficient tuples of phi, phi', phi''."""
    c = [law.q, *law.p]
    d1 = [j * v for j, v in enumerate(c)][1:]
    d2 = [j * (j - 1) * v for j, v in enumerate(c)][2:]
    return tuple(c[::-1]), tuple(d1[::-1]), tuple(d2[::-1])


def pgf_eval(law: StepLaw, s: float, order: int = 0) -> float:
    """phi(s), phi'(s) or phi''(s) on [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s={s} outside [0, 1]")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if law.kind is Kind.STABLE:
        g, b = law.gamma, law.beta
        u = 1.0 - s
        if order == 0:
            return s + g / (1.0 + b) * u ** (1.0 + b)
        if order == 1:
            return 1.0 - g * u**b
        if s == 1.0:
            raise SingularDerivativeError("phi'' diverges at s=1 for stable laws")
        return g * b * u ** (b - 1.0)
    acc = 0.0
    for v in _horner_tuples(law)[order]:
        acc = acc * s + v
    return acc


def pgf_coefficients(law: StepLaw, n_out: int) -> np.ndarray:
    """Coefficients of phi up to degree n_out: [q, p_0, p_1, ...].

    Stable-family coefficients come from the generalized binomial recurrence
    t_{j+1} = t_j (j - 1 - beta)/(j + 1); round-off negatives (magnitude
    below 1e-15) are clamped to zero to keep probability semantics.
    """
    if n_out < 1:
        raise ValueError("n_out must be >= 1")
    if law.kind is Kind.FINITE:
        out = np.zeros(n_out + 1)
        c = _coeff_vector(law)
        m = min(len(c), n_out + 1)
        out[:m] = c[:m]
        return out
    g, b = law.gamma, law.beta
    out = np.zeros(n_out + 1)
    out[0] = law.q
    out[1] = 1.0 - g
    if n_out >= 2:
        # t_j = (-1)^j binom(1+beta, j), positive for j >= 2
        j = np.arange(2, n_out, dtype=np.float64)
        ratios = (j - 1.0 - b) / (j + 1.0)
        t = np.empty(n_out - 1)
        t[0] = (1.0 + b) * b / 2.0
        if len(ratios):
            t[1:] = t[0] * np.cumprod(ratios)
        out[2:] = g / (1.0 + b) * t
    if float(np.min(out)) < -1e-15:
        raise LawValidationError("pgf coefficients below the clamp tolerance")
    np.clip(out, 0.0, None, out=out)
    return out


def pgf_one_minus(law: StepLaw, u: float) -> float:
    """1 - phi(1 - u), computed without cancellation for small u."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u={u} outside [0, 1]")
    if law.kind is Kind.STABLE:
        return u * (1.0 - law.gamma / (1.0 + law.beta) * u**law.beta)
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return 1.0 - law.q
    lg = math.log1p(-u)
    return math.fsum(
        -v * math.expm1((n + 1) * lg) for n, v in enumerate(law.p) if v
    )


def pgf_minus_const(law: StepLaw, x: float) -> float:
    """phi(x) - q as a sum of nonnegative terms (no cancellation near 0)."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside [0, 1]")
    if law.kind is Kind.STABLE:
        g, b = law.gamma, law.beta
        if x == 1.0:
            return 1.0 - law.q
        return x - g / (1.0 + b) * (-math.expm1((1.0 + b) * math.log1p(-x)))
    acc = 0.0
    for v in law.p[::-1]:
        acc = acc * x + v
    return acc * x


def mean_step(law: StepLaw) -> float:
    """E[X] from the step probabilities directly."""
    if law.kind is Kind.STABLE:
        return 0.0  # phi'(1) = 1 identically for the stable family
    down = math.fsum(n * v for n, v in enumerate(law.p))
    if law.side is Side.RIGHT:
        return law.q - down
    return down - law.q


def p_zero(law: StepLaw) -> float:
    """Probability of the zero step, p_0."""
    if law.kind is Kind.STABLE:
        return 1.0 - law.gamma
    return law.p[0]


def law_to_json(law: StepLaw) -> dict:
    """JSON-schema form; feeding it back through validate_law round-trips."""
    if law.kind is Kind.STABLE:
        return {
            "side": law.side.value,
            "kind": "stable",
            "q": law.q,
            "gamma": law.gamma,
            "beta": law.beta,
        }
    return {
        "side": law.side.value,
        "kind": "finite",
        "q": law.q,
        "p": list(law.p),
    }
