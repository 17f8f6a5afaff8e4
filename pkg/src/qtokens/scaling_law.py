"""Quality-adjusted token scaling law.

The accuracy model is ``clamp(E + A / N^alpha + B / Dq^beta)`` where N is
the model size in millions of parameters and Dq is the quality-adjusted
("effective") token count. Dq multiplies the raw token count D by a
scaling factor built from the corpus diversity score Dr and syntheticity
score S; four functional forms of that factor are supported:

    F1: D * exp(c1 * Dr + c2 * S)
    F2: D * Dr^c1 * exp(c2 * S)
    F3: D * exp(c1 * Dr) * S^c2
    F4: D * Dr^c1 * S^c2

Accuracy is a fraction in [0, 1]; N is in millions. Only this unit
convention reproduces the shipped preset's accuracy predictions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Mapping

from .errors import ScalingDomainError

FORMS = ("F1", "F2", "F3", "F4")


@dataclass(frozen=True)
class ScalingConstants:
    """The seven fitted parameters plus the effective-token form."""

    e: float
    a: float
    alpha: float
    b: float
    beta: float
    c1: float
    c2: float
    form: str = "F1"

    def __post_init__(self):
        if self.form not in FORMS:
            raise ScalingDomainError(f"form must be one of {FORMS}, got {self.form!r}")
        if self.beta == 0:
            raise ScalingDomainError("beta must be nonzero")
        for name in ("e", "a", "alpha", "b", "beta", "c1", "c2"):
            if not math.isfinite(getattr(self, name)):
                raise ScalingDomainError(f"constant {name} is not finite")

    def to_dict(self) -> dict:
        return {
            "E": self.e,
            "A": self.a,
            "alpha": self.alpha,
            "B": self.b,
            "beta": self.beta,
            "c1": self.c1,
            "c2": self.c2,
            "form": self.form,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScalingConstants":
        try:
            return cls(
                e=float(data["E"]),
                a=float(data["A"]),
                alpha=float(data["alpha"]),
                b=float(data["B"]),
                beta=float(data["beta"]),
                c1=float(data["c1"]),
                c2=float(data["c2"]),
                form=str(data.get("form", "F1")),
            )
        except KeyError as exc:
            raise ScalingDomainError(f"constants JSON missing key {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScalingConstants":
        return cls.from_dict(json.loads(text))

    def with_form(self, form: str) -> "ScalingConstants":
        return replace(self, form=form)


# Shipped presets: the fitted constants for this model, and the published
# re-estimate of the original token-count law (no quality terms, so the
# scaling factor collapses to 1).
PRESETS: dict[str, ScalingConstants] = {
    "paper-ours": ScalingConstants(
        e=1.1400, a=-0.8546, alpha=0.0450, b=-18.3078, beta=0.3683,
        c1=-12.7756, c2=0.6369, form="F1",
    ),
    "besiroglu-chinchilla": ScalingConstants(
        e=1.8172, a=482.01, alpha=0.3478, b=2085.43, beta=0.3658,
        c1=0.0, c2=0.0, form="F1",
    ),
}


def default_initial_guess(form: str = "F1") -> ScalingConstants:
    """Standard starting point for fits: the published token-count law
    constants with both quality coefficients at 0.5."""
    base = PRESETS["besiroglu-chinchilla"]
    return replace(base, c1=0.5, c2=0.5, form=form)


@dataclass(frozen=True)
class QualityInputs:
    """One prediction query: token count, quality scores, model size."""

    d: float
    dr: float
    s: float
    n_millions: float

    def __post_init__(self):
        for name in ("d", "dr", "s", "n_millions"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ScalingDomainError(f"{name} must be finite and > 0, got {value}")


def scaling_factor_q(dr: float, s: float, c1: float, c2: float) -> float:
    """Multiplicative quality adjustment ``exp(c1 * dr + c2 * s)``."""
    for name, value in (("dr", dr), ("s", s), ("c1", c1), ("c2", c2)):
        if not math.isfinite(value):
            raise ScalingDomainError(f"{name} is not finite: {value}")
    return math.exp(c1 * dr + c2 * s)


def effective_tokens_raw(d: float, dr: float, s: float, consts: ScalingConstants) -> float:
    """Effective token count for raw inputs under the selected form.

    Power forms (F2-F4) need strictly positive Dr / S wherever they are
    exponentiated; violations raise rather than being regularized away.
    """
    form = consts.form
    if form == "F1":
        return d * math.exp(consts.c1 * dr + consts.c2 * s)
    if form == "F2":
        if dr <= 0:
            raise ScalingDomainError(f"form F2 requires dr > 0, got {dr}")
        return d * dr**consts.c1 * math.exp(consts.c2 * s)
    if form == "F3":
        if s <= 0:
            raise ScalingDomainError(f"form F3 requires s > 0, got {s}")
        return d * math.exp(consts.c1 * dr) * s**consts.c2
    if dr <= 0 or s <= 0:
        raise ScalingDomainError(f"form F4 requires dr > 0 and s > 0, got dr={dr}, s={s}")
    return d * dr**consts.c1 * s**consts.c2


def effective_tokens(q_in: QualityInputs, consts: ScalingConstants) -> float:
    """Effective token count Dq for a validated query."""
    return effective_tokens_raw(q_in.d, q_in.dr, q_in.s, consts)


def clamp_unit(x: float) -> float:
    """Restrict a score to [0, 1]."""
    return min(max(x, 0.0), 1.0)


def predict_accuracy_unclamped(q_in: QualityInputs, consts: ScalingConstants) -> float:
    """Model score before clamping; the quantity the fit and the
    inversion operate on."""
    dq = effective_tokens(q_in, consts)
    return consts.e + consts.a / q_in.n_millions**consts.alpha + consts.b / dq**consts.beta


def predict_accuracy(q_in: QualityInputs, consts: ScalingConstants) -> float:
    """Predicted average zero-shot accuracy, clamped to [0, 1]."""
    return clamp_unit(predict_accuracy_unclamped(q_in, consts))


def invert_effective_tokens(consts: ScalingConstants, n_millions: float, score: float) -> float:
    """Effective tokens needed to reach an (unclamped) score at size N.

    Solves ``score = E + A / N^alpha + B / Dq^beta`` for Dq:
    ``Dq = (B * N^alpha / ((score - E) * N^alpha - A)) ** (1 / beta)``.
    Callers must pass unclamped scores; outside the domain of the real
    root this raises.
    """
    if not (math.isfinite(n_millions) and n_millions > 0):
        raise ScalingDomainError(f"n_millions must be finite and > 0, got {n_millions}")
    if not math.isfinite(score):
        raise ScalingDomainError(f"score is not finite: {score}")
    n_alpha = n_millions**consts.alpha
    denom = (score - consts.e) * n_alpha - consts.a
    numer = consts.b * n_alpha
    if denom == 0:
        raise ScalingDomainError("loss unreachable at this model size")
    quotient = numer / denom
    if not (math.isfinite(quotient) and quotient > 0):
        raise ScalingDomainError("loss unreachable at this model size")
    return quotient ** (1.0 / consts.beta)
