"""Problem parameters and the closed-form exponents of the radial Pucci problem.

The equation is ``M(D^2 u) + |x|^a u^p = 0`` with ``M`` one of the two Pucci
extremal operators with ellipticity constants ``0 < lam <= Lam``.  Everything
that depends on ``p`` is computed on demand since ``p`` is the bisection
variable.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class ParamsError(ValueError):
    """Base class for rejected parameter sets."""


class NonPositiveEllipticity(ParamsError):
    pass


class LambdaOrder(ParamsError):
    pass


class DimensionTooSmall(ParamsError):
    pass


class WeightTooNegative(ParamsError):
    pass


class DegenerateDimensionLike(ParamsError):
    pass


class PBelowOne(ParamsError):
    pass


class Operator(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def parse(cls, value: "str | Operator") -> "Operator":
        if isinstance(value, Operator):
            return value
        v = str(value).strip().lower()
        aliases = {"plus": cls.PLUS, "+": cls.PLUS, "mplus": cls.PLUS, "m+": cls.PLUS,
                   "minus": cls.MINUS, "-": cls.MINUS, "mminus": cls.MINUS, "m-": cls.MINUS}
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown operator {value!r}") from None


@dataclass(frozen=True)
class ProblemParams:
    """Validated problem data.  Build through :func:`make_params`."""

    lam: float
    Lam: float
    operator: Operator
    N: int
    a: float

    @property
    def n_tilde_plus(self) -> float:
        return self.lam / self.Lam * (self.N - 1) + 1.0

    @property
    def n_tilde_minus(self) -> float:
        return self.Lam / self.lam * (self.N - 1) + 1.0

    @property
    def n_tilde(self) -> float:
        """Dimension-like number that governs the convex (lower) region."""
        return self.n_tilde_plus if self.operator is Operator.PLUS else self.n_tilde_minus

    @property
    def kappa_up(self) -> float:
        # coefficient dividing Z above the concavity line (u'' <= 0)
        return self.lam if self.operator is Operator.PLUS else self.Lam

    @property
    def kappa_down(self) -> float:
        # coefficient dividing Z below the concavity line (u'' > 0)
        return self.Lam if self.operator is Operator.PLUS else self.lam

    @property
    def n_tilde_3q(self) -> float:
        return self.n_tilde_minus if self.operator is Operator.PLUS else self.n_tilde_plus

    @property
    def kappa_3q(self) -> float:
        return self.Lam if self.operator is Operator.PLUS else self.lam

    @property
    def concavity_level(self) -> float:
        return self.kappa_up * (self.N - 1)

    @property
    def n0_height(self) -> float:
        """Z coordinate of the saddle on the Z axis."""
        return self.kappa_up * (self.N + self.a)

    @property
    def wall(self) -> float:
        return self.n_tilde - 2.0

    def alpha(self, p: float) -> float:
        check_p(p)
        return (2.0 + self.a) / (p - 1.0)

    def field_vector(self, p: float) -> tuple[float, ...]:
        """Packed constants consumed by the integration kernels."""
        return (float(p), float(self.a), float(self.N), self.n_tilde, self.kappa_up,
                self.kappa_down, self.concavity_level, self.n_tilde_3q, self.kappa_3q)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "Lambda": self.Lam, "operator": self.operator.value,
                "N": self.N, "a": self.a}


def make_params(lam: float, Lam: float, operator: "str | Operator" = Operator.PLUS,
                N: int = 3, a: float = 0.0) -> ProblemParams:
    """Validate raw inputs and return a :class:`ProblemParams`.

    Raises one of the :class:`ParamsError` subclasses on invalid data; the
    dimension-like number of ``M+`` must exceed 2.
    """
    op = Operator.parse(operator)
    lam = float(lam)
    Lam = float(Lam)
    a = float(a)
    if not (lam > 0 and Lam > 0) or not (math.isfinite(lam) and math.isfinite(Lam)):
        raise NonPositiveEllipticity(f"ellipticity constants must be positive, got {lam}, {Lam}")
    if lam > Lam:
        raise LambdaOrder(f"need lambda <= Lambda, got {lam} > {Lam}")
    if int(N) != N:
        raise DimensionTooSmall(f"dimension must be an integer, got {N}")
    N = int(N)
    if N < 3:
        raise DimensionTooSmall(f"need N >= 3, got {N}")
    if not (a > -1.0) or not math.isfinite(a):
        raise WeightTooNegative(f"need a > -1, got {a}")
    params = ProblemParams(lam, Lam, op, N, a)
    if op is Operator.PLUS and params.n_tilde_plus <= 2.0:
        raise DegenerateDimensionLike(
            f"Ñ₊ ≤ 2 (Ñ₊ = {params.n_tilde_plus:g}); the M+ problem needs Ñ₊ > 2")
    return params


def check_p(p: float) -> None:
    if not p > 1.0:
        raise PBelowOne(f"need p > 1, got {p}")


@dataclass(frozen=True)
class ExponentSet:
    n_tilde_plus: float
    n_tilde_minus: float
    n_tilde: float
    operator: Operator
    p: float
    alpha: float
    p_serrin: float
    p_pseudo: float
    p_sobolev: float

    def ordering_holds(self) -> bool:
        if self.operator is Operator.PLUS:
            return max(self.p_serrin, self.p_sobolev) <= self.p_pseudo * (1 + 1e-14)
        return self.p_serrin <= self.p_pseudo * (1 + 1e-14) and \
            self.p_pseudo <= self.p_sobolev * (1 + 1e-14)

    def as_dict(self) -> dict:
        return {
            "n_tilde_plus": self.n_tilde_plus,
            "n_tilde_minus": self.n_tilde_minus,
            "n_tilde": self.n_tilde,
            "operator": self.operator.value,
            "p": self.p,
            "alpha": self.alpha,
            "p_serrin": self.p_serrin,
            "p_pseudo": self.p_pseudo,
            "p_sobolev": self.p_sobolev,
        }


def p_serrin(params: ProblemParams) -> float:
    nt = params.n_tilde
    return (nt + params.a) / (nt - 2.0)


def p_pseudo(params: ProblemParams) -> float:
    nt = params.n_tilde
    return (nt + 2.0 * params.a + 2.0) / (nt - 2.0)


def p_sobolev(params: ProblemParams) -> float:
    return (params.N + 2.0 + 2.0 * params.a) / (params.N - 2.0)


def exponents(params: ProblemParams, p: float | None = None) -> ExponentSet:
    """All derived exponents; ``alpha`` is NaN when ``p`` is omitted."""
    if p is not None:
        check_p(p)
        alpha = params.alpha(p)
    else:
        alpha = math.nan
    return ExponentSet(
        n_tilde_plus=params.n_tilde_plus,
        n_tilde_minus=params.n_tilde_minus,
        n_tilde=params.n_tilde,
        operator=params.operator,
        p=math.nan if p is None else float(p),
        alpha=alpha,
        p_serrin=p_serrin(params),
        p_pseudo=p_pseudo(params),
        p_sobolev=p_sobolev(params),
    )
