"""Shared scalar types: domain widths, field-bound bundles, schedules, norms.

Everything here is an immutable value validated at construction; all
operations are pure functions, so the types are safe to share across
parallel parameter scans.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

RESTRICTED_COMPONENTS = ("L", "G", "l", "g")

# Contraction factors live in the open interval (0, 2/3); the upper edge is
# excluded because the iteration-step condition needs strict inequality.
CONTRACTION_SUP = 2.0 / 3.0


class DomainError(ValueError):
    """A geometric quantity (width, radius, axis) left its admissible range."""


class StructureError(ValueError):
    """Two objects that must share structure (base point, variable count) do not."""


def _require_positive(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not (value > 0.0) or not math.isfinite(value):
            raise DomainError(f"{name} must be finite and > 0, got {value!r}")


def _require_nonnegative(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not (value >= 0.0) or not math.isfinite(value):
            raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class WidthSet:
    """Analyticity geometry of the two-action polydisk domain.

    Parameters
    ----------
    rho : float
        Real action-ball radius around the expansion point.
    r : float
        Action analyticity width (complex offset radius).
    s : float
        Angle strip half-width (imaginary part, dimensionless).
    xi : float
        Real cartesian ball radius.
    u : float
        Cartesian analyticity width.

    The derived ratio ``beta = sqrt(r*s)/u`` is recomputed on access so it
    can never go stale.
    """

    rho: float
    r: float
    s: float
    xi: float
    u: float

    def __post_init__(self) -> None:
        _require_positive(rho=self.rho, r=self.r, s=self.s, xi=self.xi, u=self.u)

    @property
    def beta(self) -> float:
        return math.sqrt(self.r * self.s) / self.u

    @classmethod
    def from_beta(cls, rho: float, r: float, s: float, xi: float, beta: float = 1.0) -> "WidthSet":
        """Build a width set with ``u`` chosen so the cartesian ratio equals ``beta``."""
        _require_positive(beta=beta)
        return cls(rho=rho, r=r, s=s, xi=xi, u=math.sqrt(r * s) / beta)

    # Scaled-domain helpers.  A subscript ``a`` scales (r, s, u) by ``a``
    # while rho and xi stay fixed; all callers adopt this convention.
    def action_radius(self, scale: float = 1.0) -> float:
        return self.rho + scale * self.r

    def angle_width(self, scale: float = 1.0) -> float:
        return scale * self.s

    def cart_radius(self, scale: float = 1.0) -> float:
        return self.xi + scale * self.u


@dataclass(frozen=True)
class RestrictedWidthSet:
    """Per-component domain geometry for the one-body (restricted) problem."""

    rho_L: float
    rho_G: float
    r_L: float
    r_G: float
    s_l: float
    s_g: float

    def __post_init__(self) -> None:
        _require_positive(
            rho_L=self.rho_L, rho_G=self.rho_G,
            r_L=self.r_L, r_G=self.r_G,
            s_l=self.s_l, s_g=self.s_g,
        )

    def component_width(self, component: str) -> float:
        """Width dividing the matching vector-field component sup."""
        try:
            return {
                "L": self.r_L, "G": self.r_G, "l": self.s_l, "g": self.s_g,
            }[component]
        except KeyError:
            raise StructureError(f"unknown component {component!r}") from None

    def action_radii(self, scale: float = 1.0) -> tuple[float, float]:
        return (self.rho_L + scale * self.r_L, self.rho_G + scale * self.r_G)

    def offset_radii(self, scale: float = 1.0) -> tuple[float, float]:
        return (scale * self.r_L, scale * self.r_G)

    def angle_widths(self, scale: float = 1.0) -> tuple[float, float]:
        return (scale * self.s_l, scale * self.s_g)


@dataclass(frozen=True)
class FieldBounds:
    """Scalar bound bundle for the split perturbation.

    ``eta0``/``gamma0`` bound the action-angle anisotropic norms of the
    non-resonant and resonant vector fields, ``Xi0``/``Gamma0`` their
    cartesian counterparts, ``delta`` the quadratic-remainder field, and
    ``f0_norm``/``g0_norm`` the sup-norms of the functions themselves.
    """

    eta0: float
    gamma0: float
    delta: float
    Xi0: float
    Gamma0: float
    f0_norm: float
    g0_norm: float

    def __post_init__(self) -> None:
        _require_nonnegative(
            eta0=self.eta0, gamma0=self.gamma0, delta=self.delta,
            Xi0=self.Xi0, Gamma0=self.Gamma0,
            f0_norm=self.f0_norm, g0_norm=self.g0_norm,
        )


@dataclass(frozen=True)
class RestrictedFieldBounds:
    """Per-component bound bundle for the restricted problem.

    ``eta0[j]`` and ``gamma0[j]`` are anisotropic bounds for the
    non-resonant and resonant fields for j in {L, G, l, g}; ``delta``
    bounds the quadratic-remainder component conjugate to the first
    action.
    """

    eta0: Mapping[str, float]
    gamma0: Mapping[str, float]
    delta: float
    f0_norm: float
    g0_norm: float

    def __post_init__(self) -> None:
        for name, table in (("eta0", self.eta0), ("gamma0", self.gamma0)):
            if set(table) != set(RESTRICTED_COMPONENTS):
                raise StructureError(f"{name} must carry exactly components {RESTRICTED_COMPONENTS}")
            for j, value in table.items():
                _require_nonnegative(**{f"{name}[{j}]": value})
        _require_nonnegative(delta=self.delta, f0_norm=self.f0_norm, g0_norm=self.g0_norm)

    def eta_max(self) -> float:
        return max(self.eta0.values())


def _check_contraction(name: str, value: float) -> None:
    if not (0.0 < value < CONTRACTION_SUP):
        raise DomainError(f"{name} must lie in (0, 2/3), got {value!r}")


@dataclass(frozen=True)
class Schedule:
    """Iteration count and contraction factors for the normal-form recursion."""

    m: int
    p: float
    q1: float
    q2: float

    def __post_init__(self) -> None:
        if not (isinstance(self.m, int) and self.m >= 1):
            raise DomainError(f"m must be an integer >= 1, got {self.m!r}")
        _check_contraction("p", self.p)
        _check_contraction("q1", self.q1)
        _check_contraction("q2", self.q2)


@dataclass(frozen=True)
class RestrictedSchedule:
    """Schedule with one contraction factor per component plus p."""

    m: int
    p: float
    q: Mapping[str, float]

    def __post_init__(self) -> None:
        if not (isinstance(self.m, int) and self.m >= 1):
            raise DomainError(f"m must be an integer >= 1, got {self.m!r}")
        _check_contraction("p", self.p)
        if set(self.q) != set(RESTRICTED_COMPONENTS):
            raise StructureError(f"q must carry exactly components {RESTRICTED_COMPONENTS}")
        for j, value in self.q.items():
            _check_contraction(f"q[{j}]", value)


def geometric_factor(q: float, m: int) -> float:
    """Partial geometric sum ``(1 - q**m) / (1 - q)`` for 0 < q < 1.

    Evaluated through expm1/log so it stays accurate when q approaches 1.
    """
    if not (0.0 < q < 1.0):
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m!r}")
    lq = math.log(q)
    return math.expm1(m * lq) / math.expm1(lq)


def anisotropic_norm_aa(action_sups: Sequence[float], angle_sups: Sequence[float],
                        widths: WidthSet) -> float:
    """Action-angle anisotropic norm from per-component sup values.

    Returns ``max_j { |X^{I_j}|/r, |X^{theta_j}|/s }``.
    """
    _require_positive(r=widths.r, s=widths.s)
    vals = [abs(v) / widths.r for v in action_sups]
    vals += [abs(v) / widths.s for v in angle_sups]
    return max(vals) if vals else 0.0


def anisotropic_norm_cart(x_sups: Sequence[float], y_sups: Sequence[float],
                          widths: WidthSet) -> float:
    """Cartesian anisotropic norm ``max_j { |X^{x_j}|/u, |X^{y_j}|/u }``."""
    _require_positive(u=widths.u)
    vals = [abs(v) / widths.u for v in list(x_sups) + list(y_sups)]
    return max(vals) if vals else 0.0


def per_component_norm(component: str, sup_value: float,
                       widths: RestrictedWidthSet) -> float:
    """Single-component norm: the sup divided by the matching width."""
    return abs(sup_value) / widths.component_width(component)
