"""Physical setup of the planar planetary problem.

Masses to reduced parameters, Keplerian Hamiltonian, resonance location,
convexity constants, the quadratic-remainder field bound, and the
Cauchy-based initial bounds on the split perturbation.

Units are agnostic internally; the CLI defaults to solar masses,
astronomical units and years with ``G_N = 4 pi**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, FieldBounds, WidthSet

G_N_AU_MSUN_YR = 4.0 * math.pi ** 2


@dataclass(frozen=True)
class MassConfig:
    """Three masses and the gravitational constant, with reduced parameters."""

    m0: float
    m1: float
    m2: float
    G_N: float = G_N_AU_MSUN_YR

    def __post_init__(self) -> None:
        if not (self.m0 > self.m1 >= 0.0 and self.m0 > self.m2 >= 0.0):
            raise DomainError("need m0 > m1 >= 0 and m0 > m2 >= 0")
        if not self.G_N > 0.0:
            raise DomainError("G_N must be positive")

    @property
    def sigma0(self) -> float:
        return self.m0 / (self.m0 + self.m1)

    @property
    def sigma1(self) -> float:
        return self.m1 / (self.m0 + self.m1)

    @property
    def mu1(self) -> float:
        return self.m0 * self.m1 / (self.m0 + self.m1)

    @property
    def mu2(self) -> float:
        return (self.m0 + self.m1) * self.m2 / (self.m0 + self.m1 + self.m2)

    @property
    def M1(self) -> float:
        return self.m0 + self.m1

    @property
    def M2(self) -> float:
        return self.m0 + self.m1 + self.m2

    @property
    def eps(self) -> float:
        return max(self.m1 / self.m0, self.m2 / self.m0)

    def mu(self, j: int) -> float:
        return (self.mu1, self.mu2)[j - 1]

    def M(self, j: int) -> float:
        return (self.M1, self.M2)[j - 1]

    def gm_mu3_M2(self, j: int) -> float:
        """The combination G_N**2 M_j**2 mu_j**3 entering the Kepler part."""
        return self.G_N ** 2 * self.M(j) ** 2 * self.mu(j) ** 3


@dataclass(frozen=True)
class ResonanceSpec:
    """A p:q resonant torus: actions, frequencies and flow period."""

    p_int: int
    q_int: int
    Lambda0: tuple[float, float]
    omega: tuple[float, float]
    T: float

    def __post_init__(self) -> None:
        if self.p_int < 1 or self.q_int < 1:
            raise DomainError("resonance integers must be positive")
        if math.gcd(self.p_int, self.q_int) != 1:
            raise DomainError("resonance integers must be coprime")

    @property
    def lambda_max(self) -> float:
        return max(self.Lambda0)


@dataclass(frozen=True)
class ConvexityConstants:
    """Extremes of the unperturbed hessian spectrum on the action domain."""

    kappa: float
    K: float

    def __post_init__(self) -> None:
        if not (0.0 < self.kappa <= self.K):
            raise DomainError("need 0 < kappa <= K")


def lambda_from_axis(mass: MassConfig, j: int, a_j: float) -> float:
    """Circular action for body j at semi-major axis ``a_j``."""
    if a_j <= 0.0:
        raise DomainError(f"semi-major axis must be positive, got {a_j}")
    return mass.mu(j) * math.sqrt(mass.G_N * mass.M(j) * a_j)


def axis_from_lambda(mass: MassConfig, j: int, Lambda_j: float) -> float:
    if Lambda_j <= 0.0:
        raise DomainError("action must be positive")
    return (Lambda_j / mass.mu(j)) ** 2 / (mass.G_N * mass.M(j))


def kepler_hamiltonian(mass: MassConfig, Lambda: tuple[float, float]) -> float:
    """Unperturbed energy ``- G**2 sum_j M_j**2 mu_j**3 / (2 Lambda_j**2)``."""
    if min(Lambda) <= 0.0:
        raise DomainError("actions must be positive")
    return -sum(mass.gm_mu3_M2(j) / (2.0 * Lambda[j - 1] ** 2) for j in (1, 2))


def mean_motion(mass: MassConfig, j: int, Lambda_j: float) -> float:
    """dH_K/dLambda_j, the mean motion of body j."""
    if Lambda_j <= 0.0:
        raise DomainError("action must be positive")
    return mass.gm_mu3_M2(j) / Lambda_j ** 3


def locate_resonance(mass: MassConfig, Lambda1_0: float, p_int: int, q_int: int) -> ResonanceSpec:
    """Solve the resonant relation omega1/omega2 = p/q for the outer action.

    The mean motions scale as Lambda**-3, so the companion action follows in
    closed form; the flow period satisfies T*omega1 = 2 pi p and
    T*omega2 = 2 pi q.
    """
    if Lambda1_0 <= 0.0:
        raise DomainError("Lambda1_0 must be positive")
    ratio = (p_int / q_int) * mass.gm_mu3_M2(2) / mass.gm_mu3_M2(1)
    Lambda2_0 = Lambda1_0 * ratio ** (1.0 / 3.0)
    omega1 = mean_motion(mass, 1, Lambda1_0)
    omega2 = mean_motion(mass, 2, Lambda2_0)
    T = 2.0 * math.pi * p_int / omega1
    return ResonanceSpec(p_int=p_int, q_int=q_int, Lambda0=(Lambda1_0, Lambda2_0),
                         omega=(omega1, omega2), T=T)


def convexity_constants(mass: MassConfig, Lambda0: tuple[float, float],
                        extent: float) -> ConvexityConstants:
    """Hessian eigenvalue extremes over the real action interval.

    The hessian of the Kepler part is diagonal with entries
    ``-3 G**2 M_j**2 mu_j**3 / Lambda_j**4``; both entries are monotone in
    Lambda_j so interval endpoints give the exact extremes.
    """
    if extent < 0.0:
        raise DomainError("extent must be nonnegative")
    if extent >= min(Lambda0):
        raise DomainError("extent reaches Lambda = 0")

    def entry(j: int, lam: float) -> float:
        return 3.0 * mass.gm_mu3_M2(j) / lam ** 4

    kappa = min(entry(j, Lambda0[j - 1] + extent) for j in (1, 2))
    K = sum(entry(j, Lambda0[j - 1] - extent) for j in (1, 2))
    return ConvexityConstants(kappa=kappa, K=K)


def delta_bound(mass: MassConfig, res: ResonanceSpec, widths: WidthSet,
                domain_scale: float = 3.0, n_angles: int = 4096) -> float:
    """Bound on the quadratic-remainder field: the frequency detuning sup.

    The conjugate-angle component of the remainder field is
    ``dH_K/dLambda_j(Lambda0 + I) - omega_j``; its sup over the complex disk
    ``|I_j| <= rho + scale*r`` is divided by the angle width s.  The sup is
    located by dense angular sampling with one Richardson refinement, and the
    analytic maximizer (the circle point nearest the pole at Lambda = 0) is
    evaluated directly as well.
    """
    radius = widths.action_radius(domain_scale)
    worst = 0.0
    for j in (1, 2):
        lam0 = res.Lambda0[j - 1]
        if radius >= lam0:
            raise DomainError("action disk touches Lambda = 0")
        cj = mass.gm_mu3_M2(j)
        om = res.omega[j - 1]

        def f(z: np.ndarray) -> np.ndarray:
            return np.abs(cj / (lam0 + z) ** 3 - om)

        best = float(f(np.array(-radius + 0.0j)))  # analytic maximizer candidate
        prev = None
        for npts in (n_angles, 2 * n_angles):
            ang = 2.0 * math.pi * np.arange(npts) / npts
            m = float(np.max(f(radius * np.exp(1j * ang))))
            if prev is not None:
                m = m + (m - prev) / 3.0  # one h**2 Richardson step
            prev = m
        worst = max(worst, best, prev)
    return worst / widths.s


def cauchy_initial_bounds(HP_norm4: float, eps: float, widths: WidthSet,
                          delta: float) -> FieldBounds:
    """Initial field bounds from the Cauchy inequalities.

    Given the perturbation sup on the 4-scaled domain, the non-resonant part
    is bounded by twice and the resonant remainder by once the perturbation,
    and vector fields follow by dividing by the width products.
    """
    if HP_norm4 < 0.0 or eps < 0.0:
        raise DomainError("HP_norm4 and eps must be nonnegative")
    f0 = 2.0 * eps * HP_norm4
    g0 = eps * HP_norm4
    rs = widths.r * widths.s
    u2 = widths.u ** 2
    return FieldBounds(
        eta0=f0 / rs, gamma0=g0 / rs, delta=delta,
        Xi0=f0 / u2, Gamma0=g0 / u2,
        f0_norm=f0, g0_norm=g0,
    )
