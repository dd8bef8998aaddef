"""Truncated Taylor-Fourier series algebra.

A series is a finite sum of terms

    c[k, alpha] * (I - base)**alpha * exp(i k . theta)

over integer harmonic vectors ``k`` and monomial multi-indices ``alpha``.
This is the concrete representation of perturbations, resonant and
non-resonant parts, and generating functions.  Series are immutable;
operations return new objects.

Sign conventions
----------------
The symplectic gradient is X_F = (-dF/dtheta, dF/dI) componentwise, so the
Poisson bracket used throughout is

    {a, b} = sum_j ( da/dI_j db/dtheta_j - da/dtheta_j db/dI_j ).

With this orientation the generating function with coefficients
``c/(i k.omega)`` satisfies {phi, h} = -f for h = omega . I, which is the
identity the homological solver relies on.  The resonant part of any series
commutes with h; ``test_tfseries`` pins the orientation through that check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .core import DomainError, StructureError

Key = tuple[tuple[int, ...], tuple[int, ...]]

_EVAL_CHUNK = 1 << 17


def _as_int_tuple(values: Iterable[int]) -> tuple[int, ...]:
    return tuple(int(v) for v in values)


@dataclass(frozen=True)
class TaylorFourierSeries:
    """Immutable truncated Taylor-Fourier series.

    Parameters
    ----------
    n_actions : int
        Number of action (and angle) variables.
    base_point : tuple of float
        Real action values the Taylor offsets are measured from.
    taylor_degree_cap : int
        Maximum total monomial degree |alpha| retained.
    harmonic_cap : int
        Maximum sup-norm |k| retained.
    terms : mapping ``(k, alpha) -> complex``
        Nonzero coefficients; zero coefficients are dropped.
    discarded_mass : float
        Sum of |c| discarded by the truncation that produced this series
        (0 for exact constructions).  Carried so callers can decide whether
        a truncation invalidates a rigorous bound.
    """

    n_actions: int
    base_point: tuple[float, ...]
    taylor_degree_cap: int
    harmonic_cap: int
    terms: Mapping[Key, complex] = field(default_factory=dict)
    discarded_mass: float = 0.0

    def __post_init__(self) -> None:
        n = self.n_actions
        if n < 1:
            raise StructureError("n_actions must be >= 1")
        if len(self.base_point) != n:
            raise StructureError("base_point length must equal n_actions")
        clean: dict[Key, complex] = {}
        for (k, alpha), c in self.terms.items():
            k = _as_int_tuple(k)
            alpha = _as_int_tuple(alpha)
            if len(k) != n or len(alpha) != n:
                raise StructureError(f"term index {(k, alpha)} has wrong arity")
            if any(a < 0 for a in alpha):
                raise StructureError(f"negative monomial index in {alpha}")
            if sum(alpha) > self.taylor_degree_cap:
                raise StructureError(f"|alpha|={sum(alpha)} exceeds taylor_degree_cap")
            if max((abs(q) for q in k), default=0) > self.harmonic_cap:
                raise StructureError(f"|k|={k} exceeds harmonic_cap")
            c = complex(c)
            if c != 0:
                clean[(k, alpha)] = c
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "base_point", tuple(float(b) for b in self.base_point))

    # -- basic interface ---------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def items(self) -> Iterator[tuple[Key, complex]]:
        return iter(sorted(self.terms.items()))

    def coefficient(self, k: Sequence[int], alpha: Sequence[int]) -> complex:
        return self.terms.get((_as_int_tuple(k), _as_int_tuple(alpha)), 0.0 + 0.0j)

    def is_zero(self) -> bool:
        return not self.terms

    def same_structure(self, other: "TaylorFourierSeries") -> None:
        if self.n_actions != other.n_actions:
            raise StructureError("series have different numbers of action variables")
        if self.base_point != other.base_point:
            raise StructureError("series have different base points")

    def is_real_symmetric(self, tol: float = 0.0) -> bool:
        """True when coefficient(-k, alpha) == conj(coefficient(k, alpha))."""
        for (k, alpha), c in self.terms.items():
            mk = tuple(-q for q in k)
            if abs(self.terms.get((mk, alpha), 0.0) - c.conjugate()) > tol:
                return False
        return True

    def coefficient_mass(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    # -- evaluation --------------------------------------------------------
    def evaluate(self, actions: np.ndarray, angles: np.ndarray) -> np.ndarray:
        """Evaluate at (possibly complex) absolute actions and angles.

        ``actions`` and ``angles`` have shape (..., n_actions); broadcasting
        over leading axes is supported.
        """
        actions = np.asarray(actions)
        angles = np.asarray(angles)
        offs = actions - np.asarray(self.base_point)
        out = np.zeros(np.broadcast(offs[..., 0], angles[..., 0]).shape, dtype=complex)
        for (k, alpha), c in self.terms.items():
            term = np.full_like(out, c)
            for j in range(self.n_actions):
                if alpha[j]:
                    term = term * offs[..., j] ** alpha[j]
                if k[j]:
                    term = term * np.exp(1j * k[j] * angles[..., j])
            out += term
        return out


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def zero(n_actions: int = 2, base_point: Sequence[float] | None = None,
         taylor_degree_cap: int = 0, harmonic_cap: int = 0) -> TaylorFourierSeries:
    base = tuple(base_point) if base_point is not None else (0.0,) * n_actions
    return TaylorFourierSeries(n_actions, base, taylor_degree_cap, harmonic_cap, {})


def from_terms(terms: Mapping[Key, complex], n_actions: int = 2,
               base_point: Sequence[float] | None = None,
               taylor_degree_cap: int | None = None,
               harmonic_cap: int | None = None) -> TaylorFourierSeries:
    base = tuple(base_point) if base_point is not None else (0.0,) * n_actions
    deg = max((sum(a) for (_, a) in terms), default=0)
    harm = max((max((abs(q) for q in k), default=0) for (k, _) in terms), default=0)
    return TaylorFourierSeries(
        n_actions, base,
        deg if taylor_degree_cap is None else taylor_degree_cap,
        harm if harmonic_cap is None else harmonic_cap,
        dict(terms),
    )


def linear_actions(omega: Sequence[float], n_actions: int = 2,
                   base_point: Sequence[float] | None = None) -> TaylorFourierSeries:
    """The integrable generator ``h = omega . (I - base)`` as a series."""
    n = n_actions
    terms: dict[Key, complex] = {}
    for j, w in enumerate(omega):
        alpha = tuple(1 if i == j else 0 for i in range(n))
        terms[((0,) * n, alpha)] = complex(w)
    return from_terms(terms, n, base_point, taylor_degree_cap=1, harmonic_cap=0)


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

def add(a: TaylorFourierSeries, b: TaylorFourierSeries) -> TaylorFourierSeries:
    """Coefficientwise sum; caps become the max of the two operands' caps."""
    a.same_structure(b)
    terms = dict(a.terms)
    for key, c in b.terms.items():
        terms[key] = terms.get(key, 0.0) + c
    return TaylorFourierSeries(
        a.n_actions, a.base_point,
        max(a.taylor_degree_cap, b.taylor_degree_cap),
        max(a.harmonic_cap, b.harmonic_cap),
        terms,
        discarded_mass=a.discarded_mass + b.discarded_mass,
    )


def subtract(a: TaylorFourierSeries, b: TaylorFourierSeries) -> TaylorFourierSeries:
    return add(a, scale(b, -1.0))


def scale(a: TaylorFourierSeries, factor: complex) -> TaylorFourierSeries:
    return TaylorFourierSeries(
        a.n_actions, a.base_point, a.taylor_degree_cap, a.harmonic_cap,
        {key: factor * c for key, c in a.terms.items()},
        discarded_mass=abs(factor) * a.discarded_mass,
    )


def multiply(a: TaylorFourierSeries, b: TaylorFourierSeries,
             degree_cap: int | None = None,
             harmonic_cap: int | None = None) -> TaylorFourierSeries:
    """Convolution in both indices, truncated to the caps.

    Terms whose degree or harmonic exceeds the caps are dropped and their
    absolute coefficient mass accumulated in ``discarded_mass``.
    """
    a.same_structure(b)
    n = a.n_actions
    if degree_cap is None:
        degree_cap = a.taylor_degree_cap + b.taylor_degree_cap
    if harmonic_cap is None:
        harmonic_cap = a.harmonic_cap + b.harmonic_cap
    terms: dict[Key, complex] = {}
    dropped = 0.0
    for (ka, aa), ca in a.terms.items():
        for (kb, ab), cb in b.terms.items():
            k = tuple(ka[j] + kb[j] for j in range(n))
            alpha = tuple(aa[j] + ab[j] for j in range(n))
            c = ca * cb
            if sum(alpha) > degree_cap or max((abs(q) for q in k), default=0) > harmonic_cap:
                dropped += abs(c)
                continue
            key = (k, alpha)
            terms[key] = terms.get(key, 0.0) + c
    return TaylorFourierSeries(
        n, a.base_point, degree_cap, harmonic_cap, terms,
        discarded_mass=dropped + a.discarded_mass * b.coefficient_mass()
        + b.discarded_mass * a.coefficient_mass(),
    )


def derivative_action(a: TaylorFourierSeries, j: int) -> TaylorFourierSeries:
    """d/dI_j; lowers the monomial index."""
    terms: dict[Key, complex] = {}
    for (k, alpha), c in a.terms.items():
        if alpha[j] == 0:
            continue
        na = tuple(alpha[i] - (1 if i == j else 0) for i in range(a.n_actions))
        key = (k, na)
        terms[key] = terms.get(key, 0.0) + alpha[j] * c
    return TaylorFourierSeries(a.n_actions, a.base_point,
                               max(a.taylor_degree_cap - 1, 0), a.harmonic_cap, terms)


def derivative_angle(a: TaylorFourierSeries, j: int) -> TaylorFourierSeries:
    """d/dtheta_j; multiplies each coefficient by i*k_j."""
    terms: dict[Key, complex] = {}
    for (k, alpha), c in a.terms.items():
        if k[j] == 0:
            continue
        terms[(k, alpha)] = 1j * k[j] * c
    return TaylorFourierSeries(a.n_actions, a.base_point,
                               a.taylor_degree_cap, a.harmonic_cap, terms)


def poisson_bracket(a: TaylorFourierSeries, b: TaylorFourierSeries,
                    degree_cap: int | None = None,
                    harmonic_cap: int | None = None) -> TaylorFourierSeries:
    """{a, b} = sum_j (da/dI_j db/dtheta_j - da/dtheta_j db/dI_j)."""
    a.same_structure(b)
    if degree_cap is None:
        degree_cap = max(a.taylor_degree_cap + b.taylor_degree_cap - 1, 0)
    if harmonic_cap is None:
        harmonic_cap = a.harmonic_cap + b.harmonic_cap
    out = zero(a.n_actions, a.base_point, degree_cap, harmonic_cap)
    for j in range(a.n_actions):
        t1 = multiply(derivative_action(a, j), derivative_angle(b, j), degree_cap, harmonic_cap)
        t2 = multiply(derivative_angle(a, j), derivative_action(b, j), degree_cap, harmonic_cap)
        out = add(out, subtract(t1, t2))
    return out


def resonant_split(a: TaylorFourierSeries, omega: Sequence[float], period: float,
                   tol: float = 1e-9) -> tuple[TaylorFourierSeries, TaylorFourierSeries]:
    """Split into (resonant, non-resonant) parts along the periodic flow.

    A harmonic k is resonant when k.omega = 0.  The frequency vector must be
    resonant with the given period, i.e. k.omega * period / (2 pi) must sit
    within ``tol`` of an integer for every retained harmonic.
    """
    omega = np.asarray(omega, dtype=float)
    g_terms: dict[Key, complex] = {}
    f_terms: dict[Key, complex] = {}
    for (k, alpha), c in a.terms.items():
        phase = float(np.dot(k, omega)) * period / (2.0 * math.pi)
        nearest = round(phase)
        if abs(phase - nearest) > tol:
            raise DomainError(
                f"harmonic {k} is not commensurate with the period: k.omega*T/2pi={phase}")
        if nearest == 0:
            g_terms[(k, alpha)] = c
        else:
            f_terms[(k, alpha)] = c
    mk = lambda terms: TaylorFourierSeries(
        a.n_actions, a.base_point, a.taylor_degree_cap, a.harmonic_cap, terms)
    return mk(g_terms), mk(f_terms)


# ---------------------------------------------------------------------------
# norm estimation
# ---------------------------------------------------------------------------

def majorant_norm(a: TaylorFourierSeries, action_radii: Sequence[float],
                  angle_widths: Sequence[float]) -> float:
    """Guaranteed sup-norm upper bound on the polydisk/strip domain.

    Returns ``sum |c| * prod R_j**alpha_j * exp(sum |k_j| s_j)`` where R_j is
    the full action radius (real ball + complex offset) and s_j the angle
    strip half-width.
    """
    R = [float(v) for v in action_radii]
    S = [float(v) for v in angle_widths]
    total = 0.0
    for (k, alpha), c in a.terms.items():
        val = abs(c)
        for j in range(a.n_actions):
            if alpha[j]:
                val *= R[j] ** alpha[j]
        val *= math.exp(sum(abs(k[j]) * S[j] for j in range(a.n_actions)))
        total += val
    return total


def sample_norm(a: TaylorFourierSeries, center_radii: Sequence[float],
                offset_radii: Sequence[float], angle_widths: Sequence[float],
                n_points: int, seed: int) -> float:
    """Maximum of |a| over pseudo-random points on the distinguished boundary.

    Boundary draw per action j: a real center +-rho_j (random sign) plus a
    complex offset r_j e^{i psi}; per angle j: real part uniform on the torus,
    imaginary part +-s_j with random sign.  Deterministic for a given seed
    (counter-based Philox generator, chunked evaluation in index order).
    """
    if n_points < 1:
        raise DomainError("n_points must be >= 1")
    if a.is_zero():
        return 0.0
    n = a.n_actions
    rho = np.asarray(center_radii, dtype=float)
    r = np.asarray(offset_radii, dtype=float)
    s = np.asarray(angle_widths, dtype=float)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    best = 0.0
    done = 0
    base = np.asarray(a.base_point)
    while done < n_points:
        m = min(_EVAL_CHUNK, n_points - done)
        signs_c = rng.integers(0, 2, size=(m, n)) * 2.0 - 1.0
        psi = rng.uniform(0.0, 2.0 * math.pi, size=(m, n))
        theta_re = rng.uniform(0.0, 2.0 * math.pi, size=(m, n))
        signs_s = rng.integers(0, 2, size=(m, n)) * 2.0 - 1.0
        actions = base + signs_c * rho + r * np.exp(1j * psi)
        angles = theta_re + 1j * signs_s * s
        vals = a.evaluate(actions, angles)
        best = max(best, float(np.max(np.abs(vals))))
        done += m
    return best


@dataclass(frozen=True)
class FieldComponentSups:
    """Per-component sup bounds of the symplectic gradient of a series.

    Keys are ``("action", j)`` for |X^{I_j}| = |da/dtheta_j| and
    ``("angle", j)`` for |X^{theta_j}| = |da/dI_j|.  Both the rigorous
    majorant and the boundary-sampled estimate are reported.
    """

    majorant: Mapping[tuple[str, int], float]
    sampled: Mapping[tuple[str, int], float]


def vector_field_bounds(a: TaylorFourierSeries, center_radii: Sequence[float],
                        offset_radii: Sequence[float], angle_widths: Sequence[float],
                        n_points: int = 20000, seed: int = 0) -> FieldComponentSups:
    """Sup bounds for every component of X_a by exact differentiation.

    Each derivative series is bounded both by its majorant and by boundary
    sampling on the same domain.
    """
    radii = [c + o for c, o in zip(center_radii, offset_radii)]
    major: dict[tuple[str, int], float] = {}
    sampl: dict[tuple[str, int], float] = {}
    for j in range(a.n_actions):
        for tag, deriv in (("action", derivative_angle(a, j)),
                           ("angle", derivative_action(a, j))):
            major[(tag, j)] = majorant_norm(deriv, radii, angle_widths)
            sampl[(tag, j)] = sample_norm(deriv, center_radii, offset_radii,
                                          angle_widths, n_points, seed + 7 * j + (tag == "angle"))
    return FieldComponentSups(majorant=major, sampled=sampl)


# ---------------------------------------------------------------------------
# real-harmonic view (for integrators and file round trips)
# ---------------------------------------------------------------------------

def to_real_harmonics(a: TaylorFourierSeries) -> tuple[np.ndarray, ...]:
    """Real cosine/sine representation of a real-symmetric 2-action series.

    Returns integer arrays (k1, k2, a1, a2) and float arrays (A, B) such that

        a = sum_t (A_t cos(k . theta) + B_t sin(k . theta)) * I1**a1 * I2**a2

    with each harmonic listed once (k canonicalized to its lexicographically
    positive representative).
    """
    if a.n_actions != 2:
        raise StructureError("real-harmonic view implemented for 2 actions")
    if not a.is_real_symmetric(tol=1e-13 * max(1.0, a.coefficient_mass())):
        raise StructureError("series is not real-symmetric")
    rows: dict[tuple[int, int, int, int], tuple[float, float]] = {}
    for (k, alpha), c in a.terms.items():
        if k < (0,) * len(k):  # keep the lexicographically positive representative
            continue
        key = (k[0], k[1], alpha[0], alpha[1])
        if k == (0, 0):
            rows[key] = (c.real, 0.0)
        else:
            rows[key] = (2.0 * c.real, -2.0 * c.imag)
    keys = sorted(rows)
    k1 = np.array([k[0] for k in keys], dtype=np.int64)
    k2 = np.array([k[1] for k in keys], dtype=np.int64)
    a1 = np.array([k[2] for k in keys], dtype=np.int64)
    a2 = np.array([k[3] for k in keys], dtype=np.int64)
    A = np.array([rows[k][0] for k in keys], dtype=float)
    B = np.array([rows[k][1] for k in keys], dtype=float)
    return k1, k2, a1, a2, A, B


# ---------------------------------------------------------------------------
# text file format
# ---------------------------------------------------------------------------

def read_series(path: str) -> TaylorFourierSeries:
    """Read a series from the harmonic coefficient text format.

    Header block: ``n_actions``, ``base_point``, ``taylor_degree_cap`` and
    ``harmonic_cap`` lines; afterwards one term per line,
    ``k1 k2 alpha1 alpha2 re im``.  Lines starting with '#' are comments.
    """
    header: dict[str, list[str]] = {}
    term_lines: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] in ("n_actions", "base_point", "taylor_degree_cap", "harmonic_cap"):
                header[parts[0]] = parts[1:]
            else:
                term_lines.append(parts)
    try:
        n = int(header["n_actions"][0])
        base = tuple(float(v) for v in header["base_point"])
        deg = int(header["taylor_degree_cap"][0])
        harm = int(header["harmonic_cap"][0])
    except KeyError as missing:
        raise StructureError(f"harmonic file {path} lacks header key {missing}") from None
    terms: dict[Key, complex] = {}
    for parts in term_lines:
        if len(parts) != 2 * n + 2:
            raise StructureError(f"malformed term line in {path}: {' '.join(parts)}")
        k = _as_int_tuple(parts[:n])
        alpha = _as_int_tuple(parts[n:2 * n])
        c = complex(float(parts[2 * n]), float(parts[2 * n + 1]))
        terms[(k, alpha)] = terms.get((k, alpha), 0.0) + c
    return TaylorFourierSeries(n, base, deg, harm, terms)


def write_series(path: str, a: TaylorFourierSeries, comment: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in comment.splitlines():
            fh.write(f"# {line}\n")
        fh.write(f"n_actions {a.n_actions}\n")
        fh.write("base_point " + " ".join(f"{b!r}" for b in a.base_point) + "\n")
        fh.write(f"taylor_degree_cap {a.taylor_degree_cap}\n")
        fh.write(f"harmonic_cap {a.harmonic_cap}\n")
        fh.write("# k1 k2 alpha1 alpha2 re im\n")
        for (k, alpha), c in a.items():
            idx = " ".join(str(v) for v in (*k, *alpha))
            fh.write(f"{idx} {c.real!r} {c.imag!r}\n")
