"""Width and schedule search maximizing the certified stability time.

Coarse log-grid sweep followed by coordinate-descent refinement around the
best feasible point.  For each width candidate the iteration count is set
to the largest valid value, contraction factors are chosen on small grids
(the penalty-minimizing factor is taken just above its validity floor when
no grid value fits), and the whole procedure is deterministic for a given
search space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from . import stability
from .averaging import BoundFunctions, max_valid_m, Upsilon0, zeta0, \
    NoIterationNeeded, CartesianPartAbsent
from .core import CONTRACTION_SUP, DomainError, Schedule, WidthSet
from .planetary import (MassConfig, ResonanceSpec, cauchy_initial_bounds,
                        convexity_constants, delta_bound, lambda_from_axis,
                        locate_resonance)

_Q_SUP = CONTRACTION_SUP * (1.0 - 1e-12)

DEFAULT_Q_GRID = (0.20, 0.25, 0.30, 1.0 / math.e, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65)
SMALL_Q_GRID = (0.30, 0.45, 0.60)


@dataclass(frozen=True)
class HPNormModel:
    """Scalar model of the perturbation sup on the outer complex domain.

    ``constant`` returns ``value`` regardless of the mass ratio;
    ``proportional`` scales it linearly in eps from the reference point,
    matching the physical scaling of the mass-ratio-normalized perturbation
    when both planet masses shrink together.
    """

    kind: str
    value: float
    eps_ref: float = 1.0

    def __call__(self, eps: float) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "proportional":
            return self.value * (eps / self.eps_ref)
        raise DomainError(f"unknown HP model kind {self.kind!r}")


@dataclass(frozen=True)
class SearchSpace:
    """Log-scaled width ranges, schedule grids and the objective."""

    ranges: Mapping[str, tuple[float, float]]
    m_cap: int = 400
    q1_grid: Sequence[float] = DEFAULT_Q_GRID
    q2_grid: Sequence[float] = SMALL_Q_GRID
    p_grid: Sequence[float] = SMALL_Q_GRID
    objective: str = "max_t_bar"
    rf_cap: float = math.inf
    n_coarse: int = 9
    n_refine_rounds: int = 3
    shrink: float = 4.0

    def __post_init__(self) -> None:
        for name, (lo, hi) in self.ranges.items():
            if not (0.0 < lo < hi):
                raise DomainError(f"range for {name} must satisfy 0 < lo < hi")
        if self.objective not in ("max_t_bar", "max_t_bar_subject_to_Rf_cap"):
            raise DomainError(f"unknown objective {self.objective!r}")


@dataclass(frozen=True)
class PointEval:
    """One evaluated configuration of a scan."""

    params: Mapping[str, float]
    feasible: bool
    objective: float
    m: int
    q1: float
    t_bar: float
    rf_at_tbar: float
    failing: tuple[str, ...] = ()
    report: object | None = None


@dataclass(frozen=True)
class ScanResult:
    best: PointEval | None
    trace: tuple[PointEval, ...]
    pareto: tuple[tuple[float, float], ...]   # (t_bar, R_f) frontier

    @property
    def feasible(self) -> bool:
        return self.best is not None


def _pick_factor(grid: Sequence[float], floor: float) -> float | None:
    """Smallest grid factor strictly above the floor; synthetic fallback."""
    feasible = [q for q in sorted(grid) if floor < q < CONTRACTION_SUP]
    if feasible:
        return feasible[0]
    synthetic = floor * (1.0 + 1e-9) + 1e-300
    if synthetic < CONTRACTION_SUP:
        return synthetic
    return None


@dataclass(frozen=True)
class PlanetaryProblem:
    """Planetary evaluation context for scans.

    Masses scale with eps at a fixed secondary/primary planet ratio; the
    initial cartesian radius is tied to the resonant action through
    ``xi0_ratio = xi0**2 / (2 (Lambda1 - R))`` so eccentricity envelopes
    stay comparable across eps; the cartesian domain radius is enlarged to
    the smallest admissible value when ``auto_xi`` is set.
    """

    m0: float = 1.0
    mass_ratio_21: float = 0.29940
    G_N: float = 4.0 * math.pi ** 2
    a1: float = 5.20336301
    p_int: int = 5
    q_int: int = 2
    hp_model: HPNormModel = HPNormModel(kind="constant", value=1.0)
    xi0_ratio: float = 0.0
    R_rel: float = 0.0
    auto_xi: bool = True

    def mass(self, eps: float) -> MassConfig:
        m1 = eps * self.m0
        return MassConfig(m0=self.m0, m1=m1, m2=self.mass_ratio_21 * m1, G_N=self.G_N)

    def resonance(self, mass: MassConfig) -> ResonanceSpec:
        lam1 = lambda_from_axis(mass, 1, self.a1)
        return locate_resonance(mass, lam1, self.p_int, self.q_int)

    def widths_from_params(self, params: Mapping[str, float],
                           lambda_max: float) -> WidthSet:
        r = params["r_rel"] * lambda_max
        s = params["s"]
        beta = params.get("beta", 1.0)
        rho = params.get("rho_rel", 0.0) * lambda_max
        if rho == 0.0:
            rho = 1e-12 * r  # strictly positive ball, negligible extent
        xi_seed = params.get("xi", math.sqrt(lambda_max))
        return WidthSet.from_beta(rho=rho, r=r, s=s, xi=xi_seed, beta=beta)

    def evaluate(self, eps: float, params: Mapping[str, float],
                 space: SearchSpace) -> PointEval:
        mass = self.mass(eps)
        res = self.resonance(mass)
        lam_max = res.lambda_max
        try:
            widths = self.widths_from_params(params, lam_max)
            delta = delta_bound(mass, res, widths)
        except DomainError:
            return PointEval(params=dict(params), feasible=False, objective=-math.inf,
                             m=0, q1=0.0, t_bar=0.0, rf_at_tbar=math.inf,
                             failing=("domain",))
        bounds = cauchy_initial_bounds(self.hp_model(eps), mass.eps, widths, delta)
        cx = convexity_constants(mass, res.Lambda0,
                                 extent=widths.rho + 4.0 * widths.r)
        bf = BoundFunctions(T=res.T, bounds=bounds, beta=widths.beta)
        R = self.R_rel * lam_max
        xi0 = math.sqrt(2.0 * (res.Lambda0[0] - R) * self.xi0_ratio) \
            if self.xi0_ratio > 0.0 else 0.0

        best: PointEval | None = None
        failing: tuple[str, ...] = ("no_valid_schedule",)
        for q1 in space.q1_grid:
            m_hi = max_valid_m(bf, p=_Q_SUP, q1=q1, q2=_Q_SUP, m_cap=space.m_cap)
            if m_hi == 0:
                continue
            for m in range(max(1, m_hi - 2), m_hi + 1):
                try:
                    q2_floor = 2.0 * Upsilon0(m, bf)
                except (CartesianPartAbsent, NoIterationNeeded):
                    q2_floor = 0.0
                p_floor = 2.0 * zeta0(m, bf)
                q2 = _pick_factor(space.q2_grid, q2_floor)
                p = _pick_factor(space.p_grid, p_floor)
                if q2 is None or p is None:
                    continue
                sched = Schedule(m=m, p=p, q1=q1, q2=q2)
                inp = stability.PlanetaryStabilityInput(
                    widths=widths, bounds=bounds, schedule=sched,
                    convexity=cx, resonance=res, R=R, xi0=xi0)
                if self.auto_xi:
                    xi_needed = stability.minimal_cartesian_domain_radius(inp)
                    widths_run = replace(widths, xi=max(widths.xi, 1.001 * xi_needed))
                    inp = stability.PlanetaryStabilityInput(
                        widths=widths_run, bounds=bounds, schedule=sched,
                        convexity=cx, resonance=res, R=R, xi0=xi0)
                report = stability.evaluate(inp)
                feasible = report.flags.all_ok and all(
                    v > 0.0 for v in report.schedule_margins.values())
                if not feasible:
                    failing = tuple(k for k, v in report.schedule_margins.items()
                                    if v <= 0.0) or ("conditions",)
                    continue
                if space.objective == "max_t_bar_subject_to_Rf_cap" \
                        and report.rf_at_tbar > space.rf_cap * lam_max:
                    failing = ("rf_cap",)
                    continue
                objective = report.t_bar
                cand = PointEval(params=dict(params), feasible=True,
                                 objective=objective, m=m, q1=q1,
                                 t_bar=report.t_bar, rf_at_tbar=report.rf_at_tbar,
                                 report=report)
                if best is None or cand.objective > best.objective:
                    best = cand
        if best is None:
            return PointEval(params=dict(params), feasible=False, objective=-math.inf,
                             m=0, q1=0.0, t_bar=0.0, rf_at_tbar=math.inf,
                             failing=failing)
        return best


def _log_grid(lo: float, hi: float, n: int) -> list[float]:
    if n == 1:
        return [math.sqrt(lo * hi)]
    step = (math.log(hi) - math.log(lo)) / (n - 1)
    return [math.exp(math.log(lo) + i * step) for i in range(n)]


def optimize(space: SearchSpace, problem, eps: float) -> ScanResult:
    """Grid sweep plus coordinate descent over the search-space axes.

    ``problem`` must expose ``evaluate(eps, params, space) -> PointEval``.
    The reported best is re-evaluated once more as an independent
    feasibility confirmation.
    """
    axes = sorted(space.ranges)
    trace: list[PointEval] = []

    def evaluate(params: Mapping[str, float]) -> PointEval:
        pe = problem.evaluate(eps, params, space)
        trace.append(pe)
        return pe

    grids = {name: _log_grid(*space.ranges[name], space.n_coarse) for name in axes}

    def product(idx: int, current: dict[str, float], out: list[dict[str, float]]) -> None:
        if idx == len(axes):
            out.append(dict(current))
            return
        for v in grids[axes[idx]]:
            current[axes[idx]] = v
            product(idx + 1, current, out)

    coarse: list[dict[str, float]] = []
    product(0, {}, coarse)
    best: PointEval | None = None
    for params in coarse:
        pe = evaluate(params)
        if pe.feasible and (best is None or pe.objective > best.objective):
            best = pe

    if best is not None:
        spans = {name: (space.ranges[name][1] / space.ranges[name][0]) for name in axes}
        for round_idx in range(space.n_refine_rounds):
            factor = {name: spans[name] ** (1.0 / (space.shrink ** (round_idx + 1)))
                      for name in axes}
            for name in axes:
                center = best.params[name]
                lo = max(space.ranges[name][0], center / factor[name])
                hi = min(space.ranges[name][1], center * factor[name])
                for v in _log_grid(lo, hi, space.n_coarse):
                    params = dict(best.params)
                    params[name] = v
                    pe = evaluate(params)
                    if pe.feasible and pe.objective > best.objective:
                        best = pe

    if best is not None:
        confirm = problem.evaluate(eps, best.params, space)
        if not confirm.feasible:
            best = None

    feas = [(pe.t_bar, pe.rf_at_tbar) for pe in trace if pe.feasible]
    feas.sort(key=lambda x: x[1])
    pareto: list[tuple[float, float]] = []
    best_t = -math.inf
    for t, rf in feas:
        if t > best_t:
            pareto.append((t, rf))
            best_t = t
    return ScanResult(best=best, trace=tuple(trace), pareto=tuple(pareto))


def epsilon_sweep(space: SearchSpace, problem, eps_grid: Sequence[float],
                  ) -> list[dict[str, float]]:
    """Optimize per perturbation size and emit table-shaped rows.

    Infeasible sizes produce marked rows rather than being dropped.
    """
    rows: list[dict[str, float]] = []
    for eps in sorted(eps_grid):
        if eps == 0.0:
            rows.append({"eps": 0.0, "log10_eps": -math.inf, "feasible": True,
                         "m": 0, "t_bar": math.inf, "t_bar_years": math.inf,
                         "rf_over_lambda": 0.0, "e1_bar": 0.0, "e2_bar": 0.0})
            continue
        result = optimize(space, problem, eps)
        row: dict[str, float] = {"eps": eps, "log10_eps": math.log10(eps)}
        if result.best is None:
            row.update({"feasible": False, "m": 0, "t_bar": 0.0, "t_bar_years": 0.0,
                        "rf_over_lambda": math.inf, "e1_bar": 1.0, "e2_bar": 1.0})
        else:
            pe = result.best
            rep = pe.report
            lam_max = rep.inp.resonance.lambda_max
            row.update({
                "feasible": True, "m": pe.m, "q1": pe.q1,
                "t_bar": pe.t_bar, "t_bar_years": pe.t_bar,
                "rf_over_lambda": pe.rf_at_tbar / lam_max,
                "e1_bar": rep.e1_bar_at_tbar, "e2_bar": rep.e2_bar_at_tbar,
                "r_rel": pe.params.get("r_rel", 0.0),
                "s": pe.params.get("s", 0.0),
                "abs_one_minus_beta": abs(1.0 - pe.params.get("beta", 1.0)),
                "xi": rep.inp.widths.xi,
            })
        rows.append(row)
    return rows
