"""Splitting experiments on hyperbolic transport systems.

The central experiment applies the Lie-Trotter iterates ``[S(t/m)T(t/m)]^m``
of two transport groups to a bump along the fastest eigenvector of
``C = A + B`` and compares them to the exact evolution ``U(t)``.  When the
top eigenvalue of ``C`` exceeds the sum of the top eigenvalues of ``A`` and
``B``, every iterate is certified to vanish on a window where ``U(t)f`` does
not, whatever ``m`` is.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import DecompositionError, DimensionMismatch, HypothesisViolated, UnboundedSupport
from .funcspace import (Bump, Interval, Term, VectorFunction, bump_direction,
                        row_norms, support_interval, sup_distance)
from .spectral import DEFAULT_TOL, HypothesisReport, as_matrix, check_hypothesis, decompose
from .transport import (DEFAULT_TERM_CAP, apply, from_semigroup, max_deviation,
                        norm_bounds, trotter_operator, vanishing_edge)

__all__ = ['DivergenceRow', 'DivergenceReport', 'ResidualTable', 'ControlRow',
           'ControlReport', 'StabilityRow', 'StabilityReport', 'WINDOW_SAMPLES',
           'pow2_list', 'exact_evolution', 'divergence_experiment',
           'generator_residual', 'pde_residual', 'commuting_control',
           'stability_probe']

WINDOW_SAMPLES = 4096


def pow2_list(k):
    """``[1, 2, 4, ..., 2**k]``."""
    return [2**j for j in range(k + 1)]


@dataclass
class DivergenceRow:
    m: int
    term_count: int
    d_m: float
    window_gap: float
    trotter_edge: float
    norm_lower: float
    norm_upper: float


@dataclass
class DivergenceReport:
    t: float
    hypothesis: HypothesisReport
    window: Interval
    gap_floor: float
    rows: List[DivergenceRow] = field(default_factory=list)

    CSV_COLUMNS = ("m", "term_count", "d_m", "window_gap", "trotter_edge",
                   "norm_lower", "norm_upper")

    @property
    def min_d(self):
        return min(r.d_m for r in self.rows)

    def to_dict(self):
        return {"t": self.t,
                "window": self.window.to_dict(),
                "gap_floor": self.gap_floor,
                "hypothesis": self.hypothesis.to_dict(),
                "rows": [vars(r).copy() for r in self.rows]}


@dataclass
class ResidualTable:
    h: List[float]
    residual: List[float]

    def ratios(self):
        r = self.residual
        return [r[k + 1] / r[k] for k in range(len(r) - 1)]

    def to_dict(self):
        return {"rows": [{"h": h, "residual": r} for h, r in zip(self.h, self.residual)]}


@dataclass
class ControlRow:
    m: int
    term_count: int
    deviation: float
    d_m: float


@dataclass
class ControlReport:
    t: float
    scale: float
    rows: List[ControlRow] = field(default_factory=list)

    @property
    def max_deviation(self):
        return max(r.deviation for r in self.rows)

    @property
    def max_d(self):
        return max(r.d_m for r in self.rows)

    def to_dict(self):
        return {"t": self.t, "scale": self.scale,
                "max_deviation": self.max_deviation, "max_d": self.max_d,
                "rows": [vars(r).copy() for r in self.rows]}


@dataclass
class StabilityRow:
    m: int
    norm_lower: float
    norm_upper: float


@dataclass
class StabilityReport:
    """Norm bounds of the Trotter iterates with a log-linear fit.

    ``log(norm_lower) ~ log_intercept + log_slope * m``; ``fit_M`` and
    ``fit_w`` restate the fit as ``M exp(w t m)``-style constants.  The fit is
    a diagnostic only.
    """
    t: float
    rows: List[StabilityRow]
    log_slope: float
    log_intercept: float

    @property
    def fit_M(self):
        return float(np.exp(self.log_intercept))

    @property
    def fit_w(self):
        return self.log_slope / self.t

    @property
    def endpoints_nondecreasing(self):
        return self.rows[-1].norm_lower >= self.rows[0].norm_lower

    @property
    def monotone(self):
        lows = [r.norm_lower for r in self.rows]
        return all(b >= a for a, b in zip(lows, lows[1:]))

    def to_dict(self):
        return {"t": self.t, "log_slope": self.log_slope,
                "log_intercept": self.log_intercept, "fit_M": self.fit_M,
                "fit_w": self.fit_w,
                "endpoints_nondecreasing": self.endpoints_nondecreasing,
                "monotone": self.monotone,
                "rows": [vars(r).copy() for r in self.rows]}


def exact_evolution(dC, t, f):
    """``U(t) f`` for the group generated by ``dC.source * d/dx``."""
    if dC.n != f.n:
        raise DimensionMismatch(f"decomposition dimension {dC.n} vs function {f.n}")
    return apply(from_semigroup(dC, t), f)


def _window(hyp, t):
    lam_c = hyp.decompC.lambda_max
    lam_ab = hyp.decompA.lambda_max + hyp.decompB.lambda_max
    xi = min(1.0 - lam_c * t, -lam_ab * t)
    return Interval(-lam_c * t, xi)


def divergence_experiment(a, b, t=1.0, m_list=None, points_per_unit=2048, f=None,
                          tol=DEFAULT_TOL, restarts=8, seed=42,
                          term_cap=DEFAULT_TERM_CAP):
    """Measure how far the Trotter iterates stay from the exact evolution.

    For each ``m`` the report row holds the sampled sup distance ``d_m``,
    the Trotter support edge (left of which the iterate is exactly zero by
    construction), ``window_gap`` = max of ``||U(t)f||`` over window samples
    left of that edge, and operator-norm bounds.

    ``gap_floor`` is the bump value at the window's right end minus one
    window grid step: the smallest ``window_gap`` the sampling can report.

    Raises
    ------
    HypothesisViolated
        If the eigenvalue-gap hypothesis fails for ``a``, ``b``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    hyp = check_hypothesis(a, b, tol)
    if not hyp.satisfied:
        raise HypothesisViolated(
            f"hypothesis fails: gap lambda_max(C) - lambda_max(A) - lambda_max(B) "
            f"= {hyp.gap:.6g} is not positive", report=hyp)
    if m_list is None:
        m_list = pow2_list(10)
    dC = hyp.decompC
    if f is None:
        f = bump_direction(dC)
    if not f.compact:
        raise UnboundedSupport("divergence experiment needs a compactly supported f")
    a_edge = support_interval(f).lo
    target = exact_evolution(dC, t, f)

    window = _window(hyp, t)
    xs = np.linspace(window.lo, window.hi, WINDOW_SAMPLES + 2)[1:-1]
    step = xs[1] - xs[0]
    target_norm = row_norms(target.evaluate(xs))

    # largest bump value reachable on the sampled window
    arg_hi = window.hi - step + dC.lambda_max * t
    gap_floor = float(Bump()(np.array([min(arg_hi, 0.5)]))[0])

    report = DivergenceReport(float(t), hyp, window, gap_floor)
    for m in sorted(m_list):
        op = trotter_operator(hyp.decompA, hyp.decompB, t, m, term_cap=term_cap)
        edge = vanishing_edge(op, a_edge)
        iterate = apply(op, f)
        certified = xs <= edge
        wgap = float(np.max(target_norm[certified])) if np.any(certified) else 0.0
        d_m = sup_distance(target, iterate, None, points_per_unit)
        nb = norm_bounds(op, restarts=restarts, seed=seed)
        report.rows.append(DivergenceRow(int(m), len(op), d_m, wgap, edge,
                                         nb.lower, nb.upper))
    return report


def generator_residual(d, f, h_list, domain, points_per_unit=2048):
    """Sup distance between ``(S(h)f - f)/h`` and ``A f'`` for each ``h``.

    ``A f'`` is formed exactly: every profile is differentiated in closed
    form and the coefficients are multiplied by the source matrix.
    """
    h_list = [float(h) for h in h_list]
    if any(h2 >= h1 for h1, h2 in zip(h_list, h_list[1:])) or min(h_list) <= 0:
        raise ValueError("h_list must be positive and strictly decreasing")
    gen = f.derivative().left_multiply(d.source)
    residuals = []
    for h in h_list:
        quotient = (apply(from_semigroup(d, h), f) - f).scaled(1.0 / h)
        residuals.append(sup_distance(quotient, gen, domain, points_per_unit))
    return ResidualTable(h_list, residuals)


def pde_residual(dC, f, t, x_samples, h=1e-4):
    """Max of ``||u_t - C u_x||`` over ``x_samples`` by centered differences.

    ``u(t, x) = [U(t) f](x)`` is evaluated exactly; only the derivatives are
    approximated, with step ``h``.
    """
    xs = np.asarray(x_samples, dtype=float)
    u_plus = exact_evolution(dC, t + h, f).evaluate(xs)
    u_minus = exact_evolution(dC, t - h, f).evaluate(xs)
    u_now = exact_evolution(dC, t, f)
    u_t = (u_plus - u_minus) / (2 * h)
    u_x = (u_now.evaluate(xs + h) - u_now.evaluate(xs - h)) / (2 * h)
    res = u_t - u_x @ dC.source.T
    return float(np.max(row_norms(res)))


def commuting_control(a, scale=2.0, t=1.0, m_list=None, tol=DEFAULT_TOL,
                      points_per_unit=2048, f=None):
    """Trotter iterates for ``B = scale * A``, where the formula is exact.

    Each row records the largest matrix deviation between the iterate and
    ``U(t)`` and the sampled sup distance of their actions on ``f`` (the
    bump along the top eigenvector of ``C`` by default).
    """
    a = as_matrix(a)
    dA = decompose(a, tol)
    dB = decompose(scale * a, tol)
    dC = decompose((1.0 + scale) * a, tol)
    if m_list is None:
        m_list = pow2_list(10)
    if f is None:
        f = bump_direction(dC)
    u_op = from_semigroup(dC, t)
    target = apply(u_op, f)
    report = ControlReport(float(t), float(scale))
    for m in sorted(m_list):
        op = trotter_operator(dA, dB, t, m)
        dev = max_deviation(op, u_op)
        d_m = sup_distance(target, apply(op, f), None, points_per_unit)
        report.rows.append(ControlRow(int(m), len(op), dev, d_m))
    return report


def stability_probe(a, b, t=1.0, m_list=None, restarts=8, seed=42, tol=DEFAULT_TOL,
                    term_cap=DEFAULT_TERM_CAP):
    """Norm bounds of ``[S(t/m)T(t/m)]^m`` for each ``m`` (observational)."""
    decomps = []
    for name, mat in (("A", a), ("B", b)):
        try:
            decomps.append(decompose(mat, tol))
        except DecompositionError as err:
            raise err.with_matrix(name) from err
    dA, dB = decomps
    if m_list is None:
        m_list = list(range(1, 65))
    rows = []
    for m in sorted(m_list):
        nb = norm_bounds(trotter_operator(dA, dB, t, m, term_cap=term_cap),
                         restarts=restarts, seed=seed)
        rows.append(StabilityRow(int(m), nb.lower, nb.upper))
    ms = np.array([r.m for r in rows], dtype=float)
    logs = np.log([r.norm_lower for r in rows])
    if len(rows) >= 2:
        slope, intercept = np.polyfit(ms, logs, 1)
    else:
        slope, intercept = 0.0, float(logs[0])
    return StabilityReport(float(t), rows, float(slope), float(intercept))
