"""Exact members of C_ub(R, R^n) built from shifted scalar profiles.

A :class:`VectorFunction` is a finite sum ``f(x) = sum_k p_k(x + s_k) c_k``
of scalar profiles ``p_k`` translated by ``s_k`` and multiplied by constant
vectors ``c_k``.  Evaluation is closed form at every real ``x``; only the
sup-norm is estimated, by sampling, and reported as a lower bound.
"""

from dataclasses import dataclass
import json
import math

import numpy as np

from . import _jsonio
from .errors import DimensionMismatch, UnboundedDomain, UnboundedSupport

__all__ = ['Bump', 'Sine', 'Gaussian', 'parse_profile', 'profile_eval',
           'Interval', 'Term', 'VectorFunction', 'support_interval',
           'sup_distance', 'bump_direction', 'sampling_grid', 'row_norms']


@dataclass(frozen=True)
class Bump:
    """Smooth bump ``exp(4 - 1/(x(1-x)))`` on (0, 1), zero elsewhere.

    Normalized to peak value 1 at ``x = 1/2``.  ``order=1`` gives the first
    derivative.
    """
    order: int = 0
    compact = True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x > 0.0) & (x < 1.0)
        xi = x[inside]
        g = xi * (1.0 - xi)
        with np.errstate(over='ignore', divide='ignore'):
            val = np.exp(4.0 - 1.0 / g)
        if self.order == 1:
            # val underflows to 0 long before g * g does
            with np.errstate(over='ignore', invalid='ignore'):
                val = np.where(val > 0, val * (1.0 - 2.0 * xi) / (g * g), 0.0)
        out[inside] = val
        return out

    @property
    def support(self):
        return (0.0, 1.0)

    def derivative(self):
        return _derive(self, Bump)

    @property
    def name(self):
        return "bump" + "'" * self.order


@dataclass(frozen=True)
class Sine:
    """``sin(frequency * x)``; frequency 0 gives the zero constant."""
    frequency: float = 1.0
    order: int = 0
    compact = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        w = self.frequency
        if self.order == 0:
            return np.sin(w * x)
        return w * np.cos(w * x)

    def derivative(self):
        return _derive(self, Sine, self.frequency)

    @property
    def name(self):
        return f"sine:{_jsonio.fmt_float(self.frequency)}" + "'" * self.order


@dataclass(frozen=True)
class Gaussian:
    """``exp(-((x - center)/width)**2 / 2)``."""
    center: float = 0.0
    width: float = 1.0
    order: int = 0
    compact = False

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("gaussian width must be positive")

    def __call__(self, x):
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        val = np.exp(-0.5 * z * z)
        if self.order == 1:
            val = -z / self.width * val
        return val

    def derivative(self):
        return _derive(self, Gaussian, self.center, self.width)

    @property
    def name(self):
        return (f"gaussian:{_jsonio.fmt_float(self.center)}:"
                f"{_jsonio.fmt_float(self.width)}" + "'" * self.order)


def _derive(p, cls, *args):
    if p.order >= 1:
        raise ValueError("only first derivatives are available in closed form")
    return cls(*args, order=p.order + 1)


def parse_profile(text):
    """Parse ``bump``, ``sine:<freq>`` or ``gaussian:<center>:<width>``.

    A trailing ``'`` selects the first derivative.
    """
    s = text.strip()
    order = 0
    if s.endswith("'"):
        s, order = s[:-1], 1
    parts = s.split(":")
    try:
        if parts[0] == "bump" and len(parts) == 1:
            return Bump(order=order)
        if parts[0] == "sine" and len(parts) == 2:
            return Sine(float(parts[1]), order=order)
        if parts[0] == "gaussian" and len(parts) == 3:
            return Gaussian(float(parts[1]), float(parts[2]), order=order)
    except ValueError as err:
        raise ValueError(f"bad profile spec {text!r}: {err}") from None
    raise ValueError(f"unknown profile spec {text!r}")


def profile_eval(p, x, derivative_order=0):
    """Value (or first derivative) of profile ``p`` at a real ``x``."""
    if derivative_order not in (0, 1):
        raise ValueError("derivative_order must be 0 or 1")
    q = p.derivative() if derivative_order == 1 else p
    return float(q(np.array([x], dtype=float))[0])


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    empty: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval lower end {self.lo} exceeds upper end {self.hi}")

    @property
    def bounded(self):
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def length(self):
        return self.hi - self.lo

    def hull(self, other):
        if self.empty:
            return other
        if other.empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def padded(self, pad):
        return Interval(self.lo - pad, self.hi + pad)

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi, "empty": self.empty}


class Term:
    """One summand ``profile(x + shift) * coeff``."""
    __slots__ = ('profile', 'shift', 'coeff')

    def __init__(self, profile, shift, coeff):
        self.profile = profile
        self.shift = float(shift)
        c = np.array(coeff, dtype=float).reshape(-1)
        c.setflags(write=False)
        self.coeff = c

    def __repr__(self):
        return f"Term({self.profile.name}, {self.shift!r}, {self.coeff.tolist()})"

    @property
    def is_zero(self):
        return not np.any(self.coeff)

    def support(self):
        """Interval where the term can be nonzero, in x coordinates."""
        lo, hi = self.profile.support
        return Interval(lo - self.shift, hi - self.shift)


class VectorFunction:
    """Finite sum of shifted, vector-weighted scalar profiles."""

    def __init__(self, n, terms=()):
        self.n = int(n)
        if self.n < 1:
            raise ValueError("dimension must be positive")
        self.terms = tuple(t if isinstance(t, Term) else Term(*t) for t in terms)
        for t in self.terms:
            if t.coeff.shape != (self.n,):
                raise DimensionMismatch(
                    f"term coefficient has dimension {t.coeff.shape[0]}, expected {self.n}")

    def __repr__(self):
        return f"VectorFunction(n={self.n}, terms={len(self.terms)})"

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        # term-list concatenation, no merging
        if self.n != other.n:
            raise DimensionMismatch(f"dimensions {self.n} and {other.n} differ")
        return VectorFunction(self.n, self.terms + other.terms)

    def scaled(self, alpha):
        return VectorFunction(self.n, [Term(t.profile, t.shift, alpha * t.coeff)
                                       for t in self.terms])

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def derivative(self):
        return VectorFunction(self.n, [Term(t.profile.derivative(), t.shift, t.coeff)
                                       for t in self.terms])

    def left_multiply(self, matrix):
        m = np.asarray(matrix, dtype=float)
        return VectorFunction(self.n, [Term(t.profile, t.shift, m @ t.coeff)
                                       for t in self.terms])

    @property
    def compact(self):
        return all(t.profile.compact for t in self.terms)

    def __call__(self, x):
        """Evaluate at a scalar (returns shape (n,)) or array (shape (..., n))."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self.evaluate(x.reshape(1))[0]
        return self.evaluate(x.ravel()).reshape(x.shape + (self.n,))

    def evaluate(self, xs):
        """Evaluate on a 1-D array of points.

        Compactly supported terms only touch the points inside their support,
        which keeps many-term functions cheap on sorted grids.
        """
        xs = np.asarray(xs, dtype=float)
        out = np.zeros((xs.size, self.n))
        if not self.terms:
            return out
        order = np.argsort(xs, kind='stable')
        sx = xs[order]
        acc = np.zeros((xs.size, self.n))
        for t in self.terms:
            if t.profile.compact:
                lo, hi = t.profile.support
                i0 = np.searchsorted(sx, lo - t.shift, side='right')
                i1 = np.searchsorted(sx, hi - t.shift, side='left')
                if i1 <= i0:
                    continue
                acc[i0:i1] += np.outer(t.profile(sx[i0:i1] + t.shift), t.coeff)
            else:
                acc += np.outer(t.profile(sx + t.shift), t.coeff)
        out[order] = acc
        return out

    def to_dict(self):
        return {"n": self.n,
                "terms": [{"profile": t.profile.name, "shift": t.shift,
                           "coeff": t.coeff.tolist()} for t in self.terms]}

    def to_json(self):
        return _jsonio.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        d = json.loads(text) if isinstance(text, str) else text
        return cls(d["n"], [Term(parse_profile(t["profile"]), t["shift"], t["coeff"])
                            for t in d["terms"]])


def eval(f, x):  # noqa: A001 - mirrors the operation name
    """Value of ``f`` at ``x``: ``sum_k p_k(x + s_k) c_k``."""
    return f(x)


def support_interval(f):
    """Smallest interval outside of which ``f`` vanishes identically.

    Terms with an all-zero coefficient are ignored.  A function with no
    nonzero terms returns ``Interval(0, 0, empty=True)``.
    """
    live = [t for t in f.terms if not t.is_zero]
    if any(not t.profile.compact for t in live):
        raise UnboundedSupport("function has a term with unbounded support")
    if not live:
        return Interval(0.0, 0.0, empty=True)
    sups = [t.support() for t in live]
    return Interval(min(s.lo for s in sups), max(s.hi for s in sups))


def sampling_grid(domain, points_per_unit, extra=()):
    """Uniform grid over ``domain`` merged with the ``extra`` points inside it."""
    if not domain.bounded:
        raise UnboundedDomain("sampling requires a bounded domain")
    count = max(1, int(math.ceil(domain.length * points_per_unit)))
    grid = np.linspace(domain.lo, domain.hi, count + 1)
    extra = np.asarray(extra, dtype=float)
    extra = extra[(extra >= domain.lo) & (extra <= domain.hi)]
    return np.unique(np.concatenate([grid, extra]))


def row_norms(v):
    """Euclidean norms of the rows of ``v`` without overflow for huge entries."""
    v = np.asarray(v, dtype=float)
    scale = np.max(np.abs(v), axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return (safe * np.linalg.norm(v / safe, axis=-1, keepdims=True))[..., 0]


def _landmarks(f):
    pts = []
    for t in f.terms:
        if t.profile.compact:
            s = t.support()
            pts.extend((s.lo, s.hi, 0.5 * (s.lo + s.hi)))
    return pts


def sup_distance(f, g, domain=None, points_per_unit=2048, grid=None):
    """Sampled estimate of ``sup_x ||f(x) - g(x)||`` (Euclidean in R^n).

    The grid is uniform with ``points_per_unit`` points per unit length plus
    every term's support endpoints and midpoint.  The result is a lower bound
    of the true sup that converges as the grid is refined.

    If ``domain`` is None both functions must be compactly supported; the
    domain is then the hull of their supports padded by 1.  An explicit
    ``grid`` of sample points overrides all of the above.
    """
    if f.n != g.n:
        raise DimensionMismatch(f"dimensions {f.n} and {g.n} differ")
    if grid is not None:
        diff = f.evaluate(grid) - g.evaluate(grid)
        return float(np.max(row_norms(diff))) if diff.size else 0.0
    if domain is None:
        if not (f.compact and g.compact):
            raise UnboundedDomain("unbounded support requires an explicit bounded domain")
        hull = support_interval(f).hull(support_interval(g))
        domain = Interval(-1.0, 1.0) if hull.empty else hull.padded(1.0)
    xs = sampling_grid(domain, points_per_unit, _landmarks(f) + _landmarks(g))
    diff = f.evaluate(xs) - g.evaluate(xs)
    return float(np.max(row_norms(diff)))


def bump_direction(dC):
    """``phi * r_max``: the bump along the top eigenvector of ``dC``."""
    return VectorFunction(dC.n, [Term(Bump(), 0.0, dC.r_max)])
