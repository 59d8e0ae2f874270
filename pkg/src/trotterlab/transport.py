"""Transport operators ``(Op f)(x) = sum_k M_k f(x + s_k)`` and their algebra.

Every semigroup in this package, and every product of them, is a finite sum
of matrix-weighted translations.  Operators are kept in a canonical form:
shifts ascending, shifts closer than ``merge_tol`` coalesced, exactly-zero
matrices removed.  Composition therefore never discretizes anything.
"""

import itertools
import json

import numpy as np

from . import _jsonio
from .errors import DimensionMismatch, EmptyOperator, MTooLarge, TermExplosion
from .funcspace import Term, VectorFunction, row_norms

__all__ = ['TransportOperator', 'NormBounds', 'DEFAULT_TERM_CAP', 'ZERO_PURGE',
           'identity_operator', 'from_semigroup', 'compose', 'trotter_operator',
           'apply', 'vanishing_edge', 'norm_bounds', 'naive_trotter_oracle',
           'semigroup_merge_tol', 'max_deviation']

BASE_MERGE_TOL = 1e-9
DEFAULT_TERM_CAP = 10**6
ZERO_PURGE = 1e-300
# coefficient vectors in the numerical kernel of M (||M c|| <= rtol ||M|| ||c||)
# are dropped by apply
KERNEL_RTOL = 1e-12


def _canonicalize(shifts, mats, merge_tol):
    """Sort, coalesce near-equal shifts at the run minimum, purge zeros.

    Ties are ordered by matrix entries as well, so the summation order inside
    a run depends only on the multiset of input terms.
    """
    shifts = np.asarray(shifts, dtype=float).reshape(-1)
    mats = np.asarray(mats, dtype=float)
    if shifts.size == 0:
        return shifts, mats.reshape(0, *mats.shape[1:])
    flat = mats.reshape(len(shifts), -1)
    keys = tuple(flat[:, j] for j in range(flat.shape[1] - 1, -1, -1)) + (shifts,)
    order = np.lexsort(keys)
    shifts = shifts[order]
    mats = mats[order]
    starts = np.concatenate(([0], np.nonzero(np.diff(shifts) > merge_tol)[0] + 1))
    out_shifts = shifts[starts]
    out_mats = np.add.reduceat(mats, starts, axis=0)
    keep = np.any(np.abs(out_mats) >= ZERO_PURGE, axis=(1, 2))
    return out_shifts[keep], out_mats[keep]


class TransportOperator:
    """Finite sum of matrix-weighted translations on ``C_ub(R, R^n)``.

    Parameters
    ----------
    n : int
        Dimension of the values.
    shifts : array_like, shape (K,)
    matrices : array_like, shape (K, n, n)
    merge_tol : float
        Shifts within this distance of each other are treated as equal.
    """

    def __init__(self, n, shifts=(), matrices=(), merge_tol=BASE_MERGE_TOL):
        self.n = int(n)
        mats = np.asarray(matrices, dtype=float).reshape(-1, self.n, self.n)
        shifts = np.asarray(shifts, dtype=float).reshape(-1)
        if len(shifts) != len(mats):
            raise DimensionMismatch(f"{len(shifts)} shifts but {len(mats)} matrices")
        self.merge_tol = float(merge_tol)
        self.shifts, self.matrices = _canonicalize(shifts, mats, self.merge_tol)
        self.shifts.setflags(write=False)
        self.matrices.setflags(write=False)

    @classmethod
    def from_terms(cls, n, terms, merge_tol=BASE_MERGE_TOL):
        """Build from a mapping or iterable of ``(shift, matrix)`` pairs."""
        items = list(terms.items()) if isinstance(terms, dict) else list(terms)
        return cls(n, [s for s, _ in items], [m for _, m in items], merge_tol)

    def __len__(self):
        return len(self.shifts)

    @property
    def term_count(self):
        return len(self.shifts)

    def __iter__(self):
        return zip(self.shifts.tolist(), self.matrices)

    def __repr__(self):
        return f"TransportOperator(n={self.n}, terms={len(self)})"

    def __matmul__(self, other):
        return compose(self, other)

    def to_dict(self):
        return {"n": self.n,
                "terms": [{"shift": s, "matrix": m.tolist()} for s, m in self]}

    def to_json(self):
        return _jsonio.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text, merge_tol=BASE_MERGE_TOL):
        d = json.loads(text)
        return cls.from_terms(d["n"], [(t["shift"], t["matrix"]) for t in d["terms"]],
                              merge_tol)


class NormBounds:
    """Two-sided bounds on the operator norm on ``C_ub`` with the sup norm."""
    __slots__ = ('lower', 'upper')

    def __init__(self, lower, upper):
        self.lower = float(lower)
        self.upper = float(upper)

    def __repr__(self):
        return f"NormBounds(lower={self.lower!r}, upper={self.upper!r})"


def semigroup_merge_tol(d, t):
    return BASE_MERGE_TOL * max(1.0, abs(t) * float(np.max(np.abs(d.eigenvalues))))


def identity_operator(n):
    return TransportOperator(n, [0.0], [np.eye(n)])


def from_semigroup(d, t):
    """The group element ``sum_i P_i shift(lambda_i t)`` of decomposition ``d``."""
    return TransportOperator(d.n, d.eigenvalues * t, d.projections,
                             semigroup_merge_tol(d, t))


def compose(a, b):
    """Operator product ``a o b``: shifts add, matrices multiply."""
    if a.n != b.n:
        raise DimensionMismatch(f"dimensions {a.n} and {b.n} differ")
    shifts = (a.shifts[:, None] + b.shifts[None, :]).reshape(-1)
    mats = np.matmul(a.matrices[:, None], b.matrices[None, :]).reshape(-1, a.n, a.n)
    return TransportOperator(a.n, shifts, mats, max(a.merge_tol, b.merge_tol))


def trotter_operator(dA, dB, t, m, term_cap=DEFAULT_TERM_CAP):
    """``[S(t/m) T(t/m)]^m`` by ``m`` sequential left-compositions.

    Raises
    ------
    TermExplosion
        If an intermediate operator has more than ``term_cap`` terms.
    """
    if dA.n != dB.n:
        raise DimensionMismatch(f"dimensions {dA.n} and {dB.n} differ")
    m = int(m)
    if m < 1:
        raise ValueError("m must be a positive integer")
    tau = t / m
    step = compose(from_semigroup(dA, tau), from_semigroup(dB, tau))
    result = step
    for k in range(1, m):
        result = compose(step, result)
        if len(result) > term_cap:
            raise TermExplosion(f"term count {len(result)} exceeds cap {term_cap} "
                                f"after {k + 1} of {m} factors", count=len(result))
    if len(result) > term_cap:
        raise TermExplosion(f"term count {len(result)} exceeds cap {term_cap}",
                            count=len(result))
    return result


def apply(op, f, kernel_rtol=KERNEL_RTOL):
    """Exact action on a :class:`VectorFunction`.

    Every pair (operator term, function term) yields a function term; pairs
    whose coefficient is zero, or lies in the numerical kernel of the matrix
    (``||M c|| <= kernel_rtol ||M|| ||c||``), are dropped.
    """
    if op.n != f.n:
        raise DimensionMismatch(f"operator dimension {op.n} vs function dimension {f.n}")
    if not f.terms:
        return VectorFunction(f.n)
    coeffs = np.array([t.coeff for t in f.terms])
    prod = np.einsum('kij,lj->kli', op.matrices, coeffs)
    mnorm = np.linalg.norm(op.matrices, ord=2, axis=(1, 2))
    cnorm = np.linalg.norm(coeffs, axis=1)
    pnorm = row_norms(prod)
    keep = (pnorm > kernel_rtol * mnorm[:, None] * cnorm[None, :]) & (pnorm > 0)
    terms = []
    for k, s in enumerate(op.shifts.tolist()):
        for l, ft in enumerate(f.terms):
            if keep[k, l]:
                terms.append(Term(ft.profile, ft.shift + s, prod[k, l]))
    return VectorFunction(f.n, terms)


def vanishing_edge(op, a):
    """If ``g`` vanishes on ``x <= a`` then ``op g`` vanishes on ``x <= edge``."""
    if len(op) == 0:
        raise EmptyOperator("operator has no terms")
    return a - float(op.shifts[-1])


def norm_bounds(op, restarts=8, seed=0, max_iter=500):
    """Bracket the operator norm of ``op`` on ``C_ub`` with the sup norm.

    ``upper`` is ``sum_k ||M_k||_2``.  ``lower`` is the best value of
    ``||sum_k M_k v_k||`` over unit vectors found by alternating ascent: for
    a unit ``u``, ``v_k = M_k^T u / ||M_k^T u||``, then ``u`` is the direction
    of ``sum_k M_k v_k``.  Distinct shifts make any choice of ``v_k``
    realizable by a continuous unit-norm function, so ``lower`` is a valid
    bound.  One start is the top singular pair of the largest term, so
    ``lower >= max_k ||M_k||_2``.
    """
    if len(op) == 0:
        raise EmptyOperator("operator has no terms")
    # work on a rescaled copy so huge iterates do not overflow
    scale = float(np.max(np.abs(op.matrices)))
    mats = op.matrices / scale
    svals = np.linalg.norm(mats, ord=2, axis=(1, 2))
    upper = float(np.sum(svals))
    rng = np.random.default_rng(seed)
    big = int(np.argmax(svals))
    starts = [np.linalg.svd(mats[big])[0][:, 0]]
    starts += [rng.standard_normal(op.n) for _ in range(restarts)]

    best = 0.0
    mt = np.transpose(mats, (0, 2, 1))
    for u in starts:
        u = u / np.linalg.norm(u)
        value = 0.0
        for _ in range(max_iter):
            z = mt @ u
            zn = np.linalg.norm(z, axis=1)
            v = np.divide(z, zn[:, None], out=np.zeros_like(z), where=zn[:, None] > 0)
            w = np.einsum('kij,kj->i', mats, v)
            new = float(np.linalg.norm(w))
            if new == 0.0:
                break
            u = w / new
            if new <= value * (1 + 1e-15):
                value = max(value, new)
                break
            value = new
        best = max(best, value)
    # guard against rounding pushing lower above the certified upper value
    return NormBounds(scale * min(best, upper), scale * upper)


def naive_trotter_oracle(dA, dB, t, m):
    """Brute-force expansion of ``[S(t/m) T(t/m)]^m`` over all index tuples.

    Independent of :func:`compose`; the result is put in canonical form with
    the same merge rule.  Only for ``m <= 4`` (``n^(2m)`` terms).
    """
    if m > 4:
        raise MTooLarge(f"oracle expansion limited to m <= 4, got {m}")
    if dA.n != dB.n:
        raise DimensionMismatch(f"dimensions {dA.n} and {dB.n} differ")
    n = dA.n
    tau = t / m
    shifts, mats = [], []
    for idx in itertools.product(range(n), repeat=2 * m):
        s = sum(dA.eigenvalues[idx[2 * k]] + dB.eigenvalues[idx[2 * k + 1]]
                for k in range(m)) * tau
        prod = np.eye(n)
        for k in range(m):
            prod = prod @ dA.projections[idx[2 * k]] @ dB.projections[idx[2 * k + 1]]
        shifts.append(s)
        mats.append(prod)
    tol = max(semigroup_merge_tol(dA, tau), semigroup_merge_tol(dB, tau))
    return TransportOperator(n, shifts, mats, tol)


def max_deviation(a, b, shift_tol=None):
    """Largest entrywise matrix difference between two operators.

    Terms are matched by shift within ``shift_tol`` (default: the larger
    merge tolerance); an unmatched term is compared against the zero matrix.
    """
    if a.n != b.n:
        raise DimensionMismatch(f"dimensions {a.n} and {b.n} differ")
    tol = max(a.merge_tol, b.merge_tol) if shift_tol is None else shift_tol
    diff = TransportOperator(a.n,
                             np.concatenate([a.shifts, b.shifts]),
                             np.concatenate([a.matrices, -b.matrices]),
                             tol)
    if len(diff) == 0:
        return 0.0
    return float(np.max(np.abs(diff.matrices)))
