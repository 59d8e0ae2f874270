"""Real eigendecomposition of hyperbolic matrices.

A hyperbolic matrix is real, diagonalizable over the reals, and here also
invertible.  Its decomposition carries unit right eigenvectors ``r_i`` and
left eigenvectors ``l_i`` normalized so that ``<l_j, r_i> = delta_ij``; the
left family is always read off the rows of ``R^{-1}``.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from . import _jsonio
from .errors import (DecompositionError, IndexOutOfRange, NotDiagonalizable,
                     NotHyperbolic, NotInvertible, DimensionMismatch)

__all__ = ['DEFAULT_TOL', 'SpectralDecomposition', 'HypothesisReport',
           'as_matrix', 'max_norm', 'decompose', 'spectral_projection',
           'reconstruct', 'check_hypothesis']

DEFAULT_TOL = 1e-9


def as_matrix(m):
    """Return ``m`` as a finite, square float64 array (read-only copy)."""
    a = np.array(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    a.setflags(write=False)
    return a


def max_norm(m):
    return float(np.max(np.abs(m)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in ascending order with biorthogonal eigenvector families.

    ``right[i]`` and ``left[i]`` are the i-th right and left eigenvectors
    (stored as rows).  ``projections[i]`` is ``outer(right[i], left[i])``.
    """
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    source: np.ndarray
    tol: float = DEFAULT_TOL
    projections: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        proj = np.einsum('ij,ik->ijk', self.right, self.left)
        proj.setflags(write=False)
        object.__setattr__(self, 'projections', proj)

    @property
    def n(self):
        return self.source.shape[0]

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    @property
    def r_max(self):
        """Right eigenvector of the largest eigenvalue."""
        return self.right[-1]

    def to_dict(self):
        return {"n": self.n,
                "eigenvalues": self.eigenvalues.tolist(),
                "right": self.right.tolist(),
                "left": self.left.tolist()}

    def to_json(self):
        return _jsonio.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text, source=None, tol=DEFAULT_TOL):
        """Rebuild from :meth:`to_json` output.

        The source matrix is not serialized; when omitted it is recomputed
        as ``sum_i lambda_i r_i l_i^T``.
        """
        d = json.loads(text)
        lam = np.array(d["eigenvalues"], dtype=float)
        right = np.array(d["right"], dtype=float).reshape(d["n"], d["n"])
        left = np.array(d["left"], dtype=float).reshape(d["n"], d["n"])
        if source is None:
            source = np.einsum('i,ij,ik->jk', lam, right, left)
        for a in (lam, right, left):
            a.setflags(write=False)
        return cls(lam, right, left, as_matrix(source), tol)


@dataclass(frozen=True, eq=False)
class HypothesisReport:
    decompA: SpectralDecomposition
    decompB: SpectralDecomposition
    decompC: SpectralDecomposition
    gap: float
    satisfied: bool

    def to_dict(self):
        return {"gap": self.gap,
                "satisfied": self.satisfied,
                "lambda_max": {"A": self.decompA.lambda_max,
                               "B": self.decompB.lambda_max,
                               "C": self.decompC.lambda_max},
                "A": self.decompA.to_dict(),
                "B": self.decompB.to_dict(),
                "C": self.decompC.to_dict()}


def _canonical_sign(v):
    # first entry of non-negligible magnitude made positive
    k = int(np.argmax(np.abs(v) > 1e-12 * np.max(np.abs(v))))
    return -v if v[k] < 0 else v


def decompose(m, tol=DEFAULT_TOL):
    """Eigendecompose a hyperbolic invertible matrix.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Real matrix with finite entries.
    tol : float
        Relative tolerance. Imaginary parts and eigenvalue magnitudes are
        compared against ``tol * max|m_ij|``; the eigenvector matrix must have
        condition number below ``1/tol``.

    Returns
    -------
    SpectralDecomposition

    Raises
    ------
    NotHyperbolic, NotDiagonalizable, NotInvertible
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = as_matrix(m)
    scale = max_norm(a)
    w, vecs = np.linalg.eig(a)

    imag = np.max(np.abs(np.imag(w))) if np.iscomplexobj(w) else 0.0
    if imag > tol * scale:
        raise NotHyperbolic(f"eigenvalue imaginary part {imag:.3g} "
                            f"exceeds {tol:.1e} * |m|")
    w = np.real(w)
    vecs = np.real(vecs)
    vecs = vecs / np.linalg.norm(vecs, axis=0)

    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > 1.0 / tol:
        raise NotDiagonalizable(
            f"eigenvector condition estimate {cond:.3g} exceeds "
            f"1/tol = {1.0 / tol:.3g} (threshold is a tolerance choice)")
    if np.min(np.abs(w)) <= tol * scale:
        raise NotInvertible(f"eigenvalue {w[np.argmin(np.abs(w))]:.3g} "
                            f"is zero within {tol:.1e} * |m|")

    order = np.argsort(w, kind='stable')
    lam = w[order].copy()
    right = np.array([_canonical_sign(vecs[:, k]) for k in order])
    left = np.linalg.solve(right.T, np.eye(len(lam)))
    for arr in (lam, right, left):
        arr.setflags(write=False)
    return SpectralDecomposition(lam, right, left, a, tol)


def spectral_projection(d, i):
    """Rank-one projection ``r_i l_i^T`` for the 1-based index ``i``."""
    if not 1 <= i <= d.n:
        raise IndexOutOfRange(f"projection index {i} outside 1..{d.n}")
    return d.projections[i - 1].copy()


def reconstruct(d):
    """``sum_i lambda_i P_i``; equals ``d.source`` up to rounding."""
    return np.einsum('i,ijk->jk', d.eigenvalues, d.projections)


def check_hypothesis(a, b, tol=DEFAULT_TOL):
    """Decompose ``a``, ``b`` and ``c = a + b`` and test the eigenvalue gap.

    The hypothesis holds when all three are hyperbolic and invertible and
    ``lambda_max(c) - lambda_max(a) - lambda_max(b) > tol``.  A failed
    decomposition is re-raised tagged with the matrix name.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    decomps = {}
    for name, mat in (("A", a), ("B", b), ("C", a + b)):
        try:
            decomps[name] = decompose(mat, tol)
        except DecompositionError as err:
            raise err.with_matrix(name) from err
    gap = decomps["C"].lambda_max - (decomps["A"].lambda_max + decomps["B"].lambda_max)
    return HypothesisReport(decomps["A"], decomps["B"], decomps["C"],
                            float(gap), bool(gap > tol))
