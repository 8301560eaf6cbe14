"""Dense exterior algebra over R^n for n <= 8.

A k-form stores one coefficient per strictly increasing index tuple, in
lexicographic order; every sign in the package flows from sorting index
tuples and counting transpositions.  Coefficients are float64 by default;
an exact mode (object arrays of ``fractions.Fraction``) is available for
the model identity suite.

Vectors are plain 1-d numpy arrays and linear maps are (n, n) matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import linalg
from .errors import DegenerateMetric, DegreeOverflow, DimensionMismatch

__all__ = [
    "KForm",
    "SymBilinear",
    "increasing_tuples",
    "tuple_position",
    "wedge",
    "interior",
    "pullback",
    "hodge",
    "volume_form",
    "embed",
    "restrict",
    "merge_sign",
]


@lru_cache(maxsize=None)
def increasing_tuples(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All strictly increasing k-tuples from {0, ..., n-1}, lexicographic."""
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def _tuple_index(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {t: i for i, t in enumerate(increasing_tuples(n, k))}


def tuple_position(n: int, indices: tuple[int, ...]) -> int:
    return _tuple_index(n, len(indices))[indices]


def merge_sign(a: tuple[int, ...], b: tuple[int, ...]):
    """Sign of sorting the concatenation of two increasing tuples.

    Returns (sign, merged) or (0, None) if they share an index.
    """
    if set(a) & set(b):
        return 0, None
    inv = 0
    for x in a:
        for y in b:
            if x > y:
                inv += 1
    return (-1) ** inv, tuple(sorted(a + b))


def _sort_sign(indices) -> tuple[int, tuple[int, ...]]:
    """Sign of sorting an arbitrary index sequence; 0 on repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, ()
    inv = sum(1 for i in range(len(idx)) for j in range(i + 1, len(idx)) if idx[i] > idx[j])
    return (-1) ** inv, tuple(sorted(idx))


@dataclass(frozen=True)
class KForm:
    """Alternating k-form with dense coefficients over increasing tuples."""

    dim: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not (1 <= self.dim <= 8):
            raise DimensionMismatch(f"dimension {self.dim} out of range 1..8")
        if not (0 <= self.degree <= self.dim):
            raise DegreeOverflow(f"degree {self.degree} invalid in dimension {self.dim}")
        want = len(increasing_tuples(self.dim, self.degree))
        if self.coeffs.shape != (want,):
            raise ValueError(f"expected {want} coefficients, got {self.coeffs.shape}")
        self.coeffs.setflags(write=False)

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero(dim: int, degree: int, exact: bool = False) -> "KForm":
        n = len(increasing_tuples(dim, degree))
        if exact:
            return KForm(dim, degree, np.array([Fraction(0)] * n, dtype=object))
        return KForm(dim, degree, np.zeros(n))

    @staticmethod
    def from_terms(dim: int, degree: int, terms: dict, exact: bool = False) -> "KForm":
        """Build from {index_tuple: coefficient}; tuples are 0-based and
        may be unsorted (signs handled)."""
        out = KForm.zero(dim, degree, exact=exact)
        coeffs = out.coeffs.copy()
        for raw, val in terms.items():
            sign, srt = _sort_sign(tuple(raw))
            if sign == 0:
                continue
            v = Fraction(val) if exact else float(val)
            coeffs[tuple_position(dim, srt)] += sign * v
        return KForm(dim, degree, coeffs)

    @staticmethod
    def basis(dim: int, indices, exact: bool = False) -> "KForm":
        return KForm.from_terms(dim, len(tuple(indices)), {tuple(indices): 1}, exact=exact)

    # -- basic queries ------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    def term(self, indices) -> float | Fraction:
        sign, srt = _sort_sign(tuple(indices))
        if sign == 0:
            return Fraction(0) if self.exact else 0.0
        return sign * self.coeffs[tuple_position(self.dim, srt)]

    def tuples(self):
        return increasing_tuples(self.dim, self.degree)

    def max_abs(self) -> float:
        if len(self.coeffs) == 0:
            return 0.0
        return float(max(abs(c) for c in self.coeffs))

    def to_float(self) -> "KForm":
        return KForm(self.dim, self.degree, np.asarray(self.coeffs, dtype=float))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def __call__(self, *vectors) -> float | Fraction:
        """Evaluate on vectors (multilinear, antisymmetric)."""
        if len(vectors) != self.degree:
            raise ValueError(f"need {self.degree} vectors")
        if self.degree == 0:
            return self.coeffs[0]
        v = np.array(vectors)
        total = Fraction(0) if self.exact else 0.0
        for pos, idx in enumerate(self.tuples()):
            c = self.coeffs[pos]
            if c == 0:
                continue
            sub = v[:, list(idx)]
            total += c * (linalg.det(sub.astype(object)) if self.exact else linalg.det(sub))
        return total

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: "KForm") -> "KForm":
        self._check_like(other)
        return KForm(self.dim, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "KForm") -> "KForm":
        self._check_like(other)
        return KForm(self.dim, self.degree, self.coeffs - other.coeffs)

    def __neg__(self) -> "KForm":
        return KForm(self.dim, self.degree, -self.coeffs)

    def __mul__(self, scalar) -> "KForm":
        if self.exact:
            scalar = Fraction(scalar)
        return KForm(self.dim, self.degree, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "KForm":
        if self.exact:
            return self * (Fraction(1) / Fraction(scalar))
        return self * (1.0 / scalar)

    def _check_like(self, other: "KForm"):
        if self.dim != other.dim:
            raise DimensionMismatch(f"dim {self.dim} vs {other.dim}")
        if self.degree != other.degree:
            raise ValueError(f"degree {self.degree} vs {other.degree}")

    def __repr__(self):
        terms = []
        for pos, idx in enumerate(self.tuples()):
            c = self.coeffs[pos]
            if c != 0:
                label = "e" + "".join(str(i + 1) for i in idx) if idx else "1"
                terms.append(f"{c}*{label}")
        body = " + ".join(terms) if terms else "0"
        return f"KForm({self.dim}, {self.degree}: {body})"


@dataclass(frozen=True)
class SymBilinear:
    """Symmetric bilinear form; carrier of the associated metrics."""

    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if m.dtype != object:
            scale = max(float(np.max(np.abs(m))), 1e-300)
            if float(np.max(np.abs(m - m.T))) > 1e-12 * scale:
                raise ValueError("matrix is not symmetric to tolerance")
        else:
            if np.any(m != m.T):
                raise ValueError("exact matrix is not symmetric")
        m.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def exact(self) -> bool:
        return self.matrix.dtype == object

    def signature(self) -> tuple[int, int]:
        return linalg.signature(self.matrix)

    def is_nondegenerate(self, tol: float = 1e-10) -> bool:
        try:
            p, q = linalg.signature(self.matrix, tol=tol)
        except ValueError:
            return False
        return p + q == self.dim

    def inverse(self) -> np.ndarray:
        return linalg.inverse(self.matrix)

    def apply(self, v, w) -> float | Fraction:
        return (np.asarray(v) @ self.matrix @ np.asarray(w))

    def restrict(self, indices) -> "SymBilinear":
        idx = list(indices)
        return SymBilinear(self.matrix[np.ix_(idx, idx)])

    def norm_sq(self, form: KForm) -> float | Fraction:
        """Induced squared norm on k-forms (may be negative in indefinite
        signature)."""
        return form_pairing(self, form, form)


def volume_form(dim: int, coeff=1, exact: bool = False) -> KForm:
    """Top-degree form coeff * e^{1...n}."""
    out = KForm.zero(dim, dim, exact=exact)
    c = out.coeffs.copy()
    c[0] = Fraction(coeff) if exact else float(coeff)
    return KForm(dim, dim, c)


# -- wedge ------------------------------------------------------------
@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int):
    """Index/sign table for the wedge of a p-form and q-form in dim n."""
    ptups = increasing_tuples(n, p)
    qtups = increasing_tuples(n, q)
    out_index = _tuple_index(n, p + q)
    ai, bi, oi, sg = [], [], [], []
    for i, a in enumerate(ptups):
        for j, b in enumerate(qtups):
            sign, merged = merge_sign(a, b)
            if sign == 0:
                continue
            ai.append(i)
            bi.append(j)
            oi.append(out_index[merged])
            sg.append(sign)
    return (np.array(ai), np.array(bi), np.array(oi), np.array(sg))


def wedge(a: KForm, b: KForm) -> KForm:
    """Exterior product a ^ b."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")
    if a.degree + b.degree > a.dim:
        raise DegreeOverflow(
            f"degree {a.degree}+{b.degree} exceeds dimension {a.dim}"
        )
    exact = a.exact or b.exact
    out = KForm.zero(a.dim, a.degree + b.degree, exact=exact)
    coeffs = out.coeffs.copy()
    ai, bi, oi, sg = _wedge_table(a.dim, a.degree, b.degree)
    if len(ai):
        vals = sg * a.coeffs[ai] * b.coeffs[bi]
        np.add.at(coeffs, oi, vals)
    return KForm(a.dim, a.degree + b.degree, coeffs)


def wedge_all(*forms: KForm) -> KForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


# -- interior product -------------------------------------------------
@lru_cache(maxsize=None)
def _interior_table(n: int, k: int):
    """(input_pos, vector_component, output_pos, sign) quadruples."""
    out_index = _tuple_index(n, k - 1)
    rows = []
    for i, t in enumerate(increasing_tuples(n, k)):
        for p, comp in enumerate(t):
            rest = t[:p] + t[p + 1 :]
            rows.append((i, comp, out_index[rest], (-1) ** p))
    ii, vc, oi, sg = zip(*rows)
    return np.array(ii), np.array(vc), np.array(oi), np.array(sg)


def interior(v, a: KForm) -> KForm:
    """Interior product v . a, i.e. (v . a)(w1,...) = a(v, w1, ...)."""
    v = np.asarray(v)
    if v.shape != (a.dim,):
        raise DimensionMismatch(f"vector of length {v.shape} vs dim {a.dim}")
    if a.degree < 1:
        raise DegreeOverflow("interior product needs degree >= 1")
    out = KForm.zero(a.dim, a.degree - 1, exact=a.exact or v.dtype == object)
    coeffs = out.coeffs.copy()
    ii, vc, oi, sg = _interior_table(a.dim, a.degree)
    np.add.at(coeffs, oi, sg * a.coeffs[ii] * v[vc])
    return KForm(a.dim, a.degree - 1, coeffs)


# -- pullback ---------------------------------------------------------
def pullback(mat: np.ndarray, a: KForm) -> KForm:
    """Pullback (A* a)(v1,...,vk) = a(A v1, ..., A vk)."""
    mat = np.asarray(mat)
    if mat.shape != (a.dim, a.dim):
        raise DimensionMismatch(f"matrix {mat.shape} vs dim {a.dim}")
    if a.degree == 0:
        return a
    exact = a.exact or mat.dtype == object
    tups = a.tuples()
    out = KForm.zero(a.dim, a.degree, exact=exact)
    coeffs = out.coeffs.copy()
    if exact:
        m = linalg.as_exact(mat)
        for jpos, J in enumerate(tups):
            total = Fraction(0)
            for ipos, I in enumerate(tups):
                c = a.coeffs[ipos]
                if c != 0:
                    total += c * linalg.det(m[np.ix_(I, J)])
            coeffs[jpos] = total
    else:
        k = a.degree
        nt = len(tups)
        idx = np.array(tups)
        # minors[i, j] = det(mat[I_i, J_j]) via batched determinants
        sub = mat[idx[:, None, :, None], idx[None, :, None, :]]
        minors = np.linalg.det(sub.reshape(nt, nt, k, k))
        coeffs = a.coeffs @ minors
    return KForm(a.dim, a.degree, coeffs)


# -- metric pairing and Hodge star ------------------------------------
def _pairing_matrix(g: SymBilinear, k: int) -> np.ndarray:
    """Gram matrix of the induced metric on k-forms: det of inverse-metric
    minors."""
    ginv = g.inverse()
    tups = increasing_tuples(g.dim, k)
    nt = len(tups)
    if k == 0:
        return np.array([[Fraction(1)]] if g.exact else [[1.0]])
    if g.exact:
        out = np.empty((nt, nt), dtype=object)
        for i, I in enumerate(tups):
            for j, J in enumerate(tups):
                out[i, j] = linalg.det(ginv[np.ix_(I, J)])
        return out
    idx = np.array(tups)
    sub = ginv[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub.reshape(nt, nt, k, k))


def form_pairing(g: SymBilinear, a: KForm, b: KForm):
    """Induced inner product <a, b>_g on k-forms."""
    a._check_like(b)
    gram = _pairing_matrix(g, a.degree)
    return a.coeffs @ gram @ b.coeffs


@lru_cache(maxsize=None)
def _complement_table(n: int, k: int):
    """(complement position, merge sign) for each increasing k-tuple."""
    out_index = _tuple_index(n, n - k)
    rows = []
    for t in increasing_tuples(n, k):
        comp = tuple(i for i in range(n) if i not in t)
        sign, _ = merge_sign(t, comp)
        rows.append((out_index[comp], sign))
    pos, sg = zip(*rows)
    return np.array(pos), np.array(sg)


def hodge(g: SymBilinear, vol: KForm, a: KForm) -> KForm:
    """Hodge star defined by  b ^ star(a) = <b, a>_g vol  for all b."""
    if vol.degree != vol.dim or vol.dim != a.dim or g.dim != a.dim:
        raise DimensionMismatch("volume/metric/form dimensions disagree")
    if vol.is_zero():
        raise DegenerateMetric("volume form vanishes")
    if not g.is_nondegenerate():
        raise DegenerateMetric("metric is degenerate")
    v0 = vol.coeffs[0]
    gram = _pairing_matrix(g, a.degree)
    paired = gram @ a.coeffs  # <e^J, a> per increasing J
    pos, sg = _complement_table(a.dim, a.degree)
    out = KForm.zero(a.dim, a.dim - a.degree, exact=a.exact or g.exact or vol.exact)
    coeffs = out.coeffs.copy()
    coeffs[pos] = sg * paired * v0
    return KForm(a.dim, a.dim - a.degree, coeffs)


# -- index embeddings --------------------------------------------------
def embed(a: KForm, dim: int, index_map=None) -> KForm:
    """Embed into a larger space; index_map[i] = new index of old axis i."""
    if index_map is None:
        index_map = list(range(a.dim))
    out = KForm.zero(dim, a.degree, exact=a.exact)
    coeffs = out.coeffs.copy()
    for pos, t in enumerate(a.tuples()):
        c = a.coeffs[pos]
        if c == 0:
            continue
        new = tuple(index_map[i] for i in t)
        sign, srt = _sort_sign(new)
        coeffs[tuple_position(dim, srt)] += sign * c
    return KForm(dim, a.degree, coeffs)


def restrict(a: KForm, indices) -> KForm:
    """Restrict to the subspace spanned by the given axes.

    Coefficients involving other axes are dropped (the pullback under the
    inclusion).
    """
    idx = list(indices)
    back = {old: new for new, old in enumerate(idx)}
    out = KForm.zero(len(idx), a.degree, exact=a.exact)
    coeffs = out.coeffs.copy()
    for pos, t in enumerate(a.tuples()):
        c = a.coeffs[pos]
        if c == 0 or not all(i in back for i in t):
            continue
        coeffs[tuple_position(len(idx), tuple(back[i] for i in t))] += c
    return KForm(len(idx), a.degree, coeffs)
