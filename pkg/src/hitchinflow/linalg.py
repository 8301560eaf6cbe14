"""Small dense linear algebra helpers that work in two scalar modes.

Float mode uses numpy directly.  Exact mode operates on object arrays of
``fractions.Fraction`` so that the model identities can be verified without
rounding; only the operations actually needed by the exact identity suite
(solve, inverse, determinant, signature, nullspace, square roots) are
implemented.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def as_exact(a) -> np.ndarray:
    """Convert an array-like of ints/Fractions to an exact object array."""
    arr = np.array(a, dtype=object)
    flat = arr.reshape(-1)
    for i, x in enumerate(flat):
        flat[i] = Fraction(x)
    return flat.reshape(arr.shape)


def exact_sqrt(x: Fraction) -> Fraction:
    """Exact square root of a nonnegative Fraction, or raise ValueError."""
    if x < 0:
        raise ValueError("square root of negative value")
    num, den = x.numerator, x.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise ValueError(f"{x} has no exact rational square root")
    return Fraction(rn, rd)


def exact_nth_root(x: Fraction, n: int) -> Fraction:
    """Exact signed n-th root (n odd allows negative x)."""
    if x < 0:
        if n % 2 == 0:
            raise ValueError("even root of negative value")
        return -exact_nth_root(-x, n)
    num, den = x.numerator, x.denominator
    rn = round(num ** (1.0 / n)) if num else 0
    rd = round(den ** (1.0 / n))
    for r, target in ((rn, num), (rd, den)):
        if r**n != target:
            raise ValueError(f"{x} has no exact rational {n}-th root")
    return Fraction(rn, rd)


def sqrt_scalar(x):
    if isinstance(x, Fraction):
        return exact_sqrt(x)
    return math.sqrt(x)


def nth_root_signed(x, n: int):
    """Signed n-th root, exact for Fractions, floating otherwise."""
    if isinstance(x, Fraction):
        return exact_nth_root(x, n)
    return math.copysign(abs(x) ** (1.0 / n), x) if x else 0.0


def _gauss_jordan(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Exact Gauss-Jordan solve for Fraction matrices."""
    n = a.shape[0]
    m = np.concatenate([a.astype(object), rhs.astype(object)], axis=1)
    col = rhs.shape[1]
    for i in range(n):
        piv = None
        for r in range(i, n):
            if m[r, i] != 0:
                piv = r
                break
        if piv is None:
            raise np.linalg.LinAlgError("singular exact matrix")
        if piv != i:
            m[[i, piv]] = m[[piv, i]]
        m[i] = m[i] / m[i, i]
        for r in range(n):
            if r != i and m[r, i] != 0:
                m[r] = m[r] - m[r, i] * m[i]
    return m[:, n : n + col]


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if is_exact(a) or is_exact(b):
        rhs = b.reshape(-1, 1) if b.ndim == 1 else b
        out = _gauss_jordan(as_exact(a), as_exact(rhs))
        return out.reshape(b.shape)
    return np.linalg.solve(a, b)


def inverse(a: np.ndarray) -> np.ndarray:
    if is_exact(a):
        return _gauss_jordan(a, np.eye(a.shape[0], dtype=object) + Fraction(0))
    return np.linalg.inv(a)


def det(a: np.ndarray):
    """Determinant; Bareiss elimination in exact mode."""
    if not is_exact(a):
        return float(np.linalg.det(a))
    m = as_exact(a).copy()
    n = m.shape[0]
    sign = Fraction(1)
    prev = Fraction(1)
    for k in range(n - 1):
        if m[k, k] == 0:
            piv = next((r for r in range(k + 1, n) if m[r, k] != 0), None)
            if piv is None:
                return Fraction(0)
            m[[k, piv]] = m[[piv, k]]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i, j] = (m[i, j] * m[k, k] - m[i, k] * m[k, j]) / prev
        prev = m[k, k]
    return sign * m[n - 1, n - 1]


def signature(g: np.ndarray, tol: float = 1e-10) -> tuple[int, int]:
    """Signature (p, q) of a symmetric matrix; exact via congruence in
    Fraction mode, eigenvalue counting otherwise.

    Raises ValueError if the matrix is degenerate at the given tolerance.
    """
    n = g.shape[0]
    if is_exact(g):
        m = g.astype(object).copy()
        p = q = 0
        idx = list(range(n))
        for _ in range(n):
            k = next((i for i in idx if m[i, i] != 0), None)
            if k is None:
                # symmetric with zero diagonal: find off-diagonal pivot
                pair = next(
                    ((i, j) for i in idx for j in idx if i < j and m[i, j] != 0),
                    None,
                )
                if pair is None:
                    raise ValueError("degenerate exact bilinear form")
                i, j = pair
                m[i] = m[i] + m[j]
                m[:, i] = m[:, i] + m[:, j]
                k = i
            d = m[k, k]
            if d > 0:
                p += 1
            else:
                q += 1
            idx.remove(k)
            for i in idx:
                c = m[i, k] / d
                if c != 0:
                    m[i] = m[i] - c * m[k]
                    m[:, i] = m[:, i] - c * m[:, k]
        return p, q
    eigs = np.linalg.eigvalsh(np.asarray(g, dtype=float))
    scale = max(np.max(np.abs(eigs)), 1.0)
    if np.any(np.abs(eigs) <= tol * scale):
        raise ValueError("degenerate bilinear form")
    return int(np.sum(eigs > 0)), int(np.sum(eigs < 0))


def rational_nullspace(a: np.ndarray) -> list[np.ndarray]:
    """Deterministic exact nullspace basis of a Fraction matrix.

    Returns vectors in reduced echelon convention: each has a leading 1 in
    a distinct free column, ordered by column index.
    """
    m = as_exact(a).copy()
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i, c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] / m[r, c]
        for i in range(rows):
            if i != r and m[i, c] != 0:
                m[i] = m[i] - m[i, c] * m[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for c in free:
        v = np.zeros(cols, dtype=object) + Fraction(0)
        v[c] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i, c]
        basis.append(v)
    return basis


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring Taylor series."""
    a = np.asarray(a, dtype=float)
    norm = np.max(np.abs(a)) if a.size else 0.0
    s = max(0, int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0)
    x = a / (2**s)
    out = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, 25):
        term = term @ x / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out
