"""Backend-tagged dense matrices over Q(i) (exact) or complex doubles (float64).

Matrices are immutable values; every operation returns a new matrix.  The two
backends never mix implicitly: combining an exact and a float matrix raises
BackendMismatchError, because silently degrading an exact certificate to
floating point would defeat the point of carrying one.

Exact rank and determinant run fraction-free (Bareiss) over Z[i] after
clearing denominators, so no tolerance enters the exact backend anywhere.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .scalars import (
    GaussianRational,
    GR_ONE,
    GR_ZERO,
    as_gaussian,
    gint_divexact,
    gint_is_zero,
    gint_mul,
    gint_sub,
    rational,
)

EXACT = "exact"
FLOAT64 = "float64"


class BackendMismatchError(TypeError):
    """Raised when an operation would combine matrices of different backends."""


class DimensionMismatchError(ValueError):
    """Raised when operand shapes are not conformal."""


class SingularMatrixError(ValueError):
    """Raised when an invertible matrix was required but not supplied."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Thresholds used by the float backend; the exact backend ignores them.

    rank_tol        relative singular-value cutoff for numerical rank
    eig_cluster_tol radius used to cluster float eigenvalues into multiplets
    verify_tol      residual bound accepted by certificate verification
    """

    rank_tol: float = 1e-9
    eig_cluster_tol: float = 1e-7
    verify_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_tol", "eig_cluster_tol", "verify_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


DEFAULT_TOLERANCES = ToleranceConfig()


class Matrix:
    """Immutable dense rows x cols matrix with an `exact` or `float64` backend."""

    __slots__ = ("rows", "cols", "backend", "_cells", "_arr")

    def __init__(self, rows: int, cols: int, backend: str, payload):
        if rows < 0 or cols < 0:
            raise DimensionMismatchError("matrix dimensions must be nonnegative")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "backend", backend)
        if backend == EXACT:
            object.__setattr__(self, "_cells", payload)
            object.__setattr__(self, "_arr", None)
        elif backend == FLOAT64:
            arr = np.asarray(payload, dtype=np.complex128).reshape(rows, cols)
            arr.setflags(write=False)
            object.__setattr__(self, "_cells", None)
            object.__setattr__(self, "_arr", arr)
        else:
            raise ValueError(f"unknown backend {backend!r}")

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def exact(rows: Sequence[Sequence]) -> "Matrix":
        cells = tuple(tuple(as_gaussian(x) for x in r) for r in rows)
        nr = len(cells)
        nc = len(cells[0]) if nr else 0
        if any(len(r) != nc for r in cells):
            raise DimensionMismatchError("ragged rows")
        return Matrix(nr, nc, EXACT, cells)

    @staticmethod
    def float64(rows) -> "Matrix":
        arr = np.asarray(rows, dtype=np.complex128)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise DimensionMismatchError("expected a 2-d array")
        return Matrix(arr.shape[0], arr.shape[1], FLOAT64, arr)

    @staticmethod
    def zeros(rows: int, cols: int, backend: str = EXACT) -> "Matrix":
        if backend == EXACT:
            return Matrix(rows, cols, EXACT, tuple((GR_ZERO,) * cols for _ in range(rows)))
        return Matrix(rows, cols, FLOAT64, np.zeros((rows, cols), dtype=np.complex128))

    @staticmethod
    def identity(n: int, backend: str = EXACT) -> "Matrix":
        if backend == EXACT:
            return Matrix(
                n, n, EXACT,
                tuple(tuple(GR_ONE if i == j else GR_ZERO for j in range(n)) for i in range(n)),
            )
        return Matrix(n, n, FLOAT64, np.eye(n, dtype=np.complex128))

    @staticmethod
    def diag(values: Sequence, backend: str = EXACT) -> "Matrix":
        n = len(values)
        if backend == EXACT:
            vals = [as_gaussian(v) for v in values]
            return Matrix(
                n, n, EXACT,
                tuple(tuple(vals[i] if i == j else GR_ZERO for j in range(n)) for i in range(n)),
            )
        return Matrix(n, n, FLOAT64, np.diag(np.asarray(values, dtype=np.complex128)))

    @staticmethod
    def jordan_cell(size: int, eigenvalue=0, backend: str = EXACT) -> "Matrix":
        """J_size(lambda): `eigenvalue` on the diagonal, ones on the superdiagonal."""
        if backend == EXACT:
            lam = as_gaussian(eigenvalue)
            rows = []
            for i in range(size):
                row = [GR_ZERO] * size
                row[i] = lam
                if i + 1 < size:
                    row[i + 1] = GR_ONE
                rows.append(tuple(row))
            return Matrix(size, size, EXACT, tuple(rows))
        arr = np.eye(size, dtype=np.complex128) * complex(eigenvalue)
        arr += np.eye(size, k=1, dtype=np.complex128)
        return Matrix(size, size, FLOAT64, arr)

    @staticmethod
    def permutation(images: Sequence[int], backend: str = EXACT) -> "Matrix":
        """The matrix sending basis vector j to basis vector images[j]."""
        n = len(images)
        if sorted(images) != list(range(n)):
            raise ValueError("not a permutation")
        if backend == EXACT:
            return Matrix(
                n, n, EXACT,
                tuple(tuple(GR_ONE if images[j] == i else GR_ZERO for j in range(n)) for i in range(n)),
            )
        arr = np.zeros((n, n), dtype=np.complex128)
        for j, i in enumerate(images):
            arr[i, j] = 1.0
        return Matrix(n, n, FLOAT64, arr)

    # -- accessors ----------------------------------------------------------

    def __getitem__(self, key):
        i, j = key
        if self.backend == EXACT:
            return self._cells[i][j]
        return complex(self._arr[i, j])

    @property
    def array(self) -> np.ndarray:
        """The underlying complex array (float backend only)."""
        if self.backend != FLOAT64:
            raise BackendMismatchError("array view requires the float64 backend")
        return self._arr

    @property
    def cells(self) -> Tuple[Tuple[GaussianRational, ...], ...]:
        if self.backend != EXACT:
            raise BackendMismatchError("cells view requires the exact backend")
        return self._cells

    def to_float(self) -> "Matrix":
        """Explicit conversion to the float backend (identity on float input)."""
        if self.backend == FLOAT64:
            return self
        arr = np.array(
            [[c.to_complex() for c in row] for row in self._cells], dtype=np.complex128
        ).reshape(self.rows, self.cols)
        return Matrix(self.rows, self.cols, FLOAT64, arr)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        if self.backend == EXACT:
            return all(c.is_zero() for row in self._cells for c in row)
        return not np.any(self._arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        if (self.backend, self.rows, self.cols) != (other.backend, other.rows, other.cols):
            return False
        if self.backend == EXACT:
            return self._cells == other._cells
        return bool(np.array_equal(self._arr, other._arr))

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols}, {self.backend})"

    # -- operator sugar (delegates to the module-level operations) ----------

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return mat_mul(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        return mat_add(self, other)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return mat_sub(self, other)

    def __neg__(self) -> "Matrix":
        return scalar_mul(-1, self)

    def __rmul__(self, c) -> "Matrix":
        return scalar_mul(c, self)


def _require_same_backend(*ms: Matrix) -> str:
    backend = ms[0].backend
    for m in ms[1:]:
        if m.backend != backend:
            raise BackendMismatchError(
                f"cannot mix backends {backend!r} and {m.backend!r}; convert explicitly"
            )
    return backend


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------

def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    backend = _require_same_backend(a, b)
    if a.cols != b.rows:
        raise DimensionMismatchError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    if backend == FLOAT64:
        return Matrix(a.rows, b.cols, FLOAT64, a._arr @ b._arr)
    bc = b._cells
    out = []
    for row in a._cells:
        new_row = []
        for j in range(b.cols):
            acc = GR_ZERO
            for k in range(a.cols):
                x = row[k]
                if x.re == 0 and x.im == 0:
                    continue
                acc = acc + x * bc[k][j]
            new_row.append(acc)
        out.append(tuple(new_row))
    return Matrix(a.rows, b.cols, EXACT, tuple(out))


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    backend = _require_same_backend(a, b)
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise DimensionMismatchError("shape mismatch in addition")
    if backend == FLOAT64:
        return Matrix(a.rows, a.cols, FLOAT64, a._arr + b._arr)
    return Matrix(
        a.rows, a.cols, EXACT,
        tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a._cells, b._cells)),
    )


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    backend = _require_same_backend(a, b)
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise DimensionMismatchError("shape mismatch in subtraction")
    if backend == FLOAT64:
        return Matrix(a.rows, a.cols, FLOAT64, a._arr - b._arr)
    return Matrix(
        a.rows, a.cols, EXACT,
        tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a._cells, b._cells)),
    )


def scalar_mul(c, a: Matrix) -> Matrix:
    if a.backend == FLOAT64:
        return Matrix(a.rows, a.cols, FLOAT64, complex(c) * a._arr)
    g = as_gaussian(c)
    return Matrix(a.rows, a.cols, EXACT, tuple(tuple(g * x for x in row) for row in a._cells))


def transpose(a: Matrix) -> Matrix:
    if a.backend == FLOAT64:
        return Matrix(a.cols, a.rows, FLOAT64, a._arr.T.copy())
    return Matrix(
        a.cols, a.rows, EXACT,
        tuple(tuple(a._cells[i][j] for i in range(a.rows)) for j in range(a.cols)),
    )


def conjugate_transpose(a: Matrix) -> Matrix:
    if a.backend == FLOAT64:
        return Matrix(a.cols, a.rows, FLOAT64, a._arr.conj().T.copy())
    return Matrix(
        a.cols, a.rows, EXACT,
        tuple(tuple(a._cells[i][j].conjugate() for i in range(a.rows)) for j in range(a.cols)),
    )


def trace(a: Matrix):
    if not a.is_square():
        raise DimensionMismatchError("trace requires a square matrix")
    if a.backend == FLOAT64:
        return complex(np.trace(a._arr))
    acc = GR_ZERO
    for i in range(a.rows):
        acc = acc + a._cells[i][i]
    return acc


def mat_pow(a: Matrix, k: int) -> Matrix:
    if not a.is_square():
        raise DimensionMismatchError("powers require a square matrix")
    if k < 0:
        raise ValueError("negative powers are not supported")
    result = Matrix.identity(a.rows, a.backend)
    base = a
    while k:
        if k & 1:
            result = mat_mul(result, base)
        k >>= 1
        if k:
            base = mat_mul(base, base)
    return result


def commutator(a: Matrix, b: Matrix) -> Matrix:
    """[a, b] = ab - ba."""
    _require_same_backend(a, b)
    if not (a.is_square() and b.is_square() and a.rows == b.rows):
        raise DimensionMismatchError("commutator requires equal square matrices")
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def direct_sum(*blocks: Matrix) -> Matrix:
    if not blocks:
        raise ValueError("direct_sum of no blocks")
    backend = _require_same_backend(*blocks)
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    if backend == FLOAT64:
        arr = np.zeros((rows, cols), dtype=np.complex128)
        r = c = 0
        for b in blocks:
            arr[r:r + b.rows, c:c + b.cols] = b._arr
            r += b.rows
            c += b.cols
        return Matrix(rows, cols, FLOAT64, arr)
    out = [[GR_ZERO] * cols for _ in range(rows)]
    r = c = 0
    for b in blocks:
        for i in range(b.rows):
            row = b._cells[i]
            for j in range(b.cols):
                out[r + i][c + j] = row[j]
        r += b.rows
        c += b.cols
    return Matrix(rows, cols, EXACT, tuple(tuple(row) for row in out))


# ---------------------------------------------------------------------------
# exact elimination
# ---------------------------------------------------------------------------

def _den_int(q) -> int:
    return int(q.denominator)


def _num_int(q) -> int:
    return int(q.numerator)


def _to_gaussian_int_rows(a: Matrix) -> List[List[tuple]]:
    """Clear denominators: returns rows over Z[i] equal to d * a for some d > 0."""
    d = 1
    for row in a._cells:
        for c in row:
            d = math.lcm(d, _den_int(c.re), _den_int(c.im))
    out = []
    for row in a._cells:
        out.append([
            (_num_int(c.re) * (d // _den_int(c.re)), _num_int(c.im) * (d // _den_int(c.im)))
            for c in row
        ])
    return out


def _gint_eliminate(rows: List[List[tuple]]) -> Tuple[int, tuple, int]:
    """Fraction-free (Bareiss) elimination in place over Z[i].

    Returns (rank, last_pivot, swap_sign); last_pivot is the determinant of the
    leading rank x rank minor up to the recorded row-swap sign.
    """
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    prev = (1, 0)
    sign = 1
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        pivot_row = None
        for i in range(r, nr):
            if not gint_is_zero(rows[i][c]):
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
            sign = -sign
        piv = rows[r][c]
        for i in range(r + 1, nr):
            ri = rows[i]
            rr = rows[r]
            f = ri[c]
            if gint_is_zero(f):
                for j in range(c + 1, nc):
                    ri[j] = gint_divexact(gint_mul(piv, ri[j]), prev)
            else:
                for j in range(c + 1, nc):
                    ri[j] = gint_divexact(
                        gint_sub(gint_mul(piv, ri[j]), gint_mul(f, rr[j])), prev
                    )
            ri[c] = (0, 0)
        prev = piv
        r += 1
    return r, prev, sign


def rank(a: Matrix, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> int:
    """Exact rank (fraction-free) or float rank (relative SVD cutoff)."""
    if a.rows == 0 or a.cols == 0:
        return 0
    if a.backend == EXACT:
        rows = _to_gaussian_int_rows(a)
        r, _, _ = _gint_eliminate(rows)
        return r
    s = np.linalg.svd(a._arr, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > cfg.rank_tol * s[0]))


def determinant(a: Matrix):
    """Exact determinant via fraction-free elimination; float via LAPACK."""
    if not a.is_square():
        raise DimensionMismatchError("determinant requires a square matrix")
    if a.backend == FLOAT64:
        return complex(np.linalg.det(a._arr)) if a.rows else complex(1)
    n = a.rows
    if n == 0:
        return GR_ONE
    d = 1
    for row in a._cells:
        for c in row:
            d = math.lcm(d, _den_int(c.re), _den_int(c.im))
    rows = []
    for row in a._cells:
        rows.append([
            (_num_int(c.re) * (d // _den_int(c.re)), _num_int(c.im) * (d // _den_int(c.im)))
            for c in row
        ])
    r, last, sign = _gint_eliminate(rows)
    if r < n:
        return GR_ZERO
    det_scaled = GaussianRational(rational(sign * last[0]), rational(sign * last[1]))
    scale = GaussianRational(rational(d) ** n, 0)
    return det_scaled / scale


def _exact_rref(rows: List[List[GaussianRational]], width: int) -> List[int]:
    """Reduced row echelon form in place over Q(i); returns pivot columns.

    Only the first `width` columns are eligible as pivots (the rest ride along
    as augmented right-hand sides).
    """
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    pivots = []
    r = 0
    for c in range(width):
        if r >= nr:
            break
        pivot_row = None
        for i in range(r, nr):
            if not rows[i][c].is_zero():
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(nr):
            if i == r:
                continue
            f = rows[i][c]
            if f.is_zero():
                continue
            rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return pivots


def kernel_basis(a: Matrix, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Matrix:
    """Columns spanning ker(a); exactly cols - rank of them."""
    if a.backend == FLOAT64:
        if a.rows == 0:
            return Matrix.identity(a.cols, FLOAT64)
        u, s, vh = np.linalg.svd(a._arr)
        if s.size and s[0] > 0.0:
            r = int(np.count_nonzero(s > cfg.rank_tol * s[0]))
        else:
            r = 0
        null = vh[r:].conj().T
        return Matrix(a.cols, a.cols - r, FLOAT64, null)
    rows = [list(row) for row in a._cells]
    pivots = _exact_rref(rows, a.cols)
    free = [c for c in range(a.cols) if c not in pivots]
    cols = []
    for fc in free:
        v = [GR_ZERO] * a.cols
        v[fc] = GR_ONE
        for r_idx, pc in enumerate(pivots):
            v[pc] = -rows[r_idx][fc]
        cols.append(v)
    cells = tuple(tuple(cols[j][i] for j in range(len(cols))) for i in range(a.cols))
    return Matrix(a.cols, len(cols), EXACT, cells)


def solve(a: Matrix, b: Matrix) -> Matrix:
    """Solve a x = b for square invertible a (exactly on the exact backend)."""
    _require_same_backend(a, b)
    if not a.is_square():
        raise DimensionMismatchError("solve requires a square coefficient matrix")
    if a.rows != b.rows:
        raise DimensionMismatchError("right-hand side has wrong height")
    if a.backend == FLOAT64:
        try:
            x = np.linalg.solve(a._arr, b._arr) if a.rows else b._arr.copy()
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(str(exc)) from None
        return Matrix(a.rows, b.cols, FLOAT64, x)
    n = a.rows
    rows = [list(a._cells[i]) + list(b._cells[i]) for i in range(n)]
    pivots = _exact_rref(rows, n)
    if len(pivots) < n:
        raise SingularMatrixError("exactly singular coefficient matrix")
    cells = tuple(tuple(rows[i][n:]) for i in range(n))
    return Matrix(n, b.cols, EXACT, cells)


def inverse(a: Matrix) -> Matrix:
    return solve(a, Matrix.identity(a.rows, a.backend))


def conjugate(t: Matrix, s: Matrix, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Matrix:
    """s^{-1} t s for invertible s."""
    _require_same_backend(t, s)
    if not (t.is_square() and s.is_square() and t.rows == s.rows):
        raise DimensionMismatchError("conjugation requires equal square matrices")
    if s.backend == FLOAT64 and rank(s, cfg) < s.rows:
        raise SingularMatrixError("similarity matrix is numerically singular")
    return solve(s, mat_mul(t, s))


def operator_norm_estimate(a: Matrix) -> float:
    """Largest singular value, computed in floating point for either backend."""
    arr = a.to_float()._arr
    if arr.size == 0:
        return 0.0
    return float(np.linalg.svd(arr, compute_uv=False)[0])


# ---------------------------------------------------------------------------
# JSON codec
#
# exact:   {"backend":"exact","rows":m,"cols":n,
#           "data":[[[re_num,re_den,im_num,im_den], ...], ...]}   (decimal strings)
# float64: {"backend":"float64","rows":m,"cols":n,"data":[[[re,im], ...], ...]}
# ---------------------------------------------------------------------------

def matrix_to_json(a: Matrix) -> dict:
    if a.backend == EXACT:
        data = [
            [
                [
                    str(_num_int(c.re)), str(_den_int(c.re)),
                    str(_num_int(c.im)), str(_den_int(c.im)),
                ]
                for c in row
            ]
            for row in a._cells
        ]
    else:
        data = [[[float(z.real), float(z.imag)] for z in row] for row in a._arr]
    return {"backend": a.backend, "rows": a.rows, "cols": a.cols, "data": data}


def matrix_from_json(obj: dict) -> Matrix:
    backend = obj["backend"]
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows or any(len(r) != cols for r in data):
        raise ValueError("matrix data does not match declared shape")
    if backend == EXACT:
        cells = []
        for row in data:
            out = []
            for entry in row:
                rn, rd, imn, imd = (int(x) for x in entry)
                if rd <= 0 or imd <= 0:
                    raise ValueError("denominators must be positive")
                out.append(GaussianRational(rational(rn, rd), rational(imn, imd)))
            cells.append(tuple(out))
        return Matrix(rows, cols, EXACT, tuple(cells))
    if backend == FLOAT64:
        arr = np.array(
            [[complex(e[0], e[1]) for e in row] for row in data], dtype=np.complex128
        ).reshape(rows, cols)
        return Matrix(rows, cols, FLOAT64, arr)
    raise ValueError(f"unknown backend {backend!r}")


def matrix_digest(a: Matrix) -> str:
    """Stable content hash (dimension + entry digest) used to pin certificates."""
    blob = json.dumps(matrix_to_json(a), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
