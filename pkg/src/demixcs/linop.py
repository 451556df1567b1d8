"""Fast structured linear operators over complex vectors.

Every operator exposes `apply` (forward) and `apply_adjoint` (conjugate
transpose) and carries explicit (rows, cols) dimensions.  Inputs may be
1-D vectors or 2-D column batches; transforms run columnwise and a given
call is bitwise reproducible.  Operators are immutable after
construction and safe to share between threads; all scratch state is
per call.
"""

from collections import namedtuple

import numpy as np

from .errors import ArgumentError, BudgetError, DimensionError, ShapeError

# Cap on rows*cols for dense materialization; the enumeration oracles only
# ever need small instances.
MATERIALIZE_BUDGET = 1 << 22


def is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


def as_complex_vector(x, length=None, name="vector"):
    """Validate and convert to a finite complex128 array."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionError(f"{name} has length {v.shape[0]}, expected {length}")
    if not np.all(np.isfinite(v)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return v


class LinearOperator:
    """Base class: a rows x cols linear map with forward/adjoint action."""

    kind = "Abstract"

    def __init__(self, rows, cols):
        if rows <= 0 or cols <= 0:
            raise DimensionError(f"operator dimensions must be positive, got {rows}x{cols}")
        self.rows = int(rows)
        self.cols = int(cols)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def apply(self, x):
        """Forward action on a vector of length cols (or a (cols, T) batch)."""
        return self._run(x, self.cols, self._apply)

    def apply_adjoint(self, u):
        """Adjoint action on a vector of length rows (or a (rows, T) batch)."""
        return self._run(u, self.rows, self._apply_adjoint)

    def _run(self, x, dim, fn):
        a = np.asarray(x, dtype=np.complex128)
        if a.ndim == 1:
            if a.shape[0] != dim:
                raise DimensionError(
                    f"{self.kind}: got length {a.shape[0]}, expected {dim}")
            return fn(a[:, None])[:, 0]
        if a.ndim == 2:
            if a.shape[0] != dim:
                raise DimensionError(
                    f"{self.kind}: got {a.shape[0]} rows, expected {dim}")
            return fn(a)
        raise DimensionError(f"{self.kind}: expected 1-D or 2-D input, got {a.ndim}-D")

    def _apply(self, x):
        raise NotImplementedError

    def _apply_adjoint(self, u):
        raise NotImplementedError

    def describe(self):
        """One-line structured header for logs."""
        return f"{self.kind} {self.rows}x{self.cols}"

    def __repr__(self):
        return f"<{self.describe()}>"


class Dense(LinearOperator):
    kind = "Dense"

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2:
            raise DimensionError("Dense expects a 2-D matrix")
        super().__init__(*m.shape)
        self.matrix = m

    def _apply(self, x):
        return self.matrix @ x

    def _apply_adjoint(self, u):
        return self.matrix.conj().T @ u


class Diagonal(LinearOperator):
    kind = "Diagonal"

    def __init__(self, d):
        d = as_complex_vector(d, name="diagonal")
        super().__init__(d.shape[0], d.shape[0])
        self.diag = d

    def _apply(self, x):
        return self.diag[:, None] * x

    def _apply_adjoint(self, u):
        return self.diag.conj()[:, None] * u


class Subsample(LinearOperator):
    """0/1 row selector.  Indices must be strictly increasing."""

    kind = "Subsample"

    def __init__(self, indices, cols):
        idx = np.asarray(indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size == 0:
            raise DimensionError("Subsample needs a nonempty 1-D index list")
        if np.any(np.diff(idx) <= 0):
            raise ShapeError("Subsample indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= cols:
            raise DimensionError("Subsample index out of range")
        super().__init__(idx.size, cols)
        self.indices = idx

    def _apply(self, x):
        return x[self.indices]

    def _apply_adjoint(self, u):
        out = np.zeros((self.cols, u.shape[1]), dtype=np.complex128)
        out[self.indices] = u
        return out


def _fwht(x):
    """Unnormalized Walsh-Hadamard butterfly along axis 0.

    Sylvester (natural) ordering; x is (n, T) with n a power of two.
    """
    n, t = x.shape
    y = x.copy()
    scratch = np.empty((n // 2, t), dtype=np.complex128)
    h = 1
    while h < n:
        y3 = y.reshape(n // (2 * h), 2, h, t)
        a = y3[:, 0]
        b = y3[:, 1]
        diff = scratch.reshape(n // (2 * h), h, t)
        np.subtract(a, b, out=diff)
        a += b
        y3[:, 1] = diff
        h *= 2
    return y


class WalshHadamard(LinearOperator):
    """Normalized +-1/sqrt(n) Hadamard transform, Sylvester order.

    Unitary and self-adjoint; applied by an O(n log n) butterfly.
    """

    kind = "WalshHadamard"

    def __init__(self, n):
        if not is_power_of_two(n):
            raise ShapeError(f"WalshHadamard size must be a power of two, got {n}")
        super().__init__(n, n)
        self._scale = 1.0 / np.sqrt(n)

    def _apply(self, x):
        return self._scale * _fwht(x)

    _apply_adjoint = _apply


class Fourier(LinearOperator):
    """Unitary DFT, entries exp(-2i pi jk/n)/sqrt(n); `adjoint=True` gives F*."""

    kind = "Fourier"

    def __init__(self, n, adjoint=False):
        super().__init__(n, n)
        self.adjoint = bool(adjoint)

    def _apply(self, x):
        if self.adjoint:
            return np.fft.ifft(x, axis=0, norm="ortho")
        return np.fft.fft(x, axis=0, norm="ortho")

    def _apply_adjoint(self, u):
        if self.adjoint:
            return np.fft.fft(u, axis=0, norm="ortho")
        return np.fft.ifft(u, axis=0, norm="ortho")

    def describe(self):
        star = "*" if self.adjoint else ""
        return f"{self.kind}{star} {self.rows}x{self.cols}"


class Circulant(LinearOperator):
    """Circulant matrix whose FIRST COLUMN is `first_col`.

    Application is the length-n cyclic convolution first_col (*) x,
    computed in the Fourier domain.
    """

    kind = "Circulant"

    def __init__(self, first_col):
        c = as_complex_vector(first_col, name="first_col")
        super().__init__(c.shape[0], c.shape[0])
        self.first_col = c
        self._spectrum = np.fft.fft(c)

    def _apply(self, x):
        return np.fft.ifft(self._spectrum[:, None] * np.fft.fft(x, axis=0), axis=0)

    def _apply_adjoint(self, u):
        return np.fft.ifft(self._spectrum.conj()[:, None] * np.fft.fft(u, axis=0), axis=0)


class Scaled(LinearOperator):
    kind = "Scaled"

    def __init__(self, alpha, op):
        super().__init__(op.rows, op.cols)
        self.alpha = complex(alpha)
        self.op = op

    def _apply(self, x):
        return self.alpha * self.op._apply(x)

    def _apply_adjoint(self, u):
        return np.conj(self.alpha) * self.op._apply_adjoint(u)

    def describe(self):
        factor = f"{self.alpha.real:g}" if self.alpha.imag == 0 else f"{self.alpha:g}"
        return f"Scaled({factor}) {self.op.describe()}"


class Composed(LinearOperator):
    kind = "Composed"

    def __init__(self, outer, inner):
        if outer.cols != inner.rows:
            raise DimensionError(
                f"compose: outer has {outer.cols} cols, inner has {inner.rows} rows")
        super().__init__(outer.rows, inner.cols)
        self.outer = outer
        self.inner = inner

    def _apply(self, x):
        return self.outer._apply(self.inner._apply(x))

    def _apply_adjoint(self, u):
        return self.inner._apply_adjoint(self.outer._apply_adjoint(u))

    def describe(self):
        return f"Composed({self.outer.describe()}, {self.inner.describe()})"


class HStacked(LinearOperator):
    """Horizontal stack [A, H]: maps (x; w) to A x + H w."""

    kind = "HStacked"

    def __init__(self, A, H):  # noqa: N803 - conventional matrix names
        if A.rows != H.rows:
            raise DimensionError(
                f"hstack: row counts differ ({A.rows} vs {H.rows})")
        super().__init__(A.rows, A.cols + H.cols)
        self.left = A
        self.right = H

    def _apply(self, x):
        nl = self.left.cols
        return self.left._apply(x[:nl]) + self.right._apply(x[nl:])

    def _apply_adjoint(self, u):
        return np.concatenate(
            [self.left._apply_adjoint(u), self.right._apply_adjoint(u)], axis=0)

    def describe(self):
        return f"HStacked({self.left.describe()}, {self.right.describe()})"


def identity(n):
    """n x n identity as a Diagonal operator."""
    return Diagonal(np.ones(n))


def hstack(A, H):  # noqa: N803
    """Stack two operators side by side; rows must agree."""
    return HStacked(A, H)


def compose(outer, inner):
    """outer then-applied-after inner; adjoint composes in reverse."""
    return Composed(outer, inner)


def chain(*ops):
    """compose(ops[0], compose(ops[1], ...)) for readability in builders."""
    if not ops:
        raise DimensionError("chain needs at least one operator")
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = Composed(op, out)
    return out


def materialize(op, budget=MATERIALIZE_BUDGET):
    """Dense matrix of `op`, column j = op applied to the j-th basis vector."""
    if op.rows * op.cols > budget:
        raise BudgetError(
            f"materializing {op.rows}x{op.cols} exceeds budget of {budget} entries")
    if isinstance(op, Dense):
        return op.matrix.copy()
    return op.apply(np.eye(op.cols, dtype=np.complex128))


NormEstimate = namedtuple("NormEstimate", ["value", "iterations", "converged"])


def power_iteration(op, tol=1e-6, max_iter=500, seed=0):
    """Largest singular value of `op`, iterating on op* op.

    Stops when the relative change between successive estimates drops
    below `tol`.  Returns a NormEstimate; `converged` is False when
    max_iter was exhausted, in which case `value` is the best estimate.
    """
    from .seeding import rng

    gen = rng(seed, 11)
    v = gen.standard_normal(op.cols) + 1j * gen.standard_normal(op.cols)
    nv = np.linalg.norm(v)
    if nv == 0:
        v = np.ones(op.cols, dtype=np.complex128)
        nv = np.linalg.norm(v)
    v = v / nv

    estimate = 0.0
    for it in range(1, max_iter + 1):
        w = op.apply(v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return NormEstimate(0.0, it, True)
        if it > 1 and abs(new - estimate) <= tol * new:
            return NormEstimate(new, it, True)
        estimate = new
        v = op.apply_adjoint(w)
        v = v / np.linalg.norm(v)
    return NormEstimate(estimate, max_iter, False)
