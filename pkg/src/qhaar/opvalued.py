"""Operator-valued probability over pluggable exact coefficient algebras.

Elements of the coefficient algebra B carry exact Gaussian-rational
coordinates; matrices over B (BMatrix) model M_N(B) with the conditional
expectation E_N = tr_N (x) id_B.  On top of these the module provides nested
expectation functionals along noncrossing partitions, operator-valued free
cumulants, exact constrained index sums (sums of entry products over all index
tuples whose kernel refines a slot partition), and a floating-point norm-bound
check for such sums.

Two algebra instances are provided: DenseAlgebra (d x d matrices over Q(i))
and MatrixUnitAlgebra (the span of products E_ab(1) E_cd(2) of two commuting
N x N matrix-unit systems, with finitely supported coordinates).
"""

from __future__ import annotations

import ast
import math
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .exactalg import GaussianRational
from .partitions import Partition, enumerate_family, leq, mobius

__all__ = [
    "CoefficientAlgebra",
    "DenseAlgebra",
    "DenseElement",
    "MatrixUnitAlgebra",
    "MatrixUnitElement",
    "BMatrix",
    "NormCheck",
    "expectation",
    "functional_e",
    "cumulant_k",
    "constrained_sum",
    "norm_check",
    "power_norm",
    "parse_entry_expression",
    "parse_scalar",
]


def _as_gauss(c) -> GaussianRational:
    if isinstance(c, GaussianRational):
        return c
    if isinstance(c, (int, Fraction)):
        return GaussianRational(Fraction(c))
    raise TypeError(f"cannot use {type(c).__name__} as a scalar coefficient")


_ZERO = GaussianRational.zero()
_ONE = GaussianRational.one()


class CoefficientAlgebra(ABC):
    """A unital *-algebra with exact coordinates and float norm estimates."""

    @abstractmethod
    def zero(self):
        ...

    @abstractmethod
    def one(self):
        ...

    @abstractmethod
    def contains(self, x) -> bool:
        ...

    @abstractmethod
    def to_complex_array(self, x) -> np.ndarray:
        """A faithful *-representation of x as a complex matrix."""

    @abstractmethod
    def components(self, x) -> dict:
        """Exact coordinates of x in the distinguished basis, zero-free."""

    @abstractmethod
    def from_components(self, comps: dict):
        ...

    def scalar(self, c):
        return self.one() * _as_gauss(c)

    def scalar_of(self, x) -> GaussianRational | None:
        """The coefficient c with x = c * one, or None if x is not scalar."""
        comps = self.components(x)
        target = self.components(self.one())
        if not comps:
            return _ZERO
        items = iter(comps.items())
        key0, val0 = next(items)
        if key0 not in target:
            return None
        c = val0 / target[key0]
        expected = {k: c * v for k, v in target.items()}
        return c if comps == expected else None

    def norm_float(self, x) -> float:
        return power_norm(self.to_complex_array(x))


class DenseElement:
    """A d x d matrix over Q(i); the element type of DenseAlgebra."""

    __slots__ = ("dim", "rows")

    def __init__(self, dim: int, rows):
        rows = tuple(tuple(_as_gauss(v) for v in row) for row in rows)
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise ValueError(f"need a {dim}x{dim} matrix")
        self.dim = dim
        self.rows = rows

    def _check(self, other: "DenseElement") -> None:
        if not isinstance(other, DenseElement) or other.dim != self.dim:
            raise TypeError("dense elements of mismatched dimension")

    def __add__(self, other):
        self._check(other)
        return DenseElement(
            self.dim,
            tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            ),
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return DenseElement(self.dim, tuple(tuple(-v for v in r) for r in self.rows))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = _as_gauss(other)
            return DenseElement(
                self.dim, tuple(tuple(v * c for v in r) for r in self.rows)
            )
        self._check(other)
        d = self.dim
        cols = tuple(zip(*other.rows))
        return DenseElement(
            d,
            tuple(
                tuple(sum((ra[t] * cb[t] for t in range(d)), _ZERO) for cb in cols)
                for ra in self.rows
            ),
        )

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "DenseElement":
        return DenseElement(
            self.dim, tuple(tuple(v.conjugate() for v in col) for col in zip(*self.rows))
        )

    def __bool__(self) -> bool:
        return any(any(v for v in r) for r in self.rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DenseElement)
            and other.dim == self.dim
            and other.rows == self.rows
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"DenseElement({self.dim}, {self.rows!r})"


class DenseAlgebra(CoefficientAlgebra):
    """M_d(Q(i)) with adjoint the conjugate transpose."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim

    def zero(self) -> DenseElement:
        z = _ZERO
        return DenseElement(self.dim, tuple((z,) * self.dim for _ in range(self.dim)))

    def one(self) -> DenseElement:
        return DenseElement(
            self.dim,
            tuple(
                tuple(_ONE if a == b else _ZERO for b in range(self.dim))
                for a in range(self.dim)
            ),
        )

    def element(self, rows) -> DenseElement:
        return DenseElement(self.dim, rows)

    def contains(self, x) -> bool:
        return isinstance(x, DenseElement) and x.dim == self.dim

    def to_complex_array(self, x: DenseElement) -> np.ndarray:
        return np.array([[v.to_complex() for v in r] for r in x.rows], dtype=complex)

    def components(self, x: DenseElement) -> dict:
        return {
            (a, b): v
            for a, row in enumerate(x.rows)
            for b, v in enumerate(row)
            if v
        }

    def from_components(self, comps: dict) -> DenseElement:
        rows = [[_ZERO] * self.dim for _ in range(self.dim)]
        for (a, b), v in comps.items():
            rows[a][b] = _as_gauss(v)
        return DenseElement(self.dim, rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, DenseAlgebra) and other.dim == self.dim

    __hash__ = None

    def __repr__(self) -> str:
        return f"DenseAlgebra({self.dim})"


class MatrixUnitElement:
    """A finitely supported combination of symbols E_ab(1) E_cd(2).

    terms maps 1-based index quadruples (a, b, c, d) to nonzero coefficients;
    the symbol (a, b, c, d) denotes E_ab of the first matrix-unit system times
    E_cd of the second (the systems commute).
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict):
        self.n = n
        self.terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "MatrixUnitElement":
        # trusted constructor for internal results whose values are nonzero
        obj = object.__new__(cls)
        obj.n = n
        obj.terms = terms
        return obj

    def _check(self, other: "MatrixUnitElement") -> None:
        if not isinstance(other, MatrixUnitElement) or other.n != self.n:
            raise TypeError("matrix-unit elements of mismatched size")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            cur = out.get(k)
            s = v if cur is None else cur + v
            if s:
                out[k] = s
            elif cur is not None:
                del out[k]
        return MatrixUnitElement._raw(self.n, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return MatrixUnitElement._raw(self.n, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, MatrixUnitElement):
            if other.n != self.n:
                raise TypeError("matrix-unit elements of mismatched size")
            # E_ab(1)E_cd(2) * E_a'b'(1)E_c'd'(2)
            #   = delta_{ba'} delta_{dc'} E_ab'(1)E_cd'(2)
            right: dict = {}
            for (a2, b2, c2, d2), q2 in other.terms.items():
                right.setdefault((a2, c2), []).append(((b2, d2), q2))
            out: dict = {}
            for (a, b, c, d), q in self.terms.items():
                bucket = right.get((b, d))
                if bucket is None:
                    continue
                for (b2, d2), q2 in bucket:
                    key = (a, b2, c, d2)
                    cur = out.get(key)
                    s = q * q2 if cur is None else cur + q * q2
                    if s:
                        out[key] = s
                    elif cur is not None:
                        del out[key]
            return MatrixUnitElement._raw(self.n, out)
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = _as_gauss(other)
            if not c:
                return MatrixUnitElement._raw(self.n, {})
            return MatrixUnitElement._raw(
                self.n, {k: v * c for k, v in self.terms.items()}
            )
        raise TypeError("matrix-unit elements of mismatched size")

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "MatrixUnitElement":
        return MatrixUnitElement(
            self.n, {(b, a, d, c): v.conjugate() for (a, b, c, d), v in self.terms.items()}
        )

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatrixUnitElement)
            and other.n == self.n
            and other.terms == self.terms
        )

    __hash__ = None

    def __repr__(self) -> str:
        items = ", ".join(f"{k}: {v}" for k, v in sorted(self.terms.items()))
        return f"MatrixUnitElement({self.n}, {{{items}}})"


class MatrixUnitAlgebra(CoefficientAlgebra):
    """Two commuting N x N matrix-unit systems; basis E_ab(1) E_cd(2)."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("size must be positive")
        self.n = n

    def zero(self) -> MatrixUnitElement:
        return MatrixUnitElement(self.n, {})

    def one(self) -> MatrixUnitElement:
        n = self.n
        return MatrixUnitElement(
            self.n,
            {(a, a, c, c): _ONE for a in range(1, n + 1) for c in range(1, n + 1)},
        )

    def unit(self, system: int, a: int, b: int) -> MatrixUnitElement:
        """The symbol E_ab of one system, completed with the other's identity."""
        if system not in (1, 2):
            raise ValueError("system must be 1 or 2")
        if not (1 <= a <= self.n and 1 <= b <= self.n):
            raise ValueError("matrix-unit indices out of range")
        n = self.n
        if system == 1:
            terms = {(a, b, c, c): _ONE for c in range(1, n + 1)}
        else:
            terms = {(c, c, a, b): _ONE for c in range(1, n + 1)}
        return MatrixUnitElement(self.n, terms)

    def contains(self, x) -> bool:
        return isinstance(x, MatrixUnitElement) and x.n == self.n

    def to_complex_array(self, x: MatrixUnitElement) -> np.ndarray:
        # E_ab(1)E_cd(2) acts on C^N (x) C^N as e_ab (x) e_cd
        n = self.n
        out = np.zeros((n * n, n * n), dtype=complex)
        for (a, b, c, d), q in x.terms.items():
            out[(a - 1) * n + (c - 1), (b - 1) * n + (d - 1)] += q.to_complex()
        return out

    def components(self, x: MatrixUnitElement) -> dict:
        return dict(x.terms)

    def from_components(self, comps: dict) -> MatrixUnitElement:
        return MatrixUnitElement(self.n, {k: _as_gauss(v) for k, v in comps.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, MatrixUnitAlgebra) and other.n == self.n

    __hash__ = None

    def __repr__(self) -> str:
        return f"MatrixUnitAlgebra({self.n})"


class BMatrix:
    """A square matrix over a coefficient algebra: an element of M_N(B)."""

    __slots__ = ("algebra", "size", "rows")

    def __init__(self, algebra: CoefficientAlgebra, rows):
        rows = tuple(
            tuple(
                v if algebra.contains(v) else algebra.scalar(v) for v in row
            )
            for row in rows
        )
        size = len(rows)
        if any(len(r) != size for r in rows):
            raise ValueError("matrix must be square")
        self.algebra = algebra
        self.size = size
        self.rows = rows

    @classmethod
    def identity(cls, algebra: CoefficientAlgebra, size: int) -> "BMatrix":
        one, zero = algebra.one(), algebra.zero()
        return cls(
            algebra,
            tuple(
                tuple(one if a == b else zero for b in range(size)) for a in range(size)
            ),
        )

    @classmethod
    def zero(cls, algebra: CoefficientAlgebra, size: int) -> "BMatrix":
        z = algebra.zero()
        return cls(algebra, tuple((z,) * size for _ in range(size)))

    def entry(self, r: int, c: int):
        return self.rows[r][c]

    def _check(self, other: "BMatrix") -> None:
        if other.size != self.size or other.algebra != self.algebra:
            raise TypeError("matrices over different spaces")

    def __matmul__(self, other: "BMatrix") -> "BMatrix":
        self._check(other)
        n = self.size
        zero = self.algebra.zero()
        cols = tuple(zip(*other.rows))
        out = []
        for ra in self.rows:
            row = []
            for cb in cols:
                acc = zero
                for t in range(n):
                    if ra[t] and cb[t]:
                        acc = acc + ra[t] * cb[t]
                row.append(acc)
            out.append(tuple(row))
        return BMatrix(self.algebra, tuple(out))

    def __add__(self, other: "BMatrix") -> "BMatrix":
        self._check(other)
        return BMatrix(
            self.algebra,
            tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            ),
        )

    def __sub__(self, other: "BMatrix") -> "BMatrix":
        self._check(other)
        return BMatrix(
            self.algebra,
            tuple(
                tuple(a - b for a, b in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            ),
        )

    def scale(self, c) -> "BMatrix":
        c = _as_gauss(c)
        return BMatrix(self.algebra, tuple(tuple(v * c for v in r) for r in self.rows))

    def left_mul(self, b) -> "BMatrix":
        """b . A for b in the coefficient algebra: entrywise left product."""
        return BMatrix(self.algebra, tuple(tuple(b * v for v in r) for r in self.rows))

    def right_mul(self, b) -> "BMatrix":
        return BMatrix(self.algebra, tuple(tuple(v * b for v in r) for r in self.rows))

    def adjoint(self) -> "BMatrix":
        return BMatrix(
            self.algebra, tuple(tuple(v.adjoint() for v in col) for col in zip(*self.rows))
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BMatrix)
            and other.algebra == self.algebra
            and other.rows == self.rows
        )

    __hash__ = None

    def to_complex_array(self) -> np.ndarray:
        blocks = [
            [self.algebra.to_complex_array(v) for v in row] for row in self.rows
        ]
        return np.block(blocks)

    def norm_float(self) -> float:
        return power_norm(self.to_complex_array())


def expectation(a: BMatrix):
    """E_N = tr_N (x) id_B: the exact normalized sum of diagonal entries."""
    acc = a.algebra.zero()
    for t in range(a.size):
        acc = acc + a.rows[t][t]
    return acc * Fraction(1, a.size)


def _check_args(args) -> list:
    args = list(args)
    if not args:
        raise ValueError("need at least one matrix argument")
    first = args[0]
    for a in args:
        if not isinstance(a, BMatrix):
            raise TypeError("arguments must be BMatrix instances")
        if a.size != first.size or a.algebra != first.algebra:
            raise ValueError("arguments must live in one matrix space")
    return args


def functional_e(sigma: Partition, args):
    """The nested expectation E^(sigma) along a noncrossing partition.

    Repeatedly extracts an interval block that has a preceding factor,
    replaces it by its expectation multiplied onto that factor from the
    right, and finishes with the expectation of the remaining single block.
    """
    args = _check_args(args)
    k = len(args)
    if sigma.size != k:
        raise ValueError(f"partition of {sigma.size} points given {k} arguments")
    if not sigma.is_noncrossing():
        raise ValueError("sigma must be noncrossing")
    order = list(range(1, k + 1))
    mats = {p: args[p - 1] for p in order}
    remaining = list(sigma.blocks)
    while len(remaining) > 1:
        pos = {p: t for t, p in enumerate(order)}
        chosen = None
        for block in remaining:
            idxs = [pos[p] for p in block]
            if max(idxs) - min(idxs) + 1 == len(idxs) and min(idxs) > 0:
                chosen = block
                break
        # a noncrossing partition with >= 2 blocks always has such a block
        assert chosen is not None
        prod = mats[chosen[0]]
        for p in chosen[1:]:
            prod = prod @ mats[p]
        value = expectation(prod)
        pred = order[min(pos[p] for p in chosen) - 1]
        mats[pred] = mats[pred].right_mul(value)
        dropped = set(chosen)
        for p in chosen:
            del mats[p]
        order = [p for p in order if p not in dropped]
        remaining.remove(chosen)
    prod = mats[order[0]]
    for p in order[1:]:
        prod = prod @ mats[p]
    return expectation(prod)


def cumulant_k(pi: Partition, args):
    """Operator-valued free cumulant: Moebius inversion of E^(sigma) below pi."""
    args = _check_args(args)
    if pi.size != len(args):
        raise ValueError("partition size must match argument count")
    if not pi.is_noncrossing():
        raise ValueError("pi must be noncrossing")
    total = args[0].algebra.zero()
    for sigma in enumerate_family("nc", pi.size):
        if leq(sigma, pi):
            total = total + functional_e(sigma, args) * mobius(sigma, pi)
    return total


def constrained_sum(constraint: Partition, args):
    """Sum of A(1)_{i1 i2} ... A(m)_{i(2m-1) i(2m)} over constrained tuples.

    The 2m slots are the row and column indices in order (slot 2k-1 is A(k)'s
    row, slot 2k its column); the sum runs over all tuples i whose kernel is
    refined by the constraint.  Computed by a transfer scan over the factors:
    states assign indices to the constraint blocks still in scope, and blocks
    whose last slot has passed are dropped so states merge.  Enumeration order
    is fixed, so results are reproducible term for term.
    """
    args = _check_args(args)
    m = len(args)
    if constraint.size != 2 * m:
        raise ValueError(f"constraint must partition {2 * m} slots")
    algebra = args[0].algebra
    n = args[0].size
    block_of = {}
    first_slot = {}
    last_slot = {}
    for bid, block in enumerate(constraint.blocks):
        for s in block:
            block_of[s] = bid
        first_slot[bid] = block[0]
        last_slot[bid] = block[-1]
    # ordered layout of the blocks still in scope after each factor; state
    # keys are index tuples aligned to these layouts, so no sorting happens
    # in the inner loop and merged states stay deterministic
    nblocks = len(constraint.blocks)
    open_after = [
        tuple(
            bid
            for bid in range(nblocks)
            if first_slot[bid] <= 2 * k < last_slot[bid]
        )
        for k in range(m + 1)
    ]
    states: dict[tuple, object] = {(): None}
    rng = range(1, n + 1)
    for k in range(1, m + 1):
        r_slot, c_slot = 2 * k - 1, 2 * k
        rb, cb = block_of[r_slot], block_of[c_slot]
        prev_open = open_after[k - 1]
        rpos = prev_open.index(rb) if rb in prev_open else -1
        cpos = prev_open.index(cb) if cb in prev_open else -1
        plan = []
        for bid in open_after[k]:
            if bid == rb:
                plan.append(("r", 0))
            elif bid == cb:
                plan.append(("c", 0))
            else:
                plan.append(("p", prev_open.index(bid)))
        rows = args[k - 1].rows
        new_states: dict[tuple, object] = {}
        for assign, acc in states.items():
            r_choices = (assign[rpos],) if rpos >= 0 else rng
            for r in r_choices:
                if cb == rb:
                    c_choices = (r,)
                elif cpos >= 0:
                    c_choices = (assign[cpos],)
                else:
                    c_choices = rng
                row = rows[r - 1]
                for c in c_choices:
                    entry = row[c - 1]
                    if not entry:
                        continue
                    value = entry if acc is None else acc * entry
                    if not value:
                        continue
                    key = tuple(
                        r if tag == "r" else c if tag == "c" else assign[idx]
                        for tag, idx in plan
                    )
                    cur = new_states.get(key)
                    new_states[key] = value if cur is None else cur + value
        states = new_states
        if not states:
            return algebra.zero()
    return states.get((), algebra.zero())


class NormCheck(NamedTuple):
    lhs: float
    bound: float
    ok: bool


def norm_check(sigma: Partition, args) -> NormCheck:
    """Compare the constrained sum's norm against N^{blocks} times factor norms.

    The bound follows from the triangle inequality over the N^{|sigma|}
    admissible tuples; verdicts allow a 1e-6 relative tolerance and are
    reported, never raised.
    """
    args = _check_args(args)
    value = constrained_sum(sigma, args)
    lhs = args[0].algebra.norm_float(value)
    bound = float(args[0].size) ** len(sigma.blocks)
    for a in args:
        bound *= a.norm_float()
    ok = lhs <= bound + max(1e-9, 1e-6 * bound)
    return NormCheck(lhs, bound, ok)


def power_norm(x: np.ndarray) -> float:
    """Spectral norm estimate: power iteration on X*X, deterministic start.

    Runs at most 500 iterations or until the Rayleigh quotient is stable to a
    relative 1e-12.
    """
    if x.size == 0:
        return 0.0
    y = x.conj().T @ x
    dim = y.shape[0]
    v = np.ones(dim) + np.arange(1, dim + 1) / (dim + 1)
    v = v / np.linalg.norm(v)
    lam = 0.0
    for _ in range(500):
        w = y @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w < 1e-300:
            return 0.0
        new_lam = float(np.real(np.vdot(v, w)))
        v = w / norm_w
        if abs(new_lam - lam) <= 1e-12 * max(abs(new_lam), 1.0):
            lam = new_lam
            break
        lam = new_lam
    return math.sqrt(max(lam, 0.0))


# ---------------------------------------------------------------------------
# entry expressions and scalar literals

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def parse_entry_expression(text: str, algebra: CoefficientAlgebra | None = None, env: dict | None = None):
    """Evaluate a small arithmetic expression into a scalar or algebra element.

    Supports integers, names from env, + - * / ** with scalar divisors, and
    E(system, a, b) for matrix-unit symbols when the algebra provides them.
    """
    env = env or {}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ValueError(f"only integer literals are allowed, got {node.value!r}")
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ValueError(f"unknown name {node.id!r} in entry expression")
            return env[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand)
            return val if isinstance(node.op, ast.UAdd) else -val
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if isinstance(right, Fraction):
                    if right == 0:
                        raise ZeroDivisionError("division by zero in entry expression")
                    if isinstance(left, Fraction):
                        return left / right
                    return left * Fraction(right.denominator, right.numerator)
                if isinstance(right, GaussianRational):
                    if isinstance(left, (Fraction, GaussianRational)):
                        return _as_gauss(left) / right
                    return left * (GaussianRational.one() / right)
                raise ValueError("division only by scalar values")
            # Pow
            if not isinstance(right, Fraction) or right.denominator != 1 or right < 0:
                raise ValueError("exponents must be nonnegative integers")
            power = int(right)
            if isinstance(left, Fraction):
                return left**power
            out = None
            for _ in range(power):
                out = left if out is None else out * left
            if out is None:
                if isinstance(left, GaussianRational):
                    return GaussianRational.one()
                if algebra is not None:
                    return algebra.one()
                raise ValueError("cannot form an empty product here")
            return out
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            if node.func.id == "E":
                if not isinstance(algebra, MatrixUnitAlgebra):
                    raise ValueError("E(...) symbols need a matrix-unit algebra")
                if node.keywords or len(node.args) != 3:
                    raise ValueError("E takes exactly (system, row, col)")
                vals = [ev(a) for a in node.args]
                ints = []
                for v in vals:
                    if not isinstance(v, Fraction) or v.denominator != 1:
                        raise ValueError("E arguments must be integers")
                    ints.append(int(v))
                return algebra.unit(*ints)
            raise ValueError(f"unknown function {node.func.id!r}")
        raise ValueError(f"unsupported syntax in entry expression: {ast.dump(node)}")

    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse entry expression {text!r}") from exc
    return ev(tree)


def parse_scalar(value) -> GaussianRational:
    """Exact scalar literal: an int, or a string like "3", "-1/2", "1+2*i"."""
    if isinstance(value, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(value, int):
        return GaussianRational(Fraction(value))
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, Fraction):
        return GaussianRational(value)
    if isinstance(value, str):
        result = parse_entry_expression(value, env={"i": GaussianRational.i()})
        return _as_gauss(result)
    raise ValueError(f"cannot read {value!r} as an exact scalar")
