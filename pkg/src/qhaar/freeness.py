"""Asymptotic and infinitesimal freeness checks for rotated matrix families.

Evaluates operator-valued moments of words that mix Haar unitary letters with
matrix factors over a coefficient algebra, exactly at every size N, and
compares them with the limiting free-probability formula.  The same engine
produces O(N^-2) convergence reports, the classical-versus-quantum
counterexample built from two commuting matrix-unit systems, and exact
first-order (infinitesimal) freeness identities extracted from the Laurent
expansion of the moments in 1/N.

Scenario files describe a coefficient algebra, named matrix families given by
size-independent constructors, a word shape, and an N range; they drive both
the command line and the acceptance checks.
"""

from __future__ import annotations

import ast
import csv
import io
import itertools
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, NamedTuple

from .exactalg import (
    GaussianRational,
    RationalFunction,
    interpolate_rational,
    laurent_at_infinity,
)
from .opvalued import (
    BMatrix,
    CoefficientAlgebra,
    DenseAlgebra,
    DenseElement,
    MatrixUnitAlgebra,
    MatrixUnitElement,
    constrained_sum,
    expectation,
    functional_e,
    parse_entry_expression,
    parse_scalar,
)
from .partitions import (
    Partition,
    SignPattern,
    catalan,
    enumerate_family,
    fatten,
    interleave,
    join_full,
    kernel,
    kreweras,
    leq,
    mobius,
    restrict,
)
from .weingarten import FLAVORS, EntryWord, build_table, word_moment

__all__ = [
    "UnitaryLetter",
    "MixedWord",
    "lhs_exact",
    "brute_force_moment",
    "limit_formula",
    "cumulant_limit",
    "rotated_limit",
    "ReportRow",
    "ConvergenceReport",
    "convergence_report",
    "element_payload",
    "report_to_json",
    "report_to_csv",
    "CROSSING_PAIRING",
    "crossing_pairing_present",
    "counterexample_word",
    "counterexample",
    "finite_dim_scenario",
    "FamilySpec",
    "Scenario",
    "load_scenario",
    "ConstantPattern",
    "MomentPattern",
    "laurent_moments",
    "WordToken",
    "InfinitesimalPair",
    "infinitesimal_check",
]

MULTI_LABEL_CAP = 6

SLOPE_THRESHOLD = -1.7
N2_GROWTH_FACTOR = 1.5


# ---------------------------------------------------------------------------
# words


class UnitaryLetter(NamedTuple):
    """One U^sign factor of a mixed word, followed by its matrix factor."""

    label: int
    sign: str
    factor: BMatrix


@dataclass(frozen=True)
class MixedWord:
    """Alternating word U(l_1)^eps_1 A(1) U(l_2)^eps_2 A(2) ... over one algebra.

    An optional lead matrix C sits in front of the first unitary letter, so
    constant words (no letters at all) are representable as a bare lead.  The
    flavor selects which Haar family the unitary letters are drawn from.
    """

    flavor: str
    letters: tuple[UnitaryLetter, ...]
    lead: BMatrix | None = None

    def __post_init__(self) -> None:
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        object.__setattr__(self, "letters", tuple(self.letters))
        if not self.letters and self.lead is None:
            raise ValueError("a word needs at least one letter or a lead matrix")
        if len(self.letters) % 2 == 1:
            raise ValueError("mixed words use an even number of unitary letters")
        mats = ([self.lead] if self.lead is not None else []) + [
            let.factor for let in self.letters
        ]
        first = mats[0]
        if not isinstance(first, BMatrix):
            raise TypeError("factors must be BMatrix instances")
        for let in self.letters:
            if not isinstance(let, UnitaryLetter):
                raise TypeError("letters must be UnitaryLetter instances")
            if let.sign not in ("1", "*"):
                raise ValueError("letter signs must be '1' or '*'")
            if not isinstance(let.label, int) or let.label < 1:
                raise ValueError("unitary labels are integers starting at 1")
        for mat in mats[1:]:
            if not isinstance(mat, BMatrix):
                raise TypeError("factors must be BMatrix instances")
            if mat.size != first.size or mat.algebra != first.algebra:
                raise ValueError("all factors must share one size and algebra")

    @classmethod
    def rotated(cls, flavor: str, factors_a, factors_b, label: int = 1) -> "MixedWord":
        """The word U A(1) U* B(1) U A(2) U* B(2) ... with a single label."""
        factors_a = list(factors_a)
        factors_b = list(factors_b)
        if len(factors_a) != len(factors_b) or not factors_a:
            raise ValueError("need equally many A and B factors, at least one each")
        letters = []
        for a, b in zip(factors_a, factors_b):
            letters.append(UnitaryLetter(label, "1", a))
            letters.append(UnitaryLetter(label, "*", b))
        return cls(flavor, tuple(letters))

    @property
    def size(self) -> int:
        mat = self.lead if self.lead is not None else self.letters[0].factor
        return mat.size

    @property
    def algebra(self) -> CoefficientAlgebra:
        mat = self.lead if self.lead is not None else self.letters[0].factor
        return mat.algebra

    def signs(self) -> tuple[str, ...]:
        return tuple(let.sign for let in self.letters)

    def labels(self) -> tuple[int, ...]:
        return tuple(let.label for let in self.letters)

    def factors(self) -> list:
        return [let.factor for let in self.letters]

    def all_factors(self) -> list:
        out = [self.lead] if self.lead is not None else []
        out.extend(let.factor for let in self.letters)
        return out

    def is_single_label(self) -> bool:
        return len(set(self.labels())) <= 1

    def as_quantum(self) -> "MixedWord":
        if self.flavor == "quantum":
            return self
        return MixedWord("quantum", self.letters, self.lead)


# ---------------------------------------------------------------------------
# exact evaluation at finite N


def _slot_partition(word: MixedWord, p: Partition, q: Partition) -> Partition:
    """Translate a pairing pair into equalities between factor index slots.

    Tracing the word introduces one summation index per adjacency: b_t feeds
    the t-th unitary letter from the left, c_t leaves it to the right.  Rows
    of generator letters come from p, columns from q; each variable occupies
    the matching row or column slot of the factor list (lead included), and
    the trace index closes the word.
    """
    m2 = len(word.letters)
    has_lead = word.lead is not None
    off = 2 if has_lead else 0
    nslots = off + 2 * m2
    parent = list(range(nslots + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    def b_slot(t: int) -> int:
        if t == 1:
            return 2 if has_lead else off + 2 * m2
        return off + 2 * (t - 1)

    def c_slot(t: int) -> int:
        return off + 2 * t - 1

    signs = word.signs()

    def i_slot(t: int) -> int:
        return b_slot(t) if signs[t - 1] == "1" else c_slot(t)

    def j_slot(t: int) -> int:
        return c_slot(t) if signs[t - 1] == "1" else b_slot(t)

    for block in p.blocks:
        for t in block[1:]:
            union(i_slot(block[0]), i_slot(t))
    for block in q.blocks:
        for t in block[1:]:
            union(j_slot(block[0]), j_slot(t))
    if has_lead:
        # the trace index also appears as the lead's row slot
        union(1, off + 2 * m2)
    groups: dict[int, list[int]] = {}
    for slot in range(1, nslots + 1):
        groups.setdefault(find(slot), []).append(slot)
    return Partition(nslots, tuple(tuple(g) for g in groups.values()))


_WEIGHT_CACHE: dict = {}


def _pair_weights(flavor: str, eps: SignPattern, labels: tuple[int, ...]) -> dict:
    """Coefficient of each pairing pair (p, q) in the exact moment formula.

    Single-label words use the Weingarten entry directly.  Words mixing
    several labels expand the free-product state through noncrossing
    cumulants, which factors the weight over the blocks of every noncrossing
    partition dominating p join q.
    """
    key = (flavor, str(eps), labels)
    cached = _WEIGHT_CACHE.get(key)
    if cached is not None:
        return cached
    if len(set(labels)) <= 1:
        table = build_table(flavor, eps)
        weights = {
            (p, q): table.wg_entry(p, q)
            for p in table.family
            for q in table.family
        }
    else:
        if flavor != "quantum":
            raise NotImplementedError(
                "multi-label words are only supported for the quantum flavor"
            )
        k = len(eps)
        if k > MULTI_LABEL_CAP:
            raise ValueError(
                f"multi-label words support at most {MULTI_LABEL_CAP} letters, got {k}"
            )
        table = build_table("quantum", eps)
        ker_l = kernel(labels)
        ncs = enumerate_family("nc", k).members
        c_omega: dict[Partition, int] = {}
        for omega in ncs:
            tot = 0
            for tau in ncs:
                if leq(omega, tau) and leq(tau, ker_l):
                    tot += mobius(omega, tau)
            if tot:
                c_omega[omega] = tot
        weights = {}
        for p in table.family:
            for q in table.family:
                floor = join_full(p, q)
                acc = RationalFunction.zero()
                for omega, cw in c_omega.items():
                    if not leq(floor, omega):
                        continue
                    term = RationalFunction.from_int(cw)
                    for block in omega.blocks:
                        sub_eps = SignPattern(
                            tuple(eps.signs[v - 1] for v in block)
                        )
                        sub = build_table("quantum", sub_eps)
                        term = term * sub.wg_entry(
                            restrict(p, block), restrict(q, block)
                        )
                        if not term:
                            break
                    if term:
                        acc = acc + term
                if acc:
                    weights[(p, q)] = acc
    _WEIGHT_CACHE[key] = weights
    return weights


def lhs_exact(word: MixedWord, n: int):
    """Exact value of (Haar state tensor tr_N tensor id)[word] at size N.

    Sums Weingarten weights against transfer sums whose index equalities are
    dictated by each pairing pair; the 1/N prefactor is the normalized trace.
    A word with no unitary letters reduces to the plain expectation of its
    lead matrix.
    """
    if n < 2:
        raise ValueError("evaluation requires N >= 2")
    if word.size != n:
        raise ValueError(f"word is built at size {word.size}, not {n}")
    if not word.letters:
        return expectation(word.lead)
    weights = _pair_weights(word.flavor, SignPattern(word.signs()), word.labels())
    factors = word.all_factors()
    total = word.algebra.zero()
    for (p, q), w in weights.items():
        wn = w.evaluate(n)
        if not wn:
            continue
        block_sum = constrained_sum(_slot_partition(word, p, q), factors)
        if not block_sum:
            continue
        total = total + block_sum * wn
    return total * Fraction(1, n)


def brute_force_moment(word: MixedWord, n: int):
    """Direct summation over every matrix index tuple; cross-check only.

    Enumerates all trace and adjacency indices, multiplies the matrix entries
    in word order, and weighs each tuple by the Haar moment of the resulting
    entry word.  Exponential in the word length, so keep N and the word tiny.
    """
    if n < 2:
        raise ValueError("evaluation requires N >= 2")
    if word.size != n:
        raise ValueError(f"word is built at size {word.size}, not {n}")
    m2 = len(word.letters)
    if m2 == 0:
        return expectation(word.lead)
    lead = word.lead
    fac = word.factors()
    signs = word.signs()
    labels = word.labels()
    rng = range(1, n + 1)
    cache: dict = {}
    total = word.algebra.zero()
    for a0 in rng:
        b1_options = rng if lead is not None else (a0,)
        for b1 in b1_options:
            for rest in itertools.product(rng, repeat=2 * m2 - 1):
                b = (b1,) + rest[: m2 - 1]
                c = rest[m2 - 1 :]
                entries = []
                if lead is not None:
                    e0 = lead.rows[a0 - 1][b1 - 1]
                    if not e0:
                        continue
                    entries.append(e0)
                ok = True
                for t in range(m2):
                    nxt = b[t + 1] if t + 1 < m2 else a0
                    e = fac[t].rows[c[t] - 1][nxt - 1]
                    if not e:
                        ok = False
                        break
                    entries.append(e)
                if not ok:
                    continue
                mom = cache.get((b, c))
                if mom is None:
                    ew = EntryWord.of(
                        *[
                            (b[t], c[t], signs[t], "adjoint", labels[t])
                            for t in range(m2)
                        ]
                    )
                    mom = word_moment(ew, word.flavor).evaluate(n)
                    cache[(b, c)] = mom
                if not mom:
                    continue
                prod = entries[0]
                for e in entries[1:]:
                    prod = prod * e
                total = total + prod * mom
    return total * Fraction(1, n)


# ---------------------------------------------------------------------------
# limiting formulas


def _require_limit_word(word: MixedWord) -> None:
    if word.flavor != "quantum":
        raise ValueError("the limit formula applies to the quantum flavor")
    if word.lead is not None:
        raise ValueError("the limit formula applies to words without a lead matrix")
    if not word.letters:
        raise ValueError("the limit formula needs at least two unitary letters")


def limit_formula(word: MixedWord):
    """Limit of lhs_exact as N grows: a Mobius sum of nested expectations.

    Runs over pairs sigma <= pi of admissible noncrossing partitions on the
    half points whose fattenings respect the label kernel, and evaluates the
    nested expectation functional along sigma interleaved with the Kreweras
    complement of pi.
    """
    _require_limit_word(word)
    m2 = len(word.letters)
    eps = SignPattern(word.signs())
    ker_l = kernel(word.labels())
    factors = word.factors()
    family = enumerate_family("nc_eps", m2 // 2, eps).members
    fat = {p: fatten(p) for p in family}
    total = word.algebra.zero()
    for pi in family:
        kp = kreweras(pi)
        for sigma in family:
            if not leq(sigma, pi):
                continue
            if not leq(join_full(fat[pi], fat[sigma]), ker_l):
                continue
            term = functional_e(interleave(sigma, kp), factors)
            total = total + term * mobius(sigma, pi)
    return total


def cumulant_limit(word: MixedWord):
    """Independent limit evaluation through free-cumulant weights.

    Expands the state over noncrossing partitions refining the label kernel;
    a block contributes only when its signs alternate, with the signed
    Catalan weight of the free Haar unitary, and the factors are integrated
    along the Kreweras complement.  Kept separate from limit_formula so the
    two routes stay independent cross-checks.
    """
    _require_limit_word(word)
    m2 = len(word.letters)
    eps = word.signs()
    ker_l = kernel(word.labels())
    factors = word.factors()
    total = word.algebra.zero()
    for tau in enumerate_family("nc", m2).members:
        if not leq(tau, ker_l):
            continue
        weight = 1
        for block in tau.blocks:
            s = [eps[v - 1] for v in block]
            if len(s) % 2 == 1 or any(s[t] == s[t + 1] for t in range(len(s) - 1)):
                weight = 0
                break
            h = len(s) // 2
            weight *= (-1) ** (h - 1) * catalan(h - 1)
        if not weight:
            continue
        total = total + functional_e(kreweras(tau), factors) * weight
    return total


def rotated_limit(factors_a, factors_b):
    """Limit of the rotated word U A(1) U* B(1) ...; only the two separate
    family distributions enter, which is the content of the freeness claim."""
    word = MixedWord.rotated("quantum", factors_a, factors_b)
    return limit_formula(word)


# ---------------------------------------------------------------------------
# convergence reports


class ReportRow(NamedTuple):
    n: int
    value: object
    delta: float
    n2_delta: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-size deviations from the limit plus two decay diagnostics.

    slope is the least-squares slope of log delta against log N over the tail
    (None when the tail deviations vanish identically); n2_bounded compares
    the largest N^2 delta of the last three sizes against the first three.
    """

    rows: tuple[ReportRow, ...]
    slope: float | None
    slope_ok: bool
    n2_bounded: bool

    @property
    def verdict(self) -> bool:
        return self.slope_ok or self.n2_bounded


def _fit_slope(rows) -> tuple[float | None, bool]:
    tail = rows[-max(3, len(rows) // 2):]
    pts = [(math.log(r.n), math.log(r.delta)) for r in tail if r.delta > 0.0]
    if len(pts) < 2:
        return None, True
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    den = sum((x - mx) ** 2 for x, _ in pts)
    if den == 0.0:
        return None, True
    slope = sum((x - mx) * (y - my) for x, y in pts) / den
    return slope, slope <= SLOPE_THRESHOLD


def _n2_bounded(rows) -> bool:
    head = max(r.n2_delta for r in rows[:3])
    tail = max(r.n2_delta for r in rows[-3:])
    if head == 0.0:
        return tail == 0.0
    return tail <= N2_GROWTH_FACTOR * head


def convergence_report(source, n_range, reference=None, threads: int = 1) -> ConvergenceReport:
    """Evaluate a word family over an N range and diagnose the decay rate.

    source is a callable N -> MixedWord (a Scenario works too); reference is
    an optional callable N -> limit element, defaulting to limit_formula of
    the quantum version of each word.  Rows are assembled in increasing N
    order regardless of the thread count.
    """
    ns = sorted({int(n) for n in n_range})
    if not ns:
        raise ValueError("empty N range")
    word_at = source.word_at if isinstance(source, Scenario) else source

    def row(n: int) -> ReportRow:
        word = word_at(n)
        value = lhs_exact(word, n)
        ref = reference(n) if reference is not None else limit_formula(word.as_quantum())
        delta = word.algebra.norm_float(value - ref)
        return ReportRow(n, value, delta, float(n * n) * delta)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, ns))
    else:
        rows = [row(n) for n in ns]
    slope, slope_ok = _fit_slope(rows)
    return ConvergenceReport(tuple(rows), slope, slope_ok, _n2_bounded(rows))


def element_payload(value) -> dict:
    """JSON-ready form of an algebra element, exact coordinates as strings."""
    if isinstance(value, DenseElement):
        return {
            "kind": "dense",
            "dim": value.dim,
            "rows": [[str(v) for v in row] for row in value.rows],
        }
    if isinstance(value, MatrixUnitElement):
        return {
            "kind": "matrix_unit",
            "size": value.n,
            "terms": {
                ",".join(str(t) for t in key): str(value.terms[key])
                for key in sorted(value.terms)
            },
        }
    raise TypeError(f"cannot serialize {type(value).__name__}")


def report_to_json(report: ConvergenceReport) -> dict:
    return {
        "rows": [
            {
                "n": r.n,
                "value": element_payload(r.value),
                "delta": r.delta,
                "n2_delta": r.n2_delta,
            }
            for r in report.rows
        ],
        "slope": report.slope,
        "slope_ok": report.slope_ok,
        "n2_bounded": report.n2_bounded,
        "verdict": report.verdict,
    }


def report_to_csv(report: ConvergenceReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "delta", "N2_delta"])
    for r in report.rows:
        writer.writerow([r.n, repr(r.delta), repr(r.n2_delta)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# the two-system counterexample


CROSSING_PAIRING = Partition.from_text("{{1,4},{2,5},{3,6}}")


def crossing_pairing_present(flavor: str) -> bool:
    """Whether the crossing pairing enters the length-6 alternating family."""
    return build_table(flavor, SignPattern.alternating(6)).contains(CROSSING_PAIRING)


def counterexample_word(n: int, flavor: str) -> MixedWord:
    """The word (U A U* B)^3 with A, B the two commuting matrix-unit flips.

    A places the unit E_ji of the first system at entry (i, j) and B does the
    same with the second system, so both are self-adjoint unitaries whose
    expectation is one/N.
    """
    algebra = MatrixUnitAlgebra(n)
    rng = range(1, n + 1)
    a = BMatrix(algebra, [[algebra.unit(1, j, i) for j in rng] for i in rng])
    b = BMatrix(algebra, [[algebra.unit(2, j, i) for j in rng] for i in rng])
    return MixedWord.rotated(flavor, [a, a, a], [b, b, b])


def counterexample(n: int, flavor: str):
    """Exact value of the flip word at size n under the chosen flavor.

    Classical values approach the identity while quantum values approach
    zero, separating ordinary Haar matrices from their quantum analogue.
    """
    return lhs_exact(counterexample_word(n, flavor), n)


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class FamilySpec:
    """One named matrix family given by a size-independent constructor.

    Kinds: matrix_unit_pattern (an entry expression in i, j, N over the two
    matrix-unit systems), circulant (dense blocks placed along wrapped
    diagonals), diagonal_constant, diagonal_pattern (a periodic diagonal of
    dense blocks), and explicit (a literal matrix per size).
    """

    kind: str
    payload: object

    def matrix(self, algebra: CoefficientAlgebra, n: int) -> BMatrix:
        rng = range(1, n + 1)
        if self.kind == "matrix_unit_pattern":
            expr = self.payload
            rows = [
                [
                    parse_entry_expression(
                        expr,
                        algebra,
                        {"i": Fraction(i), "j": Fraction(j), "N": Fraction(n)},
                    )
                    for j in rng
                ]
                for i in rng
            ]
            return BMatrix(algebra, rows)
        if self.kind == "circulant":
            cells = self.payload
            zero = algebra.zero()
            rows = []
            for r in rng:
                row = []
                for c in rng:
                    acc = zero
                    for t, cell in enumerate(cells):
                        if t % n == (c - r) % n:
                            acc = acc + cell
                    row.append(acc)
                rows.append(row)
            return BMatrix(algebra, rows)
        if self.kind == "diagonal_constant":
            cell = self.payload
            zero = algebra.zero()
            return BMatrix(
                algebra,
                [[cell if r == c else zero for c in rng] for r in rng],
            )
        if self.kind == "diagonal_pattern":
            cells = self.payload
            zero = algebra.zero()
            return BMatrix(
                algebra,
                [
                    [cells[(r - 1) % len(cells)] if r == c else zero for c in rng]
                    for r in rng
                ],
            )
        if self.kind == "explicit":
            rows = self.payload.get(n)
            if rows is None:
                raise ValueError(f"explicit family lacks a matrix for N = {n}")
            return BMatrix(algebra, rows)
        raise ValueError(f"unknown family constructor: {self.kind}")


@dataclass
class Scenario:
    """A flavor, a coefficient algebra, named families, a word, and a range."""

    name: str
    flavor: str
    kind: str
    dim: int | None
    families: dict
    word: tuple
    n_range: tuple[int, ...]
    degrees: tuple[int, int] = (8, 8)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        if self.kind not in ("dense", "matrix_unit"):
            raise ValueError("algebra kind must be 'dense' or 'matrix_unit'")
        if self.kind == "dense" and (self.dim is None or self.dim < 1):
            raise ValueError("dense scenarios need a positive dimension")
        if not self.families:
            raise ValueError("a scenario declares at least one family")
        if not self.word or len(self.word) % 2 == 1:
            raise ValueError("the word needs an even positive number of letters")

    def algebra(self, n: int) -> CoefficientAlgebra:
        if self.kind == "dense":
            return DenseAlgebra(self.dim)
        return MatrixUnitAlgebra(n)

    def family_matrix(self, name: str, n: int) -> BMatrix:
        key = (name, n)
        cached = self._cache.get(key)
        if cached is None:
            spec = self.families.get(name)
            if spec is None:
                raise ValueError(f"unknown family: {name}")
            cached = spec.matrix(self.algebra(n), n)
            self._cache[key] = cached
        return cached

    def word_at(self, n: int) -> MixedWord:
        algebra = self.algebra(n)
        mats = {name: self.family_matrix(name, n) for name in self.families}
        letters = []
        for label, sign, expr in self.word:
            factor = _word_factor(expr, mats, algebra, n)
            letters.append(UnitaryLetter(label, sign, factor))
        return MixedWord(self.flavor, tuple(letters))

    def report(self, n_range=None, threads: int = 1) -> ConvergenceReport:
        return convergence_report(
            self, self.n_range if n_range is None else n_range, threads=threads
        )


def _word_factor(expr: str, mats: dict, algebra: CoefficientAlgebra, size: int) -> BMatrix:
    """Evaluate a word-factor polynomial in the declared family symbols."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"bad word factor expression: {expr!r}") from exc

    def as_matrix(v):
        if isinstance(v, BMatrix):
            return v
        return BMatrix.identity(algebra, size).scale(v)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Name):
            mat = mats.get(node.id)
            if mat is None:
                raise ValueError(f"unknown family symbol: {node.id}")
            return mat
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ValueError("word factors use integer literals only")
            return GaussianRational(Fraction(node.value))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            v = ev(node.operand)
            return v.scale(-1) if isinstance(v, BMatrix) else -v
        if isinstance(node, ast.BinOp):
            left = ev(node.left)
            right = ev(node.right)
            if isinstance(node.op, (ast.Add, ast.Sub)):
                if isinstance(left, BMatrix) or isinstance(right, BMatrix):
                    left, right = as_matrix(left), as_matrix(right)
                return left + right if isinstance(node.op, ast.Add) else left - right
            if isinstance(node.op, ast.Mult):
                if isinstance(left, BMatrix) and isinstance(right, BMatrix):
                    return left @ right
                if isinstance(left, BMatrix):
                    return left.scale(right)
                if isinstance(right, BMatrix):
                    return right.scale(left)
                return left * right
            if isinstance(node.op, ast.Div):
                if isinstance(right, BMatrix):
                    raise ValueError("division only by scalar values")
                inv = GaussianRational.one() / right
                return left.scale(inv) if isinstance(left, BMatrix) else left * inv
            if isinstance(node.op, ast.Pow):
                if not isinstance(node.right, ast.Constant) or not isinstance(
                    node.right.value, int
                ) or node.right.value < 0:
                    raise ValueError("exponents must be nonnegative integer literals")
                k = node.right.value
                if isinstance(left, BMatrix):
                    out = BMatrix.identity(algebra, size)
                    for _ in range(k):
                        out = out @ left
                    return out
                out = GaussianRational.one()
                for _ in range(k):
                    out = out * left
                return out
            raise ValueError("unsupported operator in word factor expression")
        raise ValueError(
            f"unsupported syntax in word factor expression: {type(node).__name__}"
        )

    return as_matrix(ev(tree))


def _parse_cell(data, dim: int) -> DenseElement:
    if not isinstance(data, list) or len(data) != dim:
        raise ValueError(f"dense cells are {dim}x{dim} nested lists of scalars")
    rows = []
    for row in data:
        if not isinstance(row, list) or len(row) != dim:
            raise ValueError(f"dense cells are {dim}x{dim} nested lists of scalars")
        rows.append([parse_scalar(v) for v in row])
    return DenseAlgebra(dim).element(rows)


def _parse_family(data, kind: str, dim: int | None) -> FamilySpec:
    if not isinstance(data, dict) or "constructor" not in data:
        raise ValueError("each family is an object with a 'constructor' field")
    ctor = data["constructor"]
    if ctor == "matrix_unit_pattern":
        if kind != "matrix_unit":
            raise ValueError("matrix_unit_pattern families need the matrix_unit algebra")
        entry = data.get("entry")
        if not isinstance(entry, str):
            raise ValueError("matrix_unit_pattern families need an 'entry' expression")
        return FamilySpec(ctor, entry)
    if kind != "dense":
        raise ValueError(f"constructor {ctor} needs the dense algebra")
    if ctor == "circulant":
        cells = data.get("coefficients")
        if not isinstance(cells, list) or not cells:
            raise ValueError("circulant families need a nonempty 'coefficients' list")
        return FamilySpec(ctor, tuple(_parse_cell(c, dim) for c in cells))
    if ctor == "diagonal_constant":
        return FamilySpec(ctor, _parse_cell(data.get("cell"), dim))
    if ctor == "diagonal_pattern":
        cells = data.get("cells")
        if not isinstance(cells, list) or not cells:
            raise ValueError("diagonal_pattern families need a nonempty 'cells' list")
        return FamilySpec(ctor, tuple(_parse_cell(c, dim) for c in cells))
    if ctor == "explicit":
        table = data.get("matrices")
        if not isinstance(table, dict) or not table:
            raise ValueError("explicit families need a 'matrices' object keyed by N")
        payload = {}
        for key, rows in table.items():
            n = int(key)
            payload[n] = [[_parse_cell(v, dim) for v in row] for row in rows]
        return FamilySpec(ctor, payload)
    raise ValueError(f"unknown family constructor: {ctor}")


def load_scenario(source) -> Scenario:
    """Build a Scenario from a JSON file path or an already-decoded dict."""
    if isinstance(source, (str, Path)):
        try:
            data = json.loads(Path(source).read_text())
        except OSError as exc:
            raise ValueError(f"cannot read scenario file: {source}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"scenario file is not valid JSON: {source}") from exc
    elif isinstance(source, dict):
        data = source
    else:
        raise TypeError("scenario source must be a path or a dict")

    name = data.get("name", "scenario")
    flavor = data.get("flavor")
    if flavor not in FLAVORS:
        raise ValueError(f"scenario flavor must be one of {FLAVORS}")
    alg = data.get("algebra")
    if not isinstance(alg, dict) or alg.get("kind") not in ("dense", "matrix_unit"):
        raise ValueError("scenario algebra must declare kind 'dense' or 'matrix_unit'")
    kind = alg["kind"]
    dim = None
    if kind == "dense":
        dim = alg.get("dim")
        if not isinstance(dim, int) or not 1 <= dim <= 4:
            raise ValueError("dense scenarios need an integer dim between 1 and 4")
    fams = data.get("families")
    if not isinstance(fams, dict) or not fams:
        raise ValueError("scenario must declare a nonempty 'families' object")
    families = {str(nm): _parse_family(fd, kind, dim) for nm, fd in fams.items()}
    raw_word = data.get("word")
    if not isinstance(raw_word, list) or not raw_word:
        raise ValueError("scenario must declare a nonempty 'word' list")
    word = []
    for item in raw_word:
        if not isinstance(item, dict):
            raise ValueError("word letters are objects with label, sign, factor")
        label = item.get("label", 1)
        sign = item.get("sign")
        factor = item.get("factor")
        if not isinstance(label, int) or label < 1:
            raise ValueError("letter labels are integers starting at 1")
        if sign not in ("1", "*"):
            raise ValueError("letter signs must be '1' or '*'")
        if not isinstance(factor, str):
            raise ValueError("letter factors are expression strings")
        word.append((label, sign, factor))
    rng = data.get("n_range")
    if (
        not isinstance(rng, list)
        or len(rng) != 2
        or not all(isinstance(v, int) for v in rng)
        or rng[0] < 2
        or rng[1] < rng[0]
    ):
        raise ValueError("n_range must be [lo, hi] with 2 <= lo <= hi")
    n_range = tuple(range(rng[0], rng[1] + 1))
    degrees = (8, 8)
    if "degrees" in data:
        deg = data["degrees"]
        if (
            not isinstance(deg, dict)
            or not isinstance(deg.get("num"), int)
            or not isinstance(deg.get("den"), int)
            or deg["num"] < 0
            or deg["den"] < 0
        ):
            raise ValueError("degrees must be an object with integer num and den")
        degrees = (deg["num"], deg["den"])
    return Scenario(
        name=str(name),
        flavor=flavor,
        kind=kind,
        dim=dim,
        families=families,
        word=tuple(word),
        n_range=n_range,
        degrees=degrees,
    )


def finite_dim_scenario(d: int, n_range=None, seed: int = 7) -> ConvergenceReport:
    """Classical-flavor convergence of a random bounded dense-constant family.

    Builds two circulant families with fixed random d x d blocks, runs the
    rotated length-3 word under classical Haar letters, and reports against
    the limit formula; with a finite-dimensional coefficient algebra the
    classical letters already achieve the O(N^-2) rate.
    """
    if not 1 <= d <= 3:
        raise ValueError("the dense dimension must be 1, 2, or 3")
    # classical 6-letter Weingarten entries have poles at N = 1, 2; starting
    # at 4 also keeps the wrap-around sizes of the circulants in the window
    ns = tuple(n_range) if n_range is not None else tuple(range(4, 10))
    rng = random.Random(seed)

    def cell():
        rows = [
            [
                GaussianRational(
                    Fraction(rng.randint(-2, 2), rng.randint(1, 2)),
                    Fraction(rng.randint(-1, 1), 1),
                )
                for _ in range(d)
            ]
            for _ in range(d)
        ]
        return DenseAlgebra(d).element(rows)

    families = {
        "A": FamilySpec("circulant", (cell(), cell(), cell())),
        "B": FamilySpec("circulant", (cell(), cell(), cell())),
    }
    word = (
        (1, "1", "A"),
        (1, "*", "B"),
        (1, "1", "A"),
        (1, "*", "B"),
        (1, "1", "A"),
        (1, "*", "B"),
    )
    scenario = Scenario(
        name=f"finite-dim-d{d}",
        flavor="classical",
        kind="dense",
        dim=d,
        families=families,
        word=word,
        n_range=ns,
    )
    return scenario.report()


# ---------------------------------------------------------------------------
# Laurent moments and infinitesimal structure


def _canonical_quad(kappa: Partition) -> tuple[int, ...]:
    idx = {}
    for t, block in enumerate(kappa.blocks, start=1):
        for pos in block:
            idx[pos] = t
    return tuple(idx[pos] for pos in range(1, 5))


def _falling(n: int, r: int) -> int:
    out = 1
    for t in range(r):
        out *= n - t
    return out


def _matrix_unit_profile(algebra: MatrixUnitAlgebra, x: MatrixUnitElement) -> dict:
    """Coefficient of x on each index-kernel class, verifying symmetry.

    The coordinates of a permutation-invariant element depend only on the
    kernel of the index quadruple; any coordinate disagreeing with its class,
    or a class with missing members, fails the check.
    """
    coeffs: dict[Partition, GaussianRational] = {}
    counts: dict[Partition, int] = {}
    for quad, v in x.terms.items():
        kap = kernel(quad)
        cur = coeffs.get(kap)
        if cur is None:
            coeffs[kap] = v
            counts[kap] = 1
        elif cur != v:
            raise ValueError("value is not invariant under index permutations")
        else:
            counts[kap] += 1
    for kap, cnt in counts.items():
        if cnt != _falling(algebra.n, len(kap.blocks)):
            raise ValueError("value is not invariant under index permutations")
    return coeffs


@dataclass
class ConstantPattern:
    """A size-independent element: dense coordinates, or one coefficient per
    index-kernel class for the matrix-unit algebra."""

    kind: str
    dim: int | None
    entries: dict

    def __post_init__(self) -> None:
        self.entries = {k: v for k, v in self.entries.items() if v}

    def _match(self, other: "ConstantPattern") -> None:
        if self.kind != other.kind or self.dim != other.dim:
            raise ValueError("patterns live over different algebras")

    def __add__(self, other: "ConstantPattern") -> "ConstantPattern":
        self._match(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, GaussianRational.zero()) + v
        return ConstantPattern(self.kind, self.dim, out)

    def __sub__(self, other: "ConstantPattern") -> "ConstantPattern":
        self._match(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, GaussianRational.zero()) - v
        return ConstantPattern(self.kind, self.dim, out)

    def is_zero(self) -> bool:
        return not self.entries

    def shifted(self, key, delta) -> "ConstantPattern":
        """Copy with delta added to one coordinate; negative-control helper."""
        out = dict(self.entries)
        out[key] = out.get(key, GaussianRational.zero()) + delta
        return ConstantPattern(self.kind, self.dim, out)

    def value_element(self, algebra: CoefficientAlgebra):
        """Realize the pattern inside a concrete algebra instance."""
        if self.kind == "dense":
            return algebra.from_components(dict(self.entries))
        n = algebra.n
        comps: dict = {}
        for kap, v in self.entries.items():
            r = len(kap.blocks)
            if r > n:
                continue
            block_of = {}
            for t, block in enumerate(kap.blocks):
                for pos in block:
                    block_of[pos] = t
            shape = tuple(block_of[pos] for pos in range(1, 5))
            for vals in itertools.permutations(range(1, n + 1), r):
                comps[tuple(vals[t] for t in shape)] = v
        return algebra.from_components(comps)


def _one_pattern(kind: str, dim: int | None) -> ConstantPattern:
    if kind == "dense":
        one = GaussianRational.one()
        return ConstantPattern(kind, dim, {(t, t): one for t in range(dim)})
    return ConstantPattern(
        kind,
        None,
        {
            Partition.from_text("{{1,2},{3,4}}"): GaussianRational.one(),
            Partition.from_text("{{1,2,3,4}}"): GaussianRational.one(),
        },
    )


def _series_abs(f: RationalFunction, shift: int) -> Fraction:
    first = laurent_at_infinity(f, 0)
    if first.is_zero:
        return Fraction(0)
    lead = first.leading_exponent
    if lead > 0:
        raise ValueError("moment grows with N; no Laurent constant exists")
    if -shift > lead:
        return Fraction(0)
    return laurent_at_infinity(f, lead + shift).abs_coefficient(-shift)


@dataclass
class MomentPattern:
    """Entrywise rational functions of N interpolated from exact samples."""

    kind: str
    dim: int | None
    entries: dict
    samples: tuple[int, ...]

    def value_at(self, n: int, algebra: CoefficientAlgebra | None = None):
        """Evaluate every entry at a concrete size and assemble the element."""
        if algebra is None:
            algebra = DenseAlgebra(self.dim) if self.kind == "dense" else MatrixUnitAlgebra(n)
        if self.kind == "dense":
            comps = {}
            for key, (re, im) in self.entries.items():
                g = GaussianRational(re.evaluate(n), im.evaluate(n))
                if g:
                    comps[key] = g
            return algebra.from_components(comps)
        coeffs = {
            key: GaussianRational(re.evaluate(n), im.evaluate(n))
            for key, (re, im) in self.entries.items()
        }
        return ConstantPattern(self.kind, None, coeffs).value_element(algebra)

    def series_constant(self, shift: int) -> ConstantPattern:
        """Laurent coefficient of N^-shift of every entry, as a pattern."""
        out = {}
        for key, (re, im) in self.entries.items():
            g = GaussianRational(_series_abs(re, shift), _series_abs(im, shift))
            if g:
                out[key] = g
        return ConstantPattern(self.kind, self.dim, out)


def laurent_moments(word_at, samples, kind: str, dim: int | None = None,
                    degrees: tuple[int, int] = (8, 8)) -> MomentPattern:
    """Interpolate the exact values of a word family as rational functions.

    word_at maps a size to a MixedWord; every entry (dense coordinate, or
    matrix-unit kernel class) is fitted through the samples with the supplied
    degree bounds and re-verified, so an under-bounded scenario fails loudly
    instead of returning a wrong expansion.
    """
    ns = sorted({int(n) for n in samples})
    num, den = degrees
    if len(ns) < num + den + 2:
        raise ValueError(
            f"need at least {num + den + 2} samples for degrees ({num},{den})"
        )
    if kind == "matrix_unit" and ns[0] < 4:
        raise ValueError("matrix-unit sampling starts at N = 4")
    per_key: dict = {}
    for n in ns:
        word = word_at(n)
        value = lhs_exact(word, n)
        if kind == "dense":
            comps = word.algebra.components(value)
        else:
            comps = _matrix_unit_profile(word.algebra, value)
        for key, v in comps.items():
            per_key.setdefault(key, {})[n] = v
    entries = {}
    zero = GaussianRational.zero()
    for key in sorted(per_key, key=str):
        by_n = per_key[key]
        re = interpolate_rational(
            [(n, by_n.get(n, zero).re) for n in ns], num, den
        )
        im = interpolate_rational(
            [(n, by_n.get(n, zero).im) for n in ns], num, den
        )
        if re or im:
            entries[key] = (re, im)
    return MomentPattern(kind, dim, entries, tuple(ns))


class WordToken(NamedTuple):
    """One letter of an infinitesimal word before realization at a size.

    rotated: U D U* with D drawn from a scenario family; plain: the family
    matrix itself; const: a size-independent pattern times the identity.
    Centering subtracts center times the identity inside the letter, which
    for rotated letters commutes past the unitary.
    """

    kind: str
    symbol: str | None = None
    center: ConstantPattern | None = None
    pattern: ConstantPattern | None = None

    @classmethod
    def rotated(cls, symbol: str, center: ConstantPattern | None = None) -> "WordToken":
        return cls("rotated", symbol=symbol, center=center)

    @classmethod
    def plain(cls, symbol: str, center: ConstantPattern | None = None) -> "WordToken":
        return cls("plain", symbol=symbol, center=center)

    @classmethod
    def const(cls, pattern: ConstantPattern) -> "WordToken":
        return cls("const", pattern=pattern)


def _scalar_matrix(algebra: CoefficientAlgebra, n: int, element) -> BMatrix:
    return BMatrix.identity(algebra, n).left_mul(element)


def _pattern_key(p: ConstantPattern | None):
    if p is None:
        return None
    return (
        p.kind,
        p.dim,
        tuple(sorted((str(k), str(v)) for k, v in p.entries.items())),
    )


def _token_key(tok: "WordToken"):
    return (tok.kind, tok.symbol, _pattern_key(tok.center), _pattern_key(tok.pattern))


@dataclass
class InfinitesimalPair:
    """Exact evaluators (E, E') for words over one scenario.

    E is the value of the moment at infinity and E' the coefficient of 1/N,
    both read off the interpolated Laurent family over the sample sizes.
    """

    scenario: Scenario
    samples: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_scenario(cls, scenario: Scenario, n_min: int | None = None,
                      count: int | None = None) -> "InfinitesimalPair":
        num, den = scenario.degrees
        lo = n_min if n_min is not None else (4 if scenario.kind == "matrix_unit" else 2)
        k = count if count is not None else num + den + 4
        return cls(scenario, tuple(range(lo, lo + k)))

    def one_pattern(self) -> ConstantPattern:
        return _one_pattern(self.scenario.kind, self.scenario.dim)

    def realize(self, tokens, n: int) -> MixedWord:
        """Assemble the tokens into a mixed word at one concrete size.

        Adjacent unitary letters with opposite signs cancel and adjacent
        matrix factors merge, so the result is in the alternating shape the
        exact evaluator expects.
        """
        scenario = self.scenario
        algebra = scenario.algebra(n)
        seq: list = []
        for tok in tokens:
            if tok.kind == "const":
                seq.append(_scalar_matrix(algebra, n, tok.pattern.value_element(algebra)))
            elif tok.kind in ("rotated", "plain"):
                mat = scenario.family_matrix(tok.symbol, n)
                if tok.center is not None and not tok.center.is_zero():
                    mat = mat - _scalar_matrix(
                        algebra, n, tok.center.value_element(algebra)
                    )
                if tok.kind == "rotated":
                    seq.extend([("u", "1"), mat, ("u", "*")])
                else:
                    seq.append(mat)
            else:
                raise ValueError(f"unknown token kind: {tok.kind}")
        stack: list = []
        for item in seq:
            cur = item
            while cur is not None:
                if (
                    stack
                    and isinstance(cur, tuple)
                    and isinstance(stack[-1], tuple)
                    and stack[-1][1] != cur[1]
                ):
                    stack.pop()
                    cur = None
                elif (
                    stack
                    and not isinstance(cur, tuple)
                    and not isinstance(stack[-1], tuple)
                ):
                    prev = stack.pop()
                    cur = prev @ cur
                else:
                    stack.append(cur)
                    cur = None
        ident = BMatrix.identity(algebra, n)
        lead = None
        idx = 0
        if stack and not isinstance(stack[0], tuple):
            lead = stack[0]
            idx = 1
        letters = []
        while idx < len(stack):
            sign = stack[idx][1]
            idx += 1
            if idx < len(stack) and not isinstance(stack[idx], tuple):
                factor = stack[idx]
                idx += 1
            else:
                factor = ident
            letters.append(UnitaryLetter(1, sign, factor))
        if not letters and lead is None:
            lead = ident
        return MixedWord(self.scenario.flavor, tuple(letters), lead)

    def moments(self, tokens) -> MomentPattern:
        tokens = list(tokens)
        key = tuple(_token_key(tok) for tok in tokens)
        cached = self._cache.get(key)
        if cached is None:
            cached = laurent_moments(
                lambda n: self.realize(tokens, n),
                self.samples,
                self.scenario.kind,
                self.scenario.dim,
                self.scenario.degrees,
            )
            self._cache[key] = cached
        return cached

    def e_value(self, tokens) -> ConstantPattern:
        """E of the word: the constant term of its Laurent family."""
        return self.moments(tokens).series_constant(0)

    def e_prime(self, tokens) -> ConstantPattern:
        """E' of the word: the coefficient of 1/N of its Laurent family."""
        return self.moments(tokens).series_constant(1)


def infinitesimal_check(pair: InfinitesimalPair, letters,
                        e_prime_overrides: dict | None = None) -> bool:
    """First-order freeness identity for an alternating centered word.

    letters is a sequence of (family, symbol) with family 'rotated' or
    'plain', alternating between the two.  Checks, exactly, that E' of the
    product of centered letters equals the sum over positions of E of the
    word with that letter replaced by E' of it times the identity.  The
    overrides map positions to replacement E' patterns and exist so a
    corrupted pair demonstrably fails.
    """
    letters = list(letters)
    k = len(letters)
    if not 1 <= k <= 4:
        raise ValueError("centered words use between 1 and 4 letters")
    for t, (family, symbol) in enumerate(letters):
        if family not in ("rotated", "plain"):
            raise ValueError("letter families are 'rotated' or 'plain'")
        if symbol not in pair.scenario.families:
            raise ValueError(f"unknown family symbol: {symbol}")
        if t and letters[t - 1][0] == family:
            raise ValueError("letters must alternate between the two families")
    overrides = dict(e_prime_overrides or {})
    base = [WordToken(family, symbol=symbol) for family, symbol in letters]
    centers = [pair.e_value([tok]) for tok in base]
    primes = [
        overrides[t] if t in overrides else pair.e_prime([base[t]])
        for t in range(k)
    ]
    centered = [tok._replace(center=centers[t]) for t, tok in enumerate(base)]
    lhs = pair.e_prime(centered)
    rhs = None
    for j in range(k):
        inserted = centered[:j] + [WordToken.const(primes[j])] + centered[j + 1:]
        term = pair.e_value(inserted)
        rhs = term if rhs is None else rhs + term
    return lhs == rhs
