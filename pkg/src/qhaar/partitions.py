"""Set partitions, noncrossing lattices, sign patterns and the fattening maps.

Everything downstream (Weingarten tables, operator-valued functionals, the
asymptotic machinery) is driven by the combinatorics in this module: canonical
immutable partitions of {1..k}, enumeration of the partition families that
index Gram/Weingarten matrices, the Kreweras complement, the doubling maps
between NC(m) and noncrossing pair partitions of 2m points, and the Moebius
function of the noncrossing lattice.

Ground sets are 1-based.  All values are immutable and hashable; operations
return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "Partition",
    "SignPattern",
    "PartitionFamily",
    "FAMILY_KINDS",
    "enumerate_family",
    "join_full",
    "join_nc",
    "kreweras",
    "fatten",
    "fatten_extended",
    "unfatten",
    "hat",
    "interleave",
    "rotate_left",
    "rotate_right",
    "mobius",
    "mobius_recursive",
    "kernel",
    "restrict",
    "leq",
    "catalan",
]

# Eager enumeration stays cheap at desk scale; larger requests are refused.
MAX_NC_GROUND = 12
MAX_PAIRING_GROUND = 12
MAX_ALL_GROUND = 10

PLAIN = "1"
STAR = "*"


def catalan(n: int) -> int:
    """n-th Catalan number C_n = binom(2n, n)/(n+1)."""
    return math.comb(2 * n, n) // (n + 1)


@dataclass(frozen=True)
class Partition:
    """A partition of {1..size} in canonical form.

    Blocks are stored sorted internally and ordered by their minima, so two
    partitions are equal iff they are structurally identical.

    >>> str(Partition(6, ((5, 4, 1), (3, 2), (6,))))
    '{{1,4,5},{2,3},{6}}'
    """

    size: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ValueError("partition ground size must be nonnegative")
        canon = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0]))
        seen: set[int] = set()
        for block in canon:
            if not block:
                raise ValueError("empty block")
            for x in block:
                if not 1 <= x <= self.size:
                    raise ValueError(f"element {x} outside ground set 1..{self.size}")
                if x in seen:
                    raise ValueError(f"element {x} appears twice")
                seen.add(x)
        if len(seen) != self.size:
            missing = sorted(set(range(1, self.size + 1)) - seen)
            raise ValueError(f"elements {missing} not covered")
        object.__setattr__(self, "blocks", canon)

    @staticmethod
    def singletons(k: int) -> "Partition":
        """The minimal partition 0_k."""
        return Partition(k, tuple((i,) for i in range(1, k + 1)))

    @staticmethod
    def full(k: int) -> "Partition":
        """The maximal partition 1_k."""
        return Partition(k, (tuple(range(1, k + 1)),) if k else ())

    @staticmethod
    def from_text(text: str) -> "Partition":
        """Parse the {{1,4,5},{2,3},{6}} text form."""
        s = text.strip()
        if not (s.startswith("{{") and s.endswith("}}")) and s != "{}":
            raise ValueError(f"not a partition literal: {text!r}")
        if s == "{}":
            return Partition(0, ())
        body = s[1:-1]
        blocks = []
        for chunk in body.replace("},{", "}|{").split("|"):
            chunk = chunk.strip()
            if not (chunk.startswith("{") and chunk.endswith("}")):
                raise ValueError(f"malformed block in {text!r}")
            blocks.append(tuple(int(t) for t in chunk[1:-1].split(",")))
        size = max(max(b) for b in blocks)
        return Partition(size, tuple(blocks))

    def __str__(self) -> str:
        if not self.blocks:
            return "{}"
        return "{" + ",".join("{" + ",".join(str(x) for x in b) + "}" for b in self.blocks) + "}"

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, x: int) -> tuple[int, ...]:
        for block in self.blocks:
            if x in block:
                return block
        raise ValueError(f"{x} not in ground set")

    def block_index(self) -> dict[int, int]:
        """Map each element to the position of its block in canonical order."""
        out: dict[int, int] = {}
        for idx, block in enumerate(self.blocks):
            for x in block:
                out[x] = idx
        return out

    def is_pairing(self) -> bool:
        return all(len(b) == 2 for b in self.blocks)

    def is_noncrossing(self) -> bool:
        """True iff no two blocks interleave as a < c < b < d."""
        idx = self.block_index()
        stack: list[int] = []
        for x in range(1, self.size + 1):
            b = idx[x]
            if stack and stack[-1] == b:
                pass
            elif b in stack:
                return False  # reopening a block that was interrupted
            else:
                stack.append(b)
            if x == self.blocks[b][-1]:
                stack.pop()
        return True


def leq(p: Partition, q: Partition) -> bool:
    """Refinement order: every block of p lies inside a block of q."""
    if p.size != q.size:
        raise ValueError("ground sizes differ")
    idx = q.block_index()
    return all(len({idx[x] for x in block}) == 1 for block in p.blocks)


@dataclass(frozen=True)
class SignPattern:
    """A word over {1, *} of even positive length, e.g. SignPattern.from_text("1*1*")."""

    signs: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.signs) == 0 or len(self.signs) % 2 != 0:
            raise ValueError("sign pattern length must be even and positive")
        for s in self.signs:
            if s not in (PLAIN, STAR):
                raise ValueError(f"invalid sign {s!r}")

    @staticmethod
    def from_text(text: str) -> "SignPattern":
        return SignPattern(tuple(text))

    @staticmethod
    def alternating(length: int) -> "SignPattern":
        """1*1*... of the given even length."""
        return SignPattern(tuple(PLAIN if i % 2 == 0 else STAR for i in range(length)))

    def __str__(self) -> str:
        return "".join(self.signs)

    def __len__(self) -> int:
        return len(self.signs)

    def doubled(self) -> "SignPattern":
        """Each letter repeated twice (the pattern of a hatted partition)."""
        out: list[str] = []
        for s in self.signs:
            out.extend((s, s))
        return SignPattern(tuple(out))

    def rotated_left(self) -> "SignPattern":
        return SignPattern(self.signs[1:] + self.signs[:1])


def kernel(values) -> Partition:
    """ker of an index tuple: positions carrying equal values share a block.

    >>> str(kernel((4, 7, 4)))
    '{{1,3},{2}}'
    """
    vals = tuple(values)
    groups: dict[object, list[int]] = {}
    for pos, v in enumerate(vals, start=1):
        groups.setdefault(v, []).append(pos)
    return Partition(len(vals), tuple(tuple(g) for g in groups.values()))


def restrict(p: Partition, subset) -> Partition:
    """Induced partition on a strictly increasing subset, relabeled to 1..len.

    >>> str(restrict(Partition.from_text("{{1,4,5},{2,3}}"), (2, 3, 4)))
    '{{1,2},{3}}'
    """
    sub = tuple(subset)
    if any(a >= b for a, b in zip(sub, sub[1:])):
        raise ValueError("subset must be strictly increasing")
    pos = {x: t + 1 for t, x in enumerate(sub)}
    chosen = set(sub)
    blocks = []
    for block in p.blocks:
        part = tuple(pos[x] for x in block if x in chosen)
        if part:
            blocks.append(part)
    return Partition(len(sub), tuple(blocks))


def join_full(p: Partition, q: Partition) -> Partition:
    """Join in the full partition lattice P(k), by union-find over blocks."""
    if p.size != q.size:
        raise ValueError("ground sizes differ")
    parent = list(range(p.size + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for part in (p, q):
        for block in part.blocks:
            for a, b in zip(block, block[1:]):
                union(a, b)
    groups: dict[int, list[int]] = {}
    for x in range(1, p.size + 1):
        groups.setdefault(find(x), []).append(x)
    return Partition(p.size, tuple(tuple(g) for g in groups.values()))


def join_nc(p: Partition, q: Partition) -> Partition:
    """Join in NC(k): the full join with crossing block pairs merged to a fixed point."""
    if not (p.is_noncrossing() and q.is_noncrossing()):
        raise ValueError("join_nc requires noncrossing operands")
    cur = join_full(p, q)
    while not cur.is_noncrossing():
        merged = False
        blocks = cur.blocks
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if _blocks_cross(blocks[i], blocks[j]):
                    rest = [blocks[t] for t in range(len(blocks)) if t not in (i, j)]
                    rest.append(tuple(sorted(blocks[i] + blocks[j])))
                    cur = Partition(cur.size, tuple(rest))
                    merged = True
                    break
            if merged:
                break
    return cur


def _blocks_cross(u: tuple[int, ...], v: tuple[int, ...]) -> bool:
    for a in u:
        for b in u:
            if a >= b:
                continue
            if any(a < c < b for c in v) and any(d < a or d > b for d in v):
                return True
    return False


def _as_permutation(p: Partition) -> dict[int, int]:
    """Each block as an increasing cycle: x maps to the next block element."""
    perm: dict[int, int] = {}
    for block in p.blocks:
        for a, b in zip(block, block[1:]):
            perm[a] = b
        perm[block[-1]] = block[0]
    return perm


def kreweras(p: Partition) -> Partition:
    """Kreweras complement on NC(m).

    K(p) is the maximal partition of the interleaved copies 1',...,m' keeping
    the overlay noncrossing; it is computed here through the cycle calculus
    (cycles of sigma_p^{-1} composed with the long cycle) and verified
    noncrossing.

    >>> str(kreweras(Partition.from_text("{{1,5},{2,3,4},{6,8},{7}}")))
    '{{1,4},{2},{3},{5,8},{6,7}}'
    """
    if not p.is_noncrossing():
        raise ValueError("kreweras complement requires a noncrossing partition")
    m = p.size
    if m == 0:
        return p
    perm = _as_permutation(p)
    inv = {v: k for k, v in perm.items()}
    seen: set[int] = set()
    blocks = []
    for start in range(1, m + 1):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        x = inv[start % m + 1]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = inv[x % m + 1]
        blocks.append(tuple(cyc))
    out = Partition(m, tuple(blocks))
    if not out.is_noncrossing():
        raise AssertionError(f"kreweras produced a crossing partition for {p}")
    return out


def fatten(p: Partition) -> Partition:
    """The pair partition of 2m points attached to p in NC(m).

    Block (i1 < ... < is) turns into the pairs (2*i1-1, 2*is) and
    (2*it, 2*i(t+1)-1) for t = 1..s-1.

    >>> str(fatten(Partition.from_text("{{1,4,5},{2,3},{6}}")))
    '{{1,10},{2,7},{3,6},{4,5},{8,9},{11,12}}'
    """
    if not p.is_noncrossing():
        raise ValueError("fatten requires a noncrossing partition")
    return fatten_extended(p)


def fatten_extended(p: Partition) -> Partition:
    """The fattening rule applied verbatim to an arbitrary partition.

    Used by the norm-bound machinery, where constraints built this way from
    crossing partitions still make sense; fatten itself insists on NC input.
    """
    pairs = []
    for block in p.blocks:
        pairs.append((2 * block[0] - 1, 2 * block[-1]))
        for a, b in zip(block, block[1:]):
            pairs.append((2 * a, 2 * b - 1))
    return Partition(2 * p.size, tuple(pairs))


def unfatten(q: Partition) -> Partition:
    """Inverse of fatten on noncrossing pair partitions of an even ground set."""
    if q.size % 2 != 0:
        raise ValueError("unfatten requires an even ground set")
    if not q.is_pairing() or not q.is_noncrossing():
        raise ValueError("unfatten requires a noncrossing pair partition")
    m = q.size // 2
    base = Partition(2 * m, tuple((2 * i - 1, 2 * i) for i in range(1, m + 1)))
    joined = join_full(q, base)
    blocks = []
    for block in joined.blocks:
        if len(block) % 2 != 0:
            raise ValueError(f"{q} is not the fattening of any partition")
        blocks.append(tuple(sorted({(x + 1) // 2 for x in block})))
    out = Partition(m, tuple(blocks))
    if fatten(out) != q:
        raise ValueError(f"{q} is not the fattening of any partition")
    return out


def hat(p: Partition) -> Partition:
    """Doubling map: block V turns into the union of {2i-1, 2i} over i in V."""
    blocks = []
    for block in p.blocks:
        doubled: list[int] = []
        for x in block:
            doubled.extend((2 * x - 1, 2 * x))
        blocks.append(tuple(doubled))
    return Partition(2 * p.size, tuple(blocks))


def interleave(p: Partition, q: Partition) -> Partition:
    """p on the odd points, q on the even points of {1..2m} (p wr q)."""
    if p.size != q.size:
        raise ValueError("interleave requires equal ground sizes")
    blocks = [tuple(2 * x - 1 for x in b) for b in p.blocks]
    blocks.extend(tuple(2 * x for x in b) for b in q.blocks)
    return Partition(2 * p.size, tuple(blocks))


def rotate_left(p: Partition) -> Partition:
    """Shift the ground set down by one, cyclically: s ~ t iff s+1 ~ t+1 in p.

    >>> str(rotate_left(Partition.from_text("{{1,2},{3}}")))
    '{{1,3},{2}}'
    """
    m = p.size
    shift = lambda x: m if x == 1 else x - 1
    return Partition(m, tuple(tuple(shift(x) for x in b) for b in p.blocks))


def rotate_right(p: Partition) -> Partition:
    """Inverse of rotate_left."""
    m = p.size
    shift = lambda x: 1 if x == m else x + 1
    return Partition(m, tuple(tuple(shift(x) for x in b) for b in p.blocks))


# ---------------------------------------------------------------------------
# Enumeration


@lru_cache(maxsize=None)
def _all_partitions(k: int) -> tuple[Partition, ...]:
    if k > MAX_ALL_GROUND:
        raise ValueError(f"full partition enumeration capped at {MAX_ALL_GROUND} points, got {k}")
    if k == 0:
        return (Partition(0, ()),)
    out: list[Partition] = []

    def rec(pos: int, blocks: list[list[int]]) -> None:
        if pos > k:
            out.append(Partition(k, tuple(tuple(b) for b in blocks)))
            return
        for b in blocks:
            b.append(pos)
            rec(pos + 1, blocks)
            b.pop()
        blocks.append([pos])
        rec(pos + 1, blocks)
        blocks.pop()

    rec(1, [])
    return tuple(sorted(out, key=lambda p: p.blocks))


@lru_cache(maxsize=None)
def _nc_partitions(k: int) -> tuple[Partition, ...]:
    if k > MAX_NC_GROUND:
        raise ValueError(f"noncrossing enumeration capped at {MAX_NC_GROUND} points, got {k}")
    if k == 0:
        return (Partition(0, ()),)
    out: list[Partition] = []

    # Scan left to right with a stack of open blocks: joining a block below
    # the top permanently closes everything above it, which is exactly the
    # noncrossing condition.
    def rec(pos: int, stack: list[list[int]], closed: list[list[int]]) -> None:
        if pos > k:
            out.append(Partition(k, tuple(tuple(b) for b in closed + stack)))
            return
        for depth in range(len(stack)):
            finished = stack[depth + 1 :]
            kept = stack[: depth + 1]
            kept[depth] = kept[depth] + [pos]
            rec(pos + 1, kept, closed + finished)
        rec(pos + 1, stack + [[pos]], closed)

    rec(1, [], [])
    assert len(out) == catalan(k)
    return tuple(sorted(out, key=lambda p: p.blocks))


@lru_cache(maxsize=None)
def _pairings(k: int) -> tuple[Partition, ...]:
    if k > MAX_PAIRING_GROUND:
        raise ValueError(f"pairing enumeration capped at {MAX_PAIRING_GROUND} points, got {k}")
    if k % 2 != 0:
        return ()
    if k == 0:
        return (Partition(0, ()),)
    out: list[Partition] = []

    def rec(remaining: tuple[int, ...], pairs: list[tuple[int, int]]) -> None:
        if not remaining:
            out.append(Partition(k, tuple(pairs)))
            return
        first = remaining[0]
        for t in range(1, len(remaining)):
            partner = remaining[t]
            rest = remaining[1:t] + remaining[t + 1 :]
            pairs.append((first, partner))
            rec(rest, pairs)
            pairs.pop()

    rec(tuple(range(1, k + 1)), [])
    return tuple(sorted(out, key=lambda p: p.blocks))


def _eps_pair_ok(eps: SignPattern, pair: tuple[int, int]) -> bool:
    a, b = pair
    return eps.signs[a - 1] != eps.signs[b - 1]


def _eps_block_alternating(eps: SignPattern, block: tuple[int, ...]) -> bool:
    if len(block) % 2 != 0:
        return False
    return all(eps.signs[a - 1] != eps.signs[b - 1] for a, b in zip(block, block[1:]))


FAMILY_KINDS = ("all", "nc", "nc2", "nc2_eps", "nc_eps", "nch_eps", "p2_eps")


@dataclass(frozen=True)
class PartitionFamily:
    """An eagerly enumerated family of partitions in canonical order."""

    kind: str
    ground_size: int
    eps: SignPattern | None
    members: tuple[Partition, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, p: Partition) -> bool:
        return p in self.members

    def index(self, p: Partition) -> int:
        return self.members.index(p)


def enumerate_family(kind: str, k: int, eps: SignPattern | None = None) -> PartitionFamily:
    """Enumerate one of the partition families, in canonical lexicographic order.

    For the eps-decorated pairing kinds (nc2_eps, nch_eps, p2_eps) the ground
    size k equals len(eps); for nc_eps the elements partition {1..k} and eps
    decorates the fattened 2k points, so len(eps) = 2k.
    """
    if kind not in FAMILY_KINDS:
        raise ValueError(f"unknown family kind {kind!r}, expected one of {FAMILY_KINDS}")
    needs_eps = kind.endswith("_eps")
    if needs_eps and eps is None:
        raise ValueError(f"family kind {kind!r} requires a sign pattern")
    if not needs_eps and eps is not None:
        raise ValueError(f"family kind {kind!r} takes no sign pattern")
    if kind == "all":
        members = _all_partitions(k)
    elif kind == "nc":
        members = _nc_partitions(k)
    elif kind == "nc2":
        members = tuple(p for p in _pairings(k) if p.is_noncrossing())
    elif kind == "nc2_eps":
        if len(eps) != k:
            raise ValueError(f"nc2_eps needs len(eps) == k, got {len(eps)} != {k}")
        members = tuple(
            p
            for p in _pairings(k)
            if p.is_noncrossing() and all(_eps_pair_ok(eps, b) for b in p.blocks)
        )
    elif kind == "p2_eps":
        if len(eps) != k:
            raise ValueError(f"p2_eps needs len(eps) == k, got {len(eps)} != {k}")
        members = tuple(
            p for p in _pairings(k) if all(_eps_pair_ok(eps, b) for b in p.blocks)
        )
    elif kind == "nch_eps":
        if len(eps) != k:
            raise ValueError(f"nch_eps needs len(eps) == k, got {len(eps)} != {k}")
        members = tuple(
            p
            for p in _nc_partitions(k)
            if all(_eps_block_alternating(eps, b) for b in p.blocks)
        )
    else:  # nc_eps
        if len(eps) != 2 * k:
            raise ValueError(f"nc_eps needs len(eps) == 2k, got {len(eps)} != {2 * k}")
        members = tuple(
            p
            for p in _nc_partitions(k)
            if all(_eps_pair_ok(eps, b) for b in fatten(p).blocks)
        )
    return PartitionFamily(kind, k, eps, members)


# ---------------------------------------------------------------------------
# Moebius function of NC(k)


def _signed_catalan(block_size: int) -> int:
    return (-1) ** (block_size - 1) * catalan(block_size - 1)


def _mobius_to_one(tau: Partition) -> int:
    """mu(tau, 1_k) on NC(k), via the Kreweras complement product formula."""
    return math.prod(_signed_catalan(len(b)) for b in kreweras(tau).blocks)


def mobius(s: Partition, p: Partition) -> int:
    """Moebius function of the noncrossing lattice; 0 unless s <= p.

    Computed multiplicatively: the interval [s, p] factors over the blocks of
    p, and mu(tau, 1) is a signed Catalan product over the Kreweras complement
    of tau.  The definitional chain recursion is kept in mobius_recursive and
    the two are cross-checked in the test suite.

    >>> mobius(Partition.singletons(3), Partition.full(3))
    2
    """
    if s.size != p.size:
        raise ValueError("ground sizes differ")
    if not (s.is_noncrossing() and p.is_noncrossing()):
        raise ValueError("mobius is defined on the noncrossing lattice")
    if not leq(s, p):
        return 0
    return math.prod(_mobius_to_one(restrict(s, block)) for block in p.blocks)


@lru_cache(maxsize=None)
def mobius_recursive(s: Partition, p: Partition) -> int:
    """mu(s, p) by the memoized defining recursion over the interval [s, p)."""
    if not leq(s, p):
        return 0
    if s == p:
        return 1
    total = 0
    for t in _nc_partitions(p.size):
        if t != p and leq(s, t) and leq(t, p):
            total += mobius_recursive(s, t)
    return -total
