"""Tour of the partition combinatorics layer.

Enumerates noncrossing partitions and pairing families, walks through the
Kreweras complement and the fattening bijection, and evaluates the Moebius
function on a few intervals of the noncrossing lattice.
"""

from qhaar.partitions import (
    Partition,
    SignPattern,
    catalan,
    enumerate_family,
    fatten,
    kreweras,
    mobius,
    rotate_left,
    unfatten,
)


def main():
    print("== noncrossing partitions ==")
    for m in range(1, 6):
        fam = enumerate_family("nc", m).members
        print(f"NC({m}): {len(fam)} members (Catalan number {catalan(m)})")
    print()
    print("NC(4) in enumeration order:")
    for p in enumerate_family("nc", 4).members:
        print("   ", p)

    print()
    print("== Kreweras complement ==")
    p = Partition.from_text("{{1,5},{2,3,4},{6,8},{7}}")
    kc = kreweras(p)
    print(f"p      = {p}  ({len(p.blocks)} blocks)")
    print(f"K(p)   = {kc}  ({len(kc.blocks)} blocks)")
    print(f"block counts add up to m + 1 = {p.size + 1}")
    print(f"K(K(p)) = {kreweras(kc)} is p rotated one step")

    print()
    print("== fattening: NC(m) -> noncrossing pairings of 2m points ==")
    q = Partition.from_text("{{1,3},{2}}")
    fq = fatten(q)
    print(f"fatten({q}) = {fq}")
    print(f"unfatten recovers {unfatten(fq)}")
    print("complement and rotation commute with fattening:")
    print(f"  fatten(K(q))        = {fatten(kreweras(q))}")
    print(f"  rotate(fatten(q))   = {rotate_left(fq)}")

    print()
    print("== sign-pattern families ==")
    eps = SignPattern.from_text("1*1*1*")
    quantum = enumerate_family("nc2_eps", 6, eps).members
    classical = enumerate_family("p2_eps", 6, eps).members
    print(f"pattern {eps}: {len(quantum)} noncrossing admissible pairings")
    for p in quantum:
        print("   ", p)
    crossing = Partition.from_text("{{1,4},{2,5},{3,6}}")
    print(f"all admissible pairings (classical family): {len(classical)}")
    print(f"the crossing pairing {crossing} is "
          f"{'present' if crossing in classical else 'absent'} there")

    print()
    print("== Moebius function on the noncrossing lattice ==")
    for k in range(2, 6):
        bottom = Partition.singletons(k)
        top = Partition.full(k)
        print(f"mu(0, 1) on NC({k}) = {mobius(bottom, top)}"
              f"  (signed Catalan {(-1) ** (k - 1) * catalan(k - 1)})")


if __name__ == "__main__":
    main()
