"""Exact Gram and Weingarten tables for both unitary flavors.

Builds the tables for a sign pattern, prints their exact rational-function
entries, verifies the inverse relation by hand, and expands an entry at
large size to expose its asymptotic order.
"""

from qhaar.exactalg import RationalFunction, laurent_at_infinity
from qhaar.partitions import Partition, SignPattern, mobius
from qhaar.weingarten import build_table, west_expansion


def show_table(flavor, eps):
    table = build_table(flavor, eps)
    print(f"{flavor} table for pattern {eps}: family of {len(table.family)}")
    for p in table.family:
        print("   ", p)
    print("Gram entries n^(blocks of the join):")
    for p in table.family:
        row = "  ".join(str(table.gram_entry(p, s)) for s in table.family)
        print("   ", row)
    print("Weingarten entries (exact inverse):")
    for p in table.family:
        row = "  ".join(str(table.wg_entry(p, s)) for s in table.family)
        print("   ", row)
    return table


def main():
    eps = SignPattern.from_text("1*1*")
    quantum = show_table("quantum", eps)
    print()
    classical = show_table("classical", eps)

    print()
    print("== inverse relation, checked entry by entry ==")
    for table in (quantum, classical):
        size = len(table.family)
        ok = True
        for a in range(size):
            for b in range(size):
                acc = RationalFunction.zero()
                for k in range(size):
                    acc = acc + table.gram.entry(a, k) * table.wg.entry(k, b)
                want = RationalFunction.from_int(1 if a == b else 0)
                ok = ok and acc == want
        print(f"{table.flavor}: gram * wg == identity is {ok}")

    print()
    print("== asymptotics of a rescaled entry ==")
    table = build_table("quantum", SignPattern.alternating(6))
    p = Partition.from_text("{{1,2,3}}")
    s = Partition.from_text("{{1},{2},{3}}")
    got = west_expansion(table, p, s)
    print(f"entry at (fatten({p}), fatten({s}))")
    print(f"  leading exponent {got.exponent}")
    print(f"  constant term of the rescaled entry: {got.c0}")
    print(f"  matches mu({s}, {p}) = {mobius(s, p)}")
    print(f"  order n^-1 term: {got.c1} (always zero)")

    print()
    print("== Laurent expansion of a raw entry ==")
    p0 = quantum.family[0]
    p1 = quantum.family[1]
    entry = quantum.wg_entry(p0, p1)
    series = laurent_at_infinity(entry, 4)
    coeffs = ", ".join(
        f"n^{series.leading_exponent - k}: {series.abs_coefficient(series.leading_exponent - k)}"
        for k in range(4)
    )
    print(f"{entry} = [{coeffs}, ...]")


if __name__ == "__main__":
    main()
