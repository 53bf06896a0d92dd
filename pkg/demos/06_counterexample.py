"""The two-flavor dichotomy over commuting matrix-unit systems.

The same length-six word is evaluated under both Haar families.  With the
classical (commuting) flavor the value stays exactly at the identity for
every size, so asymptotic freeness fails; with the quantum flavor the norm
decays like 2/N.  The combinatorial reason is a single crossing pairing that
is admissible classically but not quantumly.
"""

from qhaar.freeness import (
    CROSSING_PAIRING,
    counterexample,
    crossing_pairing_present,
)
from qhaar.opvalued import MatrixUnitAlgebra


def main():
    print("word: (U A U* B)^3 with A, B the flip matrices of two")
    print("commuting matrix-unit systems")
    print()
    print(f"{'N':>3} {'classical |value - 1|':>22} {'quantum norm':>14} {'2/N':>8}")
    for n in range(3, 9):
        alg = MatrixUnitAlgebra(n)
        c = counterexample(n, "classical")
        q = counterexample(n, "quantum")
        dist = alg.norm_float(c - alg.one())
        norm = alg.norm_float(q)
        print(f"{n:>3} {dist:>22.3e} {norm:>14.4f} {2.0 / n:>8.4f}")

    print()
    print("the classical values are exactly the identity element:")
    print("  value(4) == one:", counterexample(4, "classical") == MatrixUnitAlgebra(4).one())

    print()
    print(f"crossing pairing {CROSSING_PAIRING}:")
    print(f"  classical admissible family: {crossing_pairing_present('classical')}")
    print(f"  quantum admissible family:   {crossing_pairing_present('quantum')}")
    print()
    print("that pairing glues the two systems so the classical moment never")
    print("factorizes; the quantum family contains only noncrossing pairings")
    print("and the obstruction disappears.")


if __name__ == "__main__":
    main()
