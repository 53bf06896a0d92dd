"""Operator-valued expectations over matrix coefficient algebras.

Works in matrices whose entries live in a small coefficient algebra: the
entrywise trace expectation, nested functionals along noncrossing partitions,
free cumulants by Moebius inversion, constrained index sums, and the
triangle-inequality norm bound.
"""

import random
from fractions import Fraction

from qhaar.exactalg import GaussianRational
from qhaar.opvalued import (
    BMatrix,
    DenseAlgebra,
    MatrixUnitAlgebra,
    constrained_sum,
    cumulant_k,
    expectation,
    functional_e,
    norm_check,
)
from qhaar.partitions import Partition, enumerate_family, fatten, leq


def rand_matrix(rng, alg, size):
    def cell():
        return alg.element(
            [
                [
                    GaussianRational(
                        Fraction(rng.randint(-2, 2)), Fraction(rng.randint(-1, 1))
                    )
                    for _ in range(alg.dim)
                ]
                for _ in range(alg.dim)
            ]
        )

    return BMatrix(alg, [[cell() for _ in range(size)] for _ in range(size)])


def main():
    rng = random.Random(5)
    alg = DenseAlgebra(2)

    print("== the trace expectation ==")
    a = rand_matrix(rng, alg, 3)
    print("E maps a 3x3 matrix over the coefficient algebra to one element:")
    print("  E(a) =", expectation(a))
    print("  E(1) =", expectation(BMatrix.identity(alg, 3)))

    print()
    print("== nested functionals along noncrossing partitions ==")
    args = [rand_matrix(rng, alg, 2) for _ in range(3)]
    for sigma in enumerate_family("nc", 3).members:
        print(f"  E^{sigma} =", functional_e(sigma, args))

    print()
    print("== free cumulants invert the moments ==")
    fam = enumerate_family("nc", 3).members
    moments = {t: functional_e(t, args) for t in fam}
    cumulants = {t: cumulant_k(t, args) for t in fam}
    top = Partition.full(3)
    total = alg.zero()
    for sigma in fam:
        if leq(sigma, top):
            total = total + cumulants[sigma]
    print("  sum of cumulants below the full partition:", total)
    print("  equals the full moment:", total == moments[top])

    print()
    print("== constrained index sums ==")
    n = 3
    args = [rand_matrix(rng, alg, n) for _ in range(2)]
    sigma = Partition.from_text("{{1},{2,3},{4}}")
    value = constrained_sum(sigma, args)
    print(f"  sum over tuples glued by {sigma}: {value}")
    full = fatten(Partition.full(2))
    print(f"  fattened full partition recovers N * E(a1 a2):")
    print(f"    {constrained_sum(full, args) == expectation(args[0] @ args[1]) * n}")

    print()
    print("== norm bound with float tolerance 1e-6 ==")
    units = MatrixUnitAlgebra(2)
    flip = BMatrix(
        units,
        [[units.unit(1, j, i) for j in range(1, 3)] for i in range(1, 3)],
    )
    result = norm_check(Partition.from_text("{{1,4},{2,3}}"), [flip, flip])
    print(f"  lhs {result.lhs:.6f} <= bound {result.bound:.6f}: {result.ok}")
    for _ in range(3):
        m = rng.choice([2, 3])
        args = [rand_matrix(rng, alg, 2) for _ in range(m)]
        members = enumerate_family("all", 2 * m).members
        sigma = members[rng.randrange(len(members))]
        result = norm_check(sigma, args)
        print(f"  random {sigma}: lhs {result.lhs:.4f} <= {result.bound:.4f}: {result.ok}")


if __name__ == "__main__":
    main()
