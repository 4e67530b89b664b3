"""Shared oracles and corpus generators.

Expected barcodes come from three routes that never touch the greedy
eliminator under test: the classic persistence column reduction (trivial
period group), exhaustive subspace search on tiny mod-2 instances, and
packages assembled by filtered conjugation of a direct sum whose barcode
is fixed by construction.
"""

from __future__ import annotations

import random
from fractions import Fraction

from floerbar.complexes import FloerPackage, Generator
from floerbar.novikov import NovikovScalar, PeriodGroup


def scalar(p, *terms, trunc=None):
    return NovikovScalar.from_terms(
        p, [(Fraction(e), c) for e, c in terms], trunc=trunc
    )


def persistence_reduction_oracle(package: FloerPackage):
    """Column reduction with low() pivots, for trivial period groups.

    Returns (finite lengths descending, infinite count).
    """
    assert package.gamma.is_trivial
    p = package.p
    finite: list[Fraction] = []
    infinite = 0
    rows_map = package.rows()
    for _, idx in package.component_indices().items():
        order = sorted(idx, key=lambda i: (package.action(i), i))
        pos = {g: k for k, g in enumerate(order)}
        cols: list[dict[int, int]] = []
        for g in order:
            col: dict[int, int] = {}
            for j, c in rows_map.get(g, {}).items():
                assert len(c.terms) == 1 and c.terms[0][0] == 0
                col[pos[j]] = c.terms[0][1]
            cols.append(col)
        lows: dict[int, int] = {}
        for k in range(len(cols)):
            col = cols[k]
            while col:
                low = max(col)
                other = lows.get(low)
                if other is None:
                    break
                ratio = col[low] * pow(cols[other][low], -1, p) % p
                for r, v in cols[other].items():
                    nv = (col.get(r, 0) - ratio * v) % p
                    if nv:
                        col[r] = nv
                    elif r in col:
                        del col[r]
            if col:
                lows[max(col)] = k
        for low, k in lows.items():
            finite.append(package.action(order[k]) - package.action(order[low]))
        infinite += len(order) - 2 * len(lows)
    return tuple(sorted(finite, reverse=True)), infinite


def _f2_rank(vectors):
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def brute_b_eps_oracle(package: FloerPackage, eps) -> int:
    """Exhaustive b_eps over F_2 with trivial period group, n <= ~14.

    Counts rank and the largest subspace of the image all of whose nonzero
    vectors admit preimages dropping action by at most eps; the bar count
    above eps follows by dimension bookkeeping.
    """
    assert package.p == 2 and package.gamma.is_trivial
    n = package.n
    assert n <= 14
    e = Fraction(eps)
    rows = package.rows()
    bnd = [0] * n
    for i in range(n):
        m = 0
        for j in rows.get(i, {}):
            m ^= 1 << j
        bnd[i] = m

    def action(mask: int) -> Fraction:
        best = None
        mm = mask
        while mm:
            b = mm & -mm
            i = b.bit_length() - 1
            mm ^= b
            a = package.action(i)
            if best is None or a > best:
                best = a
        return best

    minpre: dict[int, Fraction] = {}
    for mask in range(1, 1 << n):
        v = 0
        mm = mask
        while mm:
            b = mm & -mm
            v ^= bnd[b.bit_length() - 1]
            mm ^= b
        if v == 0:
            continue
        a = action(mask)
        if v not in minpre or a < minpre[v]:
            minpre[v] = a

    rank = _f2_rank(bnd)
    shortvecs = sorted(v for v, a in minpre.items() if a - action(v) <= e)
    shortset = set(shortvecs)
    best = 0

    def extend(start: int, size: int, span: frozenset[int]) -> None:
        nonlocal best
        if size > best:
            best = size
        for idx in range(start, len(shortvecs)):
            v = shortvecs[idx]
            if v in span:
                continue
            new = span | {s ^ v for s in span}
            if all(s == 0 or s in shortset for s in new):
                extend(idx + 1, size + 1, new)

    extend(0, 0, frozenset([0]))
    return n - rank - best


def two_storey_random(
    seed: int,
    n_targets: int = 5,
    n_sources: int = 5,
    p: int = 2,
    max_row: int = 3,
) -> FloerPackage:
    """Random valid package: sources strictly above targets, exact scalars,
    trivial period group, all actions distinct."""
    rng = random.Random(seed)
    denom = 16
    lows = rng.sample(range(0, 40), n_targets)
    highs = rng.sample(range(48, 120), n_sources)
    gens = [Generator(f"t{k}", Fraction(a, denom)) for k, a in enumerate(lows)]
    gens += [Generator(f"s{k}", Fraction(a, denom)) for k, a in enumerate(highs)]
    terms = []
    for i in range(n_targets, n_targets + n_sources):
        width = rng.randint(0, max_row)
        for j in rng.sample(range(n_targets), min(width, n_targets)):
            coeff = NovikovScalar.monomial(p, rng.randrange(1, p), Fraction(0))
            terms.append((i, j, coeff))
    return FloerPackage(tuple(gens), tuple(terms), PeriodGroup.trivial(), p)


def conjugated_ground_truth(seed: int, p: int = 2, use_gamma: bool = False):
    """Package with a barcode known by construction.

    A direct sum of bar pairs and singular generators is scrambled by
    random filtered basis changes; those preserve the barcode and the
    validity of the differential, so the expected output is frozen before
    the eliminator ever runs.
    """
    rng = random.Random(seed)
    gamma = PeriodGroup.from_generators(1) if use_gamma else PeriodGroup.trivial()
    npairs = rng.randint(1, 3)
    nsing = rng.randint(0, 2)
    gens: list[Generator] = []
    lengths: list[Fraction] = []
    matrix: dict[int, dict[int, NovikovScalar]] = {}
    used_actions: set[Fraction] = set()

    def fresh_action(lo: int, hi: int) -> Fraction:
        while True:
            a = Fraction(rng.randint(lo, hi), 4)
            if a not in used_actions:
                used_actions.add(a)
                return a

    for _ in range(npairs):
        top = fresh_action(8, 24)
        length = Fraction(rng.randint(1, 10), 4)
        shift = Fraction(rng.randint(0, 2)) if use_gamma and rng.random() < 0.5 else Fraction(0)
        bottom = top - length + shift
        while bottom in used_actions:
            length += Fraction(1, 4)
            bottom = top - length + shift
        used_actions.add(bottom)
        i = len(gens)
        gens.append(Generator(f"e{i}", top))
        j = len(gens)
        gens.append(Generator(f"e{j}", bottom))
        matrix[i] = {j: NovikovScalar.monomial(p, rng.randrange(1, p), shift)}
        lengths.append(length)
    for _ in range(nsing):
        gens.append(Generator(f"e{len(gens)}", fresh_action(0, 30)))

    n = len(gens)
    zero = NovikovScalar.zero(p)
    for _ in range(3 * n):
        a, b = rng.sample(range(n), 2)
        if matrix.get(b, {}).get(a) is not None:
            continue  # the op g_a += lam*g_b would create a self term
        gap = gens[b].action - gens[a].action
        if gamma.is_trivial:
            if gap > 0:
                continue
            expo = Fraction(0)
        else:
            expo = Fraction(-(-gap.numerator // gap.denominator))  # ceil
        lam = NovikovScalar.monomial(p, rng.randrange(1, p), expo)
        row_b = matrix.get(b, {})
        if row_b:
            row_a = matrix.setdefault(a, {})
            for w, c in row_b.items():
                nv = row_a.get(w, zero) + lam * c
                if nv.terms:
                    row_a[w] = nv
                elif w in row_a:
                    del row_a[w]
            if not row_a:
                del matrix[a]
        for u in list(matrix):
            row = matrix[u]
            ca = row.get(a)
            if ca is None:
                continue
            cur = row.get(b, zero)
            nv = cur - lam * ca
            if nv.terms:
                row[b] = nv
            elif b in row:
                del row[b]
            if not row:
                del matrix[u]

    terms = tuple(
        (i, j, c) for i, row in matrix.items() for j, c in row.items()
    )
    pkg = FloerPackage(tuple(gens), terms, gamma, p)
    return pkg, tuple(sorted(lengths, reverse=True)), nsing
