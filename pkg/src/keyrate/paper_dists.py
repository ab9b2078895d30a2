"""Closed-form constructors for the Werner / symmetric distribution families.

Families, with their honest and Eve alphabets:

* ``werner_distribution(p)``: trits for Alice and Bob, nine Eve symbols
  ``z_ij`` (Eve's joint guess of the honest pair).
* ``symmetric_distribution(q)``: trit pairs ``x1 x2`` for Alice and
  ``y1 y2`` for Bob, Eve symbols ``zt_abcd`` where ``ab`` guesses
  ``(x1, y1)`` and ``cd`` guesses ``(x2, y2)``.
* ``binaryze_*``: two-bit restrictions of the above.
* ``activate``: the filtered product of a Werner and a symmetric source,
  binaryzed, with composite Eve symbols ``z_ij|zt_abcd``.

The Eve-symbol labels keep their index structure so that downstream
analyses can classify them by inspection.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UnsupportedError
from .probdist import TripartiteDistribution

TRITS = ("0", "1", "2")
PAIRS = tuple(a + b for a in TRITS for b in TRITS)
WERNER_EVE = tuple(f"z_{i}{j}" for i in TRITS for j in TRITS)
SYMMETRIC_EVE = tuple(f"zt_{a}{b}{c}{d}" for a in TRITS for b in TRITS for c in TRITS for d in TRITS)

# Conditional Eve split inside cells where Alice and Bob hold equal trit
# pairs: the correct diagonal guess fires with 2/3, each wrong one with 1/6.
ONE_CELL_SPLIT = (2.0 / 3.0, 1.0 / 6.0)


@dataclass(frozen=True)
class WernerParams:
    """Mixing weight of the antisymmetric projector and local dimension."""

    p: float
    d: int = 3

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidArgumentError(f"p={self.p} outside [0, 1]")
        if self.d < 2:
            raise InvalidArgumentError("d must be at least 2")


@dataclass(frozen=True)
class SymmetricParams:
    """Mixing weight q of the two-source symmetric family; q=1/(d+2) is the universal activator."""

    q: float
    d: int = 3

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise InvalidArgumentError(f"q={self.q} outside [0, 1]")
        if self.d < 2:
            raise InvalidArgumentError("d must be at least 2")


def universal_activator_q(d: int = 3) -> float:
    return 1.0 / (d + 2)


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants of the two families and their activated product.

    Fields tied to p (lambda1, lambda2, delta_z) or to q (alpha..p_h) are
    None when that parameter was not supplied.
    """

    p: float | None = None
    q: float | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    delta_z: float | None = None
    alpha: float | None = None
    gamma: float | None = None
    p_g: float | None = None
    p_b: float | None = None
    p_l: float | None = None
    p_h: float | None = None
    c_n: float | None = None
    s_n: float | None = None

    @classmethod
    def evaluate(cls, p: float | None = None, q: float | None = None) -> "DerivedConstants":
        vals = {"p": p, "q": q}
        if p is not None:
            WernerParams(p)
            lam1 = (1.0 - p) / 6.0
            lam2 = p / 3.0
            delta_z = (math.sqrt(lam1) - math.sqrt(lam2)) ** 2 / (2.0 * (lam1 + lam2))
            vals.update(lambda1=lam1, lambda2=lam2, delta_z=delta_z)
            assert -1e-15 <= delta_z <= 0.5 + 1e-15
        if q is not None:
            SymmetricParams(q)
            alpha = math.sqrt(8.0 * q / (1.0 + 7.0 * q))
            gamma = math.sqrt((1.0 - q) / (2.0 * (1.0 + 7.0 * q)))
            vals.update(
                alpha=alpha,
                gamma=gamma,
                p_g=(alpha + 2.0 * gamma) ** 2 / 6.0,
                p_b=(alpha - 2.0 * gamma) ** 2 / 6.0,
                p_l=(alpha - gamma) ** 2 / 6.0,
                p_h=(alpha + gamma) ** 2 / 6.0,
            )
            assert abs(vals["p_g"] + vals["p_b"] + 2 * vals["p_l"] + 2 * vals["p_h"] - 1.0) < 1e-12
        if p is not None and q is not None:
            lam12 = vals["lambda1"] + vals["lambda2"]
            c_n = lam12 * (5.0 + 11.0 * q) / 48.0 + 5.0 * vals["lambda1"] * (1.0 - q) / 24.0
            vals.update(c_n=c_n, s_n=(1.0 + 7.0 * q) / (144.0 * c_n))
        return cls(**vals)


def _require_qutrit(d: int) -> None:
    if d != 3:
        raise UnsupportedError("closed-form tables exist for d=3 only")


def werner_distribution(params: WernerParams | float) -> TripartiteDistribution:
    """Tripartite table of the Werner family at mixing weight p.

    Honest pairs (i, i) carry weight lambda1 with Eve certain (z_ii);
    pairs (i, j), i != j, carry (lambda1+lambda2)/2 with Eve right
    (z_ij) with probability 1-delta_z and transposed (z_ji) with delta_z.
    """
    if not isinstance(params, WernerParams):
        params = WernerParams(float(params))
    _require_qutrit(params.d)
    c = DerivedConstants.evaluate(p=params.p)
    off = (c.lambda1 + c.lambda2) / 2.0
    table = np.zeros((3, 3, 9))
    for i in range(3):
        for j in range(3):
            if i == j:
                table[i, j, 3 * i + j] = c.lambda1
            else:
                table[i, j, 3 * i + j] = off * (1.0 - c.delta_z)
                table[i, j, 3 * j + i] = off * c.delta_z
    return TripartiteDistribution(TRITS, TRITS, WERNER_EVE, table)


def _symmetric_cell_split(x1: int, y1: int, x2: int, y2: int, c: DerivedConstants):
    """(mass, {eve_label: conditional probability}) of one honest cell."""
    q = c.q
    if x1 == y1 and x2 == y2:
        mass = (1.0 - q) / 72.0
        split = {
            f"zt_{x1}{y1}{k}{k}": (ONE_CELL_SPLIT[0] if k == x2 else ONE_CELL_SPLIT[1])
            for k in range(3)
        }
    elif x1 != y1 and x2 == y2:
        mass = (1.0 + 7.0 * q) / 144.0
        split = {}
        for k in range(3):
            split[f"zt_{x1}{y1}{k}{k}"] = c.p_g if k == x2 else c.p_l
            split[f"zt_{y1}{x1}{k}{k}"] = c.p_b if k == x2 else c.p_h
    elif x1 == y1:
        mass = (1.0 - q) / 48.0
        split = {f"zt_{x1}{y1}{x2}{y2}": 1.0}
    else:
        mass = (1.0 - q) / 96.0
        split = {f"zt_{x1}{y1}{x2}{y2}": 0.5, f"zt_{y1}{x1}{x2}{y2}": 0.5}
    return mass, split


def symmetric_distribution(params: SymmetricParams | float) -> TripartiteDistribution:
    """Tripartite table of the symmetric family at mixing weight q.

    Alice holds the trit pair (x1, x2), Bob (y1, y2). Cell masses fall in
    four classes depending on whether x1=y1 and x2=y2; Eve's conditional
    split inside each cell depends only on the class.
    """
    if not isinstance(params, SymmetricParams):
        params = SymmetricParams(float(params))
    _require_qutrit(params.d)
    c = DerivedConstants.evaluate(q=params.q)
    z_index = {z: k for k, z in enumerate(SYMMETRIC_EVE)}
    table = np.zeros((9, 9, 81))
    for x1, x2, y1, y2 in itertools.product(range(3), repeat=4):
        mass, split = _symmetric_cell_split(x1, y1, x2, y2, c)
        i = 3 * x1 + x2
        j = 3 * y1 + y2
        for label, w in split.items():
            table[i, j, z_index[label]] += mass * w
    return TripartiteDistribution(PAIRS, PAIRS, SYMMETRIC_EVE, table)


def _is_werner_table(dist: TripartiteDistribution) -> bool:
    return dist.x_alphabet == TRITS and dist.y_alphabet == TRITS and dist.z_alphabet == WERNER_EVE


def binaryze_werner(dist: TripartiteDistribution, discarded_symbol: str = "2") -> TripartiteDistribution:
    """Keep two honest trits, permute Bob's bit, relabel Eve accordingly.

    Both parties drop `discarded_symbol`; the kept symbols map (in order)
    to bits 0 and 1 for Alice and to 1 and 0 for Bob. Eve's z_ij is
    relabeled to z_{i, 1-j} in the new bit indices, reproducing the
    two-bit table whose diagonal carries the delta_z split.
    """
    if not _is_werner_table(dist):
        raise InvalidArgumentError("input is not a Werner-family table")
    if discarded_symbol not in TRITS:
        raise InvalidArgumentError(f"symbol {discarded_symbol!r} not in the honest alphabet")
    kept = [s for s in TRITS if s != discarded_symbol]
    bit = {s: n for n, s in enumerate(kept)}
    z_labels = ("z_00", "z_01", "z_10", "z_11")
    table = np.zeros((2, 2, 4))
    for x, y, z, p in dist.support():
        if x == discarded_symbol or y == discarded_symbol:
            continue
        zi, zj = z[2], z[3]
        new_z = f"z_{bit[zi]}{1 - bit[zj]}"
        table[bit[x], 1 - bit[y], z_labels.index(new_z)] += p
    return TripartiteDistribution.from_weights(("0", "1"), ("0", "1"), z_labels, table)


def _is_symmetric_table(dist: TripartiteDistribution) -> bool:
    return dist.x_alphabet == PAIRS and dist.y_alphabet == PAIRS and dist.z_alphabet == SYMMETRIC_EVE


def binaryze_symmetric(dist: TripartiteDistribution) -> TripartiteDistribution:
    """Project onto Alice in {00, 01} and Bob in {10, 11}, relabeled to bits.

    Eve's symbols are untouched; the output alphabet keeps only symbols
    with support.
    """
    if not _is_symmetric_table(dist):
        raise InvalidArgumentError("input is not a symmetric-family table")
    alice = {"00": 0, "01": 1}
    bob = {"10": 0, "11": 1}
    cells = {}
    for x, y, z, p in dist.support():
        if x in alice and y in bob:
            cells[(alice[x], bob[y], z)] = cells.get((alice[x], bob[y], z), 0.0) + p
    z_labels = tuple(z for z in SYMMETRIC_EVE if any(key[2] == z for key in cells))
    table = np.zeros((2, 2, len(z_labels)))
    for (i, j, z), p in cells.items():
        table[i, j, z_labels.index(z)] = p
    return TripartiteDistribution.from_weights(("0", "1"), ("0", "1"), z_labels, table)


def activate(
    p_dist: TripartiteDistribution,
    q_dist: TripartiteDistribution,
    discarded_symbol: str = "2",
) -> TripartiteDistribution:
    """Filtered product of a Werner and a symmetric source, binaryzed.

    Alice keeps x2 whenever her Werner trit equals x1 (Bob likewise for
    y2/y1); surviving events with x2 or y2 equal to `discarded_symbol`
    are dropped, the rest renormalized. Eve retains the pair of symbols
    from both sources.
    """
    if not _is_werner_table(p_dist):
        raise InvalidArgumentError("p_dist is not a Werner-family table")
    if not _is_symmetric_table(q_dist):
        raise InvalidArgumentError("q_dist is not a symmetric-family table")
    if discarded_symbol not in TRITS:
        raise InvalidArgumentError(f"symbol {discarded_symbol!r} not in the honest alphabet")
    kept = [s for s in TRITS if s != discarded_symbol]
    bit = {s: n for n, s in enumerate(kept)}

    weights = {}
    for x, y, z, p in p_dist.support():
        for xq, yq, zt, w in q_dist.support():
            if xq[0] != x or yq[0] != y:
                continue
            x2, y2 = xq[1], yq[1]
            if x2 == discarded_symbol or y2 == discarded_symbol:
                continue
            key = (bit[x2], bit[y2], f"{z}|{zt}")
            weights[key] = weights.get(key, 0.0) + p * w

    z_labels = sorted({key[2] for key in weights})
    table = np.zeros((2, 2, len(z_labels)))
    for (i, j, z), w in weights.items():
        table[i, j, z_labels.index(z)] = w
    return TripartiteDistribution.from_weights(("0", "1"), ("0", "1"), tuple(z_labels), table)


_FAMILIES = ("werner", "symmetric", "werner-bin", "symmetric-bin", "activated")


def build_family(family: str, p: float | None = None, q: float | None = None) -> TripartiteDistribution:
    """Constructor dispatch used by the command-line front-end."""
    if family == "werner":
        _need(p, "p", family)
        return werner_distribution(p)
    if family == "symmetric":
        _need(q, "q", family)
        return symmetric_distribution(q)
    if family == "werner-bin":
        _need(p, "p", family)
        return binaryze_werner(werner_distribution(p))
    if family == "symmetric-bin":
        _need(q, "q", family)
        return binaryze_symmetric(symmetric_distribution(q))
    if family == "activated":
        _need(p, "p", family)
        _need(q, "q", family)
        return activate(werner_distribution(p), symmetric_distribution(q))
    raise InvalidArgumentError(f"unknown family {family!r}; expected one of {_FAMILIES}")


def _need(value, name, family):
    if value is None:
        raise InvalidArgumentError(f"family {family!r} requires parameter {name}")
