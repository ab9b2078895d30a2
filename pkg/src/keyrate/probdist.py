"""Finite tripartite distributions P(X,Y,Z) and the Shannon toolbox.

Alphabets are ordered tuples of string labels; probabilities live in a
dense (|X|, |Y|, |Z|) array. All quantities are in bits (log base 2)
with the 0*log(0) = 0 convention. Values are immutable after
construction, so everything here is safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlphabetMismatchError,
    DocumentError,
    InvalidArgumentError,
    ZeroMassError,
)

PROB_TOL = 1e-12  # distributions come from closed forms; nothing looser needed
LOAD_TOL = 1e-9   # serialized documents are rounded to 12 significant digits


def _check_alphabet(name, labels):
    labels = tuple(str(s) for s in labels)
    if len(labels) == 0:
        raise InvalidArgumentError(f"{name} alphabet is empty")
    if len(set(labels)) != len(labels):
        raise InvalidArgumentError(f"{name} alphabet has duplicate labels")
    return labels


@dataclass(frozen=True)
class TripartiteDistribution:
    """Joint distribution of (X, Y, Z) over finite labeled alphabets."""

    x_alphabet: tuple
    y_alphabet: tuple
    z_alphabet: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_alphabet", _check_alphabet("X", self.x_alphabet))
        object.__setattr__(self, "y_alphabet", _check_alphabet("Y", self.y_alphabet))
        object.__setattr__(self, "z_alphabet", _check_alphabet("Z", self.z_alphabet))
        p = np.array(self.probabilities, dtype=float)
        shape = (len(self.x_alphabet), len(self.y_alphabet), len(self.z_alphabet))
        if p.shape != shape:
            raise InvalidArgumentError(f"probability array has shape {p.shape}, expected {shape}")
        if np.any(p < 0):
            raise InvalidArgumentError("negative probability entry")
        total = p.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidArgumentError(f"probabilities sum to {total!r}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_weights(cls, x_alphabet, y_alphabet, z_alphabet, weights):
        """Build from non-negative weights, normalizing the total to 1."""
        w = np.array(weights, dtype=float)
        if np.any(w < 0):
            raise InvalidArgumentError("negative weight entry")
        total = w.sum()
        if total <= 0:
            raise ZeroMassError("all weights are zero")
        return cls(tuple(x_alphabet), tuple(y_alphabet), tuple(z_alphabet), w / total)

    def index(self, x: str, y: str, z: str) -> tuple:
        try:
            return (self.x_alphabet.index(x), self.y_alphabet.index(y), self.z_alphabet.index(z))
        except ValueError as exc:
            raise InvalidArgumentError(f"unknown symbol in ({x!r}, {y!r}, {z!r})") from exc

    def prob(self, x: str, y: str, z: str) -> float:
        return float(self.probabilities[self.index(x, y, z)])

    def support(self):
        """Yield (x, y, z, p) for every nonzero entry, in alphabet order."""
        p = self.probabilities
        for i, x in enumerate(self.x_alphabet):
            for j, y in enumerate(self.y_alphabet):
                for k, z in enumerate(self.z_alphabet):
                    if p[i, j, k] > 0:
                        yield x, y, z, float(p[i, j, k])


@dataclass(frozen=True)
class EveChannel:
    """Row-stochastic map from Eve's alphabet Z to an output alphabet of equal size."""

    input_alphabet: tuple
    output_alphabet: tuple
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "input_alphabet", _check_alphabet("input", self.input_alphabet))
        object.__setattr__(self, "output_alphabet", _check_alphabet("output", self.output_alphabet))
        if len(self.output_alphabet) != len(self.input_alphabet):
            raise InvalidArgumentError("output alphabet must match input alphabet in size")
        m = np.array(self.matrix, dtype=float)
        if m.shape != (len(self.input_alphabet), len(self.output_alphabet)):
            raise InvalidArgumentError("channel matrix shape does not match alphabets")
        if np.any(m < 0):
            raise InvalidArgumentError("negative channel entry")
        if np.any(np.abs(m.sum(axis=1) - 1.0) > PROB_TOL):
            raise InvalidArgumentError("channel rows must each sum to 1")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, alphabet) -> "EveChannel":
        alphabet = tuple(alphabet)
        return cls(alphabet, alphabet, np.eye(len(alphabet)))


def normalize(dist: TripartiteDistribution) -> TripartiteDistribution:
    """Rescale so entries sum to 1 (relative weights preserved)."""
    total = dist.probabilities.sum()
    if total <= 0:
        raise ZeroMassError("distribution has zero total mass")
    return TripartiteDistribution(
        dist.x_alphabet, dist.y_alphabet, dist.z_alphabet, dist.probabilities / total
    )


def entropy_bits(weights) -> float:
    """Shannon entropy of a (possibly unnormalized-by-shape) probability array."""
    p = np.asarray(weights, dtype=float).ravel()
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def mutual_information(dist: TripartiteDistribution) -> float:
    """I(X;Y) = H(X) + H(Y) - H(XY), in bits."""
    pxy = dist.probabilities.sum(axis=2)
    return entropy_bits(pxy.sum(axis=1)) + entropy_bits(pxy.sum(axis=0)) - entropy_bits(pxy)


def conditional_mutual_information(dist: TripartiteDistribution) -> float:
    """I(X;Y|Z) = H(XZ) + H(YZ) - H(XYZ) - H(Z), in bits."""
    p = dist.probabilities
    pz = p.sum(axis=(0, 1))
    pxz = p.sum(axis=1)
    pyz = p.sum(axis=0)
    return entropy_bits(pxz) + entropy_bits(pyz) - entropy_bits(p) - entropy_bits(pz)


def apply_channel(dist: TripartiteDistribution, ch: EveChannel) -> TripartiteDistribution:
    """Pass Eve's symbol through `ch`: P(x,y,zbar) = sum_z P(x,y,z) ch[z,zbar]."""
    if ch.input_alphabet != dist.z_alphabet:
        raise AlphabetMismatchError("channel input alphabet differs from the distribution's Z alphabet")
    p = dist.probabilities @ ch.matrix
    return TripartiteDistribution(dist.x_alphabet, dist.y_alphabet, ch.output_alphabet, p)


_PARTY_AXES = {"x": 0, "y": 1, "z": 2}


def marginal(dist: TripartiteDistribution, parties) -> dict:
    """Marginal over a subset of parties; keys are label tuples in (x,y,z) order.

    `parties` is an iterable drawn from {"x","y","z"} (case-insensitive).
    """
    keep = sorted({str(s).lower() for s in parties}, key=lambda s: _PARTY_AXES.get(s, 99))
    if not keep:
        raise InvalidArgumentError("empty party subset")
    if any(s not in _PARTY_AXES for s in keep):
        raise InvalidArgumentError(f"unknown parties in {parties!r}")
    drop = tuple(ax for name, ax in _PARTY_AXES.items() if name not in keep)
    table = dist.probabilities.sum(axis=drop) if drop else dist.probabilities
    alphabets = [getattr(dist, f"{name}_alphabet") for name in keep]
    out = {}
    for idx in np.ndindex(table.shape):
        out[tuple(alpha[i] for alpha, i in zip(alphabets, idx))] = float(table[idx])
    return out


def _fmt(v: float) -> float:
    """Round a float to 12 significant digits (stable byte-level output)."""
    return float(f"{v:.12g}")


def distribution_to_document(dist: TripartiteDistribution) -> dict:
    """Serializable document; zero-probability triples are omitted."""
    return {
        "x_alphabet": list(dist.x_alphabet),
        "y_alphabet": list(dist.y_alphabet),
        "z_alphabet": list(dist.z_alphabet),
        "probabilities": [
            {"x": x, "y": y, "z": z, "p": _fmt(p)} for x, y, z, p in dist.support()
        ],
    }


def distribution_from_document(doc: dict) -> TripartiteDistribution:
    """Load a distribution document; renormalizes only tiny (<1e-9) deficits."""
    try:
        xs = _check_alphabet("X", doc["x_alphabet"])
        ys = _check_alphabet("Y", doc["y_alphabet"])
        zs = _check_alphabet("Z", doc["z_alphabet"])
        records = doc["probabilities"]
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"missing or malformed field: {exc}") from exc
    table = np.zeros((len(xs), len(ys), len(zs)))
    seen = set()
    for rec in records:
        try:
            x, y, z, p = rec["x"], rec["y"], rec["z"], float(rec["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed probability record {rec!r}") from exc
        if p < 0:
            raise DocumentError(f"negative probability for ({x}, {y}, {z})")
        try:
            idx = (xs.index(x), ys.index(y), zs.index(z))
        except ValueError:
            raise DocumentError(f"symbol outside declared alphabets in ({x}, {y}, {z})")
        if idx in seen:
            raise DocumentError(f"duplicate triple ({x}, {y}, {z})")
        seen.add(idx)
        table[idx] = p
    total = table.sum()
    if abs(total - 1.0) > LOAD_TOL:
        raise DocumentError(f"probabilities sum to {total!r}; expected 1 within {LOAD_TOL}")
    return TripartiteDistribution(xs, ys, zs, table / total)


def channel_to_document(ch: EveChannel) -> dict:
    return {
        "input_alphabet": list(ch.input_alphabet),
        "output_alphabet": list(ch.output_alphabet),
        "matrix": [[_fmt(v) for v in row] for row in ch.matrix],
    }


def channel_from_document(doc: dict) -> EveChannel:
    try:
        return EveChannel(
            tuple(doc["input_alphabet"]), tuple(doc["output_alphabet"]),
            np.array(doc["matrix"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed channel document: {exc}") from exc


def save_document(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_document(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
