"""Quantum oracle: states, entanglement witnesses, and Eve's measurement.

Everything here re-derives the classical tables from the underlying
density matrices: purify, measure the honest parties in the computational
basis, and let Eve apply the square-root measurement to the conditional
ensemble. Dense complex linear algebra throughout; eigenvalues above
-1e-10 are treated as non-negative.

Subsystem ordering for the four-party symmetric state is A1, A2, B1, B2,
so the Alice/Bob bipartition is the contiguous (9, 9) split.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateProjectionError,
    InvalidArgumentError,
    UnsupportedError,
)
from .paper_dists import PAIRS, SYMMETRIC_EVE, TRITS, WERNER_EVE, universal_activator_q
from .probdist import TripartiteDistribution

EIG_FLOOR = -1e-10
HERM_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace complex matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidArgumentError("density matrix must be square")
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise InvalidArgumentError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise InvalidArgumentError("matrix trace is not 1")
        if np.linalg.eigvalsh(m).min() < EIG_FLOOR:
            raise InvalidArgumentError("matrix has a negative eigenvalue")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).ravel()
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise InvalidArgumentError("state vector is not normalized")
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True)
class Ensemble:
    """Labeled pure states with prior probabilities."""

    labels: tuple
    probabilities: np.ndarray
    states: tuple  # of PureState

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > HERM_TOL:
            raise InvalidArgumentError("ensemble probabilities must be a distribution")
        if not (len(self.labels) == len(p) == len(self.states)):
            raise InvalidArgumentError("labels, probabilities, states must align")
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "states", tuple(self.states))


@dataclass(frozen=True)
class POVM:
    """Labeled positive elements summing to the identity."""

    labels: tuple
    elements: tuple  # of ndarray

    def __post_init__(self):
        if len(self.labels) != len(self.elements):
            raise InvalidArgumentError("labels and elements must align")
        dim = self.elements[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for el in self.elements:
            if np.linalg.eigvalsh(el).min() < EIG_FLOOR:
                raise InvalidArgumentError("POVM element is not PSD")
            total += el
        if np.abs(total - np.eye(dim)).max() > 1e-10:
            raise InvalidArgumentError("POVM elements do not sum to the identity")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "elements", tuple(self.elements))


def flip_operator(d: int) -> np.ndarray:
    """Swap of two d-level factors: flip |i>|j> -> |j>|i>."""
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[d * j + i, d * i + j] = 1.0
    return f


def max_entangled_ket(d: int) -> np.ndarray:
    v = np.zeros(d * d)
    for i in range(d):
        v[d * i + i] = 1.0
    return v / math.sqrt(d)


def werner_state(p: float, d: int = 3) -> DensityMatrix:
    """Mixture of the normalized antisymmetric and symmetric projectors."""
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"p={p} outside [0, 1]")
    if d < 2:
        raise InvalidArgumentError("d must be at least 2")
    eye = np.eye(d * d)
    flip = flip_operator(d)
    asym = (eye - flip) / 2.0
    sym = (eye + flip) / 2.0
    rho = p * asym / (d * (d - 1) / 2) + (1.0 - p) * sym / (d * (d + 1) / 2)
    return DensityMatrix(rho)


def permute_subsystems(mat: np.ndarray, dims, perm) -> np.ndarray:
    """Reorder tensor factors of an operator: factor k moves to slot perm.index(k)."""
    n = len(dims)
    tensor = mat.reshape(tuple(dims) * 2)
    axes = tuple(perm) + tuple(n + k for k in perm)
    out_dim = int(np.prod(dims))
    return np.ascontiguousarray(tensor.transpose(axes)).reshape(out_dim, out_dim)


def symmetric_state(q: float, d: int = 3) -> DensityMatrix:
    """Two-source symmetric state on A1 A2 B1 B2.

    Factor 1 (A1 B1) holds the antisymmetric/symmetric projectors, factor
    2 (A2 B2) the maximally entangled projector or its complement.
    """
    if not 0.0 <= q <= 1.0:
        raise InvalidArgumentError(f"q={q} outside [0, 1]")
    if d < 2:
        raise InvalidArgumentError("d must be at least 2")
    eye = np.eye(d * d)
    flip = flip_operator(d)
    asym = (eye - flip) / 2.0
    sym = (eye + flip) / 2.0
    psi = max_entangled_ket(d)
    proj = np.outer(psi, psi)
    comp = eye - proj
    # built on (A1 B1) x (A2 B2), then reordered to A1 A2 B1 B2
    rho = q * np.kron(asym / (d * (d - 1) / 2), proj) + (1.0 - q) * np.kron(
        sym / (d * (d + 1) / 2), comp / (d * d - 1)
    )
    rho = permute_subsystems(rho, (d, d, d, d), (0, 2, 1, 3))
    return DensityMatrix(rho)


def partial_transpose(mat: np.ndarray, dims: tuple) -> np.ndarray:
    """Transpose the second factor of a bipartite operator."""
    da, db = dims
    if da * db != mat.shape[0]:
        raise InvalidArgumentError(f"dims {dims} do not factor dimension {mat.shape[0]}")
    t = mat.reshape(da, db, da, db).transpose(0, 3, 2, 1)
    return t.reshape(da * db, da * db)


def ppt_check(rho: DensityMatrix, dims: tuple) -> tuple:
    """(minimum eigenvalue of the partial transpose, PPT verdict)."""
    min_eig = float(np.linalg.eigvalsh(partial_transpose(rho.entries, dims)).min())
    return min_eig, min_eig >= EIG_FLOOR


def one_distillable_check(
    rho: DensityMatrix, dims: tuple, proj_a: np.ndarray, proj_b: np.ndarray
) -> bool:
    """True when local rank-2 projections leave an NPT two-qubit state.

    `proj_a` / `proj_b` are 2 x dA / 2 x dB matrices with orthonormal rows.
    """
    da, db = dims
    for proj, dd in ((proj_a, da), (proj_b, db)):
        if proj.shape != (2, dd):
            raise InvalidArgumentError(f"projector shape {proj.shape}, expected (2, {dd})")
        if np.abs(proj @ proj.conj().T - np.eye(2)).max() > 1e-10:
            raise InvalidArgumentError("projector rows are not orthonormal")
    k = np.kron(proj_a, proj_b)
    reduced = k @ rho.entries @ k.conj().T
    mass = np.trace(reduced).real
    if mass <= 1e-14:
        raise DegenerateProjectionError("projection has zero mass")
    min_eig, is_ppt = ppt_check(DensityMatrix(reduced / mass), (2, 2))
    return not is_ppt


def basis_pair_projector(indices, dim: int) -> np.ndarray:
    """Rank-2 isometry onto the span of two computational basis kets."""
    i, j = indices
    proj = np.zeros((2, dim))
    proj[0, i] = 1.0
    proj[1, j] = 1.0
    return proj


def werner_one_distillable(p: float, d: int = 3) -> bool:
    """Scan all basis-pair projectors on both sides of a Werner state."""
    rho = werner_state(p, d)
    pairs = list(itertools.combinations(range(d), 2))
    for pa in pairs:
        for pb in pairs:
            if one_distillable_check(
                rho, (d, d), basis_pair_projector(pa, d), basis_pair_projector(pb, d)
            ):
                return True
    return False


def symmetric_paper_projectors(d: int = 3) -> tuple:
    """The published two-qubit subspaces: span{|00>,|01>} and span{|10>,|11>}."""
    pa = np.zeros((2, d * d))
    pa[0, 0] = 1.0  # |00>
    pa[1, 1] = 1.0  # |01>
    pb = np.zeros((2, d * d))
    pb[0, d] = 1.0  # |10>
    pb[1, d + 1] = 1.0  # |11>
    return pa, pb


def symmetric_one_distillable(q: float, d: int = 3) -> bool:
    pa, pb = symmetric_paper_projectors(d)
    return one_distillable_check(symmetric_state(q, d), (d * d, d * d), pa, pb)


def purify(rho: DensityMatrix) -> PureState:
    """Canonical purification sum_i sqrt(lambda_i) |v_i>|i>_E."""
    vals, vecs = np.linalg.eigh(rho.entries)
    vals = np.clip(vals, 0.0, None)
    dim = rho.dim
    psi = np.zeros(dim * dim, dtype=complex)
    for i in range(dim):
        if vals[i] > 0:
            psi += math.sqrt(vals[i]) * np.kron(vecs[:, i], _basis_ket(dim, i))
    return PureState(psi)


def _basis_ket(dim: int, i: int) -> np.ndarray:
    v = np.zeros(dim)
    v[i] = 1.0
    return v


def trace_out_environment(psi: PureState, system_dim: int) -> np.ndarray:
    """Reduced state on the first factor of a system x environment vector."""
    env_dim = psi.dim // system_dim
    m = psi.amplitudes.reshape(system_dim, env_dim)
    return m @ m.conj().T


def eve_ensemble(rho: DensityMatrix, dims: tuple, prob_floor: float = 1e-14) -> Ensemble:
    """Eve's conditional pure states after the honest computational measurement.

    Labels are the honest outcome pairs (x, y); the state for (x, y) is
    <xy|psi> normalized, with probability <xy|rho|xy>.
    """
    da, db = dims
    if da * db != rho.dim:
        raise InvalidArgumentError(f"dims {dims} do not factor dimension {rho.dim}")
    psi = purify(rho).amplitudes.reshape(rho.dim, rho.dim)
    labels, probs, states = [], [], []
    for x in range(da):
        for y in range(db):
            e = psi[db * x + y, :]
            prob = float(np.vdot(e, e).real)
            if prob > prob_floor:
                labels.append((x, y))
                probs.append(prob)
                states.append(PureState(e / math.sqrt(prob)))
    probs = np.array(probs)
    return Ensemble(tuple(labels), probs / probs.sum(), tuple(states))


ABSTAIN = "abstain"


def square_root_measurement(ens: Ensemble) -> POVM:
    """SRM of an ensemble, with an abstain element on the orthocomplement.

    Elements are rho^{-1/2} p_i |e_i><e_i| rho^{-1/2} with the pseudo-
    inverse square root taken on the support of rho = sum_i p_i |e_i><e_i|.
    """
    dim = ens.states[0].dim
    vectors = np.stack([s.amplitudes for s in ens.states], axis=1)
    weighted = vectors * np.sqrt(ens.probabilities)[None, :]
    rho = weighted @ weighted.conj().T
    vals, vecs = np.linalg.eigh(rho)
    support = vals > max(vals.max(), 1.0) * 1e-13
    inv_sqrt = (vecs[:, support] / np.sqrt(vals[support])[None, :]) @ vecs[:, support].conj().T
    elements = []
    for k in range(weighted.shape[1]):
        w = inv_sqrt @ weighted[:, k]
        elements.append(np.outer(w, w.conj()))
    completion = np.eye(dim, dtype=complex) - sum(elements)
    labels = list(ens.labels) + [ABSTAIN]
    return POVM(tuple(labels), tuple(elements + [completion]))


def srm_outcome_probabilities(ens: Ensemble) -> np.ndarray:
    """P(outcome k | item j) for the SRM, via the Gram square root."""
    vectors = np.stack([s.amplitudes for s in ens.states], axis=1)
    weighted = vectors * np.sqrt(ens.probabilities)[None, :]
    gram = weighted.conj().T @ weighted
    vals, vecs = np.linalg.eigh(gram)
    vals = np.clip(vals, 0.0, None)
    sqrt_gram = (vecs * np.sqrt(vals)[None, :]) @ vecs.conj().T
    cond = np.abs(sqrt_gram) ** 2 / np.diag(gram).real[None, :]
    return cond  # cond[k, j] = P(outcome k | item j)


def _werner_eve_label(item) -> str:
    x, y = item
    return f"z_{x}{y}"


def _symmetric_eve_label(item) -> str:
    (x1, x2), (y1, y2) = divmod(item[0], 3), divmod(item[1], 3)
    return f"zt_{x1}{y1}{x2}{y2}"


def derive_distribution(rho: DensityMatrix) -> TripartiteDistribution:
    """Re-derive the classical table of a Werner (dim 9) or symmetric (dim 81) state.

    Honest parties measure in the computational basis; Eve applies the
    square-root measurement to her conditional ensemble. Outcome labels
    follow the ensemble item each element discriminates.
    """
    if rho.dim == 9:
        dims, xa, ya, za, mk_label = (3, 3), TRITS, TRITS, WERNER_EVE, _werner_eve_label
    elif rho.dim == 81:
        dims, xa, ya, za, mk_label = (9, 9), PAIRS, PAIRS, SYMMETRIC_EVE, _symmetric_eve_label
    else:
        raise UnsupportedError(f"no classical table for dimension {rho.dim}")
    ens = eve_ensemble(rho, dims)
    cond = srm_outcome_probabilities(ens)
    z_index = {z: k for k, z in enumerate(za)}
    table = np.zeros((len(xa), len(ya), len(za)))
    for j, (label_j, prob_j) in enumerate(zip(ens.labels, ens.probabilities)):
        for k, label_k in enumerate(ens.labels):
            if cond[k, j] <= 0:
                continue
            table[label_j[0], label_j[1], z_index[mk_label(label_k)]] += prob_j * cond[k, j]
    return TripartiteDistribution(xa, ya, za, table / table.sum())


def activation_projection(p: float, q: float, d: int = 3) -> tuple:
    """(unnormalized overlap, projection mass) of the activation protocol.

    Projects rho_W(p) (on A0 B0) combined with sigma(q) (on A1 A2 B1 B2)
    onto maximally entangled states across (A0, A1) and (B0, B1). Both
    returned numbers are affine in p; their ratio is the isotropic-state
    overlap.
    """
    rho_w = werner_state(p, d).entries
    sigma = symmetric_state(q, d).entries
    # kron ordering (A0 B0) x (A1 A2 B1 B2) -> reorder to A0 A1 A2 B0 B1 B2
    big = np.kron(rho_w, sigma)
    big = permute_subsystems(big, (d,) * 6, (0, 2, 3, 1, 4, 5))
    psi = max_entangled_ket(d).reshape(d, d)
    t = big.reshape((d,) * 12)
    # contract ket and bra sides with psi+ on (A0,A1) and (B0,B1)
    reduced = np.einsum(
        "abcdefghijkl,ab,de,gh,jk->cfil", t, psi, psi, psi.conj(), psi.conj()
    ).reshape(d * d, d * d)
    mass = float(np.trace(reduced).real)
    psi_flat = max_entangled_ket(d)
    raw_overlap = float(np.real(psi_flat @ reduced @ psi_flat))
    return raw_overlap, mass


def quantum_activation(p: float, q: float | None = None, d: int = 3) -> tuple:
    """Overlap with the maximally entangled state after the activation projection.

    Returns (overlap F of the renormalized isotropic state on A2 B2,
    F > 1/d). The strict comparison carries a 1e-12 guard so the
    separable-boundary Werner state does not flip on rounding noise.
    """
    if q is None:
        q = universal_activator_q(d)
    raw_overlap, mass = activation_projection(p, q, d)
    if mass <= 1e-14:
        raise DegenerateProjectionError("activation projection has zero mass")
    overlap = raw_overlap / mass
    return overlap, overlap > 1.0 / d + 1e-12
