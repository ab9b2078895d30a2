"""Intrinsic-information estimation over Eve's post-processing channels.

The minimum of I(X;Y|Zbar) over row-stochastic maps Z -> Zbar is estimated
by multi-start local search; every reported value is therefore an upper
bound on the true minimum. For the Werner family the conjectured optimal
channel and its closed-form value are available directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .errors import DomainError, InvalidArgumentError
from .paper_dists import WERNER_EVE
from .probdist import (
    EveChannel,
    TripartiteDistribution,
    apply_channel,
    conditional_mutual_information,
)
from .rngutil import substream, worker_count

OBJECTIVE_TOL = 1e-10


@dataclass(frozen=True)
class IntrinsicResult:
    """Best upper bound found, the channel achieving it, and search metadata."""

    value: float
    best_channel: EveChannel
    starts: int
    converged: bool


def intrinsic_upper_bound(dist: TripartiteDistribution, ch: EveChannel) -> float:
    """I(X;Y|Zbar) for a fixed channel: an upper bound on the intrinsic information."""
    return conditional_mutual_information(apply_channel(dist, ch))


def conjectured_werner_channel() -> EveChannel:
    """Channel conjectured optimal for the Werner tables.

    Each diagonal symbol z_ii is spread uniformly over the four
    off-diagonal symbols whose index pair contains i (z_ij and z_ji,
    j != i); off-diagonal symbols pass through unchanged. At p = 1/2
    this yields exactly zero conditional mutual information.
    """
    idx = {z: k for k, z in enumerate(WERNER_EVE)}
    m = np.zeros((9, 9))
    for i in range(3):
        targets = [f"z_{i}{j}" for j in range(3) if j != i]
        targets += [f"z_{j}{i}" for j in range(3) if j != i]
        for t in targets:
            m[idx[f"z_{i}{i}"], idx[t]] = 0.25
    for i in range(3):
        for j in range(3):
            if i != j:
                m[idx[f"z_{i}{j}"], idx[f"z_{i}{j}"]] = 1.0
    return EveChannel(WERNER_EVE, WERNER_EVE, m)


def analytic_werner_intrinsic(p: float) -> float:
    """Closed-form conjectured intrinsic information of the Werner table, in bits.

    With tau = 1 + p and x = sqrt(2 p (1 - p)); equals the conditional
    mutual information left by `conjectured_werner_channel`. Undefined at
    p = 1/3 where tau = 2x (the Eve symbols become orthogonal there and
    the conjectured channel is not optimal anyway).
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p} outside [0, 1]")
    tau = 1.0 + p
    x = math.sqrt(2.0 * p * (1.0 - p))
    if tau - 2.0 * x <= 0.0 or 1.0 - x * x <= 0.0:
        raise DomainError(f"expression undefined at p={p} (tau - 2x = {tau - 2 * x})")
    value = -math.log2(1.0 - x * x)
    if x > 0.0:
        ratio = (1.0 + x) / (1.0 - x) * math.sqrt((tau - 2.0 * x) / (tau + 2.0 * x))
        value -= x * math.log2(ratio)
    value += tau / 4.0 * math.log2(tau * tau - 4.0 * x * x)
    if tau < 2.0:  # the (1 - tau/2) log(2 - tau) term vanishes at p = 1
        value += (1.0 - tau / 2.0) * math.log2(2.0 - tau)
    # the expression is a conditional mutual information, hence >= 0;
    # clip the rounding residue at the exact zero p = 1/2
    return max(value, 0.0)


def _cmi_bits(joint: np.ndarray) -> float:
    """I(X;Y|Z) of a dense nonnegative (nx, ny, nz) array summing to 1."""

    def ent(a):
        a = a[a > 0]
        return -(a * np.log2(a)).sum()

    return ent(joint.sum(axis=1)) + ent(joint.sum(axis=0)) - ent(joint) - ent(joint.sum(axis=(0, 1)))


def _softmax_rows(theta: np.ndarray) -> np.ndarray:
    shifted = theta - theta.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _channel_to_theta(matrix: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    return np.log(np.maximum(matrix, floor))


def _refine(p3: np.ndarray, theta0: np.ndarray, maxiter: int, tol: float):
    """Powell descent in softmax coordinates; returns (value, channel, success)."""
    nz = theta0.shape[0]

    def objective(flat):
        m = _softmax_rows(flat.reshape(nz, nz))
        return _cmi_bits(p3 @ m)

    res = _scipy_minimize(
        objective,
        theta0.ravel(),
        method="Powell",
        options={"maxiter": maxiter, "ftol": tol, "xtol": 1e-8},
    )
    matrix = _softmax_rows(res.x.reshape(nz, nz))
    return float(res.fun), matrix, bool(res.success)


def minimize_intrinsic(
    dist: TripartiteDistribution,
    starts: int = 64,
    seed: int = 0,
    maxiter: int = 6,
    tol: float = OBJECTIVE_TOL,
) -> IntrinsicResult:
    """Multi-start minimization of I(X;Y|Zbar) over Eve's channels.

    Restart 0 starts from the identity channel and, when the Eve alphabet
    is the Werner one, restart 1 from the conjectured channel; remaining
    restarts use random Dirichlet rows drawn from per-restart sub-streams
    of `seed`. Restarts are independent and may run on a thread pool
    (KEYRATE_THREADS); the reduction is a deterministic min by
    (value, restart index). The result is an upper bound: local minima
    can never be excluded.
    """
    if starts < 1:
        raise InvalidArgumentError("starts must be >= 1")
    nz = len(dist.z_alphabet)
    p3 = np.asarray(dist.probabilities)

    seeds = [_channel_to_theta(np.eye(nz))]
    if dist.z_alphabet == WERNER_EVE:
        seeds.append(_channel_to_theta(conjectured_werner_channel().matrix))

    def start_theta(k: int) -> np.ndarray:
        if k < len(seeds):
            return seeds[k]
        rng = substream(seed, "optimizer", k)
        return _channel_to_theta(rng.dirichlet(np.ones(nz), size=nz))

    def run(k: int):
        value, matrix, ok = _refine(p3, start_theta(k), maxiter, tol)
        return value, k, matrix, ok

    workers = min(worker_count(), starts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(starts)))
    else:
        results = [run(k) for k in range(starts)]

    value, _, matrix, _ = min(results, key=lambda r: (r[0], r[1]))
    converged = all(r[3] for r in results)
    best = EveChannel(dist.z_alphabet, dist.z_alphabet, matrix)
    # final exact evaluation through the public path (softmax rows already sum to 1)
    value = intrinsic_upper_bound(dist, best)
    return IntrinsicResult(value=value, best_channel=best, starts=starts, converged=converged)
