"""Capacity region of the degraded Gaussian vector broadcast channel:
exact rate tuples for a covariance split, weighted-sum-rate boundary
tracing by projected gradient ascent, brute-force grid oracles at small
dimension, and the scalar closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matrices as mat
from .errors import DimensionMismatchError, NumericalError
from .model import BroadcastChannel

__all__ = [
    "CovarianceSplit",
    "OptimizerConfig",
    "rate_tuple",
    "weighted_sum_rate",
    "trace_boundary",
    "grid_oracle",
    "scalar_region",
    "dominates",
]


@dataclass(frozen=True, eq=False)
class CovarianceSplit:
    """PSD matrices K_1 ... K_K summing to the input cap."""

    parts: tuple[np.ndarray, ...]

    def __post_init__(self):
        parts = tuple(mat.symmetrize(K) for K in self.parts)
        object.__setattr__(self, "parts", parts)

    def validate(self, input_cap, tol: float | None = None) -> None:
        cap = mat.symmetrize(input_cap)
        total = np.zeros_like(cap)
        for K in self.parts:
            if K.shape != cap.shape:
                raise DimensionMismatchError("split part dimension mismatch")
            if not mat.is_psd(K, tol):
                raise ValueError("split part is not PSD")
            total = total + K
        denom = 1.0 + float(np.linalg.norm(cap))
        if float(np.linalg.norm(total - cap)) > 1e-9 * denom:
            raise ValueError("split parts do not sum to the input cap")


@dataclass(frozen=True)
class OptimizerConfig:
    grad_tol: float = 1e-8
    max_iters: int = 5000
    fd_step: float = 1e-6
    restarts: int = 8
    seed: int = 0
    armijo: float = 1e-4


def _clamped_rate(r: float) -> float:
    if r < -1e-9:
        raise NumericalError(f"negative rate {r} beyond round-off")
    return max(r, 0.0)


def rate_tuple(ch: BroadcastChannel, split: CovarianceSplit) -> tuple[float, ...]:
    """Superposition-coding rates for one split.

    R_k = 0.5 [ln|sum_{i<=k} K_i + Sigma_k| - ln|sum_{i<k} K_i + Sigma_k|],
    clamped at -1e-12 to absorb round-off.
    """
    if len(split.parts) != ch.num_users:
        raise DimensionMismatchError("split has wrong number of parts")
    split.validate(ch.input_cap)
    rates = []
    cum = np.zeros((ch.dim, ch.dim))
    for k in range(ch.num_users):
        below = cum
        cum = cum + split.parts[k]
        r = 0.5 * (mat.logdet(cum + ch.noise_covs[k]) - mat.logdet(below + ch.noise_covs[k]))
        rates.append(_clamped_rate(r))
    return tuple(rates)


def weighted_sum_rate(ch: BroadcastChannel, split: CovarianceSplit, weights) -> float:
    w = np.asarray(weights, dtype=float)
    if w.shape != (ch.num_users,):
        raise DimensionMismatchError("one weight per user required")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    return float(w @ np.asarray(rate_tuple(ch, split)))


# --- boundary tracing --------------------------------------------------------

def _givens_rotation(n: int, angles: np.ndarray) -> np.ndarray:
    """Orthogonal matrix from n(n-1)/2 Givens angles."""
    V = np.eye(n)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            c, s = math.cos(angles[k]), math.sin(angles[k])
            G = np.eye(n)
            G[i, i] = c
            G[j, j] = c
            G[i, j] = -s
            G[j, i] = s
            V = V @ G
            k += 1
    return V


def _params_per_stage(n: int) -> int:
    return n + n * (n - 1) // 2


def _split_from_params(ch: BroadcastChannel, params: np.ndarray) -> CovarianceSplit:
    """Feasible split from box-constrained parameters.

    Each of the first K-1 parts takes a fraction of the current residual:
    K_i = R^{1/2} V diag(q) V^T R^{1/2} with q in [0,1]^n, which keeps every
    part PSD and below the residual by construction. The last part is the
    leftover.
    """
    n = ch.dim
    per = _params_per_stage(n)
    residual = ch.input_cap.copy()
    parts = []
    for i in range(ch.num_users - 1):
        p = params[i * per : (i + 1) * per]
        q = np.clip(p[:n], 0.0, 1.0)
        V = _givens_rotation(n, p[n:])
        root = mat.sqrt_psd(residual)
        Q = mat.symmetrize((V * q) @ V.T)
        K = mat.symmetrize(root @ Q @ root)
        parts.append(K)
        residual = mat.symmetrize(residual - K)
        # round-off can leave a tiny negative eigenvalue; pull it back
        w, U = np.linalg.eigh(residual)
        residual = mat.symmetrize((U * np.clip(w, 0.0, None)) @ U.T)
    parts.append(residual)
    return CovarianceSplit(parts=tuple(parts))


def _project(params: np.ndarray, n: int, stages: int) -> np.ndarray:
    out = params.copy()
    per = _params_per_stage(n)
    for i in range(stages):
        out[i * per : i * per + n] = np.clip(out[i * per : i * per + n], 0.0, 1.0)
    return out


def _ascend(objective, x0: np.ndarray, n: int, stages: int, opt: OptimizerConfig):
    """Projected gradient ascent with Armijo backtracking and central
    finite-difference gradients."""
    x = _project(x0, n, stages)
    f = objective(x)
    if not np.isfinite(f):
        raise NumericalError("objective is non-finite at the starting point")
    stalled = 0
    for _ in range(opt.max_iters):
        g = np.zeros_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = opt.fd_step
            g[i] = (objective(_project(x + e, n, stages)) - objective(_project(x - e, n, stages))) / (2 * opt.fd_step)
        if float(np.linalg.norm(_project(x + g, n, stages) - x)) < opt.grad_tol:
            break
        step = 1.0
        improved = False
        while step > 1e-14:
            cand = _project(x + step * g, n, stages)
            fc = objective(cand)
            if not np.isfinite(fc):
                raise NumericalError("objective diverged during line search")
            if fc >= f + opt.armijo * float(g @ (cand - x)):
                gain = fc - f
                x, f = cand, fc
                improved = True
                # the objective is smooth, so once per-step gains fall to
                # round-off the iterate has converged to working precision
                stalled = stalled + 1 if gain <= 1e-12 * (1.0 + abs(f)) else 0
                break
            step *= 0.5
        if not improved or stalled >= 3:
            break
    return x, f


def trace_boundary(
    ch: BroadcastChannel,
    weight_list,
    opt: OptimizerConfig | None = None,
) -> list[tuple[CovarianceSplit, tuple[float, ...]]]:
    """Locally maximal split for each weight vector, with multi-start.

    Restart initializations are drawn from sub-seeds derived from
    (opt.seed, weight index, restart index), so parallel and sequential
    sweeps are identical.
    """
    if opt is None:
        opt = OptimizerConfig()
    n = ch.dim
    stages = ch.num_users - 1
    per = _params_per_stage(n)
    results = []
    for widx, weights in enumerate(weight_list):
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weight vectors must be nonnegative and not all zero")

        def objective(params):
            return weighted_sum_rate(ch, _split_from_params(ch, params), w)

        best_x, best_f = None, -np.inf
        for r in range(opt.restarts):
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence([opt.seed, widx, r]))
            )
            x0 = np.empty(stages * per)
            for i in range(stages):
                x0[i * per : i * per + n] = rng.random(n)
                x0[i * per + n : (i + 1) * per] = rng.random(per - n) * math.pi
            x, f = _ascend(objective, x0, n, stages, opt)
            if f > best_f:
                best_x, best_f = x, f
        split = _split_from_params(ch, best_x)
        results.append((split, rate_tuple(ch, split)))
    return results


# --- brute-force oracle -------------------------------------------------------

def grid_oracle(
    ch: BroadcastChannel, resolution: int
) -> list[tuple[CovarianceSplit, tuple[float, ...]]]:
    """Exhaustive grid of splits for K=2 at n <= 2.

    K_1 = S^{1/2} Q S^{1/2} with 0 <= Q <= I swept over eigenvalue grids
    (and a rotation-angle grid at n=2); every boundary point has a grid
    point within grid spacing.
    """
    if ch.num_users != 2 or ch.dim > 2:
        raise ValueError("grid_oracle supports K=2 and n<=2 only")
    root = mat.sqrt_psd(ch.input_cap)
    qs = np.linspace(0.0, 1.0, resolution)
    S = ch.input_cap
    sig1, sig2 = ch.noise_covs

    if ch.dim == 1:
        K1s = (qs * float(S[0, 0])).reshape(-1, 1, 1)
    else:
        thetas = np.linspace(0.0, math.pi, resolution)
        q1, q2, th = [a.ravel() for a in np.meshgrid(qs, qs, thetas, indexing="ij")]
        c, s = np.cos(th), np.sin(th)
        V = np.stack(
            [np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2
        )  # (M, 2, 2)
        Q = np.einsum("mik,mk,mjk->mij", V, np.stack([q1, q2], axis=-1), V)
        K1s = np.einsum("ik,mkl,lj->mij", root, Q, root)
    K1s = (K1s + np.transpose(K1s, (0, 2, 1))) / 2.0

    def _logdet_batch(A):
        if ch.dim == 1:
            return np.log(A[:, 0, 0])
        return np.log(A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0])

    r1 = 0.5 * (_logdet_batch(K1s + sig1) - mat.logdet(sig1))
    r2 = 0.5 * (mat.logdet(S + sig2) - _logdet_batch(K1s + sig2))
    r1 = np.clip(r1, 0.0, None)
    r2 = np.clip(r2, 0.0, None)
    out = []
    for K1, a, b in zip(K1s, r1, r2):
        K2 = mat.symmetrize(S - K1)
        w, U = np.linalg.eigh(K2)
        K2 = mat.symmetrize((U * np.clip(w, 0.0, None)) @ U.T)
        out.append((CovarianceSplit(parts=(K1, K2)), (float(a), float(b))))
    return out


# --- scalar closed form --------------------------------------------------------

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def scalar_region(S: float, sigmas, num_points: int) -> list[tuple[float, ...]]:
    """Rate tuples of the scalar degraded broadcast channel.

    ``sigmas`` are the noise variances in nondecreasing order. Power splits
    sweep the simplex {a_i >= 0, sum a_i = S}: a uniform grid on [0, S] for
    two users, an integer-composition grid for more.
    """
    sig = [float(s) for s in sigmas]
    if any(s <= 0 for s in sig) or any(b < a for a, b in zip(sig, sig[1:])):
        raise ValueError("sigmas must be positive and nondecreasing")
    if S <= 0 or num_points < 2:
        raise ValueError("S must be positive and num_points >= 2")
    K = len(sig)
    if K == 2:
        allocs = [(a, S - a) for a in np.linspace(0.0, S, num_points)]
    else:
        allocs = [
            tuple(S * c / (num_points - 1) for c in comp)
            for comp in _compositions(num_points - 1, K)
        ]
    tuples = []
    for a in allocs:
        rates = []
        below = 0.0
        for k in range(K):
            top = below + a[k]
            rates.append(0.5 * math.log((top + sig[k]) / (below + sig[k])))
            below = top
        tuples.append(tuple(rates))
    return tuples


def dominates(region_points, candidate, slack: float = 0.0) -> bool:
    """True iff some region point dominates the candidate within slack."""
    pts = [np.asarray(p, dtype=float) for p in region_points]
    if not pts:
        raise ValueError("region_points must be nonempty")
    c = np.asarray(candidate, dtype=float)
    for p in pts:
        if p.shape != c.shape:
            raise DimensionMismatchError("rate tuple length mismatch")
        if np.all(p + slack >= c):
            return True
    return False
