"""Data model for the degraded broadcast channel and finite Gaussian-mixture
input distributions, plus the Markov hierarchies of auxiliaries used by the
multi-user converse machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matrices as mat
from .errors import DimensionMismatchError, InputFormatError, NotPsdError
from .report import Residual, VerificationReport

LOG_2PI_E = math.log(2.0 * math.pi * math.e)

__all__ = [
    "BroadcastChannel",
    "MixtureSource",
    "MarkovHierarchy",
    "CoarseSource",
    "validate_channel",
    "gaussian_entropy",
    "aggregate_covariance",
    "coarsen",
    "channel_from_dict",
    "source_from_dict",
    "hierarchy_from_dict",
]


@dataclass(frozen=True, eq=False)
class BroadcastChannel:
    """Degraded Gaussian vector broadcast channel.

    ``noise_covs`` are the per-user noise covariances, ordered from the
    strongest receiver to the weakest; ``input_cap`` is the covariance cap
    on the channel input.
    """

    noise_covs: tuple[np.ndarray, ...]
    input_cap: np.ndarray

    def __post_init__(self):
        covs = tuple(mat.symmetrize(c) for c in self.noise_covs)
        cap = mat.symmetrize(self.input_cap)
        if len(covs) < 2:
            raise InputFormatError("a broadcast channel needs at least 2 users")
        n = cap.shape[0]
        for c in covs:
            if c.shape[0] != n:
                raise DimensionMismatchError(
                    "noise covariances and input cap must share one dimension"
                )
        object.__setattr__(self, "noise_covs", covs)
        object.__setattr__(self, "input_cap", cap)

    @property
    def dim(self) -> int:
        return self.input_cap.shape[0]

    @property
    def num_users(self) -> int:
        return len(self.noise_covs)


@dataclass(frozen=True, eq=False)
class MixtureSource:
    """Discrete auxiliary U with Gaussian conditionals X|U=u.

    weights: (m,) probability vector over the symbols of U.
    means: (m, n) component means.
    comp_covs: (m, n, n) positive definite component covariances.

    The unconditional law of X is a Gaussian mixture, which is non-Gaussian
    whenever the components differ; that is exactly the regime in which the
    converse machinery is exercised.
    """

    weights: np.ndarray
    means: np.ndarray
    comp_covs: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        C = np.asarray(self.comp_covs, dtype=float)
        if C.ndim == 2:
            C = C[None, :, :]
        m = w.shape[0]
        if mu.shape[0] != m or C.shape[0] != m:
            raise DimensionMismatchError(
                "weights, means and comp_covs must agree on the number of symbols"
            )
        n = mu.shape[1]
        if C.shape[1:] != (n, n):
            raise DimensionMismatchError("component covariances must be (m, n, n)")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise InputFormatError("weights must be nonnegative and sum to 1")
        C = np.stack([mat.symmetrize(c) for c in C])
        for k, c in enumerate(C):
            if mat.min_eig(c) <= 0.0:
                raise NotPsdError(f"component covariance {k} is not positive definite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "comp_covs", C)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def num_components(self) -> int:
        return self.weights.shape[0]

    def admissible_for(self, ch: BroadcastChannel, tol: float | None = None) -> bool:
        """True when Cov(X) <= input cap in the Loewner order."""
        return mat.loewner_leq(aggregate_covariance(self), ch.input_cap, tol)


@dataclass(frozen=True, eq=False)
class MarkovHierarchy:
    """Chain of auxiliaries U_K -> ... -> U_2 -> X for a K-user converse.

    ``base`` defines U_2 and the Gaussian conditionals X|U_2. ``tables``
    holds the downward transitions p(u_k | u_{k+1}) for k = 2 ... K-1, each
    a column-stochastic matrix of shape (|U_k|, |U_{k+1}|). ``top_weights``
    is the marginal of the coarsest auxiliary U_K; together with the tables
    it fixes the joint law, and it must reproduce ``base.weights`` when
    pushed down the chain.
    """

    base: MixtureSource
    tables: tuple[np.ndarray, ...] = field(default_factory=tuple)
    top_weights: np.ndarray | None = None

    def __post_init__(self):
        tables = tuple(np.asarray(T, dtype=float) for T in self.tables)
        if self.top_weights is None:
            if tables:
                raise InputFormatError("top_weights required when tables are present")
            top = self.base.weights.copy()
        else:
            top = np.atleast_1d(np.asarray(self.top_weights, dtype=float))
        if np.any(top < 0) or abs(float(top.sum()) - 1.0) > 1e-12:
            raise InputFormatError("top_weights must be a probability vector")
        # shape chain: tables[i] maps U_{k+1} -> U_k distributions, k = 2 + i
        size = top.shape[0]
        for T in reversed(tables):
            if T.ndim != 2 or T.shape[1] != size:
                raise DimensionMismatchError("transition table shapes do not chain")
            col_sums = T.sum(axis=0)
            if np.any(T < 0) or np.any(np.abs(col_sums - 1.0) > 1e-12):
                raise InputFormatError("table columns must be probability vectors")
            size = T.shape[0]
        if size != self.base.num_components:
            raise DimensionMismatchError(
                "chain does not terminate on the base alphabet"
            )
        induced = top.copy()
        for T in reversed(tables):
            induced = T @ induced
        if np.max(np.abs(induced - self.base.weights)) > 1e-10:
            raise InputFormatError(
                "chain marginal of U_2 does not match base weights"
            )
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "top_weights", top)

    @property
    def num_users(self) -> int:
        return len(self.tables) + 2

    @property
    def dim(self) -> int:
        return self.base.dim

    def marginal(self, level: int) -> np.ndarray:
        """Marginal distribution of U_level, 2 <= level <= K."""
        K = self.num_users
        if not 2 <= level <= K:
            raise ValueError(f"level must be in [2, {K}]")
        p = self.top_weights.copy()
        # tables[i] is p(u_{2+i} | u_{3+i}); walk down from U_K to U_level
        for i in range(len(self.tables) - 1, level - 3, -1):
            p = self.tables[i] @ p
        return p


@dataclass(frozen=True, eq=False)
class CoarseSource:
    """Mixture view of (U_k, X): a refined MixtureSource plus the map from
    refined symbols back to the symbols of U_k."""

    groups: np.ndarray  # group label of each refined symbol
    source: MixtureSource

    def group_mixtures(self) -> list[tuple[float, MixtureSource]]:
        """Per-symbol conditional mixtures: (p(u_k = g), law of X | U_k = g)."""
        out = []
        for g in range(int(self.groups.max()) + 1):
            idx = np.flatnonzero(self.groups == g)
            pg = float(self.source.weights[idx].sum())
            if pg <= 0.0:
                continue
            sub = MixtureSource(
                weights=self.source.weights[idx] / pg,
                means=self.source.means[idx],
                comp_covs=self.source.comp_covs[idx],
            )
            out.append((pg, sub))
        return out


def validate_channel(ch: BroadcastChannel, tol: float | None = None) -> VerificationReport:
    """Check the degradedness order of the noise covariances and the strict
    positivity of the first noise covariance and the input cap."""
    if tol is None:
        tol = max(mat.default_psd_tol(c) for c in ch.noise_covs)
    residuals = [
        Residual("min_eig(noise_cov_1)", mat.min_eig(ch.noise_covs[0]) , "ineq"),
        Residual("min_eig(input_cap)", mat.min_eig(ch.input_cap), "ineq"),
    ]
    for k in range(ch.num_users - 1):
        d = ch.noise_covs[k + 1] - ch.noise_covs[k]
        residuals.append(
            Residual(f"min_eig(noise_cov_{k + 2} - noise_cov_{k + 1})", mat.min_eig(d), "ineq")
        )
    return VerificationReport.from_residuals(
        "channel_validation", residuals, tol, notes="degradedness order and positivity"
    )


def gaussian_entropy(cov) -> float:
    """Differential entropy 0.5 ln((2 pi e)^n |cov|) in nats."""
    C = mat.symmetrize(cov)
    n = C.shape[0]
    return 0.5 * (n * LOG_2PI_E + mat.logdet(C))


def aggregate_covariance(src: MixtureSource) -> np.ndarray:
    """Cov(X) of the mixture: E[Cov(X|U)] + Cov(E[X|U])."""
    p = src.weights
    mu_bar = p @ src.means
    centered = src.means - mu_bar
    spread = np.einsum("u,ui,uj->ij", p, centered, centered)
    within = np.einsum("u,uij->ij", p, src.comp_covs)
    return mat.symmetrize(within + spread)


def coarsen(h: MarkovHierarchy, level: int) -> CoarseSource:
    """Mixture representation of (U_level, X).

    The refined alphabet is the support of the joint (U_level, U_2); the
    returned ``groups`` array maps each refined symbol to its U_level symbol
    so conditional quantities given U_level remain computable.
    """
    K = h.num_users
    if not 2 <= level <= K:
        raise ValueError(f"level must be in [2, {K}]")
    if level == 2:
        m = h.base.num_components
        return CoarseSource(groups=np.arange(m), source=h.base)
    # p(u_2 | u_level): compose tables from level-1 down to 2
    M = h.tables[0]
    for i in range(1, level - 2):
        M = M @ h.tables[i]
    p_level = h.marginal(level)
    joint = M * p_level[None, :]  # joint[u2, g] = p(u_2, u_level)
    m2, mg = joint.shape
    groups, weights, means, covs = [], [], [], []
    for g in range(mg):
        for u2 in range(m2):
            w = joint[u2, g]
            if w <= 0.0:
                continue
            groups.append(g)
            weights.append(w)
            means.append(h.base.means[u2])
            covs.append(h.base.comp_covs[u2])
    src = MixtureSource(
        weights=np.array(weights), means=np.array(means), comp_covs=np.array(covs)
    )
    return CoarseSource(groups=np.array(groups), source=src)


# --- JSON schema adapters -------------------------------------------------

def _matrix_from_json(obj, what: str) -> np.ndarray:
    try:
        A = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputFormatError(f"{what}: not a numeric matrix") from exc
    if not np.all(np.isfinite(A)):
        raise InputFormatError(f"{what}: entries must be finite")
    return A


def channel_from_dict(d: dict) -> BroadcastChannel:
    try:
        covs = [_matrix_from_json(c, "noise_covs") for c in d["noise_covs"]]
        cap = _matrix_from_json(d["input_cap"], "input_cap")
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"channel JSON missing field: {exc}") from exc
    try:
        return BroadcastChannel(noise_covs=tuple(covs), input_cap=cap)
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc


def source_from_dict(d: dict) -> MixtureSource:
    try:
        w = np.asarray(d["weights"], dtype=float)
        mu = _matrix_from_json(d["means"], "means")
        covs = [_matrix_from_json(c, "comp_covs") for c in d["comp_covs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"source JSON invalid: {exc}") from exc
    try:
        return MixtureSource(weights=w, means=mu, comp_covs=np.array(covs))
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc


def hierarchy_from_dict(d: dict) -> MarkovHierarchy:
    base = source_from_dict(d)
    tables = [np.asarray(T, dtype=float) for T in d.get("transitions", [])]
    top = d.get("top_weights")
    try:
        return MarkovHierarchy(
            base=base,
            tables=tuple(tables),
            top_weights=None if top is None else np.asarray(top, dtype=float),
        )
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc
