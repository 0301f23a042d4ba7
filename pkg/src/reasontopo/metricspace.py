"""Semantic-logical composite distances, edge weights and the frozen node projection."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .trace import ReasoningStep, ReasoningTrace

_SUM_TOL = 1e-9
# cosines this close to +/-1 are rounding noise from the normalization
_COS_SNAP = 1e-12


@dataclass(frozen=True)
class DistanceConfig:
    alpha_deg: float = 1.0
    alpha_cc: float = 1.0
    beta: float = 2.0
    gamma_d: float = 1.0 / 3.0
    gamma_b: float = 1.0 / 3.0
    gamma_c: float = 1.0 / 3.0
    lambda_s: float = 0.7
    lambda_l: float = 0.3
    alpha_edge: float = 0.7
    projection_seed: int = 0
    projection_dim: int = 256
    fallback_dim: int = 64

    def __post_init__(self):
        weights = {k: getattr(self, k) for k in ("alpha_deg", "alpha_cc", "gamma_d", "gamma_b",
                                                   "gamma_c", "lambda_s", "lambda_l", "alpha_edge")}
        for name, value in weights.items():
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite non-negative weight, got {value}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if abs(self.gamma_d + self.gamma_b + self.gamma_c - 1.0) > _SUM_TOL:
            raise ValueError("gamma_d + gamma_b + gamma_c must equal 1")
        if abs(self.lambda_s + self.lambda_l - 1.0) > _SUM_TOL:
            raise ValueError("lambda_s + lambda_l must equal 1")
        if self.alpha_edge > 1:
            raise ValueError("alpha_edge must lie in [0, 1]")
        if self.projection_dim <= 0 or self.fallback_dim <= 0:
            raise ValueError("projection_dim and fallback_dim must be positive")


@dataclass(frozen=True)
class NodeFeatureVector:
    values: np.ndarray
    source_id: int


def _seeded_rng(*parts) -> np.random.Generator:
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


def fallback_embed(text: str, dim: int) -> np.ndarray:
    """Deterministic unit vector derived from a hash of ``text``.

    Test-only stand-in for a language-model embedder; real traces should ship
    their own embeddings.
    """
    if dim <= 0:
        raise ValueError("dim must be positive")
    v = _seeded_rng("text", text).standard_normal(dim)
    return v / np.linalg.norm(v)


def resolve_embeddings(trace: ReasoningTrace, cfg: DistanceConfig) -> np.ndarray:
    if trace.has_embeddings:
        emb = np.array([s.embedding for s in trace.steps], dtype=float)
    else:
        emb = np.stack([fallback_embed(s.text, cfg.fallback_dim) for s in trace.steps])
    if not np.all(np.isfinite(emb)):
        raise ValueError("embeddings contain non-finite values")
    return emb


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine similarity undefined for a zero-norm vector")
    return float(_snap(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0)))


def _snap(cos):
    cos = np.where(cos > 1.0 - _COS_SNAP, 1.0, cos)
    return np.where(cos < -1.0 + _COS_SNAP, -1.0, cos)


def semantic_distance(s_i: np.ndarray, s_j: np.ndarray) -> float:
    """Cosine distance ``1 - cos(s_i, s_j)``, in [0, 2]."""
    return 1.0 - cosine_similarity(s_i, s_j)


def cosine_matrix(emb: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(emb, axis=1)
    if np.any(norms == 0):
        bad = int(np.flatnonzero(norms == 0)[0])
        raise ValueError(f"zero-norm embedding at step {bad}")
    unit = emb / norms[:, None]
    cos = _snap(np.clip(unit @ unit.T, -1.0, 1.0))
    cos = (cos + cos.T) / 2.0
    np.fill_diagonal(cos, 1.0)
    return cos


def _norm_c(c: float, c_max: float) -> float:
    return 0.0 if c_max <= 0 else c / c_max


def logical_distance(step_i: ReasoningStep, step_j: ReasoningStep, c_i: float, c_j: float,
                     cfg: DistanceConfig, c_max: float = 1.0) -> float:
    """Weighted depth gap + branch mismatch + connectivity gap.

    ``c_i`` and ``c_j`` are raw local-connectivity scores; they are divided by
    the trace-wide maximum ``c_max`` before comparison (``c_max <= 0`` maps
    every score to 0).
    """
    return (cfg.gamma_d * abs(step_i.depth - step_j.depth)
            + cfg.gamma_b * float(step_i.branch != step_j.branch)
            + cfg.gamma_c * abs(_norm_c(c_i, c_max) - _norm_c(c_j, c_max)))


def composite_distance(d_semantic: float, d_logical: float, cfg: DistanceConfig) -> float:
    return cfg.lambda_s * d_semantic + cfg.lambda_l * d_logical


def logical_matrix(steps: Sequence[ReasoningStep], c: np.ndarray, cfg: DistanceConfig) -> np.ndarray:
    depth = np.array([s.depth for s in steps], dtype=float)
    branches = [s.branch for s in steps]
    n = len(steps)
    mismatch = np.array([[float(branches[i] != branches[j]) for j in range(n)] for i in range(n)])
    c = np.asarray(c, dtype=float)
    c_max = float(c.max()) if n else 0.0
    cn = c / c_max if c_max > 0 else np.zeros_like(c)
    return (cfg.gamma_d * np.abs(depth[:, None] - depth[None, :])
            + cfg.gamma_b * mismatch
            + cfg.gamma_c * np.abs(cn[:, None] - cn[None, :]))


def composite_matrix(emb: np.ndarray, steps: Sequence[ReasoningStep], c: np.ndarray,
                     cfg: DistanceConfig) -> np.ndarray:
    d = cfg.lambda_s * (1.0 - cosine_matrix(emb)) + cfg.lambda_l * logical_matrix(steps, c, cfg)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def edge_weight(s_i: np.ndarray, s_j: np.ndarray, has_explicit_dep: bool, cfg: DistanceConfig) -> float:
    """Mix of embedding cosine and the explicit-dependency indicator."""
    return cfg.alpha_edge * cosine_similarity(s_i, s_j) + (1.0 - cfg.alpha_edge) * float(has_explicit_dep)


# -- frozen projection -------------------------------------------------------

DEPTH_ENC_DIM = 8
BRANCH_ENC_DIM = 8
CONN_ENC_DIM = 4


def depth_encoding(depth: int, dim: int = DEPTH_ENC_DIM) -> np.ndarray:
    k = np.arange(dim // 2)
    freq = 1.0 / (10000.0 ** (2 * k / dim))
    out = np.empty(dim)
    out[0::2] = np.sin(depth * freq)
    out[1::2] = np.cos(depth * freq)
    return out


def branch_encoding(branch, seed: int, dim: int = BRANCH_ENC_DIM) -> np.ndarray:
    v = _seeded_rng("branch", seed, type(branch).__name__, branch).standard_normal(dim)
    return v / np.linalg.norm(v)


def connectivity_encoding(c_norm: float, dim: int = CONN_ENC_DIM) -> np.ndarray:
    return np.full(dim, float(c_norm))


@lru_cache(maxsize=32)
def _projection_matrix(in_dim: int, out_dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    tall, wide = max(in_dim, out_dim), min(in_dim, out_dim)
    q, r = np.linalg.qr(rng.standard_normal((tall, wide)))
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    # orthonormal rows when reducing dimension, orthonormal columns otherwise
    mat = q if out_dim >= in_dim else q.T
    mat.setflags(write=False)
    return mat


def projection_matrix(in_dim: int, cfg: DistanceConfig) -> np.ndarray:
    """Seeded semi-orthogonal ``projection_dim x in_dim`` matrix (never trained)."""
    return _projection_matrix(int(in_dim), int(cfg.projection_dim), int(cfg.projection_seed))


def node_input(step: ReasoningStep, c_i: float, cfg: DistanceConfig, embedding: Optional[np.ndarray] = None,
               c_max: float = 1.0) -> np.ndarray:
    if embedding is None:
        embedding = (np.asarray(step.embedding, dtype=float) if step.embedding is not None
                     else fallback_embed(step.text, cfg.fallback_dim))
    return np.concatenate([np.asarray(embedding, dtype=float),
                           depth_encoding(step.depth),
                           branch_encoding(step.branch, cfg.projection_seed),
                           connectivity_encoding(_norm_c(c_i, c_max))])


def project(step: ReasoningStep, c_i: float, cfg: DistanceConfig, embedding: Optional[np.ndarray] = None,
            c_max: float = 1.0, in_dim: Optional[int] = None) -> NodeFeatureVector:
    x = node_input(step, c_i, cfg, embedding, c_max)
    q = projection_matrix(in_dim if in_dim is not None else x.shape[0], cfg)
    if q.shape[1] != x.shape[0]:
        raise ValueError(f"input dimension {x.shape[0]} does not match projection input {q.shape[1]}")
    return NodeFeatureVector(values=q @ x, source_id=step.id)
