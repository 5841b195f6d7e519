"""Problem and solution data model.

A rectangular multiparameter eigenvalue problem couples k equations

    A_i x_i = lambda_1 B_i1 x_i + ... + lambda_k B_ik x_i,   i = 1..k,

with tall blocks A_i, B_is of shape m_i x n_i (m_i >= n_i).  Because such a
system generally has no exact solution, eigenvalues are carried in the
homogeneous form lambda_s = alpha_s / gamma with

    gamma >= 0,   gamma^2 + sum_s |alpha_s|^2 = 1,

which keeps infinite eigenvalues (gamma = 0) representable.  This module
holds the value types, the residual metrics, the perturbation bookkeeping
and the seeded random generator used by the benchmark harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import DEFAULT, NumericsConfig
from .errors import InfiniteEigenvalueError, ValidationError
from .linalg import as_matrix

__all__ = [
    "EquationBlock",
    "RmepProblem",
    "MepProblem",
    "HomogeneousEigenvalue",
    "EigenTuple",
    "PerturbationSet",
    "homogenize",
    "dehomogenize",
    "normalized_residual",
    "homogeneous_residual",
    "apply_perturbation",
    "perturbation_cost",
    "random_planted_problem",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EquationBlock:
    """One equation's coefficients: `a` plus the k parameter matrices `b`."""

    a: np.ndarray
    b: tuple[np.ndarray, ...]

    def __post_init__(self):
        a = _freeze(as_matrix(self.a, "A"))
        bs = tuple(_freeze(as_matrix(bi, f"B[{s}]")) for s, bi in enumerate(self.b))
        for bi in bs:
            if bi.shape != a.shape:
                raise ValidationError(f"all matrices in a block must share shape {a.shape}, got {bi.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", bs)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def stacked(self) -> np.ndarray:
        """[A, B_1, ..., B_k] of shape m x (k+1)n."""
        return np.hstack((self.a,) + self.b)


@dataclass(frozen=True)
class RmepProblem:
    """k coupled equation blocks with m_i >= n_i."""

    blocks: tuple[EquationBlock, ...]

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValidationError("problem needs at least one equation block")
        k = len(blocks)
        for i, blk in enumerate(blocks):
            if len(blk.b) != k:
                raise ValidationError(f"block {i} has {len(blk.b)} parameter matrices, expected {k}")
            m, n = blk.shape
            if m < n:
                raise ValidationError(f"block {i} is wide ({m}x{n}); m_i >= n_i is required")
        object.__setattr__(self, "blocks", blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def shapes(self) -> tuple[tuple[int, int], ...]:
        return tuple(blk.shape for blk in self.blocks)

    @property
    def dims(self) -> tuple[int, ...]:
        """Column counts (n_1, ..., n_k)."""
        return tuple(blk.shape[1] for blk in self.blocks)

    @property
    def total_dim(self) -> int:
        """N = n_1 * ... * n_k, the generic number of eigen-tuples."""
        return math.prod(self.dims)

    @cached_property
    def spectral_norms(self) -> tuple[tuple[float, tuple[float, ...]], ...]:
        # Residual denominators are evaluated once per tuple; cache the 2-norms.
        out = []
        for blk in self.blocks:
            out.append((float(np.linalg.norm(blk.a, 2)), tuple(float(np.linalg.norm(bi, 2)) for bi in blk.b)))
        return tuple(out)


@dataclass(frozen=True)
class MepProblem(RmepProblem):
    """The square case m_i = n_i; input to the operator-determinant solver."""

    def __post_init__(self):
        super().__post_init__()
        for i, blk in enumerate(self.blocks):
            m, n = blk.shape
            if m != n:
                raise ValidationError(f"block {i} must be square, got {m}x{n}")


@dataclass(frozen=True)
class HomogeneousEigenvalue:
    """Normalized homogeneous eigenvalue (gamma, alpha_1..alpha_k)."""

    gamma: float
    alphas: np.ndarray

    def __post_init__(self):
        alphas = _freeze(np.array(self.alphas, dtype=np.complex128).reshape(-1))
        gamma = float(self.gamma)
        if gamma < 0:
            raise ValidationError("gamma must be nonnegative")
        nrm = gamma * gamma + float(np.sum(np.abs(alphas) ** 2))
        if abs(nrm - 1.0) > 1e-12:
            raise ValidationError(f"(gamma, alphas) must be unit-normalized, |v|^2 = {nrm}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "alphas", alphas)

    @property
    def k(self) -> int:
        return self.alphas.size

    @classmethod
    def from_vector(cls, v) -> "HomogeneousEigenvalue":
        """Normalize an arbitrary nonzero (k+1)-vector and fix the phase.

        The global phase is chosen so the leading (gamma) component is real
        nonnegative; when that component is negligible (|v_0| <= 1e-14 after
        normalization) the phase of the largest-modulus alpha is used instead.
        """
        v = np.array(v, dtype=np.complex128).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValidationError("cannot normalize the zero vector")
        v = v / nrm
        if abs(v[0]) > 1e-14:
            phase = v[0] / abs(v[0])
        else:
            j = int(np.argmax(np.abs(v[1:]))) + 1
            phase = v[j] / abs(v[j]) if abs(v[j]) > 0 else 1.0
        v = v * np.conj(phase)
        gamma = abs(float(v[0].real))
        alphas = v[1:]
        # Re-normalize exactly after forcing gamma real.
        w = np.concatenate(([gamma], alphas))
        w = w / np.linalg.norm(w)
        return cls(gamma=float(w[0].real), alphas=w[1:])

    def lambdas(self, config: NumericsConfig = DEFAULT) -> np.ndarray:
        return dehomogenize(self, config)

    def is_finite(self, config: NumericsConfig = DEFAULT) -> bool:
        return self.gamma > config.gamma_threshold


@dataclass(frozen=True)
class EigenTuple:
    """Candidate solution: homogeneous value, unit vectors, cached residual."""

    value: HomogeneousEigenvalue
    vectors: tuple[np.ndarray, ...]
    residual: float | None = None

    def __post_init__(self):
        vecs = []
        for i, x in enumerate(self.vectors):
            x = np.array(x, dtype=np.complex128).reshape(-1)
            nrm = np.linalg.norm(x)
            if abs(nrm - 1.0) > 1e-12:
                raise ValidationError(f"vector {i} must be unit 2-norm, got {nrm}")
            vecs.append(_freeze(x))
        object.__setattr__(self, "vectors", tuple(vecs))


@dataclass(frozen=True)
class PerturbationSet:
    """A perturbed problem together with its squared Frobenius distance
    from the problem it perturbs."""

    blocks: tuple[EquationBlock, ...]
    cost: float

    @classmethod
    def from_blocks(cls, origin: RmepProblem, blocks) -> "PerturbationSet":
        blocks = tuple(blocks)
        cost = _frobenius_cost(origin, blocks)
        return cls(blocks=blocks, cost=cost)


def _frobenius_cost(origin: RmepProblem, blocks) -> float:
    if len(blocks) != origin.k:
        raise ValidationError("perturbation block count does not match the problem")
    total = 0.0
    for blk, pblk in zip(origin.blocks, blocks):
        if pblk.shape != blk.shape:
            raise ValidationError("perturbation shapes do not match the problem")
        total += float(np.linalg.norm(pblk.a - blk.a, "fro") ** 2)
        for b, pb in zip(blk.b, pblk.b):
            total += float(np.linalg.norm(pb - b, "fro") ** 2)
    return total


def homogenize(lambdas) -> HomogeneousEigenvalue:
    """Map finite eigenvalues to the unit homogeneous representative."""
    lam = np.array(lambdas, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(lam.view(np.float64))):
        raise ValidationError("homogenize requires finite eigenvalues")
    tau = math.sqrt(1.0 + float(np.sum(np.abs(lam) ** 2)))
    return HomogeneousEigenvalue(gamma=1.0 / tau, alphas=lam / tau)


def dehomogenize(value: HomogeneousEigenvalue, config: NumericsConfig = DEFAULT) -> np.ndarray:
    """Recover (lambda_1, ..., lambda_k); raises when gamma is negligible."""
    if value.gamma <= config.gamma_threshold:
        raise InfiniteEigenvalueError(
            f"gamma = {value.gamma:.3e} is at/below the threshold {config.gamma_threshold:.0e}; "
            "the eigenvalue is infinite in at least one component",
            alphas=value.alphas.copy(),
        )
    return value.alphas / value.gamma


def normalized_residual(problem: RmepProblem, t: EigenTuple, config: NumericsConfig = DEFAULT):
    """Per-block and total backward-error style residuals.

        rho_i = ||A_i x_i - sum_s lambda_s B_is x_i||_2
                / (||A_i||_2 + sum_s |lambda_s| ||B_is||_2)

    Only defined for finite eigenvalues; use `homogeneous_residual` otherwise.
    """
    lam = dehomogenize(t.value, config)
    if len(t.vectors) != problem.k:
        raise ValidationError("eigen-tuple vector count does not match the problem")
    rho = np.empty(problem.k)
    for i, blk in enumerate(problem.blocks):
        x = t.vectors[i]
        r = blk.a @ x - sum(l * (bi @ x) for l, bi in zip(lam, blk.b))
        norm_a, norms_b = problem.spectral_norms[i]
        den = norm_a + sum(abs(l) * nb for l, nb in zip(lam, norms_b))
        rho[i] = np.linalg.norm(r) / den
    return rho, float(rho.sum())


def homogeneous_residual(problem: RmepProblem, t: EigenTuple) -> float:
    """sum_i ||gamma A_i x_i - sum_s alpha_s B_is x_i||_2^2 (finite for any gamma)."""
    v = t.value
    total = 0.0
    for blk, x in zip(problem.blocks, t.vectors):
        r = v.gamma * (blk.a @ x) - sum(a * (bi @ x) for a, bi in zip(v.alphas, blk.b))
        total += float(np.linalg.norm(r) ** 2)
    return total


def apply_perturbation(problem: RmepProblem, pset: PerturbationSet) -> RmepProblem:
    """The perturbed problem as a standalone RmepProblem (shapes validated)."""
    _frobenius_cost(problem, pset.blocks)
    return RmepProblem(blocks=pset.blocks)


def perturbation_cost(problem: RmepProblem, pset: PerturbationSet) -> float:
    """Recompute sum_i ||[A^_i - A_i, B^_i1 - B_i1, ...]||_F^2 from scratch."""
    return _frobenius_cost(problem, pset.blocks)


def _complex_normal(rng: np.random.Generator, shape, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_planted_problem(m, n, sigma: float, seed):
    """Benchmark generator: a rectangular problem with a planted square core.

    For each block, a random square reference (A*_i, B*_is) with standard
    complex normal entries is lifted by the thin-QR factor Q_i of a random
    m_i x n_i matrix, then perturbed:

        A_i = Q_i A*_i + E_i,   B_is = Q_i B*_is + F_is,

    where the noise entries have independent real/imaginary parts drawn from
    N(0, (sigma/m_i)^2).  The 1/m_i scaling makes sigma the approximate
    spectral-norm size of each noise block, independent of the row count.
    At sigma = 0 every eigen-tuple of the returned reference MepProblem
    solves the rectangular problem exactly.

    Returns (problem, reference).  Deterministic per seed.
    """
    m = tuple(int(v) for v in np.atleast_1d(m))
    n = tuple(int(v) for v in np.atleast_1d(n))
    if len(m) != len(n) or not m:
        raise ValidationError("m and n must be equal-length nonempty sequences")
    k = len(m)
    for mi, ni in zip(m, n):
        if mi <= ni:
            raise ValidationError(f"planted problems need m_i > n_i, got {mi} <= {ni}")
    if sigma < 0:
        raise ValidationError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    ref_blocks = []
    blocks = []
    for mi, ni in zip(m, n):
        core = [_complex_normal(rng, (ni, ni)) for _ in range(k + 1)]
        q = np.linalg.qr(_complex_normal(rng, (mi, ni)))[0]
        noisy = [q @ c + _complex_normal(rng, (mi, ni), scale=sigma / mi) for c in core]
        ref_blocks.append(EquationBlock(a=core[0], b=tuple(core[1:])))
        blocks.append(EquationBlock(a=noisy[0], b=tuple(noisy[1:])))
    return RmepProblem(blocks=tuple(blocks)), MepProblem(blocks=tuple(ref_blocks))
