"""Block-diagonal Schur-complement preconditioners, exact and approximate.

The exact preconditioner stacks the leading block with the two nested Schur
complements.  Approximate variants replace individual blocks by cheaper
spectrally equivalent matrices; every admissible block is an explicit SPD
matrix at desk scale so that equivalence constants stay measurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .bounds import Interval
from .errors import (
    DefinitenessError,
    OracleSizeError,
    ParameterError,
    StrategyMismatchError,
)
from .spectral import ORACLE_CUTOFF, schur_complements
from .system import DoubleSaddleSystem, assemble, _sym

EIG_FLOOR = 1e-14

_BLOCK_LABELS = ("leading", "first-schur", "second-schur")


@dataclass(frozen=True)
class PoissonControlContext:
    """Structure metadata a distributed-control system carries along.

    ``mass`` and ``stiffness`` are the interior finite-element matrices and
    ``beta`` the control regularization weight.  The square-completion
    approximation of the tail Schur complement and the reference
    regularization-ratio constant used when reporting inexact bounds for
    this problem family both live here.
    """

    mass: np.ndarray
    stiffness: np.ndarray
    beta: float

    def square_completion_block(self) -> np.ndarray:
        """(M + sqrt(beta) K) M^-1 (M + sqrt(beta) K): the square-completion
        approximation of M + beta K M^-1 K, whose equivalence constants are
        [1/2, 1]."""
        m, k = self.mass, self.stiffness
        shifted = m + math.sqrt(self.beta) * k
        cho_m = sla.cho_factor(_sym(m))
        return _sym(shifted @ sla.cho_solve(cho_m, shifted))

    def reference_regularization_ratio(self) -> float:
        """beta-scaled top of the (mass, K M^-1 K) pencil.

        This is the published scale constant for the tail regularization of
        this problem family: beta divided by the squared smallest
        stiffness-to-mass generalized eigenvalue, which is O(beta) and tiny
        for practical beta.
        """
        cho_m = sla.cho_factor(_sym(self.mass))
        gram = _sym(self.stiffness @ sla.cho_solve(cho_m, self.stiffness))
        vals = sla.eigh(_sym(self.mass), gram, eigvals_only=True)
        return self.beta * float(vals[-1])

    def assumed_constants(self) -> tuple[float, float]:
        """Equivalence interval guaranteed for the square-completion block."""
        return 0.5, 1.0


@dataclass(frozen=True)
class PreconditionerOperator:
    """Three factorized SPD blocks applied block-diagonally."""

    blocks: tuple[np.ndarray, np.ndarray, np.ndarray]
    strategy: tuple[str, str, str]
    dims: tuple[int, int, int]
    _factors: tuple = field(repr=False, default=None)

    def apply_inverse(self, vector: np.ndarray) -> np.ndarray:
        """Blockwise triangular solves: the action of the inverse on a vector."""
        v = np.asarray(vector, dtype=float)
        n, m, p = self.dims
        if v.shape[0] != n + m + p:
            raise ParameterError(
                f"vector length {v.shape[0]} does not match system size {n + m + p}"
            )
        pieces = (v[:n], v[n : n + m], v[n + m :])
        return np.concatenate(
            [sla.cho_solve(f, piece) for f, piece in zip(self._factors, pieces)]
        )

    def as_matrix(self) -> np.ndarray:
        return sla.block_diag(*self.blocks)


@dataclass(frozen=True)
class SplitPreconditioned:
    """Dense symmetric congruence of the system by the inverse square root
    of a block-diagonal preconditioner; shares its spectrum with the
    left-preconditioned operator."""

    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EquivalenceMeasurement:
    """Measured generalized spectrum of an exact block against its approximation.

    ``raw`` is the untouched interval of generalized eigenvalues; ``alpha``
    and ``beta`` are the same endpoints after rescaling the approximation by
    ``scale`` so that the interval straddles 1.
    """

    raw: Interval
    alpha: float
    beta: float
    scale: float


def _factor(block: np.ndarray, label: str):
    try:
        return sla.cho_factor(_sym(block))
    except sla.LinAlgError as exc:
        raise DefinitenessError(f"{label} block is not positive definite") from exc


def build_exact(system: DoubleSaddleSystem) -> PreconditionerOperator:
    """Exact preconditioner: the leading block and both Schur complements."""
    pair = schur_complements(system)
    blocks = (_sym(system.A), pair.s1, pair.s2)
    factors = tuple(_factor(b, lbl) for b, lbl in zip(blocks, _BLOCK_LABELS))
    return PreconditionerOperator(
        blocks=blocks,
        strategy=("exact", "exact", "exact"),
        dims=system.dims,
        _factors=factors,
    )


def build_approx(
    system: DoubleSaddleSystem,
    strategies: Sequence[str],
    context: PoissonControlContext | None = None,
    user_blocks: Sequence[np.ndarray] | None = None,
) -> PreconditionerOperator:
    """Assemble a preconditioner from per-block strategy names.

    Recognized strategies: ``exact``, ``jacobi`` (diagonal of the exact
    block), ``scaled:<t>`` (the exact block times t > 0), ``pearson-wathen``
    (square-completion tail block; needs distributed-control structure),
    ``drop-term`` (tail regularization block alone; needs it SPD), and
    ``user`` (matrix taken from ``user_blocks``).
    """
    if len(strategies) != 3:
        raise ParameterError("need exactly three per-block strategies")
    pair = schur_complements(system)
    exact_blocks = (_sym(system.A), pair.s1, pair.s2)

    blocks = []
    for idx, strat in enumerate(strategies):
        exact = exact_blocks[idx]
        if strat == "exact":
            blocks.append(exact)
        elif strat == "jacobi":
            blocks.append(np.diag(np.diag(exact)))
        elif strat.startswith("scaled:"):
            factor = float(strat.split(":", 1)[1])
            if factor <= 0:
                raise ParameterError(f"scale factor must be positive, got {factor}")
            blocks.append(factor * exact)
        elif strat == "pearson-wathen":
            if idx != 2:
                raise StrategyMismatchError(
                    "the square-completion strategy only applies to the tail block"
                )
            if context is None:
                raise StrategyMismatchError(
                    "pearson-wathen needs the (mass, stiffness, beta) structure of a "
                    "distributed control problem"
                )
            blocks.append(context.square_completion_block())
        elif strat == "drop-term":
            if idx != 2:
                raise StrategyMismatchError(
                    "the drop-term strategy only applies to the tail block"
                )
            blocks.append(_sym(system.E))
        elif strat == "user":
            if user_blocks is None or user_blocks[idx] is None:
                raise ParameterError(f"no user block supplied for position {idx}")
            blocks.append(_sym(np.asarray(user_blocks[idx], dtype=float)))
        else:
            raise ParameterError(f"unknown strategy {strat!r}")

    factors = tuple(_factor(b, lbl) for b, lbl in zip(blocks, _BLOCK_LABELS))
    return PreconditionerOperator(
        blocks=tuple(blocks),
        strategy=tuple(strategies),
        dims=system.dims,
        _factors=factors,
    )


def from_blocks(
    blocks: Sequence[np.ndarray],
    dims: tuple[int, int, int],
    strategy: tuple[str, str, str] = ("user", "user", "user"),
) -> PreconditionerOperator:
    """Wrap three explicit SPD matrices as a preconditioner."""
    if len(blocks) != 3:
        raise ParameterError("need exactly three blocks")
    blocks = tuple(_sym(np.asarray(b, dtype=float)) for b in blocks)
    factors = tuple(_factor(b, lbl) for b, lbl in zip(blocks, _BLOCK_LABELS))
    return PreconditionerOperator(
        blocks=blocks, strategy=tuple(strategy), dims=dims, _factors=factors
    )


def apply_inverse(op: PreconditionerOperator, vector: np.ndarray) -> np.ndarray:
    return op.apply_inverse(vector)


def _inverse_sqrt(block: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(_sym(block))
    floor = EIG_FLOOR * max(float(vals[-1]), np.finfo(float).tiny)
    vals = np.maximum(vals, floor)
    return _sym((vecs / np.sqrt(vals)) @ vecs.T)


def split_preconditioned_matrix(
    system: DoubleSaddleSystem,
    op: PreconditionerOperator,
    oracle_cutoff: int = ORACLE_CUTOFF,
) -> SplitPreconditioned:
    """Form the dense symmetric split-preconditioned matrix.

    Inverse square roots come from per-block symmetric eigendecompositions
    with an eigenvalue floor guarding round-off.  The result is congruent to
    the system matrix and isospectral to the left-preconditioned operator.
    """
    total = system.total
    if total > oracle_cutoff:
        raise OracleSizeError(
            f"split matrix refused for dimension {total} > cutoff {oracle_cutoff}"
        )
    roots = [_inverse_sqrt(b) for b in op.blocks]
    w = sla.block_diag(*roots)
    k = assemble(system, "standard").data
    return SplitPreconditioned(matrix=_sym(w @ k @ w))


def equivalence_constants(
    exact: np.ndarray, approx: np.ndarray
) -> EquivalenceMeasurement:
    """Extremal generalized eigenvalues of an (exact, approximation) pair.

    The raw interval is reported as-is; for the bound formulas it is also
    normalized to straddle 1 by rescaling the approximation (scaling the
    approximation by s divides the whole interval by s), and the applied
    scale is part of the measurement.
    """
    exact = _sym(np.asarray(exact, dtype=float))
    approx = _sym(np.asarray(approx, dtype=float))
    if exact.shape != approx.shape:
        raise ParameterError(
            f"shape mismatch: {exact.shape} vs {approx.shape}"
        )
    try:
        sla.cho_factor(approx)
    except sla.LinAlgError as exc:
        raise DefinitenessError("approximation block is not positive definite") from exc
    vals = sla.eigh(exact, approx, eigvals_only=True)
    raw = Interval(float(vals[0]), float(vals[-1]))
    if raw.lo <= 0:
        raise DefinitenessError("exact block is not positive definite")

    if raw.lo > 1.0:
        scale = raw.lo
    elif raw.hi < 1.0:
        scale = raw.hi
    else:
        scale = 1.0
    alpha = min(raw.lo / scale, 1.0)
    beta = max(raw.hi / scale, 1.0)
    return EquivalenceMeasurement(raw=raw, alpha=alpha, beta=beta, scale=scale)
