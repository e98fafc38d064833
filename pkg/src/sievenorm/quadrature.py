"""L1 and L2 norms of trigonometric polynomials over [0, 1).

For S(alpha) = sum_{n=1}^N a_n e(n*alpha), the L2 norm is exact (Parseval:
integral of |S|^2 equals sum |a_n|^2, and the rectangle rule reproduces it
exactly once M >= 2N + 1 samples are used).  The L1 norm has no closed form;
it is estimated by rectangle-rule quadrature on refining grids
M = oversample * (N + 1), doubling the oversample factor until successive
values agree to a relative tolerance.

Every estimate is cross-checked against two analytic envelopes before being
returned: l1 <= sqrt(l2) (Cauchy-Schwarz) and l1 >= max_n |a_n| (projection
onto a single frequency).  A violation beyond tolerance raises
:class:`InvariantError` -- the quadrature itself cannot produce either side
wrongly unless there is a bug.

Reductions over grid values are deterministic for a fixed worker count:
the grid is split into contiguous chunks by index, chunk sums are computed
independently (optionally in a thread pool), and combined in fixed order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .errors import CapacityError, InvariantError
from .expsum import (
    DEFAULT_GRID_BUDGET,
    CoefficientSequence,
    KernelSpec,
    grid_eval_kernel,
    grid_eval_sequence,
)

if TYPE_CHECKING:  # pragma: no cover
    from .arith import ArithmeticTables

DEFAULT_REL_TOL = 1e-4
DEFAULT_OVERSAMPLE_START = 16
DEFAULT_OVERSAMPLE_CAP = 1024


@dataclass(frozen=True)
class L1Estimate:
    """Result of the refining L1 quadrature.

    ``grids`` records every (M, value) pair in the order visited (M strictly
    increasing); ``value`` is the last and finest.  ``converged`` is a flag,
    not a guarantee -- callers decide whether a non-converged estimate is
    usable.  ``last_delta`` is the final relative change (inf if only one
    grid fit the budget).
    """

    value: float
    grids: tuple[tuple[int, float], ...]
    converged: bool
    last_delta: float


def deterministic_sum(values: np.ndarray, workers: int = 1) -> float:
    """Sum with a worker-count-stable chunked reduction.

    The chunk boundaries depend only on (len(values), workers); partial sums
    combine left to right, so results are bitwise reproducible for a fixed
    worker count regardless of thread scheduling.
    """
    n = len(values)
    w = max(1, int(workers))
    if w == 1 or n < 2 * w:
        return float(np.sum(values))
    bounds = [(i * n) // w for i in range(w + 1)]
    chunks = [values[bounds[i] : bounds[i + 1]] for i in range(w)]
    with ThreadPoolExecutor(max_workers=w) as pool:
        partials = list(pool.map(np.sum, chunks))
    total = 0.0
    for s in partials:
        total += float(s)
    return total


def deterministic_mean(values: np.ndarray, workers: int = 1) -> float:
    return deterministic_sum(values, workers) / len(values)


def l2_norm_sq(seq: CoefficientSequence) -> float:
    """Integral of |S|^2 over [0,1), computed exactly as sum |a_n|^2."""
    return float(np.vdot(seq.coeffs, seq.coeffs).real)


def l2_norm_sq_quadrature(seq: CoefficientSequence, M: int | None = None) -> float:
    """Same integral by the rectangle rule (exact once M >= 2N + 1)."""
    if M is None:
        M = 2 * seq.N + 2
    g = grid_eval_sequence(seq, M)
    return float(np.mean(np.abs(g.values) ** 2))


def _refine(
    sample_mean: Callable[[int], float],
    N: int,
    rel_tol: float,
    oversample_start: int,
    oversample_cap: int,
    budget: int,
) -> L1Estimate:
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    if oversample_start < 2:
        raise ValueError(f"oversample_start must be >= 2, got {oversample_start}")
    grids: list[tuple[int, float]] = []
    prev: float | None = None
    last_delta = math.inf
    converged = False
    oversample = oversample_start
    while oversample <= oversample_cap:
        M = oversample * (N + 1)
        if M > budget:
            break
        value = sample_mean(M)
        grids.append((M, value))
        if prev is not None:
            last_delta = abs(value - prev) / max(abs(value), 1e-300)
            if last_delta < rel_tol:
                converged = True
                break
        prev = value
        oversample *= 2
    if not grids:
        raise CapacityError(
            f"coarsest grid {oversample_start * (N + 1)} already exceeds budget {budget}"
        )
    return L1Estimate(
        value=grids[-1][1],
        grids=tuple(grids),
        converged=converged,
        last_delta=float(last_delta),
    )


def _check_envelopes(value: float, ceiling: float, floor: float, rel_tol: float) -> None:
    slack = rel_tol * max(abs(value), 1.0) + 1e-12 * max(ceiling, 1.0)
    if value > ceiling + slack:
        raise InvariantError(
            f"L1 estimate {value!r} exceeds Cauchy-Schwarz ceiling {ceiling!r}"
        )
    if value < floor - slack:
        raise InvariantError(
            f"L1 estimate {value!r} below single-frequency floor {floor!r}"
        )


def l1_norm(
    seq: CoefficientSequence,
    rel_tol: float = DEFAULT_REL_TOL,
    oversample_start: int = DEFAULT_OVERSAMPLE_START,
    oversample_cap: int = DEFAULT_OVERSAMPLE_CAP,
    budget: int = DEFAULT_GRID_BUDGET,
    workers: int = 1,
) -> L1Estimate:
    """Estimate integral of |S(alpha)| d alpha by refining rectangle rules.

    Non-convergence within the oversample cap (or grid budget) is reported
    via ``converged=False``, never as an exception; the analytic envelope
    checks still run on whatever value the finest grid produced.
    """

    def sample_mean(M: int) -> float:
        g = grid_eval_sequence(seq, M, budget=budget)
        return deterministic_mean(np.abs(g.values), workers)

    est = _refine(sample_mean, seq.N, rel_tol, oversample_start, oversample_cap, budget)
    ceiling = math.sqrt(l2_norm_sq(seq))
    floor = float(np.max(np.abs(seq.coeffs)))
    _check_envelopes(est.value, ceiling, floor, rel_tol)
    return est


def l1_norm_kernel(
    tables: "ArithmeticTables",
    spec: KernelSpec,
    rel_tol: float = DEFAULT_REL_TOL,
    oversample_start: int = DEFAULT_OVERSAMPLE_START,
    oversample_cap: int = DEFAULT_OVERSAMPLE_CAP,
    budget: int = DEFAULT_GRID_BUDGET,
    workers: int = 1,
) -> L1Estimate:
    """L1 norm of a kernel by the same refining quadrature.

    For the nonnegative kinds (``fejer``, ``gstar``, ``h``) the L1 norm
    equals the mean value, i.e. the zeroth spectral coefficient: 1 for
    ``fejer``, mean of p^2 (resp. p) over primes p <= P for ``gstar``
    (resp. ``h``).  That identity is a test-side oracle, not assumed here.
    """

    def sample_mean(M: int) -> float:
        g = grid_eval_kernel(tables, spec, M, budget=budget)
        return deterministic_mean(np.abs(g.values), workers)

    return _refine(sample_mean, spec.N, rel_tol, oversample_start, oversample_cap, budget)
