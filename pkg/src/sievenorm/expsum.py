"""Exponential sums and Fejer-type kernels with two independent evaluation routes.

The basic object is the geometric exponential sum

    F_N(alpha) = sum_{n=1}^{N} e(n * alpha),        e(x) = exp(2*pi*i*x),

and its normalized square T_N = |F_N|^2 / N, the Fejer kernel, whose spectral
expansion is sum_{|k| <= N} (1 - |k|/N) e(k*alpha).  On top of T_N this module
builds kernels that average translates of T_N (or of |F_N|^2) over structured
sets of rationals:

``fejer``
    T_N itself.
``gstar``
    mean over primes p <= P of sum_{a=1}^{p^2} T_N(alpha - a/p^2); its
    spectral coefficients vanish on squarefree frequencies.
``h``
    mean over primes p <= P of sum_{a=1}^{p} T_N(alpha - a/p); coefficients
    vanish exactly on k = +-1 and on |k| with least prime factor > P.
``h_truncated``
    ``h`` with the frequencies |k| <= P removed, which costs at most 3P in
    sup norm.
``k_part3``
    sum over q <= Q of mu(q) * sum_{a <= q, (a,q)=1} |F_N(alpha - a/q)|^2,
    a signed (not nonnegative) kernel used against prime-power weights.

Every kernel with a spectral form can be evaluated both from its translate
definition (``eval_kernel``) and from its coefficients
(``eval_kernel_spectral``, ``grid_eval_kernel``); the two routes share no
code so tests can play them against each other.  ``k_part3`` is evaluated
from translates only -- its Ramanujan-sum spectral expansion lives in
:mod:`sievenorm.experiments` as a cross-check, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import TYPE_CHECKING

import numpy as np

from .errors import CapacityError, InvariantError

if TYPE_CHECKING:  # pragma: no cover
    from .arith import ArithmeticTables

TWO_PI = 2.0 * math.pi
TWO_PI_I = 2.0j * math.pi

KERNEL_KINDS = ("fejer", "gstar", "h", "h_truncated", "k_part3")
SUPPORT_TAGS = ("all", "squarefree", "primes")

#: Hard ceiling on grid sizes / dense coefficient arrays (number of samples).
DEFAULT_GRID_BUDGET = 1 << 24

# Evaluating sum a_n e(n alpha) at a batch of points materializes a
# points-by-N table of powers; cap its element count so memory stays bounded.
_POINT_CHUNK_ELEMS = 1 << 22


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Finite sequence a_1..a_N with a declared support class.

    ``support`` is one of ``"all"``, ``"squarefree"``, ``"primes"`` and is a
    promise about where coefficients may be nonzero (zeros inside the support
    are fine).  ``coeffs[j]`` stores a_{j+1}; the array is frozen on
    construction.
    """

    N: int
    coeffs: np.ndarray
    support: str = "all"
    label: str = ""

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.support not in SUPPORT_TAGS:
            raise ValueError(f"unknown support tag {self.support!r}")
        c = np.array(self.coeffs, dtype=np.complex128, copy=True).reshape(-1)
        if c.shape != (self.N,):
            raise ValueError(f"expected {self.N} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def coeff(self, n: int) -> complex:
        """Return a_n (1-indexed)."""
        if not 1 <= n <= self.N:
            raise ValueError(f"index {n} outside 1..{self.N}")
        return complex(self.coeffs[n - 1])


@dataclass(frozen=True)
class KernelSpec:
    """Parameters selecting one kernel: kind, length N, and P or Q.

    Defaults when the side parameter is omitted: ``gstar`` uses
    P = max(2, floor(N^(1/4))), ``h``/``h_truncated`` use
    P = max(2, floor(sqrt(N))), ``k_part3`` uses Q = max(1, floor(sqrt(N))).
    ``fejer`` takes no side parameter.  Roots are exact integer roots, not
    float powers.
    """

    kind: str
    N: int
    P: int | None = None
    Q: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.kind == "fejer":
            if self.P is not None or self.Q is not None:
                raise ValueError("fejer kernel takes no P or Q")
        elif self.kind in ("gstar", "h", "h_truncated"):
            if self.Q is not None:
                raise ValueError(f"{self.kind} kernel takes P, not Q")
            if self.P is None:
                root = isqrt(isqrt(self.N)) if self.kind == "gstar" else isqrt(self.N)
                object.__setattr__(self, "P", max(2, root))
            elif self.P < 2:
                raise ValueError(f"P must be >= 2, got {self.P}")
        else:  # k_part3
            if self.P is not None:
                raise ValueError("k_part3 kernel takes Q, not P")
            if self.Q is None:
                object.__setattr__(self, "Q", max(1, isqrt(self.N)))
            elif self.Q < 1:
                raise ValueError(f"Q must be >= 1, got {self.Q}")


@dataclass(frozen=True, eq=False)
class GridEvaluation:
    """Values of a kernel or sequence transform on the uniform grid j/M."""

    M: int
    values: np.ndarray
    spec: object = None

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        v = np.asarray(self.values)
        if v.shape != (self.M,):
            raise ValueError(f"expected {self.M} values, got shape {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


# ---------------------------------------------------------------------------
# scalar building blocks


def distance_to_nearest_integer(x):
    """||x||: distance from x to the nearest integer, in [0, 1/2].

    Accepts scalars or arrays; ties (half-integers) give exactly 0.5.
    """
    arr = np.asarray(x, dtype=float)
    d = np.abs(arr - np.rint(arr))
    if d.ndim == 0:
        return float(d)
    return d


def eval_F(N: int, alpha: float) -> complex:
    """F_N(alpha) = sum_{n=1}^N e(n*alpha) via the closed sine-ratio form.

    Within 1/(4N^2) of an integer the sine ratio loses relative accuracy, so
    the sum is taken directly there instead.  |F_N| <= N always holds; tiny
    roundoff excesses are clipped back to the bound.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    a = float(alpha)
    if distance_to_nearest_integer(a) < 1.0 / (4.0 * N * N):
        val = complex(np.sum(np.exp(TWO_PI_I * a * np.arange(1, N + 1))))
    else:
        ratio = math.sin(math.pi * N * a) / math.sin(math.pi * a)
        phase = TWO_PI * a * (N + 1) / 2.0
        val = complex(math.cos(phase), math.sin(phase)) * ratio
    mag = abs(val)
    if mag > N:
        val *= N / mag
    return val


def eval_T(N: int, alpha: float) -> float:
    """Fejer kernel T_N(alpha) = |F_N(alpha)|^2 / N."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    a = float(alpha)
    if distance_to_nearest_integer(a) < 1.0 / (4.0 * N * N):
        f = eval_F(N, a)
        return (f.real * f.real + f.imag * f.imag) / N
    s = math.sin(math.pi * N * a) / math.sin(math.pi * a)
    return s * s / N


def _fejer_values(N: int, t: np.ndarray) -> np.ndarray:
    """T_N at an array of (arbitrary real) points, same fallback as eval_T."""
    t = np.asarray(t, dtype=float)
    near = distance_to_nearest_integer(t) < 1.0 / (4.0 * N * N)
    den = np.where(near, 1.0, np.sin(np.pi * t))
    ratio = np.sin(np.pi * N * t) / den
    out = ratio * ratio / N
    if near.any():
        for i in np.flatnonzero(near):
            f = eval_F(N, float(t[i]))
            out[i] = (f.real * f.real + f.imag * f.imag) / N
    return out


def eval_sequence(seq: CoefficientSequence, alphas) -> np.ndarray:
    """S(alpha) = sum_n a_n e(n*alpha) at arbitrary points (1-d array out).

    Powers of e(alpha) are built by cumulative products in chunks; relative
    drift is of order N * machine-eps, comfortably below the tolerances used
    anywhere in this package.
    """
    pts = np.atleast_1d(np.asarray(alphas, dtype=float)).reshape(-1)
    out = np.empty(pts.shape[0], dtype=np.complex128)
    step = max(1, _POINT_CHUNK_ELEMS // max(1, seq.N))
    for i in range(0, pts.shape[0], step):
        z = np.exp(TWO_PI_I * pts[i : i + step])
        powers = np.broadcast_to(z[:, None], (z.shape[0], seq.N)).copy()
        np.multiply.accumulate(powers, axis=1, out=powers)
        out[i : i + step] = powers @ seq.coeffs
    return out


# ---------------------------------------------------------------------------
# kernel coefficients (spectral route)


def _pairwise_sum(values: np.ndarray) -> float:
    # np.sum uses pairwise accumulation for contiguous float arrays, which is
    # what the long-sum accuracy contract here relies on.
    return float(np.sum(values))


@lru_cache(maxsize=16)
def _cached_coefficients(tables: "ArithmeticTables", spec: KernelSpec) -> np.ndarray:
    N, P = spec.N, spec.P
    primes = tables.primes
    ps = primes[primes <= P]
    if ps.size == 0:
        raise ValueError(f"no primes <= {P}; need P >= 2 and tables that large")
    coef = np.zeros(2 * N + 1)
    for p in ps.tolist():
        q = p * p if spec.kind == "gstar" else p
        # k = index - N, so k % q == 0 exactly at index N mod q, step q.
        coef[(N % q) :: q] += float(q)
    coef /= ps.size
    if spec.kind == "h_truncated":
        lo = max(0, N - P)
        hi = min(2 * N, N + P)
        coef[lo : hi + 1] = 0.0
    coef.setflags(write=False)
    return coef


def kernel_coefficients(tables: "ArithmeticTables", spec: KernelSpec) -> np.ndarray:
    """Fourier coefficients c_k, k = -N..N, as a read-only length-2N+1 array.

    Index k + N stores c_k.  Defined for ``gstar`` (mean of the q-periodic
    spike trains q*[q | k] over q = p^2, p <= P), ``h`` (same over q = p),
    and ``h_truncated`` (``h`` with |k| <= P zeroed).  ``fejer`` and
    ``k_part3`` have no stored coefficient array here and raise ValueError.
    """
    if spec.kind not in ("gstar", "h", "h_truncated"):
        raise ValueError(f"kernel kind {spec.kind!r} has no coefficient array")
    if spec.P > tables.n_max:
        raise ValueError(f"tables cover n <= {tables.n_max} < P = {spec.P}")
    return _cached_coefficients(tables, spec)


def spectral_weights(tables: "ArithmeticTables", spec: KernelSpec) -> np.ndarray:
    """Weights (1 - |k|/N) * c_k, k = -N..N, of the kernel's expansion."""
    N = spec.N
    triangle = 1.0 - np.abs(np.arange(-N, N + 1)) / N
    if spec.kind == "fejer":
        return triangle
    return triangle * kernel_coefficients(tables, spec)


# ---------------------------------------------------------------------------
# kernel evaluation from translates (primary route)


@lru_cache(maxsize=16)
def _translate_scheme(tables: "ArithmeticTables", spec: KernelSpec):
    """(shifts, weights) so that the kernel is sum_i weights[i]*T_N(x - shifts[i]).

    Ordering is deterministic: ascending prime (or modulus q), then ascending
    residue a.  Weights are in T_N units; for ``k_part3`` they carry the
    factor N so that weight * T_N = mu(q) * |F_N|^2.
    """
    shifts: list[float] = []
    weights: list[float] = []
    if spec.kind == "fejer":
        return np.zeros(1), np.ones(1)
    if spec.kind in ("gstar", "h", "h_truncated"):
        primes = tables.primes
        ps = primes[primes <= spec.P]
        if ps.size == 0:
            raise ValueError(f"no primes <= {spec.P}")
        w = 1.0 / ps.size
        for p in ps.tolist():
            q = p * p if spec.kind == "gstar" else p
            for a in range(1, q + 1):
                shifts.append(a / q)
                weights.append(w)
    else:  # k_part3
        if spec.Q > tables.n_max:
            raise ValueError(f"tables cover n <= {tables.n_max} < Q = {spec.Q}")
        mob = tables.mobius
        for q in range(1, spec.Q + 1):
            m = int(mob[q])
            if m == 0:
                continue
            a = np.arange(1, q + 1)
            for ai in a[np.gcd(a, q) == 1].tolist():
                shifts.append(ai / q)
                weights.append(m * float(spec.N))
    sh = np.array(shifts)
    wt = np.array(weights)
    sh.setflags(write=False)
    wt.setflags(write=False)
    return sh, wt


def eval_kernel(tables: "ArithmeticTables", spec: KernelSpec, alpha: float) -> float:
    """Kernel value at one point, computed from the translate definition.

    This is the primary route; ``eval_kernel_spectral`` recomputes the same
    value from Fourier coefficients for all kinds except ``k_part3``.
    """
    a = float(alpha)
    if spec.kind == "fejer":
        return eval_T(spec.N, a)
    shifts, weights = _translate_scheme(tables, spec)
    vals = _fejer_values(spec.N, a - shifts)
    total = float(np.dot(weights, vals))
    if spec.kind == "h_truncated":
        total -= _low_frequency_value(tables, spec, a)
    return total


def _low_frequency_value(tables: "ArithmeticTables", spec: KernelSpec, alpha: float) -> float:
    """sum_{|k| <= P} (1 - |k|/N)*d_k*e(k alpha) for the h-kernel coefficients d."""
    full = KernelSpec("h", spec.N, P=spec.P)
    d = kernel_coefficients(tables, full)
    N, P = spec.N, spec.P
    top = min(P, N)
    k = np.arange(1, top + 1)
    dk = d[N + 1 : N + top + 1]
    total = d[N] + 2.0 * float(np.dot((1.0 - k / N) * dk, np.cos(TWO_PI * alpha * k)))
    return total


def eval_kernel_spectral(tables: "ArithmeticTables", spec: KernelSpec, alpha: float) -> float:
    """Kernel value from its Fourier expansion (independent check route).

    Raises ValueError for ``k_part3``, which is defined by translates only.
    """
    if spec.kind == "k_part3":
        raise ValueError("k_part3 has no spectral evaluation route here")
    N = spec.N
    w = spectral_weights(tables, spec)
    k = np.arange(1, N + 1)
    # Coefficients are even in k, so the sum folds onto cosines.
    return float(w[N] + 2.0 * np.dot(w[N + 1 :], np.cos(TWO_PI * float(alpha) * k)))


# ---------------------------------------------------------------------------
# uniform-grid evaluation


def _check_grid(M: int, budget: int) -> None:
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if M > budget:
        raise CapacityError(f"grid size {M} exceeds budget {budget}")


def grid_eval_sequence(
    seq: CoefficientSequence, M: int, budget: int = DEFAULT_GRID_BUDGET
) -> GridEvaluation:
    """S(j/M) for j = 0..M-1.

    Uses a zero-padded inverse FFT when M >= N + 1 (exact placement of the
    coefficients a_1..a_N into frequency bins), otherwise direct evaluation.
    """
    _check_grid(M, budget)
    if M >= seq.N + 1:
        x = np.zeros(M, dtype=np.complex128)
        x[1 : seq.N + 1] = seq.coeffs
        values = np.fft.ifft(x) * M
    else:
        values = eval_sequence(seq, np.arange(M) / M)
    return GridEvaluation(M=M, values=values, spec=seq)


def grid_eval_kernel(
    tables: "ArithmeticTables",
    spec: KernelSpec,
    M: int,
    budget: int = DEFAULT_GRID_BUDGET,
) -> GridEvaluation:
    """Kernel values on the grid j/M, j = 0..M-1, as a real array.

    For spectral kinds this is one transform over the 2N+1 coefficients:
    weights are folded into frequency bins modulo M (exact aliasing) and one
    inverse FFT produces all M values.  ``k_part3`` has no spectral route and
    is accumulated from shifted |F_N|^2 values instead.
    """
    _check_grid(M, budget)
    if spec.kind == "k_part3":
        values = _k_part3_grid(tables, spec, M)
        return GridEvaluation(M=M, values=values, spec=spec)
    w = spectral_weights(tables, spec)
    k = np.arange(-spec.N, spec.N + 1)
    bins = np.bincount(k % M, weights=w, minlength=M)
    v = np.fft.ifft(bins) * M
    scale = max(1.0, float(np.max(np.abs(v.real))))
    imag = float(np.max(np.abs(v.imag)))
    if imag > 1e-9 * scale:
        raise InvariantError(
            f"real kernel produced imaginary residue {imag:.3e} on grid M={M}"
        )
    return GridEvaluation(M=M, values=np.ascontiguousarray(v.real), spec=spec)


def _k_part3_grid(tables: "ArithmeticTables", spec: KernelSpec, M: int) -> np.ndarray:
    """Accumulate sum_q mu(q) sum_{(a,q)=1} |F_N(j/M - a/q)|^2 over the grid.

    |F_N(x)|^2 = sin^2(pi N x)/sin^2(pi x) is expanded by angle addition:
    the grid factors sin/cos(pi N j/M) and sin/cos(pi j/M) are computed once,
    each translate then costs a handful of multiplies per grid point.  Points
    with ||x|| < 1/(4N^2) (detected via |sin(pi x)| below the matching
    threshold) fall back to the direct sum, exactly as ``eval_F`` does.
    """
    N = spec.N
    shifts, weights = _translate_scheme(tables, spec)
    base = np.arange(M) / M
    sin_nb = np.sin((math.pi * N) * base)
    cos_nb = np.cos((math.pi * N) * base)
    sin_b = np.sin(math.pi * base)
    cos_b = np.cos(math.pi * base)
    thresh = math.sin(math.pi * min(0.25, 1.0 / (4.0 * N * N)))
    values = np.zeros(M)
    for s, w in zip(shifts.tolist(), weights.tolist()):
        phase_n = math.pi * N * s
        phase_1 = math.pi * s
        num = sin_nb * math.cos(phase_n) - cos_nb * math.sin(phase_n)
        den = sin_b * math.cos(phase_1) - cos_b * math.sin(phase_1)
        near = np.abs(den) < thresh
        if near.any():
            den = np.where(near, 1.0, den)
        f2 = (num / den) ** 2
        if near.any():
            for j in np.flatnonzero(near):
                f = eval_F(N, j / M - s)
                f2[j] = f.real * f.real + f.imag * f.imag
        values += w * f2
    # weights carry the factor N, values accumulated are weight * |F|^2 / N
    return values / N


def duality_gap(tables: "ArithmeticTables", spec: KernelSpec, alphas) -> float:
    """Worst relative gap between translate and spectral values at given points.

    The relative scale is max(1, |spectral value|) per point, so the check is
    meaningful even near zeros of the kernel.
    """
    worst = 0.0
    for a in np.atleast_1d(np.asarray(alphas, dtype=float)).tolist():
        lhs = eval_kernel(tables, spec, a)
        rhs = eval_kernel_spectral(tables, spec, a)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst
