"""Sieve-backed arithmetic tables and coefficient-sequence factories.

One linear sieve computes the smallest prime factor of every n <= n_max;
everything else (Mobius mu, Euler phi, von Mangoldt Lambda, the prime list)
is derived from that single array in one further pass.  Build once, share
across all experiments -- the tables object is immutable and cheap to pass
around.

Also here: Ramanujan sums c_q(n) in closed form and by direct summation
(two independent routes, kept apart for cross-checking), and the factory
turning a name like ``"mobius"`` or ``"chi3_on_primes"`` into a
:class:`~sievenorm.expsum.CoefficientSequence` with the right support tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError
from .expsum import TWO_PI_I, CoefficientSequence

#: Largest table size accepted by :func:`build_tables`.
TABLE_BUDGET = 1 << 26

SEQUENCE_KINDS = (
    "mobius",
    "mangoldt",
    "prime_indicator",
    "theta",
    "chi3",
    "chi3_on_primes",
    "ones",
    "random_complex",
    "squarefree_random",
)

# chi3 is the nontrivial character mod 3: 1, -1, 0 on residues 1, 2, 0.
_CHI3 = np.array([0.0, 1.0, -1.0])


@dataclass(frozen=True, eq=False)
class ArithmeticTables:
    """Read-only arithmetic tables for 0..n_max.

    ``spf[n]`` is the smallest prime factor of n (0 for n < 2); ``mobius``,
    ``phi`` and ``mangoldt`` are the usual mu(n), phi(n), Lambda(n); ``primes``
    lists all primes <= n_max in increasing order.
    """

    n_max: int
    spf: np.ndarray
    mobius: np.ndarray
    phi: np.ndarray
    mangoldt: np.ndarray
    primes: np.ndarray

    def is_prime(self, n: int) -> bool:
        if not 0 <= n <= self.n_max:
            raise ValueError(f"n={n} outside tables (n_max={self.n_max})")
        return n >= 2 and int(self.spf[n]) == n

    def factor(self, n: int) -> list[tuple[int, int]]:
        """Prime factorization [(p, exponent), ...] read off the spf table."""
        if not 1 <= n <= self.n_max:
            raise ValueError(f"n={n} outside 1..{self.n_max}")
        out: list[tuple[int, int]] = []
        while n > 1:
            p = int(self.spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def divisors(self, n: int) -> list[int]:
        """All positive divisors of n, sorted."""
        divs = [1]
        for p, e in self.factor(n):
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def build_tables(n_max: int) -> ArithmeticTables:
    """Sieve up to n_max (inclusive) and derive all tables.

    n_max must be at least 2; sizes beyond the module budget (2^26) raise
    :class:`CapacityError` rather than silently thrashing memory.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if n_max > TABLE_BUDGET:
        raise CapacityError(f"n_max {n_max} exceeds table budget {TABLE_BUDGET}")
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(2, math.isqrt(n_max) + 1):
        if spf[i] == 0:
            sl = spf[i * i :: i]
            sl[sl == 0] = i
    unmarked = spf[2:] == 0
    spf[2:][unmarked] = np.arange(2, n_max + 1)[unmarked]
    primes = np.flatnonzero(spf == np.arange(n_max + 1))
    primes = primes[primes >= 2]

    mobius = np.zeros(n_max + 1, dtype=np.int64)
    phi = np.zeros(n_max + 1, dtype=np.int64)
    mobius[1] = 1
    phi[1] = 1
    spf_list = spf.tolist()  # plain ints make the derivation loop ~3x faster
    mob_list = mobius.tolist()
    phi_list = phi.tolist()
    for n in range(2, n_max + 1):
        p = spf_list[n]
        m = n // p
        if m % p == 0:
            mob_list[n] = 0
            phi_list[n] = phi_list[m] * p
        else:
            mob_list[n] = -mob_list[m]
            phi_list[n] = phi_list[m] * (p - 1)
    mobius = np.array(mob_list, dtype=np.int64)
    phi = np.array(phi_list, dtype=np.int64)

    mangoldt = np.zeros(n_max + 1)
    for p in primes.tolist():
        logp = math.log(p)
        pk = p
        while pk <= n_max:
            mangoldt[pk] = logp
            pk *= p

    for arr in (spf, mobius, phi, mangoldt, primes):
        arr.setflags(write=False)
    return ArithmeticTables(
        n_max=n_max, spf=spf, mobius=mobius, phi=phi, mangoldt=mangoldt, primes=primes
    )


def prime_count(tables: ArithmeticTables, x: int) -> int:
    """pi(x): number of primes <= x.  Requires 2 <= x <= n_max."""
    if not 2 <= x <= tables.n_max:
        raise ValueError(f"x={x} outside 2..{tables.n_max}")
    return int(np.searchsorted(tables.primes, x, side="right"))


def squarefree_count(tables: ArithmeticTables, Q: int) -> int:
    """Number of squarefree integers in 1..Q."""
    if not 1 <= Q <= tables.n_max:
        raise ValueError(f"Q={Q} outside 1..{tables.n_max}")
    return int(np.count_nonzero(tables.mobius[1 : Q + 1]))


def ramanujan_sum(tables: ArithmeticTables, q: int, n: int) -> int:
    """c_q(n) by the closed form mu(q/g) * phi(q) / phi(q/g), g = gcd(q, |n|).

    Evenness in n is built in via |n|; n = 0 gives g = q and hence phi(q).
    Always an integer.
    """
    if not 1 <= q <= tables.n_max:
        raise ValueError(f"q={q} outside 1..{tables.n_max}")
    g = math.gcd(q, abs(n))
    d = q // g
    mu = int(tables.mobius[d])
    if mu == 0:
        return 0
    return mu * int(tables.phi[q]) // int(tables.phi[d])


@lru_cache(maxsize=512)
def _coprime_residues(q: int) -> np.ndarray:
    a = np.arange(1, q + 1)
    out = a[np.gcd(a, q) == 1]
    out.setflags(write=False)
    return out


def ramanujan_sum_direct(q: int, n: int) -> int:
    """c_q(n) = sum over residues a coprime to q of e(a n / q), summed directly.

    Independent oracle for :func:`ramanujan_sum`: no sieve tables, no
    multiplicative identities.  Angles are reduced exactly via (a*n) mod q
    before any floating-point work; the imaginary part must vanish to 1e-9
    and the real part must land within 1e-6 of an integer.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    n_mod = int(n) % q  # e() is 1-periodic, and a * n_mod cannot overflow
    angles = ((_coprime_residues(q) * n_mod) % q) / q
    total = complex(np.sum(np.exp(TWO_PI_I * angles)))
    if abs(total.imag) > 1e-9:
        raise ArithmeticError(f"c_{q}({n}): imaginary residue {total.imag:.3e}")
    nearest = round(total.real)
    if abs(total.real - nearest) > 1e-6:
        raise ArithmeticError(f"c_{q}({n}): real part {total.real!r} not near an integer")
    return int(nearest)


def _squarefree_mask(tables: ArithmeticTables, N: int) -> np.ndarray:
    return tables.mobius[1 : N + 1] != 0


def coefficient_sequence(
    tables: ArithmeticTables, kind: str, N: int, seed: int = 0
) -> CoefficientSequence:
    """Build the named coefficient sequence a_1..a_N with its support tag.

    Deterministic kinds ignore ``seed``.  Random kinds (``random_complex``,
    ``squarefree_random``) draw magnitudes uniform in [1/2, 1] and phases
    uniform in [0, 2*pi) from ``numpy.random.default_rng(seed)``, then mask
    to the declared support.
    """
    if kind not in SEQUENCE_KINDS:
        raise ValueError(f"unknown sequence kind {kind!r}")
    if not 1 <= N <= tables.n_max:
        raise ValueError(f"N={N} outside 1..{tables.n_max}")
    n = np.arange(1, N + 1)
    support = "all"
    label = kind
    if kind == "mobius":
        coeffs = tables.mobius[1 : N + 1].astype(np.complex128)
        support = "squarefree"
    elif kind == "mangoldt":
        coeffs = tables.mangoldt[1 : N + 1].astype(np.complex128)
    elif kind == "prime_indicator":
        coeffs = (tables.spf[1 : N + 1] == n).astype(np.complex128)
        support = "primes"
    elif kind == "theta":
        mask = tables.spf[1 : N + 1] == n
        logs = np.zeros(N)
        logs[mask] = np.log(n[mask])
        coeffs = logs.astype(np.complex128)
        support = "primes"
    elif kind == "chi3":
        coeffs = _CHI3[n % 3].astype(np.complex128)
    elif kind == "chi3_on_primes":
        mask = tables.spf[1 : N + 1] == n
        coeffs = (_CHI3[n % 3] * mask).astype(np.complex128)
        support = "primes"
    elif kind == "ones":
        coeffs = np.ones(N, dtype=np.complex128)
    else:
        rng = np.random.default_rng(seed)
        mag = rng.uniform(0.5, 1.0, N)
        phase = rng.uniform(0.0, 2.0 * math.pi, N)
        coeffs = mag * np.exp(1j * phase)
        if kind == "squarefree_random":
            coeffs = coeffs * _squarefree_mask(tables, N)
            support = "squarefree"
        label = f"{kind}(seed={seed})"
    return CoefficientSequence(N=N, coeffs=coeffs, support=support, label=label)
