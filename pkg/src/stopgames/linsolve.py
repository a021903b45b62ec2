"""Linear solvers for the average-node value systems.

Strategy-fixed game evaluation reduces to ``A v = b`` where row i reads
``2*v_i - v_j - v_k = const`` over the average nodes only, so A is sparse
with tiny integer entries.  Two solvers share that input shape:

* ``solve_exact`` returns Fractions.  Small systems go through dense
  rational elimination; larger ones are solved modulo several 31-bit
  primes, combined by CRT, and lifted back to rationals, which is orders
  of magnitude faster than rational pivoting.  Every exact solution is
  verified by substituting into the sparse rows, and any failure falls
  back to the always-correct rational elimination, so the fast path can
  never return a wrong answer silently.

* ``solve_float`` returns float64 values with one step of iterative
  refinement and a residual guarantee.

Rows are ``{column: coefficient}`` dicts with integer coefficients; the
right-hand side may mix ints and Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu


class SingularSystemError(RuntimeError):
    """The value system had no unique solution; impossible for well-formed
    stopping-game evaluations, so this signals a caller bug."""


def _is_prime(n: int) -> bool:
    # Deterministic Miller-Rabin, valid far beyond 2**64.
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _primes_below_2_31(count: int) -> list[int]:
    out = []
    candidate = (1 << 31) - 1
    while len(out) < count:
        if _is_prime(candidate):
            out.append(candidate)
        candidate -= 2
    return out


_PRIMES = _primes_below_2_31(40)


def _gauss_fractions(rows, rhs) -> list[Fraction]:
    """Dense rational Gaussian elimination; the reference exact path."""
    a = len(rows)
    m = [[Fraction(0)] * a + [Fraction(rhs[i])] for i in range(a)]
    for i, row in enumerate(rows):
        for j, c in row.items():
            m[i][j] = Fraction(c)
    for k in range(a):
        piv = next((r for r in range(k, a) if m[r][k] != 0), None)
        if piv is None:
            raise SingularSystemError(f"no pivot in column {k}")
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
        pk = m[k][k]
        for r in range(k + 1, a):
            f = m[r][k]
            if f == 0:
                continue
            ratio = f / pk
            mr, mk = m[r], m[k]
            for c in range(k, a + 1):
                mr[c] -= ratio * mk[c]
    x = [Fraction(0)] * a
    for k in range(a - 1, -1, -1):
        acc = m[k][a]
        mk = m[k]
        for c in range(k + 1, a):
            if mk[c]:
                acc -= mk[c] * x[c]
        x[k] = acc / m[k][k]
    return x


class _BadPrime(Exception):
    pass


def _solve_mod_prime(dense_a: np.ndarray, dense_b: np.ndarray, p: int) -> np.ndarray:
    """Gaussian elimination of [A|b] over GF(p) with int64 arithmetic.

    Entries stay below 2**31 so products fit int64; sums of reduced
    products stay far below 2**63.
    """
    a = dense_a.shape[0]
    m = np.concatenate([dense_a % p, (dense_b % p)[:, None]], axis=1).astype(np.int64)
    for k in range(a):
        nz = np.nonzero(m[k:, k])[0]
        if nz.size == 0:
            raise _BadPrime
        piv = k + int(nz[0])
        if piv != k:
            m[[k, piv]] = m[[piv, k]]
        inv = pow(int(m[k, k]), p - 2, p)
        m[k, k:] = m[k, k:] * inv % p
        below = m[k + 1 :, k]
        if below.size:
            m[k + 1 :, k:] = (m[k + 1 :, k:] - below[:, None] * m[k, k:][None, :]) % p
    x = np.zeros(a, dtype=np.int64)
    for k in range(a - 1, -1, -1):
        tail = int((m[k, k + 1 : a] * x[k + 1 :] % p).sum())
        x[k] = (int(m[k, a]) - tail) % p
    return x


def _crt(residues: list[np.ndarray], primes: list[int]) -> tuple[list[int], int]:
    xs = [int(r) for r in residues[0]]
    modulus = primes[0]
    for res, p in zip(residues[1:], primes[1:]):
        inv = pow(modulus % p, p - 2, p)
        for i in range(len(xs)):
            diff = (int(res[i]) - xs[i]) % p
            xs[i] += modulus * (diff * inv % p)
        modulus *= p
    return xs, modulus


def _rational_reconstruct(x: int, modulus: int, bound: int):
    """Extended-Euclid lift of ``x mod modulus`` to num/den with both
    bounded by ``bound``; None when no such fraction exists."""
    r0, t0 = modulus, 0
    r1, t1 = x % modulus, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound:
        return None
    num, den = r1, t1
    if den < 0:
        num, den = -num, -den
    g = gcd(num, den)
    if g > 1:
        num //= g
        den //= g
    if gcd(den, modulus) != 1:
        return None
    return Fraction(num, den)


def _verify(rows, rhs, x) -> bool:
    for row, b in zip(rows, rhs):
        acc = Fraction(0)
        for j, c in row.items():
            if c:
                acc += c * x[j]
        if acc != b:
            return False
    return True


def _solve_modular(rows, rhs) -> list[Fraction] | None:
    a = len(rows)
    dense_a = np.zeros((a, a), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, c in row.items():
            dense_a[i, j] = c
    dense_b = np.array(rhs, dtype=np.int64)

    # Hadamard-style bound on solution numerators/denominators: row norms
    # of A with the worst-case column swapped for b.
    bound_sq = 1
    for i, row in enumerate(rows):
        norm = sum(c * c for c in row.values()) + int(rhs[i]) ** 2
        bound_sq *= max(norm, 1)
    bound = isqrt(bound_sq) + 1
    need = 2 * bound * bound

    residues: list[np.ndarray] = []
    primes: list[int] = []
    modulus = 1
    for p in _PRIMES:
        if modulus > need:
            break
        try:
            residues.append(_solve_mod_prime(dense_a, dense_b, p))
        except _BadPrime:
            continue
        primes.append(p)
        modulus *= p
    if modulus <= need:
        return None
    xs, modulus = _crt(residues, primes)
    out = []
    for v in xs:
        f = _rational_reconstruct(v, modulus, bound)
        if f is None:
            return None
        out.append(f)
    return out


def solve_exact(rows, rhs) -> list[Fraction]:
    """Exact solution of the sparse integer system ``rows * x = rhs``."""
    a = len(rows)
    if a == 0:
        return []
    integral = all(isinstance(b, int) or getattr(b, "denominator", 0) == 1 for b in rhs)
    if a > 8 and integral:
        int_rhs = [int(b) for b in rhs]
        x = _solve_modular(rows, int_rhs)
        if x is not None and _verify(rows, int_rhs, x):
            return x
    return _gauss_fractions(rows, rhs)


def solve_float(rows, rhs, residual_bound: float = 1e-9) -> np.ndarray:
    """float64 solution with one refinement step and a residual check."""
    a = len(rows)
    if a == 0:
        return np.zeros(0)
    b = np.array([float(v) for v in rhs])
    if a <= 64:
        dense = np.zeros((a, a))
        for i, row in enumerate(rows):
            for j, c in row.items():
                dense[i, j] = c
        try:
            x = np.linalg.solve(dense, b)
            x += np.linalg.solve(dense, b - dense @ x)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(str(exc)) from exc
        residual = np.abs(dense @ x - b).max()
    else:
        coo_i, coo_j, coo_v = [], [], []
        for i, row in enumerate(rows):
            for j, c in row.items():
                coo_i.append(i)
                coo_j.append(j)
                coo_v.append(float(c))
        sparse = csc_matrix((coo_v, (coo_i, coo_j)), shape=(a, a))
        try:
            lu = splu(sparse)
        except RuntimeError as exc:
            raise SingularSystemError(str(exc)) from exc
        x = lu.solve(b)
        x += lu.solve(b - sparse @ x)
        residual = np.abs(sparse @ x - b).max()
    if not residual <= residual_bound:
        raise SingularSystemError(f"residual {residual:.3e} above {residual_bound:.1e}")
    return x
