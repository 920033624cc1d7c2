"""Exact polynomial support for the spectral routines.

Characteristic polynomials are computed over Q(i) (Faddeev-LeVerrier), and
Gaussian-rational roots are extracted exactly.  Root finding is a two-stage
pipeline:

1. polish high-precision root approximations (mpmath) of the squarefree part,
   scale by the denominator lcm so every rational root becomes a Gaussian
   integer, round, and confirm by exact evaluation;
2. if any root escapes stage 1, fall back to the definitive norm-divisor
   search: candidates numerator/denominator run over the Z[i] divisors of the
   constant and leading coefficients of the scaled squarefree part.

Roots that survive either stage are certified by exact arithmetic, so the
output never depends on floating point.  A nonzero remaining degree means the
matrix has genuinely non-Gaussian-rational eigenvalues.
"""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

import mpmath

from .matrix import EXACT, Matrix, mat_add, mat_mul, scalar_mul, trace
from .scalars import GaussianRational, GR_ONE, GR_ZERO, rational

Poly = List[GaussianRational]  # ascending coefficients; index = power


# ---------------------------------------------------------------------------
# basic polynomial arithmetic over Q(i)
# ---------------------------------------------------------------------------

def poly_trim(p: Poly) -> Poly:
    while len(p) > 1 and p[-1].is_zero():
        p = p[:-1]
    return p


def poly_degree(p: Poly) -> int:
    return len(poly_trim(p)) - 1


def poly_eval(p: Poly, z: GaussianRational) -> GaussianRational:
    acc = GR_ZERO
    for c in reversed(p):
        acc = acc * z + c
    return acc


def poly_deriv(p: Poly) -> Poly:
    if len(p) <= 1:
        return [GR_ZERO]
    return [GaussianRational(c.re * k, c.im * k) for k, c in enumerate(p) if k > 0]


def poly_divmod(p: Poly, d: Poly) -> Tuple[Poly, Poly]:
    d = poly_trim(d)
    if d == [GR_ZERO]:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    dd = len(d) - 1
    lead = d[-1]
    quot = [GR_ZERO] * max(1, len(p) - dd)
    for k in range(len(p) - 1, dd - 1, -1):
        if rem[k].is_zero():
            continue
        factor = rem[k] / lead
        quot[k - dd] = factor
        for i in range(dd + 1):
            rem[k - dd + i] = rem[k - dd + i] - factor * d[i]
    return poly_trim(quot), poly_trim(rem[:dd] or [GR_ZERO])


def poly_monic(p: Poly) -> Poly:
    p = poly_trim(p)
    lead = p[-1]
    if lead == GR_ONE:
        return p
    return [c / lead for c in p]


def poly_gcd(a: Poly, b: Poly) -> Poly:
    a, b = poly_trim(a), poly_trim(b)
    while b != [GR_ZERO]:
        _, r = poly_divmod(a, b)
        a, b = b, r
    return poly_monic(a)


def squarefree_part(p: Poly) -> Poly:
    """p / gcd(p, p'): same roots, all simple."""
    g = poly_gcd(p, poly_deriv(p))
    if poly_degree(g) == 0:
        return poly_monic(p)
    q, r = poly_divmod(p, g)
    assert r == [GR_ZERO]
    return poly_monic(q)


def charpoly(a: Matrix) -> Poly:
    """Monic characteristic polynomial det(xI - a), ascending coefficients."""
    if a.backend != EXACT:
        raise ValueError("exact characteristic polynomial requires the exact backend")
    if not a.is_square():
        raise ValueError("characteristic polynomial requires a square matrix")
    n = a.rows
    coeffs = [GR_ZERO] * (n + 1)
    coeffs[n] = GR_ONE
    if n == 0:
        return [GR_ONE]
    from .matrix import mat_add, mat_mul, scalar_mul, Matrix as _M

    ident = _M.identity(n, EXACT)
    m = a
    c = -trace(m)
    coeffs[n - 1] = c
    for k in range(2, n + 1):
        m = mat_mul(a, mat_add(m, scalar_mul(c, ident)))
        t = trace(m)
        c = GaussianRational(-t.re / k, -t.im / k)
        coeffs[n - k] = c
    return coeffs


# ---------------------------------------------------------------------------
# integer factorisation (for the norm-divisor fallback)
# ---------------------------------------------------------------------------

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
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


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    import random

    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g, r, q = 1, 1, 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factor_int(n: int) -> Dict[int, int]:
    """Prime factorisation of n >= 1."""
    out: Dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_brent(m)
        stack.append(d)
        stack.append(m // d)
    return out


# ---------------------------------------------------------------------------
# Gaussian integer helpers (pairs of Python ints)
# ---------------------------------------------------------------------------

def _g_mul(x, y):
    a, b = x
    c, d = y
    return (a * c - b * d, a * d + b * c)


def _g_norm(x) -> int:
    return x[0] * x[0] + x[1] * x[1]


def _g_divides(d, z) -> bool:
    n = _g_norm(d)
    a = z[0] * d[0] + z[1] * d[1]
    b = z[1] * d[0] - z[0] * d[1]
    return a % n == 0 and b % n == 0


def _g_divexact(z, d):
    n = _g_norm(d)
    return ((z[0] * d[0] + z[1] * d[1]) // n, (z[1] * d[0] - z[0] * d[1]) // n)


def _g_mod(x, y):
    """Remainder of nearest-integer division; norm strictly decreases."""
    n = _g_norm(y)
    a = x[0] * y[0] + x[1] * y[1]
    b = x[1] * y[0] - x[0] * y[1]
    qa = (2 * a + n) // (2 * n)
    qb = (2 * b + n) // (2 * n)
    q = (qa, qb)
    return (x[0] - (q[0] * y[0] - q[1] * y[1]), x[1] - (q[0] * y[1] + q[1] * y[0]))


def _g_gcd(x, y):
    while y != (0, 0):
        x, y = y, _g_mod(x, y)
    return x


def _gaussian_prime_over(p: int):
    """A Gaussian prime dividing the rational prime p."""
    if p == 2:
        return (1, 1)
    if p % 4 == 3:
        return (p, 0)
    # p = 1 mod 4 splits; find a square root of -1 mod p
    k = 2
    while pow(k, (p - 1) // 2, p) != p - 1:
        k += 1
    x = pow(k, (p - 1) // 4, p)
    return _g_gcd((p, 0), (x, 1))


def gaussian_divisors(z) -> List[tuple]:
    """All divisors of z in Z[i], up to unit multiples; z must be nonzero."""
    if z == (0, 0):
        raise ValueError("zero has no divisor lattice")
    factors: List[Tuple[tuple, int]] = []
    for p, e in factor_int(_g_norm(z)).items():
        if p == 2:
            factors.append(((1, 1), e))
        elif p % 4 == 3:
            factors.append(((p, 0), e // 2))
        else:
            pi = _gaussian_prime_over(p)
            a = 0
            w = z
            while _g_divides(pi, w):
                w = _g_divexact(w, pi)
                a += 1
            factors.append((pi, a))
            pibar = (pi[0], -pi[1])
            if a < e:
                factors.append((pibar, e - a))
    divisors = [(1, 0)]
    for pi, e in factors:
        new = []
        for d in divisors:
            cur = d
            for _ in range(e + 1):
                new.append(cur)
                cur = _g_mul(cur, pi)
        divisors = new
    seen = set()
    out = []
    for d in divisors:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


_UNITS = [(1, 0), (0, 1), (-1, 0), (0, -1)]


# ---------------------------------------------------------------------------
# Gaussian-rational roots
# ---------------------------------------------------------------------------

def _den_lcm(p: Poly) -> int:
    d = 1
    for c in p:
        d = math.lcm(d, int(c.re.denominator), int(c.im.denominator))
    return d


def _scaled_int_coeffs(p: Poly, scale: int) -> List[tuple]:
    out = []
    for c in p:
        re = c.re * scale
        im = c.im * scale
        out.append((int(re.numerator), int(im.numerator)))
    return out


def _root_multiplicity(p: Poly, root: GaussianRational) -> Tuple[int, Poly]:
    """Divide (x - root) out of p as often as it divides exactly."""
    mult = 0
    linear = [-root, GR_ONE]
    while poly_degree(p) >= 1:
        q, r = poly_divmod(p, linear)
        if r != [GR_ZERO]:
            break
        p = q
        mult += 1
    return mult, p


def _mpmath_candidates(p_sf: Poly, lcm_den: int) -> List[GaussianRational]:
    """Round scaled high-precision roots of the squarefree part to Z[i]/lcm."""
    deg = poly_degree(p_sf)
    if deg == 0:
        return []
    candidates: List[GaussianRational] = []
    for dps in (40, 80, 160, 320):
        try:
            with mpmath.workdps(dps):
                coeffs = []
                for c in reversed(p_sf):  # polyroots wants descending order
                    re = mpmath.mpf(int(c.re.numerator)) / mpmath.mpf(int(c.re.denominator))
                    im = mpmath.mpf(int(c.im.numerator)) / mpmath.mpf(int(c.im.denominator))
                    coeffs.append(mpmath.mpc(re, im))
                roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=dps * 2)
                got = []
                ok = True
                for r in roots:
                    y = r * lcm_den
                    a = int(mpmath.nint(y.real))
                    b = int(mpmath.nint(y.imag))
                    # reject when the approximation is not close to the lattice
                    if abs(y.real - a) > 0.25 and abs(y.real - a) < 0.75:
                        ok = False
                    got.append(GaussianRational(rational(a, lcm_den), rational(b, lcm_den)))
                if ok:
                    candidates = got
                    break
        except (mpmath.libmp.NoConvergence, ZeroDivisionError, ValueError):
            continue
    seen = set()
    out = []
    for c in candidates:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def _divisor_candidates(p_sf: Poly) -> List[GaussianRational]:
    """Every possible Gaussian-rational root of the scaled squarefree part."""
    lcm_den = _den_lcm(p_sf)
    coeffs = _scaled_int_coeffs(p_sf, lcm_den)
    const = coeffs[0]
    lead = coeffs[-1]
    if const == (0, 0):  # zero roots are stripped before we get here
        raise ValueError("unexpected zero constant coefficient")
    out = []
    seen = set()
    for num in gaussian_divisors(const):
        for den in gaussian_divisors(lead):
            base = GaussianRational(rational(num[0]), rational(num[1])) / GaussianRational(
                rational(den[0]), rational(den[1])
            )
            for u in _UNITS:
                cand = base * GaussianRational(u[0], u[1])
                if cand not in seen:
                    seen.add(cand)
                    out.append(cand)
    return out


def gaussian_rational_roots(p: Poly) -> Tuple[List[Tuple[GaussianRational, int]], int]:
    """All Gaussian-rational roots of p with multiplicities.

    Returns (roots, remaining_degree); remaining_degree > 0 exactly when p has
    roots outside Q(i).
    """
    p = poly_monic(p)
    roots: List[Tuple[GaussianRational, int]] = []

    # peel off the root at zero first so constant coefficients are nonzero
    zero_mult = 0
    while len(p) > 1 and p[0].is_zero():
        p = p[1:]
        zero_mult += 1
    if zero_mult:
        roots.append((GR_ZERO, zero_mult))
    if poly_degree(p) == 0:
        return roots, 0

    p_sf = squarefree_part(p)
    lcm_den = _den_lcm(p_sf)
    for cand in _mpmath_candidates(p_sf, lcm_den):
        if poly_eval(p_sf, cand).is_zero():
            mult, p = _root_multiplicity(p, cand)
            if mult:
                roots.append((cand, mult))

    if poly_degree(p) > 0:
        # definitive fallback on whatever is left
        p_sf = squarefree_part(p)
        for cand in _divisor_candidates(p_sf):
            if poly_eval(p_sf, cand).is_zero():
                mult, p = _root_multiplicity(p, cand)
                if mult:
                    roots.append((cand, mult))

    return roots, poly_degree(p)
