"""Dirichlet character groups mod q and elementary arithmetic functions.

Characters are stored through exact integer exponents of a primitive
root of unity (value = e^{2*pi*i*m/L} with L the group exponent), so
orthogonality holds to float rounding and enumeration is reproducible:
the group is CRT-decomposed with the least primitive root per odd prime
power and the <-1, 5> generators for powers of two, and characters are
listed in lexicographic order of their generator exponents (principal
character first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .common import CapacityError

MAX_GROUP_ORDER = 10_000


def factorize(n):
    """Prime factorization [(p, e), ...] by trial division, p ascending."""
    fac = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            fac.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        fac.append((n, 1))
    return fac


def euler_phi(n):
    phi = 1
    for p, e in factorize(n):
        phi *= (p - 1) * p ** (e - 1)
    return phi


def count_square_roots_of_unity(q):
    """Number of solutions of x^2 = 1 (mod q) in [1, q]."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if q == 1:
        return 1
    f = 1
    for p, e in factorize(q):
        if p == 2:
            f *= 1 if e == 1 else (2 if e == 2 else 4)
        else:
            f *= 2
    return f


def von_mangoldt(n):
    """log p if n = p^k for a prime p and k >= 1, else 0."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return 0.0
    p = None
    d = 2
    while d * d <= n:
        if n % d == 0:
            p = d
            break
        d += 1 if d == 2 else 2
    if p is None:
        return math.log(n)  # n itself prime
    m = n
    while m % p == 0:
        m //= p
    return math.log(p) if m == 1 else 0.0


def _primitive_root_mod_p(p):
    """Least primitive root mod an odd prime p."""
    fac = [f for f, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in fac):
            return g
    raise ArithmeticError(f"no primitive root mod {p}")  # unreachable


def _primitive_root_mod_pe(p, e):
    """Least-root lift: a primitive root mod p^e for odd p."""
    g = _primitive_root_mod_p(p)
    if e == 1:
        return g
    # g generates mod p^2 iff g^(p-1) != 1 mod p^2; then it works for all e
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


class _Component:
    """One CRT factor of (Z/q)^*: holds discrete logs and cyclic orders."""

    def __init__(self, pe, orders, dlog):
        self.modulus = pe
        self.orders = orders      # tuple of cyclic orders (1 or 2 entries)
        self.dlog = dlog          # residue mod pe -> tuple of exponents


def _build_component(p, e):
    pe = p ** e
    if p == 2:
        if e == 1:
            return _Component(2, (), {1: ()})
        if e == 2:
            return _Component(4, (2,), {1: (0,), 3: (1,)})
        # (Z/2^e)^* = <-1> x <5>
        half = 2 ** (e - 2)
        dlog = {}
        x = 1
        for b in range(half):
            dlog[x] = (0, b)
            dlog[pe - x] = (1, b)
            x = (x * 5) % pe
        return _Component(pe, (2, half), dlog)
    g = _primitive_root_mod_pe(p, e)
    order = (p - 1) * p ** (e - 1)
    dlog = {}
    x = 1
    for k in range(order):
        dlog[x] = (k,)
        x = (x * g) % pe
    return _Component(pe, (order,), dlog)


@dataclass(frozen=True)
class DirichletCharacter:
    """A single character, materialized as a complex value per residue."""

    q: int
    index: int
    exponents: tuple          # generator exponents, lexicographic id
    values: np.ndarray = field(repr=False, compare=False)  # length q, complex
    is_principal: bool
    parity: int               # 0 even (chi(-1)=1), 1 odd

    def __call__(self, n):
        return self.values[n % self.q]

    def on(self, n):
        """Vectorized chi(n) for an integer ndarray."""
        return self.values[np.asarray(n) % self.q]


class CharacterTable:
    """The full group of Dirichlet characters mod q.

    Immutable after construction; characters are indexable and iterable,
    with the principal character at index 0.
    """

    def __init__(self, q):
        if q < 3:
            raise ValueError(f"modulus must be >= 3, got {q}")
        phi = euler_phi(q)
        if phi > MAX_GROUP_ORDER:
            raise CapacityError(
                f"phi({q}) = {phi} exceeds the capacity limit {MAX_GROUP_ORDER}")
        self.q = q
        self.phi = phi
        comps = [_build_component(p, e) for p, e in factorize(q)]
        self._orders = tuple(o for c in comps for o in c.orders)
        L = math.lcm(*self._orders) if self._orders else 1
        self._unity_order = L

        # integer exponent table: for each coprime residue r, the vector of
        # discrete logs across components, premultiplied by L/order
        coprime = [r for r in range(1, q + 1) if math.gcd(r, q) == 1]
        logs = np.zeros((len(coprime), len(self._orders)), dtype=np.int64)
        for i, r in enumerate(coprime):
            col = 0
            for c in comps:
                for j, o in enumerate(c.orders):
                    logs[i, col] = c.dlog[r % c.modulus][j] * (L // o)
                    col += 1
        self._coprime = np.array([r % q for r in coprime], dtype=np.int64)
        self._logs = logs

        roots = np.exp(2j * np.pi * np.arange(L) / L)
        self._characters = []
        for index, exps in enumerate(self._exponent_tuples()):
            # chi(r) = e(sum_j k_j * dlog_j(r) / o_j), held as an exact
            # integer multiple of 1/L before materializing to complex
            m = (logs @ np.array(exps, dtype=np.int64)) % L
            vals = np.zeros(q, dtype=np.complex128)
            vals[self._coprime] = roots[m]
            parity = int(round((1 - vals[(q - 1) % q].real) / 2)) if q > 1 else 0
            self._characters.append(DirichletCharacter(
                q=q, index=index, exponents=tuple(exps), values=vals,
                is_principal=all(k == 0 for k in exps), parity=parity))

    def _exponent_tuples(self):
        if not self._orders:
            yield ()
            return
        radix = self._orders

        def rec(prefix, rest):
            if not rest:
                yield tuple(prefix)
                return
            for k in range(rest[0]):
                yield from rec(prefix + [k], rest[1:])

        yield from rec([], list(radix))

    def __len__(self):
        return self.phi

    def __iter__(self):
        return iter(self._characters)

    def __getitem__(self, i):
        return self._characters[i]

    @property
    def principal(self):
        return self._characters[0]

    def coprime_residues(self):
        return [int(r) for r in sorted(self._coprime)]

    def conjugate_index(self, i):
        """Index of the conjugate character (generator exponents negated)."""
        exps = self._characters[i].exponents
        conj = tuple((-k) % o for k, o in zip(exps, self._orders))
        stride = 1
        idx = 0
        for k, o in zip(reversed(conj), reversed(self._orders)):
            idx += k * stride
            stride *= o
        return idx


@lru_cache(maxsize=64)
def build_characters(q):
    """Construct (and cache) the character group mod q; q >= 3."""
    return CharacterTable(q)
