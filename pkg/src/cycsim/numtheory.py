"""Exact integer number theory: factorization, Euclid, totient, primitive roots,
CRT composition/decomposition, congruence solving, and the classical discrete-log
oracle used to cross-check every quantum stage.

All functions are pure and operate on plain ints; nothing here is probabilistic.
Scale target is desk-sized moduli (p <= 2^16), so trial division and brute-force
discrete logs are deliberate choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class DomainError(ValueError):
    """Input outside the documented domain of an operation."""


@dataclass(frozen=True)
class Factorization:
    """n as a product of prime powers, ordered ascending by p**a."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        for p, a in self.factors:
            prod *= p**a
        if prod != self.n:
            raise DomainError(f"factors do not multiply to {self.n}")
        powers = [p**a for p, a in self.factors]
        if powers != sorted(powers) or len(set(p for p, _ in self.factors)) != len(self.factors):
            raise DomainError("factors must be distinct primes ordered by p**a")

    @property
    def prime_powers(self) -> tuple[int, ...]:
        return tuple(p**a for p, a in self.factors)


def factorize(n: int) -> Factorization:
    """Trial-division factorization; components sorted ascending by p**a."""
    if n < 2:
        raise DomainError(f"cannot factorize {n}: need n >= 2")
    m = n
    raw: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            raw[d] = raw.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        raw[m] = raw.get(m, 0) + 1
    factors = tuple(sorted(raw.items(), key=lambda pa: pa[0] ** pa[1]))
    return Factorization(n, factors)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (d, u, v) with u*a + v*b = d = gcd(a, b) >= 1."""
    if a == 0 and b == 0:
        raise DomainError("gcd(0, 0) is undefined")
    old_r, r = a, b
    old_u, u = 1, 0
    old_v, v = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_u, u = u, old_u - q * u
        old_v, v = v, old_v - q * v
    if old_r < 0:
        old_r, old_u, old_v = -old_r, -old_u, -old_v
    return old_r, old_u, old_v


def modinv(a: int, m: int) -> int:
    d, u, _ = extended_gcd(a % m, m)
    if d != 1:
        raise DomainError(f"{a} is not invertible mod {m}")
    return u % m


def euler_totient(f: Factorization) -> int:
    phi = 1
    for p, a in f.factors:
        phi *= p ** (a - 1) * (p - 1)
    return phi


def totient(n: int) -> int:
    return euler_totient(factorize(n)) if n > 1 else 1


def multiplicative_order(a: int, p: int) -> int:
    """Order of a in the multiplicative group mod p (p prime, gcd(a,p)=1)."""
    if a % p == 0:
        raise DomainError("element divisible by modulus has no order")
    order = p - 1
    for q, _ in factorize(p - 1).factors:
        while order % q == 0 and pow(a, order // q, p) == 1:
            order //= q
    return order


def find_primitive_root(p: int) -> int:
    """Smallest primitive root mod p (determinism: smallest is canonical)."""
    if not is_prime(p) or p < 3:
        raise DomainError(f"{p} is not an odd prime")
    qs = [q for q, _ in factorize(p - 1).factors]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise DomainError(f"no primitive root mod {p}")  # unreachable for prime p


def element_of_order(m: int, p: int) -> int:
    """An element of exact multiplicative order m mod p; requires m | p-1."""
    if (p - 1) % m != 0:
        raise DomainError(f"{m} does not divide {p - 1}")
    g = find_primitive_root(p)
    return pow(g, (p - 1) // m, p)


@dataclass(frozen=True)
class CrtComponent:
    m: int  # prime-power modulus m_k
    M: int  # cofactor (p-1)/m_k
    n: int  # inverse of M mod m, n*M = 1 (mod m)


@dataclass(frozen=True)
class CrtBasis:
    """Chinese-remainder data for Z_m with pairwise-coprime prime-power moduli."""

    modulus: int
    components: tuple[CrtComponent, ...]

    def __post_init__(self):
        prod = 1
        for c in self.components:
            prod *= c.m
            if c.M != self.modulus // c.m or (c.n * c.M) % c.m != 1 % c.m:
                raise DomainError("inconsistent CRT component")
        if prod != self.modulus:
            raise DomainError("component moduli do not multiply to the modulus")

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(c.m for c in self.components)


def crt_basis(f: Factorization) -> CrtBasis:
    comps = []
    for p, a in f.factors:
        m = p**a
        M = f.n // m
        comps.append(CrtComponent(m=m, M=M, n=modinv(M, m) if m > 1 else 0))
    return CrtBasis(f.n, tuple(comps))


def crt_decompose(s: int, basis: CrtBasis) -> tuple[int, ...]:
    if not 0 <= s < basis.modulus:
        raise DomainError(f"{s} outside Z_{basis.modulus}")
    return tuple(s % c.m for c in basis.components)


def crt_compose(residues: tuple[int, ...] | list[int], basis: CrtBasis) -> int:
    if len(residues) != len(basis.components):
        raise DomainError("residue count does not match basis")
    total = 0
    for r, c in zip(residues, basis.components):
        if not 0 <= r < c.m:
            raise DomainError(f"residue {r} outside Z_{c.m}")
        total += c.n * c.M * r
    return total % basis.modulus


def _merge_congruence(c1: int, m1: int, c2: int, m2: int) -> tuple[int, int] | None:
    """Intersect x = c1 (mod m1) with x = c2 (mod m2); None if incompatible."""
    g = math.gcd(m1, m2)
    if (c2 - c1) % g != 0:
        return None
    lcm = m1 // g * m2
    m2g = m2 // g
    t = 0 if m2g == 1 else (((c2 - c1) // g) * modinv(m1 // g, m2g)) % m2g
    return (c1 + m1 * t) % lcm, lcm


def solve_congruences(eqs: list[tuple[int, int]], modulus: int) -> list[int]:
    """All x in Z_modulus with a*x = b (mod modulus) for every (a, b).

    Each congruence is reduced to standard form x = c (mod modulus/gcd(a, modulus))
    and the reductions are intersected.  An unsolvable congruence yields the empty
    list rather than an error.
    """
    cur_c, cur_m = 0, 1  # running solution x = cur_c (mod cur_m)
    for a, b in eqs:
        a %= modulus
        b %= modulus
        d = math.gcd(a, modulus)  # = modulus when a = 0
        if b % d != 0:
            return []
        m_red = modulus // d
        c = 0 if m_red == 1 else (modinv(a // d, m_red) * (b // d)) % m_red
        merged = _merge_congruence(cur_c, cur_m, c, m_red)
        if merged is None:
            return []
        cur_c, cur_m = merged
    return sorted((cur_c + k * cur_m) % modulus for k in range(modulus // cur_m))


def multibase_expand(s_k: int, p_k: int, a_k: int) -> list[int]:
    """Base-p_k digits [h_0 .. h_{a_k-1}] of s_k, least significant first."""
    if not 0 <= s_k < p_k**a_k:
        raise DomainError(f"{s_k} outside Z_{p_k ** a_k}")
    digits = []
    for _ in range(a_k):
        digits.append(s_k % p_k)
        s_k //= p_k
    return digits


def classical_dlog(p: int, g: int, b: int) -> int:
    """Brute-force index s with g**s = b (mod p); correctness oracle at desk scale."""
    if not 1 <= b < p:
        raise DomainError(f"{b} outside the multiplicative group mod {p}")
    acc = 1
    for s in range(p - 1):
        if acc == b:
            return s
        acc = (acc * g) % p
    raise DomainError(f"{b} is not a power of {g} mod {p}")


@dataclass(frozen=True)
class CyclicGroupSpec:
    """Group data for one problem instance: prime p, primitive root g, CRT basis
    of Z_{p-1}, and the subgroup generators g**M_k."""

    p: int
    g: int
    basis: CrtBasis
    subgroup_generators: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if multiplicative_order(self.g, self.p) != self.p - 1:
            raise DomainError(f"{self.g} is not a primitive root mod {self.p}")

    @property
    def r(self) -> int:
        return len(self.basis.components)

    @property
    def largest_order(self) -> int:
        return self.basis.components[-1].m


def make_group_spec(p: int, g: int | None = None) -> CyclicGroupSpec:
    if not is_prime(p) or p < 3:
        raise DomainError(f"{p} is not an odd prime")
    if g is None:
        g = find_primitive_root(p)
    basis = crt_basis(factorize(p - 1))
    gens = tuple(pow(g, c.M, p) for c in basis.components)
    return CyclicGroupSpec(p=p, g=g, basis=basis, subgroup_generators=gens)
