"""Dirichlet characters modulo q.

A character is stored by its exponents on the cyclic generators of
(Z/q)^*: odd prime powers contribute one generator (a primitive root), and
2^k contributes -1 (k >= 2) and 5 (k >= 3).  Values are kept as integer
exponents of the primitive phi(q)-th root of unity; complex numbers appear
only when :meth:`DirichletCharacter.evaluate` or :meth:`values` is called.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product

import numpy as np

from .errors import InvalidModulusError, PreconditionError

MODULUS_CAP = 10**9
_TABLE_LIMIT = 1 << 22


def factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def squarefree_kernel(n: int) -> int:
    """Product of the distinct primes dividing n."""
    return math.prod(p for p, _ in factorize(n))


def _primitive_root_prime_power(p: int, e: int) -> int:
    pm1 = [r for r, _ in factorize(p - 1)]
    g = 2
    while True:
        if all(pow(g, (p - 1) // r, p) != 1 for r in pm1):
            break
        g += 1
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _root_of_unity(k: int, m: int) -> complex:
    k %= m
    if (4 * k) % m == 0:
        return (1, 1j, -1, -1j)[(4 * k) // m]
    return cmath.exp(2j * math.pi * k / m)


@dataclass(frozen=True)
class _Component:
    """One cyclic factor of (Z/q)^*, living on the prime power ``pe``."""

    p: int
    e: int
    pe: int
    local_gen: int      # generator modulo pe
    order: int
    gen: int            # lifted to modulo q
    kind: str           # "odd", "minus1", "five"

    @cached_property
    def table(self) -> np.ndarray:
        """Discrete log modulo pe of every residue (-1 off the group)."""
        t = np.full(self.pe, -1, dtype=np.int64)
        if self.kind == "odd":
            x = 1
            for k in range(self.order):
                t[x] = k
                x = x * self.local_gen % self.pe
        else:
            # (Z/2^e)^* = <-1> x <5>; both components read off the same walk
            half = self.pe // 4 if self.e >= 3 else 1
            x = 1
            for b in range(half):
                for a in (0, 1):
                    n = x if a == 0 else (-x) % self.pe
                    t[n] = a if self.kind == "minus1" else b
                x = x * 5 % self.pe
        return t

    def dlog(self, n: int) -> int:
        r = n % self.pe
        if self.pe <= _TABLE_LIMIT:
            return int(self.table[r])
        from sympy.ntheory import discrete_log

        if self.kind == "odd":
            return int(discrete_log(self.pe, r, self.local_gen))
        a = 0 if r % 4 == 1 else 1
        if self.kind == "minus1":
            return a
        r = r if a == 0 else (-r) % self.pe
        return int(discrete_log(self.pe, r, 5))


@dataclass(frozen=True)
class _Structure:
    modulus: int
    phi: int
    factors: tuple
    components: tuple

    @cached_property
    def dlog_table(self) -> np.ndarray:
        """(q, ncomp) discrete logs of every residue; rows of -1 off the group."""
        q = self.modulus
        r = np.arange(q, dtype=np.int64)
        out = np.empty((q, len(self.components)), dtype=np.int64)
        for i, c in enumerate(self.components):
            out[:, i] = c.table[r % c.pe]
        coprime = np.gcd(r, q) == 1
        out[~coprime] = -1
        return out

    def dlogs(self, n: int):
        if math.gcd(n, self.modulus) != 1:
            return None
        if self.modulus <= _TABLE_LIMIT:
            return tuple(int(v) for v in self.dlog_table[n % self.modulus])
        return tuple(c.dlog(n) for c in self.components)


@lru_cache(maxsize=4096)
def _structure(q: int) -> _Structure:
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise InvalidModulusError(f"modulus must be a positive integer, got {q!r}")
    q = int(q)
    if q > MODULUS_CAP:
        raise InvalidModulusError(f"modulus {q} exceeds cap {MODULUS_CAP}")
    factors = tuple(factorize(q))
    comps = []

    def lift(local, pe):
        # x = local (mod pe), x = 1 (mod q/pe)
        rest = q // pe
        if rest == 1:
            return local % q
        return (local * rest * pow(rest, -1, pe) + pe * pow(pe, -1, rest)) % q

    for p, e in factors:
        pe = p**e
        if p == 2:
            if e >= 2:
                comps.append(_Component(2, e, pe, pe - 1, 2, lift(pe - 1, pe), "minus1"))
            if e >= 3:
                comps.append(_Component(2, e, pe, 5, pe // 4, lift(5, pe), "five"))
        else:
            g = _primitive_root_prime_power(p, e)
            comps.append(_Component(p, e, pe, g, pe - pe // p, lift(g, pe), "odd"))
    return _Structure(q, euler_phi(q), factors, tuple(comps))


def _valuation(n: int, p: int) -> int:
    v = 0
    while n and n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    component_exponents: tuple
    _st: _Structure = field(repr=False, compare=False, hash=False)

    @classmethod
    def from_exponents(cls, q: int, exponents) -> "DirichletCharacter":
        st = _structure(q)
        exps = tuple(int(a) % c.order for a, c in zip(exponents, st.components))
        if len(exps) != len(st.components):
            raise PreconditionError(
                f"modulus {q} has {len(st.components)} generators, got {len(exponents)} exponents"
            )
        return cls(st.modulus, exps, st)

    @classmethod
    def trivial(cls, q: int) -> "DirichletCharacter":
        st = _structure(q)
        return cls(st.modulus, (0,) * len(st.components), st)

    # -- exact arithmetic -------------------------------------------------
    @property
    def root_order(self) -> int:
        """Values are powers of exp(2 pi i / root_order) (= phi(q))."""
        return self._st.phi

    @cached_property
    def _weights(self) -> tuple:
        m = self._st.phi
        return tuple(a * (m // c.order) for a, c in zip(self.component_exponents, self._st.components))

    def exponent(self, n: int):
        """k with chi(n) = exp(2 pi i k / phi(q)), or None when gcd(n, q) > 1."""
        logs = self._st.dlogs(int(n))
        if logs is None:
            return None
        return sum(w * l for w, l in zip(self._weights, logs)) % self._st.phi

    @cached_property
    def exponent_table(self) -> np.ndarray:
        """Exponents at residues 0..q-1, -1 where gcd(n, q) > 1."""
        st = self._st
        if st.modulus > _TABLE_LIMIT:
            raise PreconditionError("value table unavailable for moduli above 2**22")
        d = st.dlog_table
        w = np.array(self._weights, dtype=np.int64)
        e = (d @ w) % st.phi if w.size else np.zeros(st.modulus, dtype=np.int64)
        e[d[:, 0] < 0 if w.size else np.gcd(np.arange(st.modulus), st.modulus) != 1] = -1
        return e

    def evaluate(self, n: int) -> complex:
        k = self.exponent(n)
        if k is None:
            return 0
        return _root_of_unity(k, self._st.phi)

    __call__ = evaluate

    def values(self) -> np.ndarray:
        """Complex values at residues 0..q-1."""
        e = self.exponent_table
        m = self._st.phi
        roots = np.array([_root_of_unity(k, m) for k in range(m)], dtype=np.complex128)
        out = np.zeros(self.modulus, dtype=np.complex128)
        ok = e >= 0
        out[ok] = roots[e[ok]]
        return out

    # -- structure --------------------------------------------------------
    @property
    def is_trivial(self) -> bool:
        return not any(self.component_exponents)

    @cached_property
    def order(self) -> int:
        o = 1
        for a, c in zip(self.component_exponents, self._st.components):
            o = math.lcm(o, c.order // math.gcd(a, c.order))
        return o

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    @cached_property
    def parity(self) -> int:
        """0 for even characters, 1 for odd ones (chi(-1) = (-1)^parity)."""
        if self.modulus <= 2:
            return 0
        k = self.exponent(self.modulus - 1)
        return 0 if k == 0 else 1

    @cached_property
    def index(self) -> int:
        idx = 0
        for a, c in zip(self.component_exponents, self._st.components):
            idx = idx * c.order + a
        return idx

    @property
    def label(self) -> str:
        return f"{self.modulus}.{self.index}"

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.modulus,
            tuple((-a) % c.order for a, c in zip(self.component_exponents, self._st.components)),
            self._st,
        )

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            return induced_product(self, other)
        return DirichletCharacter(
            self.modulus,
            tuple(
                (a + b) % c.order
                for a, b, c in zip(self.component_exponents, other.component_exponents, self._st.components)
            ),
            self._st,
        )

    @cached_property
    def conductor(self) -> int:
        f = 1
        comps = self._st.components
        by_prime: dict[int, list] = {}
        for a, c in zip(self.component_exponents, comps):
            by_prime.setdefault(c.p, []).append((a, c))
        for p, parts in by_prime.items():
            e = parts[0][1].e
            if p != 2:
                a = parts[0][0]
                if a:
                    f *= p ** max(1, e - _valuation(a, p))
                continue
            a_m1 = next((a for a, c in parts if c.kind == "minus1"), 0)
            b = next((a for a, c in parts if c.kind == "five"), 0)
            if b:
                f *= 2 ** (e - _valuation(b, 2))
            elif a_m1:
                f *= 4
        return f

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def lift(self, modulus: int) -> "DirichletCharacter":
        """The character modulo a multiple of q induced by this one."""
        if modulus % self.modulus:
            raise PreconditionError(f"{modulus} is not a multiple of {self.modulus}")
        st = _structure(modulus)
        m_src = self._st.phi
        exps = []
        for c in st.components:
            k = self.exponent(c.gen)
            exps.append((k * c.order) // m_src)
        return DirichletCharacter(modulus, tuple(exps), st)

    @cached_property
    def primitive(self) -> "DirichletCharacter":
        """The primitive character inducing this one."""
        f = self.conductor
        if f == self.modulus:
            return self
        st = _structure(f)
        q, m_src = self.modulus, self._st.phi
        exps = []
        for c in st.components:
            n = c.gen
            while math.gcd(n, q) != 1:
                n += f
            k = self.exponent(n)
            num = k * c.order
            if num % m_src:
                raise AssertionError("character does not factor through its conductor")
            exps.append(num // m_src)
        return DirichletCharacter(f, tuple(exps), st)

    def __repr__(self):
        return f"DirichletCharacter({self.label}, exps={self.component_exponents}, conductor={self.conductor})"


class CharacterGroup:
    """All phi(q) characters modulo q in a fixed order (trivial first)."""

    def __init__(self, q: int):
        self._st = _structure(q)
        self.modulus = self._st.modulus

    @property
    def phi(self) -> int:
        return self._st.phi

    @property
    def generator_table(self) -> list[dict]:
        return [
            {"prime": c.p, "prime_power": c.pe, "generator": c.gen, "local_generator": c.local_gen, "order": c.order}
            for c in self._st.components
        ]

    @cached_property
    def characters(self) -> list[DirichletCharacter]:
        orders = [c.order for c in self._st.components]
        return [DirichletCharacter(self.modulus, exps, self._st) for exps in product(*(range(o) for o in orders))]

    def __iter__(self):
        return iter(self.characters)

    def __len__(self):
        return self._st.phi

    def __getitem__(self, i) -> DirichletCharacter:
        return self.characters[i]

    def trivial(self) -> DirichletCharacter:
        return DirichletCharacter.trivial(self.modulus)

    def real_characters(self) -> list[DirichletCharacter]:
        choices = [(0, c.order // 2) if c.order % 2 == 0 else (0,) for c in self._st.components]
        return [DirichletCharacter(self.modulus, exps, self._st) for exps in product(*choices)]

    def primitive_characters(self) -> list[DirichletCharacter]:
        return [chi for chi in self.characters if chi.is_primitive]


def character_group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


def evaluate(chi: DirichletCharacter, n: int) -> complex:
    return chi.evaluate(n)


def conductor_and_primitive(chi: DirichletCharacter):
    return chi.conductor, chi.primitive


def induced_product(chi: DirichletCharacter, psi: DirichletCharacter) -> DirichletCharacter:
    """Primitive character inducing the pointwise product chi * psi."""
    L = math.lcm(chi.modulus, psi.modulus)
    a, b = chi.lift(L), psi.lift(L)
    return (a * b).primitive


def gauss_sum(chi: DirichletCharacter) -> complex:
    q = chi.modulus
    if q == 1:
        return 1.0 + 0j
    vals = chi.values()
    k = np.arange(q)
    return complex(np.sum(vals * np.exp(2j * np.pi * k / q)))


def root_number(chi: DirichletCharacter) -> complex:
    """epsilon(chi) = tau(chi) / (i^a sqrt(q)) for primitive chi."""
    if not chi.is_primitive:
        raise PreconditionError("root number is defined for primitive characters")
    return gauss_sum(chi) / ((1j ** chi.parity) * math.sqrt(chi.modulus))


def primitive_characters_up_to(qmax: int, qmin: int = 1) -> list[DirichletCharacter]:
    out = []
    for q in range(qmin, qmax + 1):
        if q % 4 == 2:
            continue
        out.extend(CharacterGroup(q).primitive_characters())
    return out


def character_from_label(label: str) -> DirichletCharacter:
    q, idx = (int(x) for x in label.split("."))
    return CharacterGroup(q)[idx]
