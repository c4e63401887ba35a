"""Exact coefficient algebra for trigonometric polynomials on the torus.

A trigonometric polynomial on R^{2n}/Z^{2n} is a finite sum

    f(x, y) = sum_{p,q in Z^n} c_{p,q} e^{2 pi i (p.x + q.y)}

stored as a sparse map from integer frequency pairs (p, q) to complex
amplitudes.  All ring operations (sum, product, derivative, Poisson bracket)
act exactly on coefficients; grid evaluation exists only so tests can
cross-check the coefficient routes against brute-force pointwise ones.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

FreqVector = tuple[int, ...]

TWO_PI = 2.0 * math.pi

# Amplitudes below PRUNE_REL * (largest amplitude) are dropped after every
# operation so coefficient maps stay finite under repeated arithmetic.
PRUNE_REL = 1e-14


class DimensionMismatchError(ValueError):
    """Raised when operands live on tori of different dimension."""


def _as_freq(v: Sequence[int], n: int, what: str = "frequency") -> FreqVector:
    t = tuple(int(c) for c in v)
    if len(t) != n:
        raise DimensionMismatchError(f"{what} has length {len(t)}, expected {n}")
    for orig, cast in zip(v, t):
        if cast != orig:
            raise ValueError(f"{what} components must be integers, got {orig!r}")
    return t


def _as_point(v, n: int, what: str) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.shape != (n,):
        raise DimensionMismatchError(f"{what} has shape {arr.shape}, expected ({n},)")
    return tuple(arr)


@dataclass(frozen=True)
class FibrewiseCoefficient:
    """One x-frequency slice of a trig polynomial.

    For fixed m in Z^n this is the function of the fibre variable

        y -> sum_q c_{m,q} e^{2 pi i q.y},

    1-periodic in each y_i by construction.
    """

    m: FreqVector
    profile: Mapping[FreqVector, complex]

    def evaluate(self, y) -> complex:
        n = len(self.m)
        yy = _as_point(y, n, "y")
        total = 0.0 + 0.0j
        for q, c in self.profile.items():
            total += c * cmath.exp(2j * math.pi * sum(qi * yi for qi, yi in zip(q, yy)))
        return total

    def as_trig_poly(self) -> "TrigPoly":
        n = len(self.m)
        zero = (0,) * n
        return TrigPoly(n, {(zero, q): c for q, c in self.profile.items()})


class TrigPoly:
    """Sparse trigonometric polynomial on R^{2n}/Z^{2n}.

    Coefficients are keyed by pairs of integer frequency vectors
    ``((p_1..p_n), (q_1..q_n))`` and iterated in lexicographic key order, so
    serialization and repr are reproducible.  Instances are treated as
    immutable: every operation returns a new object.
    """

    __slots__ = ("n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping | Iterable = ()):
        if int(n) != n or n < 1:
            raise ValueError(f"torus half-dimension n must be a positive integer, got {n!r}")
        n = int(n)
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[tuple[FreqVector, FreqVector], complex] = {}
        for (p, q), c in items:
            key = (_as_freq(p, n, "x-frequency"), _as_freq(q, n, "y-frequency"))
            acc[key] = acc.get(key, 0.0j) + complex(c)
        self.n = n
        self._coeffs = _prune(acc)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "TrigPoly":
        return cls(n)

    @classmethod
    def constant(cls, n: int, value: complex) -> "TrigPoly":
        z = (0,) * n
        return cls(n, {(z, z): value})

    @classmethod
    def harmonic(cls, n: int, p: Sequence[int], q: Sequence[int], amplitude: complex = 1.0) -> "TrigPoly":
        """Single exponential ``amplitude * e^{2 pi i (p.x + q.y)}``."""
        return cls(n, {(tuple(p), tuple(q)): amplitude})

    # -- inspection --------------------------------------------------------

    def terms(self) -> list[tuple[tuple[FreqVector, FreqVector], complex]]:
        """Coefficient items sorted lexicographically by (p, q)."""
        return sorted(self._coeffs.items())

    def __iter__(self) -> Iterator:
        return iter(self.terms())

    def __len__(self) -> int:
        return len(self._coeffs)

    def coeff(self, p: Sequence[int], q: Sequence[int]) -> complex:
        key = (_as_freq(p, self.n, "x-frequency"), _as_freq(q, self.n, "y-frequency"))
        return self._coeffs.get(key, 0.0j)

    @property
    def mean(self) -> complex:
        """The (0,0) amplitude: the average of f over the torus."""
        z = (0,) * self.n
        return self._coeffs.get((z, z), 0.0j)

    def x_bandwidth(self) -> int:
        return max((max(map(abs, p)) for (p, _q) in self._coeffs), default=0)

    def y_bandwidth(self) -> int:
        return max((max(map(abs, q)) for (_p, q) in self._coeffs), default=0)

    def bandwidth(self) -> int:
        return max(self.x_bandwidth(), self.y_bandwidth())

    def l1_norm(self) -> float:
        return sum(abs(c) for c in self._coeffs.values())

    def max_abs(self) -> float:
        return max((abs(c) for c in self._coeffs.values()), default=0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self.n == other.n and self._coeffs == other._coeffs

    __hash__ = None

    def l1_distance(self, other: "TrigPoly") -> float:
        self._check_same(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return sum(abs(self._coeffs.get(k, 0.0j) - other._coeffs.get(k, 0.0j)) for k in keys)

    def isclose(self, other: "TrigPoly", tol: float = 1e-10) -> bool:
        return self.l1_distance(other) <= tol

    def __repr__(self) -> str:
        return f"TrigPoly(n={self.n}, terms={len(self._coeffs)})"

    # -- arithmetic --------------------------------------------------------

    def _check_same(self, other: "TrigPoly") -> None:
        if self.n != other.n:
            raise DimensionMismatchError(f"mixing n={self.n} with n={other.n}")

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        self._check_same(other)
        acc = dict(self._coeffs)
        for k, c in other._coeffs.items():
            acc[k] = acc.get(k, 0.0j) + c
        return TrigPoly(self.n, acc)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1.0)

    def scale(self, value: complex) -> "TrigPoly":
        value = complex(value)
        return TrigPoly(self.n, {k: c * value for k, c in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return self.multiply(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def multiply(self, other: "TrigPoly") -> "TrigPoly":
        """Pointwise product by convolution of coefficient maps."""
        self._check_same(other)
        acc: dict[tuple[FreqVector, FreqVector], complex] = {}
        for (p1, q1), c1 in self._coeffs.items():
            for (p2, q2), c2 in other._coeffs.items():
                key = (
                    tuple(a + b for a, b in zip(p1, p2)),
                    tuple(a + b for a, b in zip(q1, q2)),
                )
                acc[key] = acc.get(key, 0.0j) + c1 * c2
        return TrigPoly(self.n, acc)

    def conjugate(self) -> "TrigPoly":
        return TrigPoly(
            self.n,
            {
                (tuple(-a for a in p), tuple(-b for b in q)): c.conjugate()
                for (p, q), c in self._coeffs.items()
            },
        )

    def differentiate(self, x_orders: Sequence[int] = (), y_orders: Sequence[int] = ()) -> "TrigPoly":
        """Mixed partial derivative d^{|I|+|J|} f / dx^I dy^J.

        ``x_orders`` and ``y_orders`` are multi-indices of length n (empty
        means no derivative in that block).  Each exponential picks up the
        factor prod_j (2 pi i p_j)^{I_j} (2 pi i q_j)^{J_j}.
        """
        n = self.n
        ix = _as_order(x_orders, n)
        iy = _as_order(y_orders, n)
        if not any(ix) and not any(iy):
            return self
        acc = {}
        for (p, q), c in self._coeffs.items():
            factor = 1.0 + 0.0j
            dead = False
            for freq, order in zip(p + q, ix + iy):
                if order == 0:
                    continue
                if freq == 0:
                    dead = True
                    break
                factor *= (2j * math.pi * freq) ** order
            if not dead:
                acc[(p, q)] = acc.get((p, q), 0.0j) + c * factor
        return TrigPoly(n, acc)

    # -- structure ---------------------------------------------------------

    def fibrewise_coefficient(self, m: Sequence[int]) -> FibrewiseCoefficient:
        """Profile of the x-frequency m: y -> sum_q c_{m,q} e^{2 pi i q.y}."""
        mm = _as_freq(m, self.n, "x-frequency")
        profile = {q: c for (p, q), c in self._coeffs.items() if p == mm}
        return FibrewiseCoefficient(mm, profile)

    def x_frequencies(self) -> list[FreqVector]:
        return sorted({p for (p, _q) in self._coeffs})

    def evaluate(self, x, y) -> complex:
        xx = _as_point(x, self.n, "x")
        yy = _as_point(y, self.n, "y")
        total = 0.0 + 0.0j
        for (p, q), c in self._coeffs.items():
            phase = sum(pi_ * xi for pi_, xi in zip(p, xx))
            phase += sum(qi * yi for qi, yi in zip(q, yy))
            total += c * cmath.exp(2j * math.pi * phase)
        return total

    # -- serialization -----------------------------------------------------

    def to_records(self) -> list[dict]:
        """Lex-ordered list of {"p": [...], "q": [...], "re": .., "im": ..}."""
        return [
            {"p": list(p), "q": list(q), "re": c.real, "im": c.imag}
            for (p, q), c in self.terms()
        ]

    @classmethod
    def from_records(cls, n: int, records: Iterable[Mapping]) -> "TrigPoly":
        coeffs = []
        for rec in records:
            coeffs.append(((tuple(rec["p"]), tuple(rec["q"])), complex(rec["re"], rec.get("im", 0.0))))
        return cls(n, coeffs)


def _as_order(orders: Sequence[int], n: int) -> tuple[int, ...]:
    if len(orders) == 0:
        return (0,) * n
    t = tuple(int(o) for o in orders)
    if len(t) != n:
        raise DimensionMismatchError(f"derivative multi-index has length {len(t)}, expected {n}")
    if any(o < 0 for o in t):
        raise ValueError("derivative orders must be non-negative")
    return t


def _prune(coeffs: dict) -> dict:
    live = {k: c for k, c in coeffs.items() if c != 0.0}
    if not live:
        return {}
    cutoff = PRUNE_REL * max(abs(c) for c in live.values())
    return {k: c for k, c in live.items() if abs(c) >= cutoff}


def poisson_bracket(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    """{f, g} = sum_i (df/dx_i dg/dy_i - df/dy_i dg/dx_i)."""
    f._check_same(g)
    n = f.n
    out = TrigPoly.zero(n)
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        out = out + f.differentiate(e, ()).multiply(g.differentiate((), e))
        out = out - f.differentiate((), e).multiply(g.differentiate(e, ()))
    return out


def random_trig_poly(
    rng: np.random.Generator, n: int, bandwidth: int, decay: float = 3.0
) -> TrigPoly:
    """Random polynomial with full box support |p_i|, |q_i| <= bandwidth.

    Amplitudes are drawn uniformly on the unit disc (radius sqrt(U), uniform
    angle) and damped by (1 + |p|^2 + |q|^2)^(-decay/2), the spectral profile
    of a random smooth function; keys are visited in a fixed order so a
    seeded generator reproduces the result.  ``decay=0`` gives a flat box.
    """
    if bandwidth < 0:
        raise ValueError("bandwidth must be non-negative")
    span = range(-bandwidth, bandwidth + 1)
    keys = []

    def _box(depth, prefix, sink):
        if depth == 0:
            sink.append(prefix)
            return
        for v in span:
            _box(depth - 1, prefix + (v,), sink)

    ps: list[FreqVector] = []
    _box(n, (), ps)
    for p in ps:
        for q in ps:
            keys.append((p, q))
    coeffs = {}
    for key in keys:
        r = math.sqrt(rng.uniform())
        theta = rng.uniform(0.0, TWO_PI)
        p, q = key
        weight = (1.0 + sum(v * v for v in p) + sum(v * v for v in q)) ** (-decay / 2.0)
        coeffs[key] = r * weight * cmath.exp(1j * theta)
    return TrigPoly(n, coeffs)
