"""Star products on the torus: truncated, exact, and their transforms.

Three product orientations are supported, all deformations of the pointwise
product with the same Poisson bracket at first order:

* ``STAR``: separation-of-variables product whose order-k term is

      (1/(2 pi i)^k) sum_{|I|=k} (1/I!) (d^k f / dy^I) (d^k g / dx^I)

* ``CHECK``: the opposite-separation partner, with x and y derivatives
  swapped and the conjugate constant (i/(2 pi))^k;

* ``MOYAL``: the symmetric Weyl-type product, order-k term

      (i/(4 pi))^k sum_{j=0..k} (-1)^{k-j} sum_{|I|=j, |J|=k-j}
          (1/(I! J!)) (d_x^I d_y^J f) (d_y^I d_x^J g).

On single exponentials e^{2 pi i (p.x + a.y)} all three sum to closed-form
phase factors, which is what ``star_exact`` uses; ``star_truncated`` goes
through the derivative formulas term by term, so the two routes check each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from .trigpoly import TrigPoly

# Truncation orders above this are refused: coefficient growth is factorial
# and double precision has long stopped meaning anything by then.
MAX_ORDER = 16


class Orientation(Enum):
    STAR = "star"
    CHECK = "check_star"
    MOYAL = "moyal"


@dataclass(frozen=True)
class HbarValue:
    """Admissible value of the deformation parameter: hbar = 1/k, k integer."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")

    @property
    def hbar(self) -> float:
        return 1.0 / self.k


@dataclass(frozen=True)
class HbarSeries:
    """Polynomial in hbar with trig-polynomial coefficients.

    ``coefficients[i]`` multiplies hbar^i; the truncation order is
    ``len(coefficients) - 1``.
    """

    n: int
    coefficients: tuple[TrigPoly, ...]

    def __post_init__(self):
        for c in self.coefficients:
            if c.n != self.n:
                raise ValueError("series coefficients live on a different torus")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, i: int) -> TrigPoly:
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return TrigPoly.zero(self.n)

    def evaluate(self, hbar: float) -> TrigPoly:
        total = TrigPoly.zero(self.n)
        scale = 1.0
        for c in self.coefficients:
            total = total + c.scale(scale)
            scale *= hbar
        return total

    def __add__(self, other: "HbarSeries") -> "HbarSeries":
        if self.n != other.n:
            raise ValueError("mixing series on different tori")
        size = max(len(self.coefficients), len(other.coefficients))
        return HbarSeries(
            self.n,
            tuple(self.coefficient(i) + other.coefficient(i) for i in range(size)),
        )

    def __sub__(self, other: "HbarSeries") -> "HbarSeries":
        if self.n != other.n:
            raise ValueError("mixing series on different tori")
        size = max(len(self.coefficients), len(other.coefficients))
        return HbarSeries(
            self.n,
            tuple(self.coefficient(i) - other.coefficient(i) for i in range(size)),
        )

    def l1_distance(self, other: "HbarSeries") -> float:
        diff = self - other
        return sum(c.l1_norm() for c in diff.coefficients)


def _check_order(order: int) -> int:
    if int(order) != order or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    if order > MAX_ORDER:
        raise ValueError(f"order {order} exceeds the supported cap {MAX_ORDER}")
    return int(order)


@lru_cache(maxsize=None)
def _multi_indices(total: int, slots: int) -> tuple[tuple[int, ...], ...]:
    if slots == 1:
        return ((total,),)
    out = []
    for first in range(total + 1):
        for rest in _multi_indices(total - first, slots - 1):
            out.append((first,) + rest)
    return tuple(out)


def _factorial_of(index: Sequence[int]) -> int:
    out = 1
    for v in index:
        out *= math.factorial(v)
    return out


def bidifferential(order: int, f: TrigPoly, g: TrigPoly, orientation: Orientation) -> TrigPoly:
    """Order-``order`` bidifferential term of the chosen product.

    Order 0 is the pointwise product for every orientation.
    """
    order = _check_order(order)
    f._check_same(g)
    n = f.n
    if order == 0:
        return f.multiply(g)
    if orientation is Orientation.STAR:
        const = (1.0 / (2j * math.pi)) ** order
        total = TrigPoly.zero(n)
        for I in _multi_indices(order, n):
            term = f.differentiate((), I).multiply(g.differentiate(I, ()))
            total = total + term.scale(const / _factorial_of(I))
        return total
    if orientation is Orientation.CHECK:
        const = (1j / (2.0 * math.pi)) ** order
        total = TrigPoly.zero(n)
        for I in _multi_indices(order, n):
            term = f.differentiate(I, ()).multiply(g.differentiate((), I))
            total = total + term.scale(const / _factorial_of(I))
        return total
    if orientation is Orientation.MOYAL:
        const = (1j / (4.0 * math.pi)) ** order
        total = TrigPoly.zero(n)
        for j in range(order + 1):
            sign = (-1.0) ** (order - j)
            for I in _multi_indices(j, n):
                df_left = f.differentiate(I, ())
                dg_right = g.differentiate((), I)
                for J in _multi_indices(order - j, n):
                    term = df_left.differentiate((), J).multiply(dg_right.differentiate(J, ()))
                    total = total + term.scale(const * sign / (_factorial_of(I) * _factorial_of(J)))
        return total
    raise TypeError(f"unknown orientation {orientation!r}")


def star_truncated(f: TrigPoly, g: TrigPoly, order: int, orientation: Orientation = Orientation.STAR) -> HbarSeries:
    """Product truncated at hbar^order, as a series in hbar."""
    order = _check_order(order)
    return HbarSeries(f.n, tuple(bidifferential(i, f, g, orientation) for i in range(order + 1)))


def star_formal(a: HbarSeries, b: HbarSeries, order: int, orientation: Orientation = Orientation.STAR) -> HbarSeries:
    """Product of two series, truncated at hbar^order."""
    order = _check_order(order)
    if a.n != b.n:
        raise ValueError("mixing series on different tori")
    coeffs = []
    for total in range(order + 1):
        acc = TrigPoly.zero(a.n)
        for m in range(total + 1):
            for i in range(total - m + 1):
                j = total - m - i
                fi = a.coefficient(i)
                gj = b.coefficient(j)
                if len(fi) == 0 or len(gj) == 0:
                    continue
                acc = acc + bidifferential(m, fi, gj, orientation)
        coeffs.append(acc)
    return HbarSeries(a.n, tuple(coeffs))


def star_exact(f: TrigPoly, g: TrigPoly, h: HbarValue, orientation: Orientation = Orientation.STAR) -> TrigPoly:
    """Convergent product at hbar = 1/k via closed-form phases.

    For f-term frequency (p, a) and g-term frequency (q, b) the product term
    sits at (p+q, a+b) with phase factor

        STAR:  e^{2 pi i hbar a.q}
        CHECK: e^{-2 pi i hbar p.b}
        MOYAL: e^{pi i hbar (a.q - p.b)}
    """
    f._check_same(g)
    hbar = h.hbar
    acc: dict = {}
    for (p, a), cf in f._coeffs.items():
        for (q, b), cg in g._coeffs.items():
            aq = sum(ai * qi for ai, qi in zip(a, q))
            pb = sum(pi_ * bi for pi_, bi in zip(p, b))
            if orientation is Orientation.STAR:
                phase = 2.0 * math.pi * hbar * aq
            elif orientation is Orientation.CHECK:
                phase = -2.0 * math.pi * hbar * pb
            elif orientation is Orientation.MOYAL:
                phase = math.pi * hbar * (aq - pb)
            else:
                raise TypeError(f"unknown orientation {orientation!r}")
            key = (
                tuple(u + v for u, v in zip(p, q)),
                tuple(u + v for u, v in zip(a, b)),
            )
            val = cf * cg * complex(math.cos(phase), math.sin(phase))
            acc[key] = acc.get(key, 0.0j) + val
    return TrigPoly(f.n, acc)


# -- Berezin transform -------------------------------------------------------


def mixed_laplacian(f: TrigPoly) -> TrigPoly:
    """(i / 2 pi) sum_i d^2 f / dx_i dy_i.

    On e^{2 pi i (p.x + a.y)} this multiplies by -2 pi i (p.a).
    """
    n = f.n
    out = TrigPoly.zero(n)
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        out = out + f.differentiate(e, e)
    return out.scale(1j / (2.0 * math.pi))


def berezin_truncated(f: TrigPoly, order: int) -> HbarSeries:
    """Series form of the Berezin transform: hbar^i term is (-Delta)^i f / i!."""
    order = _check_order(order)
    coeffs = [f]
    current = f
    for i in range(1, order + 1):
        current = mixed_laplacian(current).scale(-1.0)
        coeffs.append(current.scale(1.0 / math.factorial(i)))
    return HbarSeries(f.n, tuple(coeffs))


def berezin_exact(f: TrigPoly, h: HbarValue) -> TrigPoly:
    """Exact Berezin transform at hbar = 1/k.

    Multiplies the (p, a) amplitude by e^{+2 pi i hbar p.a}; this is the sign
    for which re-expressing dual-basis matrices in the primary basis agrees
    with quantizing the transformed function exactly.
    """
    hbar = h.hbar
    coeffs = {}
    for (p, a), c in f._coeffs.items():
        pa = sum(pi_ * ai for pi_, ai in zip(p, a))
        phase = 2.0 * math.pi * hbar * pa
        coeffs[(p, a)] = c * complex(math.cos(phase), math.sin(phase))
    return TrigPoly(f.n, coeffs)


# -- equivalence maps --------------------------------------------------------


def orientation_tensor(orientation: Orientation, n: int) -> np.ndarray:
    """2n x 2n matrix T with product = Mult o e^{hbar dT} on exponentials.

    Coordinates are ordered (x_1..x_n, y_1..y_n); entry T[i, j] weights the
    second-order operator acting as d/du_i on the left factor and d/du_j on
    the right factor.
    """
    T = np.zeros((2 * n, 2 * n), dtype=complex)
    if orientation is Orientation.STAR:
        for i in range(n):
            T[n + i, i] = 1.0 / (2j * math.pi)
    elif orientation is Orientation.CHECK:
        for i in range(n):
            T[i, n + i] = 1j / (2.0 * math.pi)
    elif orientation is Orientation.MOYAL:
        for i in range(n):
            T[i, n + i] = 1j / (4.0 * math.pi)
            T[n + i, i] = -1j / (4.0 * math.pi)
    else:
        raise TypeError(f"unknown orientation {orientation!r}")
    return T


def _second_order_operator(gamma: np.ndarray, f: TrigPoly) -> TrigPoly:
    n = f.n
    out = TrigPoly.zero(n)
    for i in range(2 * n):
        for j in range(2 * n):
            w = gamma[i, j]
            if w == 0:
                continue
            xo = [0] * n
            yo = [0] * n
            for idx in (i, j):
                if idx < n:
                    xo[idx] += 1
                else:
                    yo[idx - n] += 1
            out = out + f.differentiate(tuple(xo), tuple(yo)).scale(w)
    return out


def equivalence_map(gamma, order: int, f: TrigPoly) -> HbarSeries:
    """Formal map e^{(hbar/2) d_gamma} applied to f, truncated at hbar^order.

    ``gamma`` is a symmetric 2n x 2n complex matrix over coordinates
    (x_1..x_n, y_1..y_n); d_gamma = sum_{ij} gamma[i,j] d^2/du_i du_j.
    Maps with gamma = T_target - T_source intertwine the corresponding
    products order by order.
    """
    order = _check_order(order)
    gamma = np.asarray(gamma, dtype=complex)
    n = f.n
    if gamma.shape != (2 * n, 2 * n):
        raise ValueError(f"gamma must be {2 * n}x{2 * n}, got {gamma.shape}")
    if not np.allclose(gamma, gamma.T, rtol=1e-12, atol=1e-15):
        raise ValueError("gamma must be symmetric")
    coeffs = [f]
    current = f
    for i in range(1, order + 1):
        current = _second_order_operator(gamma, current)
        coeffs.append(current.scale(0.5 ** i / math.factorial(i)))
    return HbarSeries(f.n, tuple(coeffs))


def equivalence_map_series(gamma, order: int, series: HbarSeries) -> HbarSeries:
    """Apply the formal map to a series, truncating at hbar^order."""
    order = _check_order(order)
    coeffs = [TrigPoly.zero(series.n) for _ in range(order + 1)]
    for i, base in enumerate(series.coefficients[: order + 1]):
        if len(base) == 0:
            continue
        mapped = equivalence_map(gamma, order - i, base)
        for j, c in enumerate(mapped.coefficients):
            coeffs[i + j] = coeffs[i + j] + c
    return HbarSeries(series.n, tuple(coeffs))


# -- trace -------------------------------------------------------------------


def star_trace(f: TrigPoly, h: HbarValue) -> complex:
    """Trace functional of the deformed algebra: hbar^{-n} times the mean."""
    return (float(h.k) ** f.n) * f.mean
