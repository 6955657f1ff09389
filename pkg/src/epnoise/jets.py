"""Truncated Taylor polynomials in four formal variables (jets).

Used to differentiate characteristic functions exactly: the four variables
stand for (alpha1, alpha2, alpha1*, alpha2*) treated as independents.  A jet
keeps every coefficient of total degree <= order and drops the rest, so sums
and products of equal-order jets stay in the algebra, and exp() of a jet with
zero constant term terminates after `order` powers.
"""
from __future__ import annotations

import cmath
import math

__all__ = ["Jet4", "NVARS"]

NVARS = 4
_ZERO = (0, 0, 0, 0)


class Jet4:
    """Sparse polynomial {exponent 4-tuple: complex coefficient}, truncated by total degree."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: dict[tuple[int, int, int, int], complex] | None = None):
        if order < 0:
            raise ValueError(f"jet order must be >= 0, got {order}")
        self.order = int(order)
        self.coeffs: dict[tuple[int, int, int, int], complex] = {}
        if coeffs:
            for key, val in coeffs.items():
                if len(key) != NVARS or any(k < 0 for k in key):
                    raise ValueError(f"bad exponent tuple {key}")
                if sum(key) <= self.order and val != 0:
                    self.coeffs[tuple(key)] = complex(val)

    @classmethod
    def constant(cls, value: complex, order: int) -> "Jet4":
        return cls(order, {_ZERO: value})

    @classmethod
    def variable(cls, index: int, order: int) -> "Jet4":
        """The monomial x_index, index in 0..3."""
        if not 0 <= index < NVARS:
            raise ValueError(f"variable index must be in 0..3, got {index}")
        key = tuple(1 if i == index else 0 for i in range(NVARS))
        return cls(order, {key: 1.0})

    def coefficient(self, key: tuple[int, int, int, int]) -> complex:
        return self.coeffs.get(tuple(key), 0.0 + 0.0j)

    def derivative_at_zero(self, orders: tuple[int, int, int, int]) -> complex:
        """Mixed partial d^orders / dx^orders evaluated at 0 (coefficient times factorials)."""
        fac = 1.0
        for k in orders:
            fac *= math.factorial(k)
        return self.coefficient(orders) * fac

    def __add__(self, other):
        out = dict(self.coeffs)
        if isinstance(other, Jet4):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            for key, val in other.coeffs.items():
                out[key] = out.get(key, 0.0) + val
        else:
            out[_ZERO] = out.get(_ZERO, 0.0) + complex(other)
        return Jet4(self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet4(self.order, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet4) else -complex(other))

    def __mul__(self, other):
        if not isinstance(other, Jet4):
            z = complex(other)
            return Jet4(self.order, {k: v * z for k, v in self.coeffs.items()})
        if other.order != self.order:
            raise ValueError("jet orders differ")
        out: dict[tuple[int, int, int, int], complex] = {}
        for ka, va in self.coeffs.items():
            for kb, vb in other.coeffs.items():
                key = (ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2], ka[3] + kb[3])
                if key[0] + key[1] + key[2] + key[3] <= self.order:
                    out[key] = out.get(key, 0.0) + va * vb
        return Jet4(self.order, out)

    __rmul__ = __mul__

    def exp(self) -> "Jet4":
        """exp of the jet: exact truncated series, finite because the
        zero-constant-term part is nilpotent at this order."""
        const = self.coeffs.get(_ZERO, 0.0 + 0.0j)
        rest = Jet4(self.order, {k: v for k, v in self.coeffs.items() if k != _ZERO})
        result = Jet4.constant(1.0, self.order)
        power = Jet4.constant(1.0, self.order)
        for k in range(1, self.order + 1):
            power = power * rest * (1.0 / k)
            if not power.coeffs:
                break
            result = result + power
        return result * cmath.exp(const)

    def __repr__(self):
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in sorted(self.coeffs.items()))
        return f"Jet4(order={self.order}, {{{terms}}})"
