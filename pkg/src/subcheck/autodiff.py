"""Forward-mode jets: truncated multivariate Taylor expansions up to third order.

A ``Jet`` carries the value of a scalar quantity together with its gradient,
Hessian and (optionally) symmetric third-derivative tensor with respect to a
fixed set of ``n`` active variables.  All propagation rules are exact, so
derivatives are limited only by floating-point rounding, never by a step size.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Jet", "DomainError"]


class DomainError(ValueError):
    """A primitive was evaluated outside its differentiable domain."""


def _sym3(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    # Symmetrized product g_i h_jk + g_j h_ik + g_k h_ij.
    return (
        np.einsum("i,jk->ijk", g, h)
        + np.einsum("j,ik->ijk", g, h)
        + np.einsum("k,ij->ijk", g, h)
    )


def _cube(g: np.ndarray) -> np.ndarray:
    return np.einsum("i,j,k->ijk", g, g, g)


class Jet:
    """Value plus derivatives of order <= ``order`` with respect to n variables."""

    __slots__ = ("n", "order", "val", "grad", "hess", "third")

    def __init__(self, n, order, val, grad, hess=None, third=None):
        self.n = n
        self.order = order
        self.val = float(val)
        self.grad = grad
        self.hess = hess
        self.third = third

    @classmethod
    def constant(cls, value: float, n: int, order: int = 2) -> "Jet":
        return cls(
            n,
            order,
            value,
            np.zeros(n),
            np.zeros((n, n)) if order >= 2 else None,
            np.zeros((n, n, n)) if order >= 3 else None,
        )

    @classmethod
    def variable(cls, value: float, index: int, n: int, order: int = 2) -> "Jet":
        g = np.zeros(n)
        g[index] = 1.0
        return cls(
            n,
            order,
            value,
            g,
            np.zeros((n, n)) if order >= 2 else None,
            np.zeros((n, n, n)) if order >= 3 else None,
        )

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.n != self.n:
                raise ValueError("jets track different variable counts")
            return other
        return Jet.constant(float(other), self.n, self.order)

    # ---- ring operations -------------------------------------------------

    def __add__(self, other):
        o = self._lift(other)
        k = min(self.order, o.order)
        return Jet(
            self.n,
            k,
            self.val + o.val,
            self.grad + o.grad,
            self.hess + o.hess if k >= 2 else None,
            self.third + o.third if k >= 3 else None,
        )

    __radd__ = __add__

    def __neg__(self):
        return Jet(
            self.n,
            self.order,
            -self.val,
            -self.grad,
            -self.hess if self.order >= 2 else None,
            -self.third if self.order >= 3 else None,
        )

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        k = min(self.order, o.order)
        val = self.val * o.val
        grad = self.val * o.grad + o.val * self.grad
        hess = None
        third = None
        if k >= 2:
            cross = np.outer(self.grad, o.grad)
            hess = self.val * o.hess + o.val * self.hess + cross + cross.T
        if k >= 3:
            third = (
                self.val * o.third
                + o.val * self.third
                + _sym3(self.grad, o.hess)
                + _sym3(o.grad, self.hess)
            )
        return Jet(self.n, k, val, grad, hess, third)

    __rmul__ = __mul__

    def _recip(self) -> "Jet":
        if self.val == 0.0:
            raise DomainError("division by zero")
        r = 1.0 / self.val
        grad = -(r * r) * self.grad
        hess = None
        third = None
        if self.order >= 2:
            hess = -(r * r) * self.hess + 2.0 * r**3 * np.outer(self.grad, self.grad)
        if self.order >= 3:
            third = (
                -(r * r) * self.third
                + 2.0 * r**3 * _sym3(self.grad, self.hess)
                - 6.0 * r**4 * _cube(self.grad)
            )
        return Jet(self.n, self.order, r, grad, hess, third)

    def __truediv__(self, other):
        return self * self._lift(other)._recip()

    def __rtruediv__(self, other):
        return self._lift(other) * self._recip()

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            raise TypeError("jet exponent must be an integer")
        if exponent < 0:
            return (self.__pow__(-exponent))._recip()
        result = Jet.constant(1.0, self.n, self.order)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # ---- chain rule ------------------------------------------------------

    def _chain(self, f0: float, f1: float, f2: float, f3: float) -> "Jet":
        grad = f1 * self.grad
        hess = None
        third = None
        if self.order >= 2:
            hess = f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        if self.order >= 3:
            third = (
                f1 * self.third
                + f2 * _sym3(self.grad, self.hess)
                + f3 * _cube(self.grad)
            )
        return Jet(self.n, self.order, f0, grad, hess, third)

    def sin(self):
        s, c = math.sin(self.val), math.cos(self.val)
        return self._chain(s, c, -s, -c)

    def cos(self):
        s, c = math.sin(self.val), math.cos(self.val)
        return self._chain(c, -s, -c, s)

    def tan(self):
        t = math.tan(self.val)
        d1 = 1.0 + t * t
        return self._chain(t, d1, 2.0 * t * d1, 2.0 * d1 * (1.0 + 3.0 * t * t))

    def exp(self):
        e = math.exp(self.val)
        return self._chain(e, e, e, e)

    def log(self):
        if self.val <= 0.0:
            raise DomainError("log of a non-positive value")
        u = self.val
        return self._chain(math.log(u), 1.0 / u, -1.0 / u**2, 2.0 / u**3)

    def sqrt(self):
        if self.val < 0.0:
            raise DomainError("sqrt of a negative value")
        if self.val == 0.0:
            raise DomainError("sqrt is not differentiable at zero")
        s = math.sqrt(self.val)
        return self._chain(s, 0.5 / s, -0.25 / (s * self.val), 0.375 / (s * self.val**2))

    def abs(self):
        # Piecewise linear: derivative is the sign away from the kink.
        sign = 1.0 if self.val > 0.0 else (-1.0 if self.val < 0.0 else 0.0)
        return self._chain(abs(self.val), sign, 0.0, 0.0)

    def __repr__(self):
        return f"Jet(order={self.order}, val={self.val!r}, grad={self.grad!r})"
