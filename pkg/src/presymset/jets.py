"""Truncated bivariate Taylor-jet arithmetic.

A Jet2 holds the coefficients c[i, j] of sum c[i,j] x^i y^j over i+j <= order
on an (order+1) x (order+1) grid; entries above the anti-diagonal stay zero.
All operations truncate back to the jet's order, so a Jet2 computed from
exact inputs carries the exact Taylor coefficients of the result.
"""

import numpy as np


def _trunc_mask(order):
    idx = np.arange(order + 1)
    return (idx[:, None] + idx[None, :]) <= order


class Jet2:
    __slots__ = ("c", "order")

    def __init__(self, coeffs, order):
        c = np.zeros((order + 1, order + 1))
        src = np.asarray(coeffs, dtype=float)
        n = min(src.shape[0], order + 1)
        m = min(src.shape[1], order + 1)
        c[:n, :m] = src[:n, :m]
        c[~_trunc_mask(order)] = 0.0
        self.c = c
        self.order = order

    @classmethod
    def constant(cls, value, order):
        j = cls.__new__(cls)
        j.c = np.zeros((order + 1, order + 1))
        j.c[0, 0] = float(value)
        j.order = order
        return j

    @classmethod
    def variable(cls, which, order, base=0.0):
        """Jet of (base + x) or (base + y); which is 'x' or 'y'."""
        j = cls.constant(base, order)
        if order >= 1:
            if which == "x":
                j.c[1, 0] = 1.0
            elif which == "y":
                j.c[0, 1] = 1.0
            else:
                raise ValueError("which must be 'x' or 'y'")
        return j

    @classmethod
    def from_terms(cls, terms, order):
        j = cls.constant(0.0, order)
        for (i, k), v in terms.items():
            if i + k <= order:
                j.c[i, k] = float(v)
        return j

    def copy(self):
        j = Jet2.__new__(Jet2)
        j.c = self.c.copy()
        j.order = self.order
        return j

    # -- ring operations ------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet2):
            j = self.copy()
            j.c += other.c
            return j
        j = self.copy()
        j.c[0, 0] += float(other)
        return j

    __radd__ = __add__

    def __neg__(self):
        j = self.copy()
        j.c = -j.c
        return j

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet2) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            j = self.copy()
            j.c *= float(other)
            return j
        n = self.order
        out = np.zeros((n + 1, n + 1))
        a, b = self.c, other.c
        for i in range(n + 1):
            for k in range(n + 1 - i):
                if a[i, k] == 0.0:
                    continue
                out[i:, k:][: n + 1 - i, : n + 1 - k] += a[i, k] * b[: n + 1 - i, : n + 1 - k]
        j = Jet2.__new__(Jet2)
        j.c = out
        j.c[~_trunc_mask(n)] = 0.0
        j.order = n
        return j

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("integer power >= 0 only")
        out = Jet2.constant(1.0, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self):
        """Multiplicative inverse; requires a nonzero constant term."""
        a0 = self.c[0, 0]
        if a0 == 0.0:
            raise ZeroDivisionError("jet inverse with zero constant term")
        x = Jet2.constant(1.0 / a0, self.order)
        # Newton: x <- x(2 - a x); doubles correct filtration order per step.
        steps = max(1, int(np.ceil(np.log2(self.order + 1))) + 1)
        for _ in range(steps):
            x = x * (2.0 - self * x)
        return x

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.inverse()
        j = self.copy()
        j.c /= float(other)
        return j

    def __rtruediv__(self, other):
        return self.inverse() * float(other)

    def sqrt(self):
        """Square root; requires a positive constant term."""
        a0 = self.c[0, 0]
        if a0 <= 0.0:
            raise ValueError("jet sqrt needs positive constant term")
        x = Jet2.constant(np.sqrt(a0), self.order)
        steps = max(1, int(np.ceil(np.log2(self.order + 1))) + 1)
        for _ in range(steps):
            x = 0.5 * (x + self * x.inverse())
        return x

    # -- calculus --------------------------------------------------------

    def dx(self):
        j = Jet2.constant(0.0, self.order)
        n = self.order
        j.c[: n, :] = self.c[1:, :] * np.arange(1, n + 1)[:, None]
        j.c[~_trunc_mask(n)] = 0.0
        return j

    def dy(self):
        j = Jet2.constant(0.0, self.order)
        n = self.order
        j.c[:, : n] = self.c[:, 1:] * np.arange(1, n + 1)[None, :]
        j.c[~_trunc_mask(n)] = 0.0
        return j

    def value(self):
        return self.c[0, 0]

    def coeff(self, i, j):
        return self.c[i, j]

    def partial(self, i, j):
        """Value of d^(i+j) / dx^i dy^j at the base point."""
        from math import factorial

        return self.c[i, j] * factorial(i) * factorial(j)

    def __repr__(self):
        terms = [
            f"{self.c[i, j]:+.3g} x^{i} y^{j}"
            for i in range(self.order + 1)
            for j in range(self.order + 1)
            if self.c[i, j] != 0.0
        ]
        return f"Jet2(order={self.order}: {' '.join(terms) or '0'})"


# -- composition helpers -------------------------------------------------


def compose(jet, qx, qy):
    """Substitute x <- qx, y <- qy (both Jet2 with zero constant term).

    The substituted jets must vanish at the base point so the composition
    is again a Taylor jet at the same base.
    """
    if abs(qx.value()) > 0 or abs(qy.value()) > 0:
        raise ValueError("compose requires inner jets with zero constant term")
    n = jet.order
    out = Jet2.constant(0.0, n)
    # Horner over rows: sum_i qx^i * (sum_j c[i,j] qy^j)
    xpow = Jet2.constant(1.0, n)
    for i in range(n + 1):
        row = Jet2.constant(0.0, n)
        ypow = Jet2.constant(1.0, n)
        for j in range(n + 1 - i):
            if jet.c[i, j] != 0.0:
                row = row + jet.c[i, j] * ypow
            if j < n - i:
                ypow = ypow * qy
        out = out + xpow * row
        if i < n:
            xpow = xpow * qx
    return out


def eval_along(jet, px, py):
    """Evaluate a Jet2 on a parametrized curve (x, y) = (px(t), py(t)).

    px, py are ascending univariate coefficient arrays with px[0] = py[0] = 0.
    Returns the univariate Taylor coefficients of jet(px(t), py(t)) up to the
    jet's order.
    """
    n = jet.order
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    if (px.size and px[0] != 0.0) or (py.size and py[0] != 0.0):
        raise ValueError("curve must pass through the jet base point")

    def umul(a, b):
        out = np.zeros(n + 1)
        for i, ai in enumerate(a[: n + 1]):
            if ai == 0.0:
                continue
            hi = min(n + 1 - i, len(b))
            out[i : i + hi] += ai * b[:hi]
        return out

    one = np.zeros(n + 1)
    one[0] = 1.0
    out = np.zeros(n + 1)
    xpow = one
    for i in range(n + 1):
        ypow = one
        for j in range(n + 1 - i):
            if jet.c[i, j] != 0.0:
                out += jet.c[i, j] * umul(xpow, ypow)
            if j < n - i:
                ypow = umul(ypow, py)
        if i < n:
            xpow = umul(xpow, px)
    return out


# -- small vector-of-jets helpers -----------------------------------------


def vdot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a, b):
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]


def vscale(a, s):
    return [a[0] * s, a[1] * s, a[2] * s]


def vadd(a, b):
    return [a[0] + b[0], a[1] + b[1], a[2] + b[2]]


def vsub(a, b):
    return [a[0] - b[0], a[1] - b[1], a[2] - b[2]]


def vnormalize(a):
    return vscale(a, vdot(a, a).sqrt().inverse())
