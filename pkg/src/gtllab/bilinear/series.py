"""
Truncated Taylor series in t and their epsilon-graded extension.

SeriesFn holds c_0..c_K of sum_k c_k (t - t0)^k. Every operation is exact up to order K and
truncates above it; derivatives drop one order each. EpsilonSeries stacks SeriesFn coefficients
of a formal power series in epsilon and supports the same operations, so residual formulas can be
written once and evaluated on either.
"""
from dataclasses import dataclass
import numpy as np
import numpy.typing as npt
from typing import List, Sequence
from ..errors import DomainError, GtlLabError


@dataclass(frozen=True, eq=False)
class SeriesFn:
    """
    Truncated Taylor series about t0.

    Parameters:
    -----------
      - coeffs: c_0..c_K (K = len(coeffs) - 1 is the truncation order)
      - t0: base point
    """
    coeffs: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size == 0:
            raise GtlLabError("SeriesFn needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "t0", float(self.t0))

    # constructors
    @classmethod
    def constant(cls, value: float, K: int, t0: float = 0.0) -> "SeriesFn":
        c = np.zeros(K + 1); c[0] = value
        return cls(c, t0)

    @classmethod
    def variable(cls, K: int, t0: float = 0.0) -> "SeriesFn":
        """
        The series of t itself: t0 + (t - t0).
        """
        c = np.zeros(K + 1); c[0] = t0
        if K >= 1:
            c[1] = 1.0
        return cls(c, t0)

    @property
    def K(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, t: npt.ArrayLike) -> np.ndarray:
        return np.polyval(self.coeffs[::-1], np.asarray(t, dtype=float) - self.t0)

    def __repr__(self) -> str:
        return f"SeriesFn(K={self.K}, t0={self.t0}, coeffs={self.coeffs.tolist()})"

    def truncate(self, K: int) -> "SeriesFn":
        if K < 0:
            raise GtlLabError(f"truncation order must be >= 0, got {K}")
        c = np.zeros(K + 1)
        n = min(K, self.K) + 1
        c[:n] = self.coeffs[:n]
        return SeriesFn(c, self.t0)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    # alignment of two operands
    def _pair(self, other) -> tuple:
        if isinstance(other, SeriesFn):
            if other.t0 != self.t0:
                raise GtlLabError(f"series about different base points: {self.t0} and {other.t0}")
            K = min(self.K, other.K)
            return self.coeffs[:K + 1], other.coeffs[:K + 1]
        if np.isscalar(other):
            c = np.zeros(self.K + 1); c[0] = float(other)
            return self.coeffs, c
        return NotImplemented

    # arithmetic
    def __add__(self, other):
        if isinstance(other, EpsilonSeries):
            return NotImplemented
        pair = self._pair(other)
        if pair is NotImplemented:
            return NotImplemented
        return SeriesFn(pair[0] + pair[1], self.t0)

    __radd__ = __add__

    def __neg__(self):
        return SeriesFn(-self.coeffs, self.t0)

    def __sub__(self, other):
        if isinstance(other, EpsilonSeries):
            return NotImplemented
        pair = self._pair(other)
        if pair is NotImplemented:
            return NotImplemented
        return SeriesFn(pair[0] - pair[1], self.t0)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, EpsilonSeries):
            return NotImplemented
        if np.isscalar(other):
            return SeriesFn(self.coeffs*float(other), self.t0)
        pair = self._pair(other)
        if pair is NotImplemented:
            return NotImplemented
        a, b = pair
        return SeriesFn(np.convolve(a, b)[:a.size], self.t0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return SeriesFn(self.coeffs/float(other), self.t0)
        if isinstance(other, SeriesFn):
            return self*other.reciprocal()
        return NotImplemented

    def __rtruediv__(self, other):
        if np.isscalar(other):
            return self.reciprocal()*float(other)
        return NotImplemented

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise GtlLabError(f"SeriesFn powers must be non-negative integers, got {n}")
        out = SeriesFn.constant(1.0, self.K, self.t0)
        for _ in range(int(n)):
            out = out*self
        return out

    # calculus
    def dt(self, m: int = 1) -> "SeriesFn":
        """
        m-th derivative in t, truncated at order K - m.
        """
        if m > self.K:
            raise DomainError(f"cannot take {m} derivatives of a series of order {self.K}")
        c = self.coeffs
        for _ in range(m):
            c = c[1:]*np.arange(1, c.size)
        return SeriesFn(c, self.t0)

    def integrate(self, constant: float = 0.0) -> "SeriesFn":
        """
        Antiderivative vanishing at t0 (plus constant), one order higher.
        """
        c = np.concatenate(([constant], self.coeffs/np.arange(1, self.K + 2)))
        return SeriesFn(c, self.t0)

    def rescale(self, factor: float) -> "SeriesFn":
        """
        Series of g(t) = s(t0 + factor*(t - t0)).
        """
        return SeriesFn(self.coeffs*float(factor)**np.arange(self.K + 1), self.t0)

    def reciprocal(self) -> "SeriesFn":
        a = self.coeffs
        if a[0] == 0:
            raise DomainError("reciprocal of a series with zero leading coefficient")
        r = np.zeros_like(a); r[0] = 1.0/a[0]
        for k in range(1, a.size):
            r[k] = -np.dot(a[1:k + 1], r[k - 1::-1][:k])/a[0]
        return SeriesFn(r, self.t0)

    def log(self) -> "SeriesFn":
        a = self.coeffs
        if a[0] <= 0:
            raise DomainError(f"log of a series needs a positive leading coefficient, got {a[0]}")
        b = np.zeros_like(a); b[0] = np.log(a[0])
        for k in range(1, a.size):
            j = np.arange(1, k)
            b[k] = (k*a[k] - np.dot(j*b[1:k], a[k - 1:0:-1]))/(k*a[0])
        return SeriesFn(b, self.t0)

    def exp(self) -> "SeriesFn":
        a = self.coeffs
        e = np.zeros_like(a); e[0] = np.exp(a[0])
        for k in range(1, a.size):
            j = np.arange(1, k + 1)
            e[k] = np.dot(j*a[1:k + 1], e[k - 1::-1][:k])/k
        return SeriesFn(e, self.t0)


@dataclass(frozen=True, eq=False)
class EpsilonSeries:
    """
    sum_k eps^k terms[k], k = 0..K_eps, each term a SeriesFn in t.
    """
    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms or not all(isinstance(s, SeriesFn) for s in terms):
            raise GtlLabError("EpsilonSeries needs at least one SeriesFn term")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def lift(cls, value, K_eps: int, like: SeriesFn) -> "EpsilonSeries":
        """
        A scalar or SeriesFn as an epsilon series with zero higher terms.
        """
        base = value if isinstance(value, SeriesFn) else SeriesFn.constant(float(value), like.K, like.t0)
        zero = SeriesFn(np.zeros(base.K + 1), base.t0)
        return cls((base,) + (zero,)*K_eps)

    @property
    def K_eps(self) -> int:
        return len(self.terms) - 1

    def at(self, eps: float) -> SeriesFn:
        out = self.terms[0]
        for k, term in enumerate(self.terms[1:], start=1):
            out = out + term*eps**k
        return out

    def _coerce(self, other) -> "EpsilonSeries":
        if isinstance(other, EpsilonSeries):
            return other
        if isinstance(other, SeriesFn) or np.isscalar(other):
            return EpsilonSeries.lift(other, self.K_eps, self.terms[0])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return EpsilonSeries(tuple(a + b for a, b in zip(self.terms, other.terms)))

    __radd__ = __add__

    def __neg__(self):
        return EpsilonSeries(tuple(-a for a in self.terms))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other) or isinstance(other, SeriesFn):
            return EpsilonSeries(tuple(a*other for a in self.terms))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = min(len(self.terms), len(other.terms))
        return EpsilonSeries(tuple(_sum(self.terms[j]*other.terms[k - j] for j in range(k + 1))
                                   for k in range(n)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self*(1.0/float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self*other.reciprocal()

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise GtlLabError(f"EpsilonSeries powers must be non-negative integers, got {n}")
        out = EpsilonSeries.lift(1.0, self.K_eps, self.terms[0])
        for _ in range(int(n)):
            out = out*self
        return out

    def dt(self, m: int = 1) -> "EpsilonSeries":
        return EpsilonSeries(tuple(a.dt(m) for a in self.terms))

    def reciprocal(self) -> "EpsilonSeries":
        a = self.terms
        inv0 = a[0].reciprocal()
        r: List[SeriesFn] = [inv0]
        for k in range(1, len(a)):
            r.append(-_sum(a[j]*r[k - j] for j in range(1, k + 1))*inv0)
        return EpsilonSeries(tuple(r))

    def log(self) -> "EpsilonSeries":
        a = self.terms
        inv0 = a[0].reciprocal()
        b: List[SeriesFn] = [a[0].log()]
        for k in range(1, len(a)):
            acc = a[k]*k
            for j in range(1, k):
                acc = acc - b[j]*a[k - j]*j
            b.append(acc*inv0/k)
        return EpsilonSeries(tuple(b))

    def exp(self) -> "EpsilonSeries":
        a = self.terms
        e: List[SeriesFn] = [a[0].exp()]
        for k in range(1, len(a)):
            e.append(_sum(a[j]*e[k - j]*j for j in range(1, k + 1))/k)
        return EpsilonSeries(tuple(e))


def _sum(items):
    items = iter(items)
    out = next(items)
    for item in items:
        out = out + item
    return out


def stack_coeffs(series: Sequence[SeriesFn]) -> np.ndarray:
    return np.concatenate([s.coeffs for s in series])
