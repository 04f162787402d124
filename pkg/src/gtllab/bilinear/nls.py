"""
Two-time Hirota operators on uniform grids, the NLS bilinear pair and the NLS equation itself.

Derivatives use 4th-order central stencils, so every result lives on the interior of its input
(two points trimmed on each side of each axis).
"""
from dataclasses import dataclass
import numpy as np
import numpy.typing as npt
from typing import Callable, Literal, Sequence, Tuple
from scipy.special import comb
from ..errors import DomainError, GtlLabError

Time = Literal["real", "nlse"]

# 4th-order central stencils on offsets -2..2
STENCILS = {
    0: np.array([0.0, 0.0, 1.0, 0.0, 0.0]),
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0])/12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0])/12.0,
}
MARGIN = 2


@dataclass(frozen=True, eq=False)
class GridFn2:
    """
    Complex samples on a uniform (t1, t2) grid, values[i, j] at (t1_0 + i*h1, t2_0 + j*h2).
    """
    values: np.ndarray
    h1: float
    h2: float
    t1_0: float = 0.0
    t2_0: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 2:
            raise GtlLabError(f"GridFn2 needs a 2D array, got shape {v.shape}")
        if self.h1 <= 0 or self.h2 <= 0:
            raise GtlLabError(f"grid spacings must be positive, got h1={self.h1}, h2={self.h2}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], t1: npt.ArrayLike,
               t2: npt.ArrayLike) -> "GridFn2":
        """
        Evaluate fn(T1, T2) on the tensor grid of two uniform 1D axes.
        """
        t1 = np.asarray(t1, dtype=float); t2 = np.asarray(t2, dtype=float)
        if t1.size < 2 or t2.size < 2:
            raise GtlLabError("each grid axis needs at least two points")
        T1, T2 = np.meshgrid(t1, t2, indexing="ij")
        return cls(fn(T1, T2), t1[1] - t1[0], t2[1] - t2[0], t1[0], t2[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def _like(self, values: np.ndarray, trim: int = 0) -> "GridFn2":
        return GridFn2(values, self.h1, self.h2, self.t1_0 + trim*self.h1, self.t2_0 + trim*self.h2)

    def _check_same_grid(self, other: "GridFn2"):
        if self.shape != other.shape or not np.isclose(self.h1, other.h1) or not np.isclose(self.h2, other.h2):
            raise GtlLabError("grid functions live on different grids")

    def interior(self) -> np.ndarray:
        return self.values[MARGIN:-MARGIN, MARGIN:-MARGIN]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _check_size(*grids: GridFn2):
    for g in grids:
        if min(g.shape) < 2*MARGIN + 1:
            raise DomainError(f"4th-order stencils need at least a 5x5 grid, got {g.shape}")
    for g in grids[1:]:
        grids[0]._check_same_grid(g)


def _partial(values: np.ndarray, h: float, axis: int, order: int) -> np.ndarray:
    """
    order-th derivative along axis, NaN on the two boundary layers of that axis.
    """
    if order not in STENCILS:
        raise GtlLabError(f"stencils exist for derivative orders 0..2, got {order}")
    if order == 0:
        return values
    n = values.shape[axis]
    out = np.full(values.shape, np.nan + 0j)
    acc = 0
    for offset, weight in zip(range(-MARGIN, MARGIN + 1), STENCILS[order]):
        if weight != 0:
            acc = acc + weight*np.take(values, range(MARGIN + offset, n - MARGIN + offset), axis=axis)
    index = [slice(None)]*values.ndim
    index[axis] = slice(MARGIN, n - MARGIN)
    out[tuple(index)] = acc/h**order
    return out


def partial(g: GridFn2, m1: int, m2: int) -> np.ndarray:
    """
    d^m1/dt1^m1 d^m2/dt2^m2 of g on the full grid (NaN where the stencil does not fit).
    """
    return _partial(_partial(g.values, g.h1, 0, m1), g.h2, 1, m2)


def hirota_grid(f: GridFn2, g: GridFn2, m1: int, m2: int) -> GridFn2:
    """
    D_1^m1 D_2^m2 f.g = sum_{j,l} (-1)^(j+l) C(m1,j) C(m2,l) (d1^(m1-j) d2^(m2-l) f)(d1^j d2^l g),
    m1, m2 in 0..2, on the interior of the grid.
    """
    _check_size(f, g)
    if not (0 <= m1 <= 2 and 0 <= m2 <= 2):
        raise GtlLabError(f"hirota_grid supports orders 0..2 per variable, got ({m1}, {m2})")

    acc = np.zeros(f.shape, dtype=complex)
    for j in range(m1 + 1):
        for l in range(m2 + 1):
            sign = (-1)**(j + l)*comb(m1, j, exact=True)*comb(m2, l, exact=True)
            acc = acc + sign*partial(f, m1 - j, m2 - l)*partial(g, j, l)
    return f._like(acc[MARGIN:-MARGIN, MARGIN:-MARGIN], MARGIN)


def nls_bilinear_residual(tau_m1: GridFn2, tau_0: GridFn2, tau_p1: GridFn2,
                          time: Time = "real") -> Tuple[GridFn2, GridFn2]:
    """
    r1 = (D2 - D1^2) tau_{n+1}.tau_n and r2 = D1^2 tau_n.tau_n - 2 tau_{n+1} tau_{n-1}.

    time="nlse" reads the second grid axis as the NLS time s with t2 = i s, i.e. D2 = -i D_s.
    """
    _check_size(tau_m1, tau_0, tau_p1)
    match time:
        case "real":
            d2 = hirota_grid(tau_p1, tau_0, 0, 1).values
        case "nlse":
            d2 = -1j*hirota_grid(tau_p1, tau_0, 0, 1).values
        case _:
            raise GtlLabError(f"Unknown time convention '{time}'. Choose 'real' or 'nlse'.")

    r1 = d2 - hirota_grid(tau_p1, tau_0, 2, 0).values
    r2 = hirota_grid(tau_0, tau_0, 2, 0).values - 2.0*(tau_p1.interior()*tau_m1.interior())
    return tau_0._like(r1, MARGIN), tau_0._like(r2, MARGIN)


def nlse_residual(phi: GridFn2, phibar: GridFn2) -> GridFn2:
    """
    i phi_{t2} + phi_{t1 t1} + 2 phi^2 phibar on the interior. phibar is taken as given (it is
    tau_{n-1}/tau_n, not necessarily the complex conjugate of phi).
    """
    _check_size(phi, phibar)
    phi_2 = partial(phi, 0, 1)[MARGIN:-MARGIN, MARGIN:-MARGIN]
    phi_11 = partial(phi, 2, 0)[MARGIN:-MARGIN, MARGIN:-MARGIN]
    p = phi.interior(); pb = phibar.interior()
    return phi._like(1j*phi_2 + phi_11 + 2.0*p*p*pb, MARGIN)


def phi_from_tau(tau_m1: GridFn2, tau_0: GridFn2, tau_p1: GridFn2) -> Tuple[GridFn2, GridFn2]:
    """
    phi = tau_{n+1}/tau_n, phibar = tau_{n-1}/tau_n.
    """
    _check_size(tau_m1, tau_0, tau_p1)
    if np.any(tau_0.values == 0):
        raise DomainError("tau_n vanishes on the grid")
    return (tau_0._like(tau_p1.values/tau_0.values), tau_0._like(tau_m1.values/tau_0.values))


def plane_wave(k: float, omega: float, t1: npt.ArrayLike, t2: npt.ArrayLike) -> Tuple[GridFn2, GridFn2]:
    """
    phi = exp(i(k t1 - omega t2)) and its conjugate; an NLS solution when omega = k^2 - 2.
    """
    phi = GridFn2.sample(lambda T1, T2: np.exp(1j*(k*T1 - omega*T2)), t1, t2)
    phibar = GridFn2.sample(lambda T1, T2: np.exp(-1j*(k*T1 - omega*T2)), t1, t2)
    return phi, phibar


def schur_h(n: int, d: Sequence[float]) -> float:
    """
    Coefficient of z^n in exp(sum_k d_k z^k), k = 1.., with d = (d_1, d_2, ...). For the tau
    hierarchy d_k = D_k/k. Uses h_0 = 1 and n h_n = sum_{k=1}^n k d_k h_{n-k}.
    """
    if n < 0:
        raise GtlLabError(f"schur_h needs n >= 0, got {n}")
    if len(d) < n:
        raise GtlLabError(f"schur_h({n}) needs {n} values of d, got {len(d)}")
    h = [1.0]
    for m in range(1, n + 1):
        h.append(sum(k*d[k - 1]*h[m - k] for k in range(1, m + 1))/m)
    return h[n]
