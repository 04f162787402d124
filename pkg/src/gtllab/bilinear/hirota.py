"""
Hirota derivatives on truncated series and the residuals of the lattice's bilinear forms.
"""
from typing import Literal, Mapping, Sequence, Union
from scipy.special import comb
from ..errors import DomainError, GtlLabError
from .series import SeriesFn

Variant = Literal["printed", "paper", "standard"]

# alternative names accepted for a variant
VARIANT_ALIASES = {"paper": "printed"}


def hirota_Dt(m: int, f: SeriesFn, g: SeriesFn) -> SeriesFn:
    """
    D_t^m f.g = sum_j (-1)^j C(m, j) f^(m-j) g^(j), truncated at order K - m.
    """
    if m < 0:
        raise GtlLabError(f"Hirota order must be >= 0, got {m}")
    if f.t0 != g.t0:
        raise GtlLabError(f"f and g are expanded about different points: {f.t0} and {g.t0}")
    K = min(f.K, g.K)
    if m > K:
        raise DomainError(f"D_t^{m} needs series of order >= {m}, got {K}")

    f = f.truncate(K); g = g.truncate(K)
    out = SeriesFn.constant(0.0, K - m, f.t0)
    for j in range(m + 1):
        out = out + f.dt(m - j)*g.dt(j)*((-1)**j*comb(m, j, exact=True))
    return out


def toda_bilinear_residual(taus: Sequence[SeriesFn], variant: Variant = "standard") -> SeriesFn:
    """
    Residual of the tau form of the lattice for (tau_{n-1}, tau_n, tau_{n+1}).

    variant "printed" (alias "paper"):  tau_n'' tau_n - tau_n'^2 - tau_{n+1} tau_{n-1}
    variant "standard": the same plus tau_n^2, whose zero set is the Toda tau hierarchy
    (vacuum tau = 1 solves it).
    """
    prev, tau, nxt = taus
    r = hirota_Dt(2, tau, tau)*0.5 - nxt*prev
    match VARIANT_ALIASES.get(variant, variant):
        case "printed":
            return r
        case "standard":
            return r + tau*tau
        case _:
            raise GtlLabError(f"Unknown bilinear variant '{variant}'. Choose 'printed' or 'standard'.")


def sinh_form_residual(f: Union[Sequence[SeriesFn], Mapping[int, SeriesFn]], n: int) -> SeriesFn:
    """
    [D_t^2 - 4 sinh^2(D_n/2)] f_n.f_n with exp(+-D_n) f_n.f_n = f_{n+-1} f_{n-+1}, i.e.
    D_t^2 f_n.f_n - 2(f_{n+1} f_{n-1} - f_n^2).

    Parameters:
    -----------
      - f: family indexed by site; f[n - 1], f[n], f[n + 1] must exist
      - n: the site
    """
    if isinstance(f, Sequence) and n < 1:
        raise GtlLabError(f"sinh form at site {n} needs f[{n - 1}], f[{n}] and f[{n + 1}]")
    try:
        prev, fn, nxt = f[n - 1], f[n], f[n + 1]
    except (IndexError, KeyError):
        raise GtlLabError(f"sinh form at site {n} needs f[{n - 1}], f[{n}] and f[{n + 1}]") from None
    return hirota_Dt(2, fn, fn) - (nxt*prev - fn*fn)*2.0
