from dataclasses import dataclass


@dataclass(frozen=True)
class RepParams:
    """
    Constants of the Lax representations.

    Parameters:
    -----------
      - d1, d2: lower-triangle factors of the asymmetric N=3 representations (must be nonzero
        when those are built)
      - d3: the ratio v/u exposed as the Casimir C3; 1 in the symmetric case
      - lam: spectral parameter of the 2x2 discrete Lax pair
    """
    d1: float = 1.0
    d2: float = 1.0
    d3: float = 1.0
    lam: float = 0.0
