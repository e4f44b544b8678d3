"""Parameter classification of the structures a relation can generate.

p is the degree of the generating form, k the degree of the realized
closed form, N the dimension of the space formed; the carrier has
dimension N - k and the interaction label depends on k alone.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ClassificationError

INTERACTION_BY_K = {
    0: "strong",
    1: "weak",
    2: "electromagnetic",
    3: "gravitational",
}

MAX_DEGREE = 3


@dataclass(frozen=True)
class StructureClass:
    p: int
    k: int
    N: int
    pseudostructure_dim: int
    interaction: str
    n: int | None = None  # original-space dimension, carried as metadata only


def classify(p: int, k: int, N: int, n: int | None = None) -> StructureClass:
    """Look up the structure class for (p, k, N); n is echoed unchanged."""
    if not 0 <= p <= MAX_DEGREE:
        raise ClassificationError(f"p must be in 0..{MAX_DEGREE}, got {p}")
    if not 0 <= k <= p:
        raise ClassificationError(f"k must satisfy 0 <= k <= p, got k={k}, p={p}")
    if N < 1:
        raise ClassificationError(f"N must be a positive integer, got {N}")
    if N - k < 0:
        raise ClassificationError(f"pseudostructure dimension N - k = {N - k} is negative")
    return StructureClass(
        p=p,
        k=k,
        N=N,
        pseudostructure_dim=N - k,
        interaction=INTERACTION_BY_K[k],
        n=n,
    )
