"""Linear, polynomial and Gaussian kernels with fixed 1/n scaling.

    linear       K(x, z) = x.z
    polynomial   K(x, z) = (x.z / n) ** d
    gaussian     K(x, z) = exp(-|x - z|^2 / n)

``n`` is the feature dimension; none of the kernels has a free width or
offset parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DimensionMismatch

KINDS = ("linear", "polynomial", "gaussian")


@dataclass(frozen=True)
class Kernel:
    kind: str
    n: int
    degree: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.n < 1:
            raise ValueError(f"kernel dimension must be positive, got {self.n}")
        if self.kind == "polynomial":
            if self.degree is None or int(self.degree) != self.degree or self.degree < 1:
                raise ValueError(f"polynomial degree must be an integer >= 1, got {self.degree}")
        elif self.degree is not None:
            raise ValueError(f"{self.kind} kernel takes no degree")

    @classmethod
    def linear(cls, n: int) -> "Kernel":
        return cls("linear", n)

    @classmethod
    def polynomial(cls, n: int, degree: int) -> "Kernel":
        return cls("polynomial", n, degree)

    @classmethod
    def gaussian(cls, n: int) -> "Kernel":
        return cls("gaussian", n)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n}
        if self.degree is not None:
            d["degree"] = self.degree
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Kernel":
        return cls(d["kind"], int(d["n"]), d.get("degree"))

    def gram(self, A, B) -> np.ndarray:
        """Kernel matrix between the rows of ``A`` and the rows of ``B``."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if A.shape[1] != self.n or B.shape[1] != self.n:
            raise DimensionMismatch(
                f"kernel expects dimension {self.n}, got {A.shape[1]} and {B.shape[1]}"
            )
        if self.kind == "linear":
            return A @ B.T
        if self.kind == "polynomial":
            return (A @ B.T / self.n) ** self.degree
        sq = cdist(A, B, "sqeuclidean")
        return np.exp(-sq / self.n)


def kernel_eval(k: Kernel, x, z) -> float:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != (k.n,) or z.shape != (k.n,):
        raise DimensionMismatch(f"kernel expects vectors of length {k.n}, got {x.shape} and {z.shape}")
    if k.kind == "linear":
        return float(x @ z)
    if k.kind == "polynomial":
        return float((x @ z / k.n) ** k.degree)
    d = x - z
    return float(np.exp(-(d @ d) / k.n))
