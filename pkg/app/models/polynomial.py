# app/models/polynomial.py
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

Number = Union[int, float, complex]


@dataclass(frozen=True, eq=False)
class Polynomial:
    """
    복소 계수 다항식 (coeffs[k] 가 z^k 의 계수)

    P, P̃, Q, L_k, L̃_k, U 등을 모두 이 형식으로 다룬다.
    """
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if arr.size == 0:
            arr = np.zeros(1, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def of(cls, values: Iterable[Number]) -> "Polynomial":
        return cls(np.array(list(values), dtype=complex))

    @classmethod
    def constant(cls, value: Number = 1.0) -> "Polynomial":
        return cls(np.array([value], dtype=complex))

    @property
    def degree(self) -> int:
        """선행 계수가 0이 아닌 최고 차수 (영다항식은 0)"""
        nz = np.flatnonzero(self.coeffs != 0)
        return int(nz[-1]) if nz.size else 0

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0)

    @property
    def real_coeffs(self) -> np.ndarray:
        return self.coeffs.real.copy()

    def trimmed(self, rtol: float = 0.0) -> "Polynomial":
        """상대 크기 rtol 이하의 최고차 계수들을 제거"""
        scale = float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0
        if scale == 0.0:
            return Polynomial.constant(0.0)
        keep = np.flatnonzero(np.abs(self.coeffs) > rtol * scale)
        return Polynomial(self.coeffs[: int(keep[-1]) + 1])

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * other)

    __rmul__ = __mul__

    def reversed(self, degree: int) -> "Polynomial":
        """z^degree · P(1/z)"""
        padded = np.zeros(degree + 1, dtype=complex)
        padded[: self.coeffs.size] = self.coeffs[: degree + 1]
        return Polynomial(padded[::-1])

    def on_circle(self, t) -> np.ndarray:
        """P(e^{2πit})"""
        return self(np.exp(2j * np.pi * np.asarray(t, dtype=float)))

    def __repr__(self) -> str:
        return f"Polynomial(degree={self.degree}, coeffs={np.round(self.coeffs, 12).tolist()})"
