# services/roots.py
"""
Aberth-Ehrlich 동시 반복 근 찾기

numpy.roots (동반행렬 고유값) 로 초기값을 잡고 Aberth 보정으로 수렴시킨 뒤
Newton 한 단계씩 다듬는다. 잔차 검사를 통과하지 못하면 RootFindingError.
"""
import logging
from typing import List

import numpy as np
from numpy.polynomial import polynomial as npoly

from app.exceptions import InputValidationError, RootFindingError
from app.models.polynomial import Polynomial

logger = logging.getLogger(__name__)

MODULE = "certificate"
MAX_ITER = 500
STEP_TOL = 4.0 * np.finfo(float).eps
RESIDUAL_RTOL = 1e-9


def _residual_ok(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    deg = coeffs.size - 1
    scale = float(np.max(np.abs(coeffs)))
    return np.abs(npoly.polyval(z, coeffs)) <= RESIDUAL_RTOL * scale * (1.0 + np.abs(z)) ** deg


def _initial_guess(coeffs: np.ndarray) -> np.ndarray:
    z = np.roots(coeffs[::-1]).astype(complex)
    # 겹친 초기값은 Aberth 보정의 분모를 0 으로 만든다
    for i in range(z.size):
        for j in range(i):
            if z[i] == z[j]:
                z[i] += 1e-8 * (1.0 + abs(z[i])) * np.exp(1j * (i + 1))
    return z


def _aberth(coeffs: np.ndarray) -> np.ndarray:
    deriv = npoly.polyder(coeffs)
    z = _initial_guess(coeffs)
    for it in range(MAX_ITER):
        value = npoly.polyval(z, coeffs)
        slope = npoly.polyval(z, deriv)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(slope != 0, value / slope, 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            repulsion = np.sum(1.0 / diff, axis=1) - 1.0
            correction = np.where(
                value != 0, ratio / (1.0 - ratio * repulsion), 0.0
            )
        correction = np.nan_to_num(correction)
        z = z - correction
        if np.all(np.abs(correction) <= STEP_TOL * (1.0 + np.abs(z))):
            logger.debug("Aberth 수렴: %d 회 반복 (차수 %d)", it + 1, z.size)
            break
        if np.all(_residual_ok(coeffs, z)) and it >= 20:
            break
    return z


def _polish(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Newton 한 단계; 잔차가 줄어드는 경우에만 채택"""
    deriv = npoly.polyder(coeffs)
    value = npoly.polyval(z, coeffs)
    slope = npoly.polyval(z, deriv)
    with np.errstate(divide="ignore", invalid="ignore"):
        candidate = np.where(slope != 0, z - value / slope, z)
    better = np.abs(npoly.polyval(candidate, coeffs)) < np.abs(value)
    return np.where(better & np.isfinite(candidate), candidate, z)


def find_roots(p: Polynomial) -> List[complex]:
    """
    중복도를 포함한 모든 근

    - 0 근은 하위 계수가 정확히 0 인 개수만큼 먼저 분리
    - 잔차 |p(r)| ≤ 1e-9·max|coeff|·(1+|r|)^deg 를 모든 근이 만족해야 한다
    """
    poly = p.trimmed()
    if poly.is_zero or poly.degree < 1:
        raise InputValidationError("root finding needs a polynomial of degree ≥ 1", MODULE)
    coeffs = poly.coeffs
    zeros = int(np.flatnonzero(coeffs != 0)[0])
    reduced = np.array(coeffs[zeros:], dtype=complex)

    found = np.zeros(zeros, dtype=complex)
    if reduced.size > 1:
        z = _polish(reduced, _aberth(reduced))
        found = np.concatenate((found, z))

    if not np.all(np.isfinite(found)) or not np.all(_residual_ok(coeffs, found)):
        worst = float(np.max(np.abs(npoly.polyval(found, coeffs)))) if found.size else float("nan")
        raise RootFindingError(
            f"Aberth iteration failed to converge for degree {poly.degree} (max residual {worst:.3e})",
            MODULE,
        )
    order = np.lexsort((found.imag, found.real))
    return [complex(r) for r in found[order]]
