# services/dyadic_assembly.py
"""
dyadic 밴드 분해와 최종 상한 조립

μ = Σ_a μ_a (a = 2^k δ, k ≥ 2) 로 나누고, 밴드마다 n_a = ⌊c''·2^{k/2}·δ·L⌋ 로
인증서를 만든 뒤 ν = ∗_a ν_a 와 가우시안 꼬리 추정으로 상한을 조립한다.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.config import get_settings
from app.exceptions import GapViolationError, InputValidationError, PlanInfeasibleError, SupportViolationError
from app.models.assembly import AssembledBound, BandPlan, BandPlanEntry, ConditionReport
from app.models.certificate import AtomicMeasure, Certificate
from app.models.measure import BandId, SpectralMeasure
from app.services.certificate import C_RATE, certify_band, rescale_certificate
from app.services.spectral_measure import (
    band_range,
    covariance,
    dyadic_band,
    gap_radius,
    rescale_to_unit_band,
)

logger = logging.getLogger(__name__)

MODULE = "dyadic_assembly"
MERGE_TOL = 1e-12
TRIVIAL_BOUND = 0.5


# ============================================
# 밴드 계획
# ============================================
def _is_dyadic(delta: float) -> bool:
    mantissa, _ = math.frexp(delta)
    return mantissa == 0.5


def _check_gap(mu: SpectralMeasure, delta: float) -> None:
    """μ([−δ, δ]) = 0 인지 (가장자리 원자도 위반)"""
    gap = gap_radius(mu)
    on_edge = any(atom.freq <= delta for atom in mu.atoms)
    if delta > gap or on_edge:
        raise GapViolationError(
            f"delta={delta} is not admissible: gap_radius={gap} "
            "(an atom at the gap edge needs a strictly smaller delta, see admissible_delta)",
            MODULE,
        )


def plan_bands(
    mu: SpectralMeasure,
    delta: float,
    L: float,
    c_pp: Optional[float] = None,
    discrete: bool = False,
    n0: Optional[int] = None,
) -> BandPlan:
    """
    질량이 있는 밴드마다 n_a 계산

    n_a < n_0 인 밴드가 있거나 세 조건(Σ n_a/a ≤ L, Σ e^{-c n_a} ≤ 1,
    min n_a ≥ c''δL) 중 하나라도 깨지면 feasible=False 와 진단 메시지를 남긴다.
    discrete=True 이면 ℤ 위의 과정: δ 는 2 의 음의 거듭제곱, 모든 밴드는 a ≤ 1.
    """
    settings = get_settings()
    c_pp = settings.c_pp if c_pp is None else c_pp
    n0 = settings.n0 if n0 is None else n0
    if not delta > 0:
        raise InputValidationError("delta must be positive", MODULE)
    if not L > 0:
        raise InputValidationError("L must be positive", MODULE)
    if not c_pp > 0:
        raise InputValidationError("c_pp must be positive", MODULE)
    _check_gap(mu, delta)
    if discrete and not (_is_dyadic(delta) and delta <= 0.25):
        raise InputValidationError(
            f"discrete mode needs delta = 2^-j ≤ 1/4 (got {delta})", MODULE
        )

    k_lo, k_hi = band_range(mu, delta)
    entries: List[BandPlanEntry] = []
    diagnostics: List[str] = []
    for k in range(k_lo, k_hi + 1):
        band = BandId(k=k)
        mu_a = dyadic_band(mu, band, delta)
        if mu_a is None:
            continue
        a = band.scale(delta)
        if discrete and a > 1.0:
            raise SupportViolationError(
                f"discrete mode needs the measure inside [-1/2, 1/2]; band k={k} has a={a}", MODULE
            )
        n_a = int(math.floor(c_pp * 2.0 ** (k / 2.0) * delta * L * (1.0 + 1e-12)))
        if n_a < n0:
            diagnostics.append(f"band k={k} (a={a:g}) has n_a={n_a} < n_0={n0}")
        entries.append(BandPlanEntry(band=band, a=a, n_a=n_a, mass_a=mu_a.total_mass))

    conditions = _conditions(entries, c_pp, delta, L) if entries else None
    if conditions is not None:
        if not conditions.cond1_ok:
            diagnostics.append(f"cond1 fails: Σ n_a/a = {conditions.cond1_sum:g} > L = {L:g}")
        if not conditions.cond2_ok:
            diagnostics.append(f"cond2 fails: Σ e^(-c n_a) = {conditions.cond2_sum:.6g} > 1")
        if not conditions.cond3_ok:
            diagnostics.append(f"cond3 fails: min n_a = {conditions.cond3_min} < c''δL = {conditions.cond3_rhs:g}")

    plan = BandPlan(
        delta=delta,
        L=L,
        c_pp=c_pp,
        discrete=discrete,
        entries=entries,
        conditions=conditions,
        feasible=not diagnostics,
        diagnostics=diagnostics,
    )
    logger.info("밴드 계획: %d 개 밴드, feasible=%s", len(entries), plan.feasible)
    return plan


# ============================================
# 원자 측도 합성곱
# ============================================
def convolve(measures: Sequence[AtomicMeasure]) -> AtomicMeasure:
    """
    원자 측도의 합성곱 (위치 합, 가중치 곱)

    1e-12 이내로 겹치는 위치는 하나로 합친다.
    """
    positions = np.zeros(1)
    weights = np.ones(1)
    for measure in measures:
        sums = np.add.outer(positions, measure.positions).ravel()
        prods = np.multiply.outer(weights, measure.weights).ravel()
        order = np.argsort(sums, kind="stable")
        sums, prods = sums[order], prods[order]
        starts = np.concatenate(([0], np.flatnonzero(np.diff(sums) > MERGE_TOL * np.maximum(1.0, sums[1:])) + 1))
        positions = sums[starts]
        weights = np.add.reduceat(prods, starts)
    weights = weights / math.fsum(weights)
    return AtomicMeasure(atoms=tuple(zip(positions.tolist(), weights.tolist())))


def quadratic_form(mu: SpectralMeasure, nu: AtomicMeasure) -> float:
    """νᵀKν = E[(∫f dν)²], K_ij = k(x_i − x_j)"""
    x, w = nu.positions, nu.weights
    kernel = covariance(mu, np.subtract.outer(x, x))
    return max(0.0, float(w @ kernel @ w))


# ============================================
# 조립
# ============================================
def _certify_entry(mu: SpectralMeasure, delta: float, entry: BandPlanEntry, n0: int) -> Certificate:
    mu_a = dyadic_band(mu, entry.band, delta)
    cert = certify_band(rescale_to_unit_band(mu_a, entry.a), entry.n_a, n0=n0)
    return rescale_certificate(cert, entry.a)


def _conditions(entries: Sequence[BandPlanEntry], c_pp: float, delta: float, L: float) -> ConditionReport:
    n_vals = [e.n_a for e in entries]
    cond1 = math.fsum(e.n_a / e.a for e in entries)
    cond2 = math.fsum(math.exp(-C_RATE * n) for n in n_vals)
    cond3_rhs = c_pp * delta * L
    cond3_min = min(n_vals)
    return ConditionReport(
        cond1_sum=cond1,
        cond1_ok=cond1 <= L * (1.0 + 1e-12),
        cond2_sum=cond2,
        cond2_ok=cond2 <= 1.0,
        cond3_min=cond3_min,
        cond3_rhs=cond3_rhs,
        cond3_ok=cond3_min >= cond3_rhs,
    )


def assemble(
    mu: SpectralMeasure,
    delta: float,
    L: float,
    c_pp: Optional[float] = None,
    discrete: bool = False,
    workers: Optional[int] = None,
    n0: Optional[int] = None,
) -> AssembledBound:
    """
    P{f ≥ 0 on [0, L]} 의 상한

    - energy_sum = Σ e^{-3c n_a} σ_a
    - α = argmax e^{-2c n_a} σ_a
    - tail = exp(−e^{2c n_α}/8), event = 2(n_α e^{-c n_α})^{N_α+1}
    - total = min(tail + event, 1/2)
    """
    settings = get_settings()
    n0 = settings.n0 if n0 is None else n0
    plan = plan_bands(mu, delta, L, c_pp=c_pp, discrete=discrete, n0=n0)
    if not plan.feasible:
        raise PlanInfeasibleError("band plan is infeasible: " + "; ".join(plan.diagnostics), MODULE)

    workers = max(1, workers or settings.workers)
    if workers == 1 or len(plan.entries) == 1:
        certificates = [_certify_entry(mu, delta, e, n0) for e in plan.entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            certificates = list(pool.map(lambda e: _certify_entry(mu, delta, e, n0), plan.entries))

    nu_total = convolve([cert.nu for cert in certificates])
    energy_sum = math.fsum(math.exp(-3.0 * C_RATE * c.n) * c.sigma for c in certificates)
    scores = [math.exp(-2.0 * C_RATE * c.n) * c.sigma for c in certificates]
    best = int(np.argmax(scores))
    alpha = certificates[best]

    if alpha.sigma == 0.0:
        tail_term = event_term = 0.0
    else:
        tail_term = math.exp(-math.exp(min(2.0 * C_RATE * alpha.n, 700.0)) / 8.0)
        log_event = math.log(2.0) + (alpha.N + 1) * (math.log(alpha.n) - C_RATE * alpha.n)
        event_term = math.exp(min(log_event, 700.0))
    raw = tail_term + event_term

    bound = AssembledBound(
        plan=plan,
        certificates=certificates,
        nu_total=nu_total,
        energy_sum=energy_sum,
        energy_exact=quadratic_form(mu, nu_total),
        argmax_band=plan.entries[best].band,
        tail_term=tail_term,
        event_term=event_term,
        total_bound_raw=raw,
        total_bound=min(raw, TRIVIAL_BOUND),
        conditions=plan.conditions,
    )
    logger.info(
        "상한 조립: L=%g δ=%g bands=%d α=k%d total=%.4g (raw %.4g)",
        L, delta, len(certificates), bound.argmax_band.k, bound.total_bound, raw,
    )
    return bound


def upper_bound_or_trivial(
    mu: SpectralMeasure,
    delta: float,
    L: float,
    c_pp: Optional[float] = None,
    discrete: bool = False,
    workers: Optional[int] = None,
) -> float:
    """계획이 불가능하면 단일점 경계 1/2"""
    try:
        return assemble(mu, delta, L, c_pp=c_pp, discrete=discrete, workers=workers).total_bound
    except PlanInfeasibleError as e:
        logger.debug("계획 불가, 1/2 반환: %s", e)
        return TRIVIAL_BOUND


def assembly_trace(bound: AssembledBound) -> Dict:
    """밴드별 (k, a, n_a, N, m, σ_a, energy, flat-block) 과 조건, 두 항을 담은 JSON 추적"""
    bands = []
    for entry, cert in zip(bound.plan.entries, bound.certificates):
        bands.append(
            {
                "k": entry.band.k,
                "a": entry.a,
                "n_a": entry.n_a,
                "mass_a": entry.mass_a,
                "N": cert.N,
                "m": cert.m,
                "sigma": cert.sigma,
                "energy": cert.energy,
                "energy_bound": cert.energy_bound,
                "flat_block_ok": cert.checks.get("flat_block", False),
                "prob_bound": cert.prob_bound,
                "log10_prob_bound": cert.log10_prob_bound,
                "checks": cert.checks,
            }
        )
    return {
        "delta": bound.plan.delta,
        "L": bound.plan.L,
        "c_pp": bound.plan.c_pp,
        "discrete": bound.plan.discrete,
        "bands": bands,
        "conditions": bound.conditions.model_dump(),
        "argmax_band": bound.argmax_band.k if bound.argmax_band else None,
        "nu_total_atoms": len(bound.nu_total.atoms),
        "nu_total_max_position": bound.nu_total.max_position,
        "energy_sum": bound.energy_sum,
        "energy_exact": bound.energy_exact,
        "tail_term": bound.tail_term,
        "event_term": bound.event_term,
        "total_bound_raw": bound.total_bound_raw,
        "total_bound": bound.total_bound,
    }
