"""Facet calibrability: candidate surface fields, verdicts and thresholds.

A facet translates rigidly iff the scalar surface field forced by the
constant-velocity requirement stays within [-1, 1].  The field is affine
between trace jumps, so the exhaustive check at breakpoints
(:func:`oracle_is_calibrable`) is exact; the closed-form classifiers must
agree with it.

Threshold constants: for a positively curved facet whose endpoints sit at
distances sigma_1, sigma_2 inside their alpha phases, integrating the slope
field across the first (last) full beta phase gives the two-sided
constraint ``sigma_1 >= m*sigma_2 + h`` and symmetrically, with

    m = eps*(b-a) / ((b-a)*(Lt + eps/2) + 4)
    h = eps*((b-a)*(Lt + eps/2) - 4) / (2*(b-a)*(Lt + eps/2) + 8)

where Lt is the distance between the first and last interior extremes of
the field.  On the diagonal sigma_1 = sigma_2 the constraint collapses to
``sigma >= h/(1-m)``, which is the sharp breaking threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .medium import ChessboardMedium, EndpointState, JumpKind, LineTrace

CAL_TOL = 1e-12  # slack on |n| <= 1; the bound itself counts as calibrable


class CalibrabilityError(ValueError):
    pass


@dataclass(frozen=True)
class CandidateField:
    """Piecewise-affine surface field sampled at its breakpoints."""

    breakpoints: tuple[tuple[float, float], ...]
    velocity: float

    def max_abs(self) -> float:
        return max(abs(v) for _, v in self.breakpoints)

    def margin(self) -> float:
        """1 - max|n|; negative means the facet cannot be calibrated."""
        return 1.0 - self.max_abs()

    def worst(self) -> tuple[float, float]:
        return max(self.breakpoints, key=lambda bv: abs(bv[1]))


@dataclass(frozen=True)
class CalibrabilityVerdict:
    calibrable: bool
    velocity: float
    violation: tuple[float, float] | None = None


@dataclass(frozen=True)
class BreakingThresholds:
    m: float | None
    h: float | None
    sigma_tilde: float | None
    sigma_star: float | None


def _boundary_values(chi: int, n0: int) -> tuple[int, int]:
    if chi == 1:
        return -1, 1
    if chi == -1:
        return 1, -1
    if n0 not in (-1, 1):
        raise CalibrabilityError(f"zero-curvature facet needs n0 in {{-1, +1}}, got {n0}")
    return n0, n0


def feasible_velocity(trace: LineTrace, p: float, q: float, chi: int) -> float:
    """Constant velocity forced on the facet: curvature plus trace mean."""
    ell = q - p
    if ell <= 0:
        raise CalibrabilityError("facet must have positive length")
    return chi * 2.0 / ell + trace.integrate(p, q) / ell


def candidate_field(trace: LineTrace, p: float, q: float, chi: int, n0: int = 1) -> CandidateField:
    """Field with the prescribed endpoint values and constant velocity.

    Exact at every trace jump in [p, q]; between breakpoints the field is
    affine, so the breakpoint values bound it everywhere.
    """
    if trace.on_grid:
        raise CalibrabilityError("facet lies on a discontinuity line")
    ell = q - p
    if ell <= 0:
        raise CalibrabilityError("facet must have positive length")
    n_p, _ = _boundary_values(chi, n0)
    v = feasible_velocity(trace, p, q, chi)
    xs = [p] + [s for s, _ in trace.interior_jumps(p, q)] + [q]
    pts = []
    for x in xs:
        pts.append((x, n_p + (x - p) * v - trace.integrate(p, x)))
    return CandidateField(tuple(pts), v)


def oracle_is_calibrable(trace: LineTrace, p: float, q: float, chi: int, n0: int = 1) -> CalibrabilityVerdict:
    """Exact verdict by exhaustive breakpoint evaluation."""
    f = candidate_field(trace, p, q, chi, n0)
    ok = f.max_abs() <= 1.0 + CAL_TOL
    return CalibrabilityVerdict(ok, f.velocity, None if ok else f.worst())


def phase_slopes(medium: ChessboardMedium, ell: float, ell_alpha: float, ell_beta: float, chi: int) -> tuple[float, float]:
    """Field slope in the alpha phase and in the beta phase."""
    ba = medium.beta - medium.alpha
    sa = (4.0 * chi + ba * (ell - ell_alpha + ell_beta)) / (2.0 * ell)
    sb = (4.0 * chi - ba * (ell + ell_alpha - ell_beta)) / (2.0 * ell)
    return sa, sb


def classify_zero_curvature(trace: LineTrace, p: float, q: float, n0: int) -> CalibrabilityVerdict:
    """Closed-form verdict for a flat facet (chi = 0).

    A facet inside a single phase always calibrates (constant field).
    Shorter than one period, it calibrates iff the field can only fall
    away from the bound at both ends: beta then alpha for n0 = +1 and the
    mirror for n0 = -1.  From one period up, both endpoints must sit on
    jumps of the matching kind, giving the mean velocity.
    """
    if trace.on_grid:
        raise CalibrabilityError("facet lies on a discontinuity line")
    if n0 not in (-1, 1):
        raise CalibrabilityError("n0 must be +-1")
    m = trace.medium
    ell = q - p
    if ell <= 0:
        raise CalibrabilityError("facet must have positive length")
    dec = trace.phase_decomposition(p, q)
    if not trace.interior_jumps(p, q):
        v = (m.alpha * dec.ell_alpha + m.beta * dec.ell_beta) / ell
        return CalibrabilityVerdict(True, v)
    sp = trace.endpoint_state(p)
    sq = trace.endpoint_state(q)
    after_p = m.beta if sp in (EndpointState.IN_BETA, EndpointState.JUMP_ALPHA_BETA) else m.alpha
    before_q = m.beta if sq in (EndpointState.IN_BETA, EndpointState.JUMP_BETA_ALPHA) else m.alpha
    if ell < m.epsilon:
        if n0 == 1:
            ok = after_p == m.beta and before_q == m.alpha
        else:
            ok = after_p == m.alpha and before_q == m.beta
        denom = dec.ell_alpha + dec.ell_beta
        v = (m.alpha * dec.ell_alpha + m.beta * dec.ell_beta) / denom if denom > 0 else m.mean
        return CalibrabilityVerdict(ok, v)
    want = EndpointState.JUMP_ALPHA_BETA if n0 == 1 else EndpointState.JUMP_BETA_ALPHA
    ok = sp is want and sq is want
    return CalibrabilityVerdict(ok, m.mean)


def breaking_threshold(medium: ChessboardMedium, interior_len: float) -> float:
    """Sharp sigma threshold given the interior extreme-to-extreme length."""
    ba = medium.beta - medium.alpha
    eps = medium.epsilon
    return eps * (ba * (interior_len + 0.5 * eps) - 4.0) / (2.0 * ba * (interior_len - 0.5 * eps) + 8.0)


def slab_coefficients(medium: ChessboardMedium, ell_tilde: float) -> tuple[float, float]:
    """Coefficients (m, h) of the two-sided constraint sigma1 >= m*sigma2 + h."""
    ba = medium.beta - medium.alpha
    eps = medium.epsilon
    d = ba * (ell_tilde + 0.5 * eps)
    return eps * ba / (d + 4.0), eps * (d - 4.0) / (2.0 * d + 8.0)


def _sigma_p(trace: LineTrace, p: float) -> tuple[float, float]:
    """Distance from p to the end of its alpha phase, and that jump position."""
    j, _ = trace.first_jump_at_or_after(p, JumpKind.ALPHA_TO_BETA)
    return j - p, j


def _sigma_q(trace: LineTrace, q: float) -> tuple[float, float]:
    j, _ = trace.last_jump_at_or_before(q, JumpKind.BETA_TO_ALPHA)
    return q - j, j


def classify_positive_curvature(trace: LineTrace, p: float, q: float) -> CalibrabilityVerdict:
    """Closed-form verdict for a convex facet (chi = +1)."""
    if trace.on_grid:
        raise CalibrabilityError("facet lies on a discontinuity line")
    m = trace.medium
    ell = q - p
    if ell <= 0:
        raise CalibrabilityError("facet must have positive length")
    dec = trace.phase_decomposition(p, q)
    v = feasible_velocity(trace, p, q, 1)
    ba = m.beta - m.alpha
    slack = CAL_TOL * max(1.0, ell)
    if ell + dec.ell_alpha - dec.ell_beta <= 4.0 / ba + slack:
        return CalibrabilityVerdict(True, v)  # field nondecreasing everywhere
    sp = trace.endpoint_state(p)
    sq = trace.endpoint_state(q)
    p_good = sp in (EndpointState.IN_ALPHA, EndpointState.JUMP_BETA_ALPHA)
    q_good = sq in (EndpointState.IN_ALPHA, EndpointState.JUMP_ALPHA_BETA)
    if sp is EndpointState.JUMP_BETA_ALPHA and sq is EndpointState.JUMP_ALPHA_BETA:
        return CalibrabilityVerdict(True, v)
    if not (p_good and q_good):
        return CalibrabilityVerdict(False, v, candidate_field(trace, p, q, 1).worst())
    if not trace.interior_jumps(p, q):
        return CalibrabilityVerdict(True, v)  # single phase: affine rise from -1 to 1
    stol = CAL_TOL * max(1.0, 1.0 / ell)
    if sp is EndpointState.IN_ALPHA and sq is EndpointState.IN_ALPHA:
        s1, j1 = _sigma_p(trace, p)
        s2, j2 = _sigma_q(trace, q)
        mm, hh = slab_coefficients(m, (j2 - 0.5 * m.epsilon) - (j1 + 0.5 * m.epsilon))
        ok = s1 + stol >= mm * s2 + hh and s2 + stol >= mm * s1 + hh
    elif sp is EndpointState.IN_ALPHA:
        s1, j1 = _sigma_p(trace, p)
        ok = s1 + stol >= breaking_threshold(m, q - (j1 + 0.5 * m.epsilon))
    else:
        s2, j2 = _sigma_q(trace, q)
        ok = s2 + stol >= breaking_threshold(m, (j2 - 0.5 * m.epsilon) - p)
    if ok:
        return CalibrabilityVerdict(True, v)
    return CalibrabilityVerdict(False, v, candidate_field(trace, p, q, 1).worst())


def classify(trace: LineTrace, p: float, q: float, chi: int, n0: int = 1) -> CalibrabilityVerdict:
    """Closed-form dispatch on the curvature sign."""
    if chi == 0:
        return classify_zero_curvature(trace, p, q, n0)
    if chi == 1:
        return classify_positive_curvature(trace, p, q)
    raise CalibrabilityError(f"no classifier for chi = {chi}")


def thresholds(trace: LineTrace, p: float, q: float) -> BreakingThresholds:
    """Threshold constants for a convex facet past the critical length.

    For a facet with both endpoints inside alpha phases the two-sided
    coefficients (m, h) and the diagonal threshold sigma_tilde are set;
    for the mixed endpoint/jump cases only sigma_star is.
    """
    if trace.on_grid:
        raise CalibrabilityError("facet lies on a discontinuity line")
    m = trace.medium
    dec = trace.phase_decomposition(p, q)
    if dec.ell + dec.ell_alpha - dec.ell_beta <= 4.0 / (m.beta - m.alpha):
        raise CalibrabilityError("facet below the critical length has no breaking threshold")
    sp = trace.endpoint_state(p)
    sq = trace.endpoint_state(q)
    if sp is EndpointState.IN_ALPHA and sq is EndpointState.IN_ALPHA:
        _, j1 = _sigma_p(trace, p)
        _, j2 = _sigma_q(trace, q)
        lt = (j2 - 0.5 * m.epsilon) - (j1 + 0.5 * m.epsilon)
        mm, hh = slab_coefficients(m, lt)
        return BreakingThresholds(mm, hh, breaking_threshold(m, lt), None)
    if sp is EndpointState.IN_ALPHA and sq is EndpointState.JUMP_ALPHA_BETA:
        _, j1 = _sigma_p(trace, p)
        return BreakingThresholds(None, None, None, breaking_threshold(m, q - (j1 + 0.5 * m.epsilon)))
    if sp is EndpointState.JUMP_BETA_ALPHA and sq is EndpointState.IN_ALPHA:
        _, j2 = _sigma_q(trace, q)
        return BreakingThresholds(None, None, None, breaking_threshold(m, (j2 - 0.5 * m.epsilon) - p))
    raise CalibrabilityError("thresholds need alpha-phase or matching-jump endpoints")
