"""Coincidence measurements behind a polarizing beam splitter.

Forward model: rotate the biphoton into the splitter basis, then both
photons are transmitted with probability |c1'|^2, split between the two ports
(a coincidence) with |c2'|^2, and both reflected with |c3'|^2.  Detectors are
ideal.  The estimator assumes the state was canonicalized beforehand, i.e.
it is (sqrt(lambda+), 0, e^{2i phi} sqrt(lambda-)) in the H/V basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import QutritState, make_qutrit
from .errors import InvalidTrials, MissingSetting
from .transforms import apply_unitary, canonical_state, phase_retarder, rotation

ANGLE_TOL = 1e-9
# Largest per-trial Fisher information about phi over all phi, 4 C^2, below
# which phi is reported unidentifiable.  0.032 corresponds to lambda- ~ 2e-3.
PHI_FISHER_MIN = 0.032


@dataclass(frozen=True)
class MeasurementSetting:
    basis_angle: float = 0.0
    extra_retardation: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.basis_angle):
            raise ValueError("basis_angle must be finite")

    def unitary(self) -> np.ndarray:
        r = rotation(self.basis_angle)
        if self.extra_retardation is not None:
            r = r @ np.asarray(self.extra_retardation, dtype=complex)
        return r

    def is_angle(self, angle: float) -> bool:
        return self.extra_retardation is None and abs(self.basis_angle - angle) < ANGLE_TOL


STANDARD = MeasurementSetting(0.0)
TURNED_90 = MeasurementSetting(0.5 * math.pi)
TURNED_45 = MeasurementSetting(0.25 * math.pi)
# 45 degrees after a retarder that moves phi by pi/4: sensitive to sin(2 phi)
TURNED_45_SHIFTED = MeasurementSetting(0.25 * math.pi, phase_retarder(0.25 * math.pi))


@dataclass(frozen=True)
class CountRecord:
    """Outcome counts; floats are allowed for exact, infinite-statistics records."""

    n_total: float
    n_both_t: float
    n_both_r: float
    n_coinc: float

    def __post_init__(self):
        if abs(self.n_both_t + self.n_both_r + self.n_coinc - self.n_total) > 1e-9 * max(1.0, self.n_total):
            raise ValueError("counts do not add up to n_total")

    @classmethod
    def expected(cls, probs, n: float = 1.0) -> CountRecord:
        pt, pc, pr = probs
        return cls(n, n * pt, n * pr, n * pc)


@dataclass(frozen=True)
class EstimationResult:
    lambda_plus_hat: float
    lambda_minus_hat: float
    phi_hat: float | None
    std_errors: dict
    n_used: float
    phi_identifiable: bool = True
    # True when only cos(2 phi) was measured, so phi_hat is |phi|
    phi_sign_ambiguous: bool = False


def haar_qutrit(rng: np.random.Generator) -> QutritState:
    """Uniform random point on the unit sphere of C^3."""
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    return make_qutrit(*v)


def outcome_probabilities(q: QutritState, s: MeasurementSetting) -> tuple[float, float, float]:
    """(P both transmitted, P coincidence, P both reflected)."""
    qr = apply_unitary(q, s.unitary())
    p = np.array([abs(qr.c1) ** 2, abs(qr.c2) ** 2, abs(qr.c3) ** 2])
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return float(p[0]), float(p[1]), float(p[2])


def _binomial_splits(rng, n, pt, pr, pc):
    nt = int(rng.binomial(n, min(1.0, pt)))
    rest = n - nt
    tail = pr + pc
    nr = int(rng.binomial(rest, min(1.0, pr / tail))) if rest and tail > 0 else 0
    return nt, nr, rest - nr


def sample_counts(q: QutritState, s: MeasurementSetting, n: int, seed: int, shards: int = 1) -> CountRecord:
    """Multinomial draw of ``n`` trials as sequential binomial splits (T, then R, rest C).

    Uses the counter-based Philox generator; shard ``k`` draws from the k-th
    child of ``SeedSequence(seed)``, so (seed, n, shards) fixes the result.
    """
    if n < 1:
        raise InvalidTrials(f"need at least one trial, got {n}")
    if shards < 1:
        raise InvalidTrials("shards must be >= 1")
    pt, pc, pr = outcome_probabilities(q, s)
    sizes = [n // shards + (1 if k < n % shards else 0) for k in range(shards)]
    children = np.random.SeedSequence(seed).spawn(shards)
    nt = nr = nc = 0
    for size, child in zip(sizes, children):
        if size == 0:
            continue
        rng = np.random.Generator(np.random.Philox(child))
        a, b, c = _binomial_splits(rng, size, pt, pr, pc)
        nt, nr, nc = nt + a, nr + b, nc + c
    return CountRecord(n, nt, nr, nc)


def _lambda_counts(records):
    plus = minus = 0.0
    for s, r in records:
        if s.is_angle(0.0):
            plus, minus = plus + r.n_both_t, minus + r.n_both_r
        elif s.is_angle(0.5 * math.pi):
            plus, minus = plus + r.n_both_r, minus + r.n_both_t
    return plus, minus


def _phi_response(lambda_plus, s):
    """Coincidence probability A + Bc cos(2phi) + Bs sin(2phi) at a setting."""
    p0 = outcome_probabilities(canonical_state(lambda_plus, 0.0), s)[1]
    p90 = outcome_probabilities(canonical_state(lambda_plus, 0.5 * math.pi), s)[1]
    p45 = outcome_probabilities(canonical_state(lambda_plus, 0.25 * math.pi), s)[1]
    a = 0.5 * (p0 + p90)
    return a, 0.5 * (p0 - p90), p45 - a


def _is_lambda_setting(s):
    return s.is_angle(0.0) or s.is_angle(0.5 * math.pi)


def _point_estimate(lam_freq, phi_rows):
    """phi from the coincidence frequencies of the phi-sensitive records.

    Each row is (frequency, setting, weight).  The model is linear in
    (cos 2phi, sin 2phi); with a rank-one design (plain 45 degree data) only
    the projection is fixed and the sign of phi is taken as non-negative.
    """
    rows = []
    for f, s, w in phi_rows:
        a, bc, bs = _phi_response(lam_freq, s)
        rows.append((f - a, bc, bs, w))
    design = np.array([[bc, bs] for _, bc, bs, _ in rows]) * np.sqrt([[w] for *_, w in rows])
    rhs = np.array([y for y, *_ in rows]) * np.sqrt([w for *_, w in rows])
    sv = np.linalg.svd(design, compute_uv=False)
    if len(rows) >= 2 and sv[-1] > 1e-6 * sv[0]:
        cs, *_ = np.linalg.lstsq(design, rhs, rcond=None)
        return 0.5 * math.atan2(cs[1], cs[0]), False
    # rank one: project onto the dominant direction
    _, _, vt = np.linalg.svd(design)
    n = vt[0]
    t = float(rhs @ (design @ n) / (design @ n @ (design @ n)))
    t = max(-1.0, min(1.0, t))
    perp = np.array([-n[1], n[0]])
    if perp[1] < 0 or (perp[1] == 0 and perp[0] < 0):
        perp = -perp
    cs = t * n + math.sqrt(1.0 - t * t) * perp
    return 0.5 * math.atan2(cs[1], cs[0]), True


def estimate(records, want_phi: bool = True) -> EstimationResult:
    """Estimate lambda+- and phi from coincidence records of a canonicalized state.

    lambda+ is the fraction of both-transmitted among non-coincident events at
    0 degrees (pooled with the swapped 90 degree counts); phi inverts the
    coincidence rate of every other setting by the method of moments.
    Standard errors follow from binomial variances by the delta method.
    """
    records = list(records)
    plus, minus = _lambda_counts(records)
    if plus + minus <= 0:
        raise MissingSetting("an angle-0 (or 90 degree) record is required")
    n_lam = plus + minus
    lp = plus / n_lam
    se_l = math.sqrt(lp * (1.0 - lp) / n_lam)
    n_used = sum(r.n_total for _, r in records)

    phi_recs = [(s, r) for s, r in records if not _is_lambda_setting(s)]
    if not want_phi:
        return EstimationResult(lp, 1.0 - lp, None, {"lambda": se_l}, n_used, False)
    if not phi_recs:
        raise MissingSetting("a 45 degree record is required to estimate phi")

    c_hat = 2.0 * math.sqrt(lp * (1.0 - lp))
    if 4.0 * c_hat * c_hat < PHI_FISHER_MIN:
        return EstimationResult(lp, 1.0 - lp, None, {"lambda": se_l, "phi": math.inf}, n_used, False)

    freqs = [r.n_coinc / r.n_total for _, r in phi_recs]
    weights = [r.n_total for _, r in phi_recs]

    def phi_of(lam, fs):
        return _point_estimate(lam, [(f, s, w) for f, (s, _), w in zip(fs, phi_recs, weights)])

    phi, ambiguous = phi_of(lp, freqs)

    # delta method as secants over one binomial standard error, so a frequency
    # pinned at 0 or 1 (where acos has infinite slope) still gets a finite error;
    # the variance is floored at one event's worth
    def dphi(lam, fs):
        return math.remainder(phi_of(lam, fs)[0] - phi, math.pi)

    def secant(f, sd, fn):
        lo, hi = max(0.0, f - sd), min(1.0, f + sd)
        return (fn(hi) - fn(lo)) / (hi - lo) * sd

    sd_l = math.sqrt(max(lp * (1.0 - lp), 1.0 / n_lam) / n_lam)
    var = secant(lp, sd_l, lambda v: dphi(v, freqs)) ** 2
    for i, (f, w) in enumerate(zip(freqs, weights)):
        def moved(v, i=i):
            fs = list(freqs)
            fs[i] = v
            return dphi(lp, fs)
        var += secant(f, math.sqrt(max(f * (1.0 - f), 1.0 / w) / w), moved) ** 2
    return EstimationResult(lp, 1.0 - lp, phi, {"lambda": se_l, "phi": math.sqrt(var)},
                            n_used, True, ambiguous)
