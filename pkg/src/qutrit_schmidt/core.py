"""Biphoton polarization qutrits and their closed-form Schmidt decomposition.

A qutrit ``C1|2H> + C2|1H,1V> + C3|2V>`` has the symmetric two-photon wave
function ``M = [[C1, C2/sqrt2], [C2/sqrt2, C3]]``.  Its Schmidt modes are the
solutions of the kernel equation ``M @ conj(psi) = sqrt(lam) * psi``, which
fixes amplitudes *and* phases of the modes.  Everything here works on plain
Python complex scalars; numpy is only used at the array-facing edges.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConcurrence, NonFinite, ZeroState

NORM_TOL = 1e-12
KERNEL_TOL = 1e-10
RECON_TOL = 1e-10
ORTHO_TOL = 1e-10
# c2 below this is treated as exactly zero; the zero-c2 modes then violate the
# kernel equation by at most |c2|/sqrt2, which must stay under KERNEL_TOL.
BRANCH_TOL = 1e-12
DEGEN_TOL = 1e-8

SQRT2 = math.sqrt(2.0)
_HALF_PI = 0.5 * math.pi


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class QutritState:
    """Normalized amplitudes of |2H>, |1H,1V> and |2V>.

    Stored exactly as given; never rephased.
    """

    c1: complex
    c2: complex
    c3: complex

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            z = complex(getattr(self, name))
            if not _finite(z):
                raise NonFinite(f"{name} is not finite: {z!r}")
            object.__setattr__(self, name, z)
        norm2 = abs(self.c1) ** 2 + abs(self.c2) ** 2 + abs(self.c3) ** 2
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"qutrit is not normalized (|c|^2 = {norm2!r}); use make_qutrit")

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3], dtype=complex)

    def overlap(self, other: QutritState) -> complex:
        """Hermitian inner product <self|other>."""
        return (self.c1.conjugate() * other.c1 + self.c2.conjugate() * other.c2
                + self.c3.conjugate() * other.c3)


@dataclass(frozen=True)
class PolarizationMode:
    """Single-photon polarization (alpha, beta) in the H/V basis."""

    alpha: complex
    beta: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def phases(self) -> tuple[float, float]:
        return cmath.phase(self.alpha), cmath.phase(self.beta)

    def inner(self, other: PolarizationMode) -> complex:
        return self.alpha.conjugate() * other.alpha + self.beta.conjugate() * other.beta

    def __neg__(self):
        return PolarizationMode(-self.alpha, -self.beta)


@dataclass(frozen=True)
class SchmidtDecomposition:
    lambda_plus: float
    lambda_minus: float
    mode_plus: PolarizationMode
    mode_minus: PolarizationMode
    concurrence: float
    schmidt_number: float
    x_param: float
    phi0: float
    # True when lambda_minus <= DEGEN_TOL: mode_minus only completes the basis
    minus_is_null: bool = False
    branch: str = "general"

    @property
    def pairs(self):
        return ((self.lambda_plus, self.mode_plus), (self.lambda_minus, self.mode_minus))


def make_qutrit(c1, c2, c3) -> QutritState:
    """Rescale three amplitudes to a unit-norm qutrit, keeping their phases."""
    zs = [complex(c) for c in (c1, c2, c3)]
    if not all(_finite(z) for z in zs):
        raise NonFinite(f"non-finite amplitude in {zs!r}")
    norm = math.sqrt(sum(abs(z) ** 2 for z in zs))
    if norm <= np.finfo(float).eps * max(1.0, max(abs(z) for z in zs)) or norm == 0.0:
        raise ZeroState("all amplitudes vanish")
    return QutritState(*(z / norm for z in zs))


def coefficient_matrix(q: QutritState) -> np.ndarray:
    """The symmetric 2x2 wave-function matrix Psi(sigma1, sigma2)."""
    m = q.c2 / SQRT2
    return np.array([[q.c1, m], [m, q.c3]], dtype=complex)


def _k(q: QutritState) -> complex:
    return 2.0 * q.c1 * q.c3 - q.c2 * q.c2


def concurrence(q: QutritState) -> float:
    return abs(_k(q))


def schmidt_number(q: QutritState) -> float:
    c = concurrence(q)
    return 2.0 / (2.0 - c * c)


def _sqrt_one_minus_c2(q: QutritState) -> float:
    # 1 - C^2 = (|c1|^2 - |c3|^2)^2 + 2|c2* c3 + c2 c1*|^2: a sum of squares,
    # so no cancellation as C -> 1.
    a = abs(q.c1) ** 2 - abs(q.c3) ** 2
    d = q.c2.conjugate() * q.c3 + q.c2 * q.c1.conjugate()
    return math.hypot(a, SQRT2 * abs(d))


def _lambdas(q: QutritState, s: float) -> tuple[float, float]:
    lp = 0.5 * (1.0 + s)
    if s < 0.5:
        lm = 0.5 * (1.0 - s)
    else:
        c = concurrence(q)
        lm = c * c / (2.0 * (1.0 + s))
    return lp, lm


def lambdas(q: QutritState) -> tuple[float, float]:
    """Schmidt weights (lambda+, lambda-) = (1 +- sqrt(1 - C^2)) / 2."""
    return _lambdas(q, _sqrt_one_minus_c2(q))


def x_parameter(q: QutritState) -> float:
    """(|c1|^2 - |c3|^2) / sqrt(1 - C^2); undefined for C -> 1."""
    if concurrence(q) >= 1.0 - DEGEN_TOL:
        raise DegenerateConcurrence("x is 0/0 at C = 1; use decompose() for the limiting value")
    s = _sqrt_one_minus_c2(q)
    x = (abs(q.c1) ** 2 - abs(q.c3) ** 2) / s
    return min(1.0, max(-1.0, x))


def magic_residual(q: QutritState) -> float:
    """Deviation from 2|c2* c3 + c2 c1*|^2 + (|c1|^2 - |c3|^2)^2 = 1 - C^2."""
    d = q.c2.conjugate() * q.c3 + q.c2 * q.c1.conjugate()
    a = abs(q.c1) ** 2 - abs(q.c3) ** 2
    c = concurrence(q)
    return abs(2.0 * abs(d) ** 2 + a * a - (1.0 - c * c))


def phi0(q: QutritState) -> float:
    return cmath.phase(q.c1.conjugate() * q.c2 + q.c2.conjugate() * q.c3)


def fix_sign(alpha: complex, beta: complex) -> PolarizationMode:
    """Choose the sign making the leading nonzero component's phase lie in (-pi/2, pi/2]."""
    ref = alpha if abs(alpha) > 1e-15 else beta
    ang = math.atan2(ref.imag, ref.real)
    if ang > _HALF_PI or ang <= -_HALF_PI:
        return PolarizationMode(-alpha, -beta)
    return PolarizationMode(alpha, beta)


def kernel_image(q: QutritState, psi: PolarizationMode) -> tuple[complex, complex]:
    """M @ conj(psi)."""
    m = q.c2 / SQRT2
    a, b = psi.alpha.conjugate(), psi.beta.conjugate()
    return q.c1 * a + m * b, m * a + q.c3 * b


def kernel_residual(q: QutritState, lam: float, psi: PolarizationMode) -> float:
    """|| M conj(psi) - sqrt(lam) psi ||."""
    u, v = kernel_image(q, psi)
    r = math.sqrt(max(lam, 0.0))
    return math.hypot(abs(u - r * psi.alpha), abs(v - r * psi.beta))


def orthogonal_mode(q: QutritState, psi: PolarizationMode) -> PolarizationMode:
    """Unit vector orthogonal to psi, rephased to solve the kernel equation when it can."""
    alpha, beta = -psi.beta.conjugate(), psi.alpha.conjugate()
    perp = PolarizationMode(alpha, beta)
    u, v = kernel_image(q, perp)
    z = alpha.conjugate() * u + beta.conjugate() * v
    if abs(z) > 0.0:
        ph = cmath.exp(0.5j * cmath.phase(z))
        alpha, beta = alpha * ph, beta * ph
    return fix_sign(alpha, beta)


def _general_mode(q, u, k, dp, lam, amp_a, amp_b, offset):
    num = u.conjugate() * k + 2.0 * lam * u
    den = 2.0 * math.sqrt(lam) * dp
    phase_a = 0.5 * cmath.phase(num * den.conjugate())
    phase_b = phase_a + cmath.phase(dp) + offset
    return PolarizationMode(amp_a * cmath.exp(1j * phase_a), amp_b * cmath.exp(1j * phase_b))


def decompose(q: QutritState) -> SchmidtDecomposition:
    """Analytic Schmidt decomposition of a qutrit.

    Branches: maximally entangled (C ~ 1, modes from the con-eigenvector
    solver), c2 ~ 0 (modes are H and V with half the phases of c1, c3), and
    the general closed form.  Each mode is defined up to an overall sign.
    """
    c = concurrence(q)
    k_num = schmidt_number(q)
    s = _sqrt_one_minus_c2(q)
    lp, lm = _lambdas(q, s)
    p0 = phi0(q)
    minus_null = lm <= DEGEN_TOL

    if c >= 1.0 - DEGEN_TOL:
        return _maximally_entangled(q, lp, lm, c, k_num, p0)

    if abs(q.c2) <= BRANCH_TOL:
        h = PolarizationMode(cmath.exp(0.5j * cmath.phase(q.c1)), 0j)
        v = PolarizationMode(0j, cmath.exp(0.5j * cmath.phase(q.c3)))
        plus, minus, x = (h, v, 1.0) if abs(q.c1) >= abs(q.c3) else (v, h, -1.0)
        if minus_null:
            minus = orthogonal_mode(q, plus)
        return SchmidtDecomposition(lp, lm, plus, minus, c, k_num, x, p0, minus_null, "c2zero")

    u = q.c2 / abs(q.c2)
    dp = u.conjugate() * q.c3 + u * q.c1.conjugate()
    if abs(dp) <= BRANCH_TOL:
        return _maximally_entangled(q, lp, lm, c, k_num, p0)

    a = abs(q.c1) ** 2 - abs(q.c3) ** 2
    # s +- a, with the smaller one taken from (s+a)(s-a) = 2|D|^2
    d2 = 2.0 * (abs(q.c2) * abs(dp)) ** 2
    if a >= 0.0:
        p = s + a
        m = d2 / p
    else:
        m = s - a
        p = d2 / m
    x = min(1.0, max(-1.0, a / s))
    amp_big, amp_small = math.sqrt(p / (2.0 * s)), math.sqrt(m / (2.0 * s))
    k = _k(q)
    plus = _general_mode(q, u, k, dp, lp, amp_big, amp_small, 0.0)
    if minus_null:
        minus = orthogonal_mode(q, plus)
    else:
        minus = _general_mode(q, u, k, dp, lm, amp_small, amp_big, math.pi)
    return SchmidtDecomposition(lp, lm, plus, minus, c, k_num, x, p0, minus_null, "general")


def _maximally_entangled(q, lp, lm, c, k_num, p0):
    from .oracle import con_eigen_modes

    plus = con_eigen_modes(q).mode_plus
    minus = orthogonal_mode(q, plus)
    x = abs(plus.alpha) ** 2 - abs(plus.beta) ** 2
    return SchmidtDecomposition(lp, lm, plus, minus, c, k_num, x, p0, lm <= DEGEN_TOL, "maximal")


def reconstruct(d: SchmidtDecomposition) -> QutritState:
    """Expand sum_pm sqrt(lam/2) (alpha a_H^+ + beta a_V^+)^2 |0> back into (c1, c2, c3)."""
    c1 = c2 = c3 = 0j
    for lam, psi in d.pairs:
        r = math.sqrt(max(lam, 0.0))
        c1 += r * psi.alpha * psi.alpha
        c2 += SQRT2 * r * psi.alpha * psi.beta
        c3 += r * psi.beta * psi.beta
    return make_qutrit(c1, c2, c3)
