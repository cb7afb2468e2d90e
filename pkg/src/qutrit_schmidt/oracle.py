"""Reference Schmidt decomposition via the reduced density matrix.

Independent of the closed form in :mod:`core`: the modes come from the
eigenvectors of rho = M M^dagger, and their phases are then fixed by solving
the con-eigenvalue equation M conj(psi) = sqrt(lam) psi directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEGEN_TOL,
    SQRT2,
    PolarizationMode,
    QutritState,
    SchmidtDecomposition,
    fix_sign,
    kernel_image,
    kernel_residual,
)

# rho eigenvalue gap below which the Takagi pair is built for the degenerate subspace
GAP_TOL = 1e-13
# modes are compared componentwise only above this gap; below it, as subspaces
COMPARE_GAP = 1e-6


@dataclass(frozen=True)
class ReducedDensityMatrix:
    rho00: float
    rho01: complex
    rho11: float

    def to_array(self) -> np.ndarray:
        return np.array([[self.rho00, self.rho01], [self.rho01.conjugate(), self.rho11]], dtype=complex)

    @property
    def trace(self) -> float:
        return self.rho00 + self.rho11


def reduced_density_matrix(q: QutritState) -> ReducedDensityMatrix:
    m = q.c2 / SQRT2
    # rows of M are (c1, m) and (m, c3)
    r00 = abs(q.c1) ** 2 + abs(m) ** 2
    r11 = abs(m) ** 2 + abs(q.c3) ** 2
    r01 = q.c1 * m.conjugate() + m * q.c3.conjugate()
    return ReducedDensityMatrix(r00, r01, r11)


def eig_hermitian_2x2(rho: ReducedDensityMatrix):
    """Closed-form eigenpairs of a 2x2 Hermitian matrix, largest eigenvalue first.

    The eigenvector of the larger eigenvalue is built from the column that
    avoids cancellation, so the residual stays at round-off level even for a
    vanishing gap.
    """
    a, b, d = rho.rho00, rho.rho01, rho.rho11
    h = 0.5 * (a - d)
    disc = math.hypot(h, abs(b))
    mean = 0.5 * (a + d)
    lp, lm = mean + disc, mean - disc
    if h >= 0.0:
        x, y = complex(h + disc), b.conjugate()
    else:
        x, y = b, complex(disc - h)
    n = math.hypot(abs(x), abs(y))
    if n == 0.0:
        x, y, n = 1 + 0j, 0j, 1.0
    vp = PolarizationMode(x / n, y / n)
    vm = PolarizationMode(-vp.beta.conjugate(), vp.alpha.conjugate())
    return (lp, vp), (lm, vm)


def _normalized(alpha, beta):
    n = math.hypot(abs(alpha), abs(beta))
    return PolarizationMode(alpha / n, beta / n), n


def _con_value(q: QutritState, v: PolarizationMode) -> complex:
    """v^dagger M conj(v), equal to sqrt(lam) e^{i delta} for an eigenvector of rho."""
    u, w = kernel_image(q, v)
    return v.alpha.conjugate() * u + v.beta.conjugate() * w


def _phase_fixed(q: QutritState, v: PolarizationMode, refine: bool = True) -> PolarizationMode:
    z = _con_value(q, v)
    if abs(z) == 0.0:
        return fix_sign(v.alpha, v.beta)
    ph = cmath.exp(0.5j * cmath.phase(z))
    psi = PolarizationMode(v.alpha * ph, v.beta * ph)
    if not refine:
        return fix_sign(psi.alpha, psi.beta)
    # sigma psi + M conj(psi) keeps only the part of psi that actually solves
    # the con-eigen equation, removing the phase error left by a near-degenerate rho
    u, w = kernel_image(q, psi)
    sigma = abs(z)
    refined, n = _normalized(sigma * psi.alpha + u, sigma * psi.beta + w)
    if n > 0.0:
        psi = refined
    return fix_sign(psi.alpha, psi.beta)


def _takagi_degenerate(q: QutritState, sigma: float) -> tuple[PolarizationMode, PolarizationMode]:
    """Orthonormal con-eigenvectors when both singular values of M equal sigma.

    Any u gives a solution u + W conj(u) with W = M / sigma.  Of the real
    one-parameter family, the returned first mode maximizes Re(alpha).
    """
    cands = []
    for u in ((1 + 0j, 0j), (1j, 0j), (0j, 1 + 0j), (0j, 1j)):
        x, y = kernel_image(q, PolarizationMode(*u))
        cands.append((u[0] + x / sigma, u[1] + y / sigma))
    cands.sort(key=lambda c: -math.hypot(abs(c[0]), abs(c[1])))
    b1, _ = _normalized(*cands[0])
    best = None
    for c in cands[1:]:
        proj = (b1.alpha.conjugate() * c[0] + b1.beta.conjugate() * c[1]).real
        r = (c[0] - proj * b1.alpha, c[1] - proj * b1.beta)
        nr = math.hypot(abs(r[0]), abs(r[1]))
        if best is None or nr > best[0]:
            best = (nr, r)
    b2, _ = _normalized(*best[1])

    ta, tb = b1.alpha.real, b2.alpha.real
    if math.hypot(ta, tb) < 1e-12:
        ta, tb = b1.alpha.imag, b2.alpha.imag
    t = math.hypot(ta, tb)
    cos_t, sin_t = ta / t, tb / t
    plus = PolarizationMode(cos_t * b1.alpha + sin_t * b2.alpha, cos_t * b1.beta + sin_t * b2.beta)
    minus = PolarizationMode(-sin_t * b1.alpha + cos_t * b2.alpha, -sin_t * b1.beta + cos_t * b2.beta)
    return fix_sign(plus.alpha, plus.beta), fix_sign(minus.alpha, minus.beta)


def con_eigen_modes(q: QutritState) -> SchmidtDecomposition:
    """Schmidt decomposition from rho's eigenvectors with kernel-fixed phases."""
    (lp, vp), (lm, vm) = eig_hermitian_2x2(reduced_density_matrix(q))
    lp, lm = max(lp, 0.0), max(lm, 0.0)
    if lp - lm <= GAP_TOL:
        plus, minus = _takagi_degenerate(q, math.sqrt(0.5 * (lp + lm)))
        branch = "takagi"
    else:
        if lm < 0.25:
            # lp - disc loses digits for a small weight; |v^dagger M conj(v)|^2 does not
            lm = abs(_con_value(q, vm)) ** 2
        # the refinement step divides out sigma, so it is skipped for a null mode
        plus, minus = _phase_fixed(q, vp), _phase_fixed(q, vm, refine=lm > DEGEN_TOL)
        branch = "rho"
    c = 2.0 * math.sqrt(lp * lm)
    x = abs(plus.alpha) ** 2 - abs(plus.beta) ** 2
    p0 = cmath.phase(q.c1.conjugate() * q.c2 + q.c2.conjugate() * q.c3)
    return SchmidtDecomposition(lp, lm, plus, minus, c, 2.0 / (2.0 - c * c), x, p0,
                                lm <= DEGEN_TOL, branch)


def _dist_sign(a: PolarizationMode, b: PolarizationMode) -> float:
    return min(
        math.hypot(abs(a.alpha - s * b.alpha), abs(a.beta - s * b.beta)) for s in (1.0, -1.0)
    )


def _dist_phase(a: PolarizationMode, b: PolarizationMode) -> float:
    z = b.inner(a)
    ph = z / abs(z) if abs(z) > 0.0 else 1.0
    return math.hypot(abs(a.alpha - ph * b.alpha), abs(a.beta - ph * b.beta))


def _real_span_residual(basis, v: PolarizationMode) -> float:
    ra, rb = v.alpha, v.beta
    for e in basis:
        p = e.inner(v).real
        ra, rb = ra - p * e.alpha, rb - p * e.beta
    return math.hypot(abs(ra), abs(rb))


def compare_decompositions(a: SchmidtDecomposition, b: SchmidtDecomposition, q: QutritState | None = None) -> float:
    """Discrepancy between two decompositions of the same state.

    Modes are compared up to a per-mode sign; a null minus-mode (lambda- ~ 0)
    is compared up to an arbitrary phase.  When the weights are degenerate
    the modes are only fixed up to a real rotation, so the distance between
    the real spans is used, plus both kernel residuals when ``q`` is given.
    """
    dl = max(abs(a.lambda_plus - b.lambda_plus), abs(a.lambda_minus - b.lambda_minus))
    if a.lambda_plus - a.lambda_minus > COMPARE_GAP:
        dm = _dist_sign(a.mode_plus, b.mode_plus)
        if a.minus_is_null or b.minus_is_null:
            dm = max(dm, _dist_phase(a.mode_minus, b.mode_minus))
        else:
            dm = max(dm, _dist_sign(a.mode_minus, b.mode_minus))
        return max(dl, dm)
    basis = (a.mode_plus, a.mode_minus)
    sub = max(_real_span_residual(basis, b.mode_plus), _real_span_residual(basis, b.mode_minus))
    res = 0.0
    if q is not None:
        res = sum(kernel_residual(q, lam, psi) for d in (a, b) for lam, psi in d.pairs)
    return max(dl, sub + res)
