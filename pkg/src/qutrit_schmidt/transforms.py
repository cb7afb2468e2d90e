"""Wave plates and the reduction of a qutrit to its two-parameter canonical form.

A single-photon Jones matrix ``u`` acts on both photons, so the qutrit's
coefficient matrix transforms by symmetric congruence ``M -> u M u^T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import DEGEN_TOL, SQRT2, QutritState, coefficient_matrix, decompose, make_qutrit


def _wrap(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.remainder(phi, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def hwp(theta: float) -> np.ndarray:
    """Half-wave plate with fast axis at ``theta`` (det = -1)."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp(theta: float) -> np.ndarray:
    """Quarter-wave plate with fast axis at ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    off = (1 - 1j) * s * c
    m = np.array([[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]], dtype=complex)
    return np.exp(-0.25j * math.pi) * m


def rotation(theta: float) -> np.ndarray:
    """Basis rotation taking components onto axes turned by ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def phase_retarder(delta: float) -> np.ndarray:
    """diag(e^{-i delta/2}, e^{i delta/2}); shifts the canonical phase phi by ``delta``."""
    return np.diag([np.exp(-0.5j * delta), np.exp(0.5j * delta)])


def is_unitary(u, atol=1e-12) -> bool:
    u = np.asarray(u)
    return u.shape == (2, 2) and np.allclose(u @ u.conj().T, np.eye(2), atol=atol, rtol=0)


def apply_unitary(q: QutritState, u) -> QutritState:
    u = np.asarray(u, dtype=complex)
    m = u @ coefficient_matrix(q) @ u.T
    return QutritState(m[0, 0], SQRT2 * m[0, 1], m[1, 1])


@dataclass(frozen=True)
class CanonicalForm:
    lambda_plus: float
    lambda_minus: float
    phi: float
    unitary_used: np.ndarray
    phase_undefined: bool = False

    def state(self) -> QutritState:
        """(sqrt(lambda+), 0, e^{2i phi} sqrt(lambda-))."""
        return canonical_state(self.lambda_plus, self.phi)


def canonical_state(lambda_plus: float, phi: float) -> QutritState:
    lm = 1.0 - lambda_plus
    return make_qutrit(math.sqrt(lambda_plus), 0.0, np.exp(2j * phi) * math.sqrt(max(lm, 0.0)))


def canonicalize(q: QutritState) -> CanonicalForm:
    """Rotate the + Schmidt mode onto H, which sends the - mode onto V.

    The plate transform is taken in SU(2) with ``u @ psi_plus = (1, 0)``
    exactly; then ``u @ psi_minus = det[psi_plus, psi_minus] * (0, 1)`` and
    the leftover relative phase is ``e^{2i phi} = det^2``.
    """
    d = decompose(q)
    a, b = d.mode_plus.alpha, d.mode_plus.beta
    u = np.array([[a.conjugate(), b.conjugate()], [-b, a]], dtype=complex)
    qc = apply_unitary(q, u)
    if d.lambda_minus <= DEGEN_TOL:
        return CanonicalForm(d.lambda_plus, d.lambda_minus, 0.0, u, True)
    phi = 0.5 * math.atan2(*_im_re(qc.c3 * qc.c1.conjugate()))
    return CanonicalForm(d.lambda_plus, d.lambda_minus, phi, u)


def _im_re(z: complex):
    return z.imag, z.real


def shift_phase(cf: CanonicalForm, delta_phi: float) -> CanonicalForm:
    return CanonicalForm(cf.lambda_plus, cf.lambda_minus, _wrap(cf.phi + delta_phi),
                         cf.unitary_used, cf.phase_undefined)


def plate_sequence(u, starts: int = 16, seed: int = 0):
    """Angles (q1, h, q2) with qwp(q2) @ hwp(h) @ qwp(q1) equal to ``u`` up to a global phase.

    Solved numerically; returns the angles and the residual norm of the fit.
    """
    u = np.asarray(u, dtype=complex)

    def resid(angles):
        p = qwp(angles[2]) @ hwp(angles[1]) @ qwp(angles[0])
        t = np.trace(u.conj().T @ p)
        ph = t / abs(t) if abs(t) > 0 else 1.0
        r = p - ph * u
        return np.concatenate([r.real.ravel(), r.imag.ravel()])

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(starts):
        sol = least_squares(resid, rng.uniform(0, math.pi, 3), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        err = float(np.linalg.norm(resid(sol.x)))
        if best is None or err < best[1]:
            best = (tuple(float(a) % math.pi for a in sol.x), err)
        if err < 1e-13:
            break
    return best
