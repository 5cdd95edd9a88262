"""Hua involutions and the Sp(n,1) action on the quaternionic unit ball.

The involution exchanging 0 and u is

    Phi_u(z) = (u - A_u z)(1 - <z,u>)^{-1},   A_u = uu*/(1+s) + s I,
    s = sqrt(1 - |u|^2),

with the quaternion inverse multiplied on the right.  Its matrix

    (1/s) [[-A_u, u], [-u*, 1]]

lies in Sp(n,1) = {M : M* J M = J}, J = diag(I_n, -1), and squares to the
identity.  A general g = [[A, alpha], [beta, a]] in Sp(n,1) acts on the
ball by g(z) = (Az + alpha)(beta z + a)^{-1}, i.e. projectively with
right division by the last homogeneous coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternions as q
from .errors import DimensionMismatch, NotInBall, QhbError, Singular

# slack for membership checks on the closed ball (|z| <= 1 plus roundoff)
_BALL_SLACK = 1e-12
# M* J M = J must hold to this accuracy for a matrix to be accepted
SP_CHECK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HuaInvolution:
    """The involution Phi_u; immutable, safe to share across threads."""

    u: np.ndarray   # (n, 4)
    s: float        # sqrt(1 - |u|^2)
    au: np.ndarray  # (n, n, 4), Hermitian, A_u u = u, A_u v = s v for v perp u

    @property
    def n(self) -> int:
        return self.u.shape[0]


def hua_new(u, boundary_margin: float = 0.0) -> HuaInvolution:
    """Construct Phi_u for |u| < 1 - boundary_margin; u=0 gives s=1, A=I."""
    u = q.hvector(u)
    uu = float(q.vnorm2(u))
    if uu >= (1.0 - boundary_margin) ** 2:
        raise NotInBall(f"|u| = {np.sqrt(uu):.17g} is not inside the unit ball")
    s = float(np.sqrt(1.0 - uu))
    au = q.outer(u, u) / (1.0 + s) + s * q.identity_matrix(u.shape[0])
    u = u.copy()
    u.flags.writeable = False
    au.flags.writeable = False
    return HuaInvolution(u=u, s=s, au=au)


def _check_in_closed_ball(z: np.ndarray, n: int) -> np.ndarray:
    if z.ndim == 1:
        z = z[None, :]
    if z.shape[-2] != n or z.shape[-1] != 4:
        raise DimensionMismatch(f"expected points in H^{n}, got shape {z.shape}")
    if np.any(q.vnorm2(z) > 1.0 + _BALL_SLACK):
        raise NotInBall("point outside the closed unit ball")
    return z


def hua_apply(phi: HuaInvolution, z) -> np.ndarray:
    """Evaluate Phi_u(z); z may be a batch (..., n, 4), |z| <= 1 allowed."""
    z = _check_in_closed_ball(np.asarray(z, dtype=float), phi.n)
    ip = q.inner(z, phi.u)                      # <z,u>, shape (..., 4)
    num = phi.u - q.mat_apply(phi.au, z)
    den = q.ONE - ip
    dinv = q.qconj(den) / q.qnorm2(den)[..., None]
    return q.qmul(num, dinv[..., None, :])


def hua_fixed_point(phi: HuaInvolution) -> np.ndarray:
    """The unique interior fixed point u/(1+s), the symmetry center of Phi_u."""
    return phi.u / (1.0 + phi.s)


# ---------------------------------------------------------------------------
# Sp(n,1)


@dataclass(frozen=True, eq=False)
class SpMatrix:
    """An (n+1)x(n+1) quaternionic matrix with M* J M = J."""

    matrix: np.ndarray  # (n+1, n+1, 4)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 3 or m.shape[0] != m.shape[1] or m.shape[2] != 4 or m.shape[0] < 2:
            raise DimensionMismatch(f"expected shape (n+1, n+1, 4), got {m.shape}")
        err = sp_defect(m)
        if err > SP_CHECK_TOL:
            raise QhbError(f"matrix is not in Sp(n,1): max |M*JM - J| = {err:.3g}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def a_block(self) -> np.ndarray:
        return self.matrix[:-1, :-1]

    @property
    def alpha(self) -> np.ndarray:
        return self.matrix[:-1, -1]

    @property
    def beta(self) -> np.ndarray:
        return self.matrix[-1, :-1]

    @property
    def a(self) -> np.ndarray:
        return self.matrix[-1, -1]


def sp_defect(m: np.ndarray) -> float:
    """Max entrywise deviation of M* J M from J."""
    mjm = q.mat_mul(q.mat_conj_transpose(m), _apply_j(m))
    return float(np.max(np.abs(mjm - _j_matrix(m.shape[0] - 1))))


def _j_matrix(n: int) -> np.ndarray:
    j = q.identity_matrix(n + 1)
    j[n, n, 0] = -1.0
    return j


def _apply_j(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    out[-1] = -out[-1]
    return out


def sp_from_blocks(a_block, alpha, beta, a) -> SpMatrix:
    """Assemble [[A, alpha], [beta, a]]; rejects matrices outside Sp(n,1)."""
    a_block = np.asarray(a_block, dtype=float)
    n = a_block.shape[0]
    m = np.zeros((n + 1, n + 1, 4))
    m[:n, :n] = a_block
    m[:n, n] = np.asarray(alpha, dtype=float)
    m[n, :n] = np.asarray(beta, dtype=float)
    m[n, n] = np.asarray(a, dtype=float)
    return SpMatrix(matrix=m)


def sp_identity(n: int) -> SpMatrix:
    return SpMatrix(matrix=q.identity_matrix(n + 1))


def hua_matrix(phi: HuaInvolution) -> SpMatrix:
    """The matrix (1/s)[[-A_u, u], [-u*, 1]] realizing Phi_u projectively."""
    n = phi.n
    m = np.zeros((n + 1, n + 1, 4))
    m[:n, :n] = -phi.au / phi.s
    m[:n, n] = phi.u / phi.s
    m[n, :n] = -q.qconj(phi.u) / phi.s
    m[n, n] = q.ONE / phi.s
    return SpMatrix(matrix=m)


def sp_apply(g: SpMatrix, z) -> np.ndarray:
    """Ball action (Az + alpha)(beta z + a)^{-1}; z batched, |z| < 1."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    if z.shape[-2] != g.n or z.shape[-1] != 4:
        raise DimensionMismatch(f"expected points in H^{g.n}, got shape {z.shape}")
    if np.any(q.vnorm2(z) >= 1.0):
        raise NotInBall("point outside the open unit ball")
    num = q.mat_apply(g.a_block, z) + g.alpha
    den = q.qmul(g.beta, z).sum(axis=-2) + g.a
    den2 = q.qnorm2(den)
    if np.any(den2 == 0.0):
        raise Singular("projective denominator vanished for an interior point")
    dinv = q.qconj(den) / den2[..., None]
    return q.qmul(num, dinv[..., None, :])


def sp_inverse(g: SpMatrix) -> SpMatrix:
    """g^{-1} = J g* J, i.e. blocks (A*, -beta*; -alpha*, conj(a))."""
    minv = q.mat_conj_transpose(g.matrix).copy()
    minv[-1, :-1] = -minv[-1, :-1]
    minv[:-1, -1] = -minv[:-1, -1]
    return SpMatrix(matrix=minv)


def sp_mul(g: SpMatrix, h: SpMatrix) -> SpMatrix:
    return SpMatrix(matrix=q.mat_mul(g.matrix, h.matrix))


def intertwine_factor(g: SpMatrix, c, tol: float = 1e-10) -> SpMatrix:
    """The linear isometry U with Phi_{g(c)} o g = U o Phi_c.

    U = hua_matrix(g(c)) . g . hua_matrix(c) is block diagonal with
    A-block in Sp(n) and |a| = 1; the (verified small) off-diagonal
    blocks are zeroed so callers can rely on exact block-diagonal form.
    """
    c = q.hvector(c)
    gc = sp_apply(g, c)
    u = sp_mul(sp_mul(hua_matrix(hua_new(gc)), g), hua_matrix(hua_new(c)))
    m = u.matrix.copy()
    off = max(float(np.max(np.abs(m[:-1, -1]))), float(np.max(np.abs(m[-1, :-1]))))
    if off > tol:
        raise QhbError(f"intertwining factor has off-diagonal blocks of size {off:.3g}")
    m[:-1, -1] = 0.0
    m[-1, :-1] = 0.0
    a_block = m[:-1, :-1]
    aat = q.mat_mul(a_block, q.mat_conj_transpose(a_block))
    unitary_err = float(np.max(np.abs(aat - q.identity_matrix(u.n))))
    a_err = abs(float(q.qnorm(m[-1, -1])) - 1.0)
    if unitary_err > tol or a_err > tol:
        raise QhbError("intertwining factor is not a linear isometry")
    return SpMatrix(matrix=m)


def jacobian_det(phi: HuaInvolution, z) -> np.ndarray:
    """Real Jacobian determinant of Phi_u at z:

        (1 - |u|^2)^(2n+2) / |1 - <z,u>|^(4n+4),

    always strictly positive.  Batched over z.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    if np.any(q.vnorm2(z) >= 1.0):
        raise NotInBall("point outside the open unit ball")
    den2 = q.qnorm2(q.ONE - q.inner(z, phi.u))
    return (phi.s ** 2 / den2) ** (2 * phi.n + 2)


# ---------------------------------------------------------------------------
# JSON wire format


def sp_to_json(g: SpMatrix) -> dict:
    return {
        "A": q.to_lists(g.a_block),
        "alpha": q.to_lists(g.alpha),
        "beta": q.to_lists(g.beta),
        "a": q.to_lists(g.a),
    }


def sp_from_json(obj: dict) -> SpMatrix:
    """Parse {"A":..., "alpha":..., "beta":..., "a":...}; rejects non-members."""
    try:
        return sp_from_blocks(obj["A"], obj["alpha"], obj["beta"], obj["a"])
    except KeyError as exc:
        raise QhbError(f"missing field {exc} in Sp matrix") from None
