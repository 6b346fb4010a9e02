"""Special-function and polynomial-algebra kernel.

Complex Bessel/Hankel functions of real order (scipy-backed, validated),
Riemann theta functions with characteristics and directional derivatives,
resultants, certified polynomial roots, and Schwarzian derivatives of
rational functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.special as sps
from numpy.polynomial import polynomial as npoly

from .errors import (
    CriticalPointSingularity,
    DegenerateInput,
    DomainError,
    LossOfPrecision,
    NonConvergence,
    TruncationFailure,
)

__all__ = [
    "hankel1",
    "hankel1_deriv",
    "besselj",
    "RiemannMatrix",
    "ThetaCharacteristic",
    "riemann_theta",
    "theta1_prime",
    "resultant",
    "poly_roots",
    "schwarzian",
    "poly_normalize",
]


# ---------------------------------------------------------------------------
# Bessel / Hankel
# ---------------------------------------------------------------------------

def hankel1(nu, z):
    """Hankel function of the first kind, real order nu >= 0, Im z >= 0, z != 0.

    Backed by scipy's AMOS routines; the domain contract and precision flag
    live here.  Raises DomainError off the supported domain and
    LossOfPrecision when AMOS signals a partial loss of significance (nan).
    """
    nu = float(nu)
    z = complex(z)
    if nu < 0:
        raise DomainError(f"order must be >= 0, got {nu}")
    if z == 0:
        raise DomainError("hankel1 is singular at z = 0")
    if z.imag < -1e-12 * abs(z):
        raise DomainError(f"argument must satisfy Im z >= 0, got {z}")
    out = sps.hankel1(nu, z)
    if not np.isfinite(out.real) or not np.isfinite(out.imag):
        raise LossOfPrecision(f"hankel1({nu}, {z}) lost all significance")
    return complex(out)


def hankel1_deriv(nu, z):
    """d/dz H^(1)_nu(z) via the two-sided recurrence (H_{nu-1} - H_{nu+1})/2."""
    nu = float(nu)
    z = complex(z)
    if z == 0:
        raise DomainError("hankel1_deriv is singular at z = 0")
    return (sps.hankel1(nu - 1.0, z) - sps.hankel1(nu + 1.0, z)) / 2.0


def besselj(nu, z):
    """Bessel J of real order at complex argument (scipy-backed)."""
    return complex(sps.jv(float(nu), complex(z)))


# ---------------------------------------------------------------------------
# Riemann matrices and theta characteristics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiemannMatrix:
    """Validated g x g period matrix: symmetric, Im B positive definite."""

    B: np.ndarray
    sym_tol: float = 1e-10

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=complex))
        object.__setattr__(self, "B", B)
        if B.shape[0] != B.shape[1]:
            raise DomainError(f"period matrix must be square, got {B.shape}")
        scale = max(1.0, float(np.max(np.abs(B))))
        if np.max(np.abs(B - B.T)) > self.sym_tol * scale:
            raise DomainError("period matrix is not symmetric within tolerance")
        eigs = np.linalg.eigvalsh(B.imag)
        if eigs.min() <= 0:
            raise DomainError(f"Im B is not positive definite (eigs {eigs})")

    @property
    def g(self):
        return self.B.shape[0]

    @property
    def imag_eigs(self):
        return np.linalg.eigvalsh(self.B.imag)


@dataclass(frozen=True)
class ThetaCharacteristic:
    """Half-integer characteristic [a; b], entries in {0, 1/2}."""

    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        for v in a + b:
            if v not in (0.0, 0.5):
                raise DomainError(f"characteristic entries must be 0 or 1/2, got {v}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def parity(self):
        """0 for even, 1 for odd: 4<a,b> mod 2."""
        return int(round(4 * np.dot(self.a, self.b))) % 2

    @property
    def is_odd(self):
        return self.parity == 1

    @staticmethod
    def all_characteristics(g):
        out = []
        for bits in range(4 ** g):
            a = [((bits >> (2 * i)) & 1) * 0.5 for i in range(g)]
            b = [((bits >> (2 * i + 1)) & 1) * 0.5 for i in range(g)]
            out.append(ThetaCharacteristic(tuple(a), tuple(b)))
        return out

    @staticmethod
    def odd_characteristics(g):
        return [c for c in ThetaCharacteristic.all_characteristics(g) if c.is_odd]


# ---------------------------------------------------------------------------
# Riemann theta
# ---------------------------------------------------------------------------

_RADIUS_CAP = 120.0


def _theta_lattice(B, shift_a, radius):
    """Integer lattice points q = n + a with ||n|| <= radius per axis."""
    g = B.shape[0]
    R = int(np.ceil(radius))
    rng = np.arange(-R, R + 1, dtype=float)
    grids = np.meshgrid(*([rng] * g), indexing="ij")
    n = np.stack([gr.ravel() for gr in grids], axis=-1)
    return n + shift_a


def riemann_theta(t, B, char=None, derivs=(), tol=1e-12):
    """Riemann theta with characteristics and directional derivatives.

    theta[a,b](t; B) = sum_n exp(i pi <n+a, B(n+a)> + 2 pi i <n+a, t+b>),
    with each entry of ``derivs`` a length-g direction u contributing a
    factor 2 pi i <n+a, u>.  Multi-index derivatives are directional
    derivatives along coordinate vectors.

    Truncation radius is chosen from the Cholesky factor of pi Im B so the
    Gaussian tail bound is below ``tol`` times the central magnitude;
    TruncationFailure is raised if that radius exceeds the cap.
    """
    if isinstance(B, RiemannMatrix):
        B = B.B
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    g = B.shape[0]
    t = np.asarray(t, dtype=complex).reshape(g)
    if char is None:
        a = np.zeros(g)
        b = np.zeros(g)
    else:
        a = np.asarray(char.a, dtype=float)
        b = np.asarray(char.b, dtype=float)
    derivs = [np.asarray(u, dtype=complex).reshape(g) for u in derivs]

    Y = B.imag
    lam_min = float(np.linalg.eigvalsh(Y).min())
    if lam_min <= 0:
        raise DomainError("Im B must be positive definite")
    # dominant lattice region is centered near -Y^{-1} Im(t); tail bound
    # exp(-pi lam_min (r - r0)^2) <= tol with polynomial safety margin
    center = np.linalg.solve(Y, t.imag)
    r0 = float(np.linalg.norm(center)) + float(np.linalg.norm(a)) + 1.0
    # solve pi lam_min s^2 = -log(tol) + g log cap-ish slack
    s = np.sqrt(max(-np.log(tol) + 8.0, 1.0) / (np.pi * lam_min))
    radius = r0 + s + 2.0
    if radius > _RADIUS_CAP:
        raise TruncationFailure(
            f"required lattice radius {radius:.1f} exceeds cap {_RADIUS_CAP}"
        )
    q = _theta_lattice(B, a, radius)
    expo = 1j * np.pi * np.einsum("mi,ij,mj->m", q, B, q) + 2j * np.pi * (q @ (t + b))
    # subtract the max for overflow safety; restored at the end
    shift = float(np.max(expo.real))
    vals = np.exp(expo - shift)
    for u in derivs:
        vals = vals * (2j * np.pi * (q @ u))
    return complex(vals.sum() * np.exp(shift))


def riemann_theta_bundle(t, B, char=None, derivs_list=((),), tol=1e-12):
    """Evaluate theta for several derivative specs in one lattice pass.

    ``derivs_list`` is a sequence of derivative specs (each a tuple of
    direction vectors, as in :func:`riemann_theta`).  Returns a list of
    complex values in the same order.
    """
    if isinstance(B, RiemannMatrix):
        B = B.B
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    g = B.shape[0]
    t = np.asarray(t, dtype=complex).reshape(g)
    if char is None:
        a = np.zeros(g)
        b = np.zeros(g)
    else:
        a = np.asarray(char.a, dtype=float)
        b = np.asarray(char.b, dtype=float)
    Y = B.imag
    lam_min = float(np.linalg.eigvalsh(Y).min())
    if lam_min <= 0:
        raise DomainError("Im B must be positive definite")
    center = np.linalg.solve(Y, t.imag)
    r0 = float(np.linalg.norm(center)) + float(np.linalg.norm(a)) + 1.0
    s = np.sqrt(max(-np.log(tol) + 8.0, 1.0) / (np.pi * lam_min))
    radius = r0 + s + 2.0
    if radius > _RADIUS_CAP:
        raise TruncationFailure(
            f"required lattice radius {radius:.1f} exceeds cap {_RADIUS_CAP}"
        )
    q = _theta_lattice(B, a, radius)
    expo = 1j * np.pi * np.einsum("mi,ij,mj->m", q, B, q) + 2j * np.pi * (q @ (t + b))
    shift = float(np.max(expo.real))
    base = np.exp(expo - shift)
    scale = np.exp(shift)
    out = []
    for derivs in derivs_list:
        vals = base
        for u in derivs:
            u = np.asarray(u, dtype=complex).reshape(g)
            vals = vals * (2j * np.pi * (q @ u))
        out.append(complex(vals.sum() * scale))
    return out


def theta1_prime(tau, tol=1e-12):
    """theta_1'(0 | tau) for the Jacobi theta function, genus-1 convention.

    theta_1(z|tau) = -theta[1/2,1/2](z; tau); the derivative is with respect
    to z.
    """
    char = ThetaCharacteristic((0.5,), (0.5,))
    val = riemann_theta([0.0], np.array([[complex(tau)]]), char=char,
                        derivs=[[1.0]], tol=tol)
    return -val


# ---------------------------------------------------------------------------
# Polynomial algebra
# ---------------------------------------------------------------------------

def poly_normalize(coeffs, tol=0.0):
    """Trim trailing (near-)zero leading coefficients; ascending order in, out."""
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size == 0:
        raise DegenerateInput("empty coefficient list")
    scale = float(np.max(np.abs(c)))
    if scale == 0.0:
        raise DegenerateInput("zero polynomial")
    keep = np.nonzero(np.abs(c) > tol * scale)[0]
    return c[: keep[-1] + 1]


def resultant(f, g):
    """Resultant of two polynomials via the Sylvester-matrix determinant.

    Coefficients ascending.  Satisfies R(f,g) = lc(f)^deg(g) prod g(roots f).
    """
    f = poly_normalize(f)
    g = poly_normalize(g)
    m, n = len(f) - 1, len(g) - 1
    if m == 0 and n == 0:
        return complex(1.0)
    if m == 0:
        return complex(f[0] ** n)
    if n == 0:
        return complex(g[0] ** m)
    S = np.zeros((m + n, m + n), dtype=complex)
    fr, gr = f[::-1], g[::-1]
    for i in range(n):
        S[i, i : i + m + 1] = fr
    for i in range(m):
        S[n + i, i : i + n + 1] = gr
    return complex(np.linalg.det(S))


def poly_roots(coeffs, residual_tol=1e-10, cluster_scale=1e-7):
    """All roots of a polynomial with post-hoc residual certification.

    Returns (roots, multiplicities).  Residuals |f(r)| / ||f|| must be below
    ``residual_tol`` scaled by local conditioning; multiplicity is detected
    by clustering within ``cluster_scale`` times the root magnitude scale.
    """
    c = poly_normalize(coeffs)
    if len(c) < 2:
        raise DegenerateInput("degree must be >= 1")
    r = np.roots(c[::-1])
    norm = float(np.max(np.abs(c)))
    scale = max(1.0, float(np.max(np.abs(r))) if r.size else 1.0)
    vals = npoly.polyval(r, c)
    cond = norm * scale ** (len(c) - 1)
    resid = np.abs(vals) / cond
    if np.any(resid > residual_tol):
        raise NonConvergence(
            f"uncertified roots: max residual {resid.max():.3e} > {residual_tol}"
        )
    # multiplicity clustering
    used = np.zeros(len(r), dtype=bool)
    roots, mults = [], []
    eps = cluster_scale * scale
    for i in range(len(r)):
        if used[i]:
            continue
        close = np.abs(r - r[i]) < eps
        close &= ~used
        roots.append(complex(np.mean(r[close])))
        mults.append(int(np.sum(close)))
        used |= close
    return np.array(roots), np.array(mults)


def _rat_derivs(num, den):
    """(f', f'', f''') of f = num/den as rational pairs, ascending coeffs."""
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    d1n = npoly.polysub(
        npoly.polymul(npoly.polyder(num), den),
        npoly.polymul(num, npoly.polyder(den)),
    )
    d1d = npoly.polymul(den, den)
    return (d1n, d1d)


def schwarzian(num, den, w):
    """Schwarzian derivative of the rational function f = num/den at w.

    S_f = (f''' f' - (3/2) f''^2) / f'^2, computed by exact rational
    differentiation then evaluation.  Raises CriticalPointSingularity when
    f'(w) = 0 within floating tolerance.
    """
    w = complex(w)
    f1n, f1d = _rat_derivs(num, den)
    f2n, f2d = _rat_derivs(f1n, f1d)
    f3n, f3d = _rat_derivs(f2n, f2d)

    def ev(n, d):
        return npoly.polyval(w, n) / npoly.polyval(w, d)

    n_at_w = npoly.polyval(w, f1n)
    n_scale = float(np.max(np.abs(f1n))) * max(1.0, abs(w)) ** (len(f1n) - 1)
    if abs(n_at_w) < 1e-12 * max(n_scale, 1e-300):
        raise CriticalPointSingularity(f"f'({w}) = 0: Schwarzian is singular")
    fp = ev(f1n, f1d)
    fpp = ev(f2n, f2d)
    fppp = ev(f3n, f3d)
    return (fppp * fp - 1.5 * fpp ** 2) / fp ** 2
