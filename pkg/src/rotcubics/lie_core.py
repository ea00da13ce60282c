"""so(3)/SO(3) primitives with a configurable inner product.

Vectors in R^3 stand for elements of so(3) through the hat map, with the
cross product as Lie bracket.  An inner product <xi, eta>_I = (I xi) . eta
is carried by a `Metric`; the identity matrix gives the bi-invariant case.
All functions are pure and operate on plain float arrays.
"""

from __future__ import annotations

import numpy as np

EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])
EZ = np.array([0.0, 0.0, 1.0])


class ChartError(RuntimeError):
    """A coordinate chart (matrix log, sphere log map) failed near its cut locus."""


def as_vector3(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def hat(v) -> np.ndarray:
    """3x3 antisymmetric matrix with hat(v) @ w == cross(v, w)."""
    a, b, c = as_vector3(v)
    return np.array([[0.0, -c, b], [c, 0.0, -a], [-b, a, 0.0]])


def vee(m) -> np.ndarray:
    """Inverse of hat.  Rejects matrices whose symmetric part exceeds 1e-12."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"vee expects a 3x3 matrix, got shape {m.shape}")
    sym = 0.5 * (m + m.T)
    if np.linalg.norm(sym) > 1e-12:
        raise ValueError("vee: input is not antisymmetric")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def bracket(a, b) -> np.ndarray:
    """Lie bracket on so(3) in vector form: the cross product."""
    return np.cross(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


class Metric:
    """Symmetric positive-definite inner product on so(3).

    Validated once at construction (symmetry to 1e-14, Cholesky succeeds);
    the operations below then assume validity.
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"metric matrix must be 3x3, got shape {m.shape}")
        if np.linalg.norm(m - m.T) > 1e-14 * max(1.0, np.linalg.norm(m)):
            raise ValueError("metric matrix must be symmetric")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise ValueError("metric matrix must be positive definite") from None
        self.matrix = m
        self.inverse = np.linalg.inv(m)
        self.is_identity = bool(np.array_equal(m, np.eye(3)))

    @classmethod
    def identity(cls) -> "Metric":
        return cls(np.eye(3))

    def inner(self, a, b) -> float:
        return float(self.matrix @ np.asarray(a, dtype=float) @ np.asarray(b, dtype=float))

    def norm(self, a) -> float:
        return float(np.sqrt(self.inner(a, a)))

    def __repr__(self):
        return f"Metric({self.matrix.tolist()})"


IDENTITY_METRIC = Metric.identity()


def flat(xi, metric: Metric = IDENTITY_METRIC) -> np.ndarray:
    """Lower an index: xi -> I xi."""
    return metric.matrix @ as_vector3(xi)


def sharp(mu, metric: Metric = IDENTITY_METRIC) -> np.ndarray:
    """Raise an index: mu -> I^-1 mu."""
    return metric.inverse @ as_vector3(mu)


def ad_star(xi, mu) -> np.ndarray:
    """Coadjoint action, defined by <ad*_xi mu, eta> = <mu, [xi, eta]>.

    In vector form ad*_xi mu = mu x xi; the dual pairing is metric-free.
    """
    return np.cross(as_vector3(mu), as_vector3(xi))


def ad_dagger(nu, kappa, metric: Metric = IDENTITY_METRIC) -> np.ndarray:
    """Metric adjoint of ad: (ad*_nu (kappa^flat))^sharp.

    Equals -bracket(nu, kappa) when the metric is the identity.
    """
    return metric.inverse @ np.cross(metric.matrix @ as_vector3(kappa), as_vector3(nu))


def exp_so3(v) -> np.ndarray:
    """Rodrigues rotation by angle |v| about v/|v|; Taylor branch below 1e-8."""
    v = as_vector3(v)
    theta = np.linalg.norm(v)
    k = hat(v)
    if theta < 1e-8:
        return np.eye(3) + k + 0.5 * (k @ k)
    return np.eye(3) + (np.sin(theta) / theta) * k + ((1.0 - np.cos(theta)) / theta**2) * (k @ k)


def log_so3(r) -> np.ndarray:
    """Rotation vector of a rotation matrix.  Raises ChartError near angle pi."""
    r = np.asarray(r, dtype=float)
    cos_theta = np.clip(0.5 * (np.trace(r) - 1.0), -1.0, 1.0)
    theta = float(np.arccos(cos_theta))
    anti = 0.5 * np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    if theta > np.pi - 1e-6:
        raise ChartError("log_so3: rotation angle too close to pi")
    if theta < 1e-8:
        return anti
    return (theta / np.sin(theta)) * anti


def adjoint(g, xi) -> np.ndarray:
    """Adjoint action of SO(3) in vector form: Ad_g xi = g xi."""
    return np.asarray(g, dtype=float) @ as_vector3(xi)


def curvature_group(xi, eta, metric: Metric = IDENTITY_METRIC) -> np.ndarray:
    """Right-trivialized curvature value R(eta_G, xi_G) xi_G = -1/4 [xi, [xi, eta]].

    Valid for the bi-invariant metric only.
    """
    if not metric.is_identity:
        raise ValueError("curvature_group requires the bi-invariant (identity) metric")
    xi = as_vector3(xi)
    return -0.25 * bracket(xi, bracket(xi, as_vector3(eta)))


def orthonormality_defect(g) -> float:
    g = np.asarray(g, dtype=float)
    return float(np.linalg.norm(g @ g.T - np.eye(3)))


def require_rotation(g, tol: float = 1e-10, name: str = "rotation") -> np.ndarray:
    """Validate a 3x3 matrix as a proper rotation within `tol`."""
    g = np.asarray(g, dtype=float)
    if g.shape != (3, 3):
        raise ValueError(f"{name} must be a 3x3 matrix, got shape {g.shape}")
    if orthonormality_defect(g) > tol:
        raise ValueError(f"{name} is not orthonormal within {tol}")
    if abs(np.linalg.det(g) - 1.0) > max(tol, 1e-7):
        raise ValueError(f"{name} must have determinant +1")
    return g


def project_so3(g) -> np.ndarray:
    """Polar projection onto SO(3) by the Newton iteration X <- (X + X^-T)/2."""
    x = np.asarray(g, dtype=float).copy()
    for _ in range(8):
        defect = orthonormality_defect(x)
        if defect < 1e-14:
            break
        x = 0.5 * (x + np.linalg.inv(x).T)
    return x
