"""Billiards in circles and ellipses: reflection, periodic orbits, and the
tangency of periodic-orbit families to ker(psi) in configuration space."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from edslab.billiard import config_geometry
from edslab.errors import DomainError, InputError, SolverError

TANGENT_EPS = 1e-12
CLOSE_TOL = 1e-10
DRIFT_TOL = 1e-6
RICHARDSON_FLOOR = 1e-12


@dataclass(frozen=True)
class ConvexCurve:
    """Ellipse x^2/a^2 + y^2/b^2 = 1 with a >= b > 0; a circle when a == b."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.b > 0:
            raise InputError("semi-axes must be finite and positive")
        if self.a < self.b:
            raise InputError(f"ellipse needs a >= b, got a={self.a}, b={self.b}")

    @classmethod
    def circle(cls, r: float = 1.0) -> "ConvexCurve":
        if not r > 0:
            raise InputError("radius must be positive")
        return cls(float(r), float(r))

    @classmethod
    def ellipse(cls, a: float, b: float) -> "ConvexCurve":
        return cls(float(a), float(b))

    @property
    def kind(self) -> str:
        return "circle" if self.a == self.b else "ellipse"

    @property
    def quadric(self) -> np.ndarray:
        return np.diag([1.0 / self.a ** 2, 1.0 / self.b ** 2])

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def tangent(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return np.stack([-self.a * np.sin(t), self.b * np.cos(t)], axis=-1)

    def parameter(self, x) -> float:
        return math.atan2(x[1] / self.b, x[0] / self.a)

    def inward_normal(self, t) -> np.ndarray:
        g = -(self.quadric @ self.point(t))
        return g / np.linalg.norm(g)


def joachimsthal(curve: ConvexCurve, t: float, direction) -> float:
    """<A x, d> for the outgoing direction d at boundary point x(t)."""
    return float(curve.point(t) @ curve.quadric @ np.asarray(direction, dtype=np.float64))


def reflect_step(curve: ConvexCurve, t: float, direction) -> tuple[float, np.ndarray]:
    """Follow the chord from x(t) along ``direction`` and reflect at the far end."""
    d = np.asarray(direction, dtype=np.float64)
    nd = np.linalg.norm(d)
    if not nd > 0:
        raise InputError("direction must be nonzero")
    d = d / nd
    if curve.inward_normal(t) @ d <= TANGENT_EPS:
        raise InputError("direction does not point strictly into the interior")
    x = curve.point(t)
    amat = curve.quadric
    s = -2.0 * (x @ amat @ d) / (d @ amat @ d)
    y = x + s * d
    t2 = curve.parameter(y)
    nu = curve.inward_normal(t2)
    d2 = d - 2.0 * (d @ nu) * nu
    return t2, d2 / np.linalg.norm(d2)


def trajectory(curve: ConvexCurve, t: float, direction, bounces: int) -> tuple[np.ndarray, np.ndarray]:
    """Boundary parameters and outgoing directions for ``bounces`` steps (t included)."""
    ts = [float(t)]
    ds = [np.asarray(direction, dtype=np.float64) / np.linalg.norm(direction)]
    for _ in range(bounces):
        t2, d2 = reflect_step(curve, ts[-1], ds[-1])
        ts.append(t2)
        ds.append(d2)
    return np.array(ts), np.array(ds)


@dataclass(frozen=True)
class Orbit:
    curve: ConvexCurve
    t: np.ndarray  # t_1..t_n
    n: int
    q: int
    direction: np.ndarray  # outgoing direction at t_1
    closure_residual: float  # reflection-law defect over all vertices
    simulated_drift: float = 0.0  # return error of n simulated bounces

    @property
    def points(self) -> np.ndarray:
        return self.curve.point(self.t)

    def config(self) -> np.ndarray:
        """The orbit as a point (x1, y1, ..., xn, yn) of configuration space."""
        return self.points.reshape(-1)


def _check_nq(n: int, q: int) -> None:
    if n < 2 or not 1 <= q < n:
        raise InputError(f"need n >= 2 and 1 <= q < n, got n={n}, q={q}")
    if math.gcd(n, q) != 1:
        raise InputError(f"gcd(n, q) must be 1, got n={n}, q={q}")


def _shot(curve: ConvexCurve, t1: float, t2: float) -> np.ndarray:
    chord = curve.point(t2) - curve.point(t1)
    return chord / np.linalg.norm(chord)


def perimeter_gradient(curve: ConvexCurve, t: np.ndarray) -> np.ndarray:
    """dL/dt_i for the closed polygon through x(t_1), ..., x(t_n); zero exactly
    where the reflection law holds at vertex i."""
    x = curve.point(t)
    fwd = np.roll(x, -1, axis=0) - x
    lens = np.linalg.norm(fwd, axis=1)
    if np.any(lens == 0):
        raise DomainError("consecutive vertices coincide")
    unit = fwd / lens[:, None]
    return np.einsum("ij,ij->i", curve.tangent(t), np.roll(unit, 1, axis=0) - unit)


def _newton_vertices(curve: ConvexCurve, t: np.ndarray, max_iter: int = 50) -> tuple[np.ndarray, float]:
    """Newton on t_2..t_n (t_1 fixed) for the reflection law at vertices 2..n."""
    t = np.array(t, dtype=np.float64)
    m = t.size - 1
    f = perimeter_gradient(curve, t)[1:]
    for _ in range(max_iter):
        if np.max(np.abs(f)) < 1e-15:
            break
        jac = np.empty((m, m))
        h = 1e-7
        for k in range(m):
            tp, tm = t.copy(), t.copy()
            tp[k + 1] += h
            tm[k + 1] -= h
            jac[:, k] = (perimeter_gradient(curve, tp)[1:] - perimeter_gradient(curve, tm)[1:]) / (2 * h)
        step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        lam = 1.0
        while lam > 1e-8:
            tn = t.copy()
            tn[1:] += lam * step
            fn = perimeter_gradient(curve, tn)[1:]
            if np.linalg.norm(fn) < np.linalg.norm(f):
                break
            lam *= 0.5
        else:
            break
        t, f = tn, fn
    return t, float(np.max(np.abs(f)))


def _winding_number(t: np.ndarray) -> float:
    steps = np.mod(np.diff(np.append(t, t[0])), 2 * np.pi)
    return float(np.sum(steps) / (2 * np.pi))


def reflection_defect(curve: ConvexCurve, t: np.ndarray) -> float:
    """max_i |dL/dt_i| / |x'(t_i)|: the cosine mismatch of incidence and
    reflection, zero exactly on periodic orbits."""
    speed = np.linalg.norm(curve.tangent(t), axis=1)
    return float(np.max(np.abs(perimeter_gradient(curve, t)) / speed))


def _orbit_from_vertices(curve: ConvexCurve, t: np.ndarray, n: int, q: int) -> Orbit:
    res = reflection_defect(curve, t)
    wind = _winding_number(t)
    if not res < CLOSE_TOL or abs(wind - q) > 1e-6:
        raise SolverError("periodic orbit did not close",
                          {"residual": res, "winding": wind, "q": q, "t": t.tolist()})
    d = _shot(curve, t[0], t[1])
    ts, ds = trajectory(curve, t[0], d, n)
    drift = max(float(np.linalg.norm(curve.point(ts[-1]) - curve.point(t[0]))),
                float(np.linalg.norm(ds[-1] - ds[0])))
    if not drift < DRIFT_TOL:
        raise SolverError("simulated bounces do not return", {"drift": drift, "residual": res})
    return Orbit(curve, np.mod(t, 2 * np.pi), n, q, d, res, drift)


def find_periodic(curve: ConvexCurve, n: int, q: int, seed: int = 0,
                  t1: Optional[float] = None, homotopy_steps: int = 20) -> Orbit:
    """An n-periodic orbit winding q times; exact for circles, continued from
    the circle for ellipses."""
    _check_nq(n, q)
    rng = np.random.default_rng(seed)
    if t1 is None:
        t1 = float(rng.uniform(0.0, 2 * np.pi))
    t = t1 + 2 * np.pi * q * np.arange(n) / n
    if curve.kind == "circle":
        return _orbit_from_vertices(curve, t, n, q)
    for b in np.linspace(curve.a, curve.b, homotopy_steps + 1)[1:]:
        t, _ = _newton_vertices(ConvexCurve(curve.a, float(b)), t)
    return _orbit_from_vertices(curve, t, n, q)


def reclose(orbit: Orbit, t1: float) -> Orbit:
    """The family member starting at t1, using ``orbit`` as the initial guess."""
    curve = orbit.curve
    if curve.kind == "circle":
        shift = t1 - orbit.t[0]
        t = orbit.t + shift
        rot = np.array([[math.cos(shift), -math.sin(shift)], [math.sin(shift), math.cos(shift)]])
        return Orbit(curve, np.mod(t, 2 * np.pi), orbit.n, orbit.q, rot @ orbit.direction,
                     orbit.closure_residual, orbit.simulated_drift)
    base = orbit.t[0] + np.mod(orbit.t - orbit.t[0], 2 * np.pi)
    t, _ = _newton_vertices(curve, base + (t1 - orbit.t[0]))
    return _orbit_from_vertices(curve, t, orbit.n, orbit.q)


def tangency_residual(path: Callable[[float], np.ndarray], delta: float) -> float:
    """max_i |psi_i(u)| / |u| for the central difference u of a path in
    configuration space at s = 0."""
    if not delta > 0:
        raise InputError("delta must be positive")
    center = path(0.0)
    u = (path(delta) - path(-delta)) / (2 * delta)
    nu = np.linalg.norm(u)
    if nu == 0:
        raise DomainError("path does not move")
    g = config_geometry(center)
    vals = np.einsum("ij,ij->i", g.normals, u.reshape(-1, 2))
    return float(np.max(np.abs(vals)) / nu)


def family_path(orbit: Orbit) -> Callable[[float], np.ndarray]:
    t0 = float(orbit.t[0])
    return lambda s: reclose(orbit, t0 + s).config()


def family_tangency(curve: ConvexCurve, orbit: Orbit, delta: float = 1e-4) -> float:
    if orbit.curve != curve:
        raise InputError("orbit belongs to a different curve")
    return tangency_residual(family_path(orbit), delta)


@dataclass(frozen=True)
class Richardson:
    coarse: float
    fine: float
    ratio: float
    ok: bool  # ratio near 4, or both already at the roundoff floor


def richardson_check(path: Callable[[float], np.ndarray], delta: float = 1e-4,
                     ratio_tol: float = 0.5, floor: float = RICHARDSON_FLOOR) -> Richardson:
    r1 = tangency_residual(path, delta)
    r2 = tangency_residual(path, delta / 2)
    ratio = r1 / r2 if r2 > 0 else math.inf
    at_floor = r1 < floor and r2 < floor
    return Richardson(r1, r2, ratio, bool(at_floor or abs(ratio - 4.0) < ratio_tol))
