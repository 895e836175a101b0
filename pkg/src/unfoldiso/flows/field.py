"""The planar field Re/Im of e^{i theta}(z^m - eps^m), sector angles and the covering regions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..algebra.poly import unfolding_roots
from ..errors import DeltaOutOfRange, ValidationError

P, Q, OUTSIDE = "P", "Q", "outside"
ETA_SAMPLES = 64
ETA_CAP = 0.25


def wrap(a):
    """Map angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, float), 2 * np.pi)


def _slack(angle, lo, hi):
    """Signed distance of an angle to the outside of (lo, hi), comparing mod 2 pi near the centre."""
    c = 0.5 * (lo + hi)
    a = c + float(wrap(angle - c))
    return min(a - lo, hi - a)


@dataclass(frozen=True)
class FlowField:
    m: int
    epsilon: complex
    theta: float

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError("flow sectors need m >= 2", m=self.m)

    @classmethod
    def polar(cls, m: int, s: float, psi: float, theta: float) -> "FlowField":
        return cls(m, s * np.exp(1j * psi), theta)

    def __call__(self, z):
        return np.exp(1j * self.theta) * (z**self.m - self.epsilon**self.m)

    def vector(self, x, y):
        w = self(np.asarray(x) + 1j * np.asarray(y))
        return np.real(w), np.imag(w)

    @property
    def zeros(self) -> np.ndarray:
        if self.epsilon == 0:
            return np.zeros(1, complex)
        return unfolding_roots(self.m, self.epsilon)

    def root(self, j: int) -> complex:
        """eps zeta_m^j, j counted from 1 to m."""
        return complex(self.epsilon * np.exp(2j * np.pi * j / self.m))


def theta_for(j: int, psi0: float, xi: int, m: int, delta: float) -> float:
    if not (0 < delta < np.pi / (24 * m)):
        raise DeltaOutOfRange("delta must lie in (0, pi/(24m))", delta=delta, m=m)
    if xi not in (1, 2):
        raise ValidationError("xi is 1 or 2", xi=xi)
    base = -2 * j * (m - 1) * np.pi / m - (m - 1) * psi0 + np.pi
    return float(base + delta if xi == 1 else base - delta)


def default_delta(m: int) -> float:
    return np.pi / (48 * m)


@dataclass(frozen=True)
class SectorParams:
    m: int
    j: int
    psi0: float
    xi: int
    delta: float = 0.0
    eta: float = 0.0
    theta: float = field(init=False)

    def __post_init__(self):
        d = self.delta or default_delta(self.m)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "theta", theta_for(self.j, self.psi0, self.xi, self.m, d))
        if not self.eta:
            object.__setattr__(self, "eta", find_eta(self.m, self.j, self.theta, d))

    @property
    def alpha(self) -> float:
        """(theta - pi)/(m - 1): z~ = e^{i alpha} z straightens the sector."""
        return (self.theta - np.pi) / (self.m - 1)

    def psi_slack(self, psi: float) -> float:
        w = 3 * self.delta / (2 * self.m - 2)
        return _slack(psi + 2 * self.j * np.pi / self.m + self.alpha, -w, w)

    def psi_window(self) -> tuple[float, float]:
        """Allowed psi interval, centred as an absolute angle."""
        w = 3 * self.delta / (2 * self.m - 2)
        c = -2 * self.j * np.pi / self.m - self.alpha
        return c - w, c + w

    def field(self, s: float, psi: float) -> FlowField:
        return FlowField.polar(self.m, s, psi, self.theta)


def eta_holds(m: int, j: int, theta: float, delta: float, eta: float, n: int = ETA_SAMPLES) -> bool:
    """Argument window for e^{i alpha} e^{i theta}(w^m - (e^{i psi} zeta^j)^m) on |w| <= eta."""
    alpha = (theta - np.pi) / (m - 1)
    bound = 2 * m * delta / (m - 1)
    w_half = 3 * delta / (2 * m - 2)
    c = -2 * j * np.pi / m - alpha
    psis = c + w_half * np.linspace(-1, 1, 7)
    rad = eta * np.linspace(0.25, 1.0, 4)
    w = (rad[:, None] * np.exp(2j * np.pi * np.arange(n) / n)[None, :]).ravel()
    for psi in psis:
        val = np.exp(1j * (alpha + theta)) * (w**m - np.exp(1j * m * (psi + 2 * np.pi * j / m)))
        if np.max(np.abs(np.angle(val))) >= bound:
            return False
    return True


def find_eta(m: int, j: int, theta: float, delta: float, iters: int = 50) -> float:
    lo, hi = 0.0, ETA_CAP
    if eta_holds(m, j, theta, delta, hi):
        return hi * (1 - 1e-9)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if eta_holds(m, j, theta, delta, mid):
            lo = mid
        else:
            hi = mid
    return lo


def region_slacks(z: complex, s: float, psi: float, p: SectorParams) -> dict:
    """Smallest slack of the defining inequalities of P and Q (positive means inside)."""
    m, d, a = p.m, p.delta, p.alpha
    out = {P: -np.inf, Q: -np.inf}
    if not (0 <= s < 1 / 3) or abs(z) >= 1:
        return out
    sp = p.psi_slack(psi)
    zt = np.exp(1j * a) * z
    c = 3 * m  # pi/(3m)
    if p.xi == 1:
        if z != 0:
            s1 = _slack(np.angle(np.exp(1j * np.pi / c) - zt), (2 * m + 1) * d / (m - 1), np.pi / 2 + np.pi / c)
            s2 = _slack(np.angle(z) + a, -np.pi / c, np.pi / m + 2 * d / (m - 1))
            out[P] = min(sp, s1, s2, 1 - abs(z))
        zq = zt + p.eta * s
        if zq != 0:
            s3 = _slack(np.angle(zq), -np.pi / (6 * m), np.pi / (6 * m))
            s4 = np.inf if z == 0 else _slack(np.angle(z) + a, np.pi / m + 2 * d / (m - 1), 2 * np.pi - np.pi / c)
            out[Q] = min(sp, s3, s4, 1 - abs(z))
    else:
        if z != 0:
            s1 = _slack(np.angle(np.exp(-1j * np.pi / c) - zt), -np.pi / 2 - np.pi / c, -(2 * m + 1) * d / (m - 1))
            s2 = _slack(np.angle(z) + a, -np.pi / m - 2 * d / (m - 1), np.pi / c)
            out[P] = min(sp, s1, s2, 1 - abs(z))
        zq = zt + p.eta * s
        if zq != 0:
            s3 = _slack(np.angle(zq), -np.pi / (6 * m), np.pi / (6 * m))
            s4 = np.inf if z == 0 else _slack(np.angle(z) + a, np.pi / c, 2 * np.pi - np.pi / m - 2 * d / (m - 1))
            out[Q] = min(sp, s3, s4, 1 - abs(z))
    return out


def region_contains(z: complex, s: float, psi: float, p: SectorParams, margin: float = 0.0) -> str:
    sl = region_slacks(complex(z), s, psi, p)
    for tag in (P, Q):
        if sl[tag] > margin:
            return tag
    return OUTSIDE


def sample_region(rng, p: SectorParams, s: float, psi: float, n: int, margin: float = 1e-3, part: str = "R",
                  max_tries: int = 200000):
    """Rejection samples from the fibre of R = P u Q (or of P or Q alone) over (s, psi), at least margin inside.

    Q is a thin wedge at -eta s in the straightened plane, so it is drawn from that wedge directly.
    """
    target = p.field(s, psi).root(p.j)
    pts, tags = [], []
    tries = 0
    while len(pts) < n and tries < max_tries:
        tries += 1
        if part == Q:
            apex = p.eta * s
            zt = -apex + 2 * apex * rng.uniform() * np.exp(1j * rng.uniform(-1, 1) * np.pi / (6 * p.m))
            z = np.exp(-1j * p.alpha) * zt
        else:
            z = np.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        if abs(z - target) < margin:
            continue
        tag = region_contains(z, s, psi, p, margin)
        if tag != OUTSIDE and part in (tag, "R"):
            pts.append(z)
            tags.append(tag)
    return np.array(pts, complex), tags
