"""Closed-form infinite-coarse-graining theory, rescaling transforms, the
k1/k2 row-count model, and the decay-front extraction pipeline.

Throughout, t_c = 1 / (2p) is the critical depth at which the state
becomes maximally mixed and the spreading front diverges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Fit window as fractions of the profile value at the smallest recorded x;
# excludes the small-x plateau and the exponential tail.
DEFAULT_FIT_WINDOW = (0.2, 0.8)

# A timestep is boundary-distorted when the profile at the largest recorded
# separation exceeds this fraction of the profile maximum.
BOUNDARY_FLOOR_FRACTION = 0.05


@dataclass
class DecayProfile:
    """Normalized CMI versus separation x (block units) at fixed depth t."""

    x: np.ndarray
    values: np.ndarray
    n_blocks: int
    t: int

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.shape != self.values.shape or self.x.ndim != 1:
            raise ValueError("x and values must be matching 1-d arrays")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("x must be strictly increasing")


@dataclass
class CollapseCurve:
    """Rescaled spreading front: x_dec-tilde versus t-tilde for one (p, m)."""

    t_tilde: np.ndarray
    x_dec_tilde: np.ndarray
    p: float
    m: int

    def __post_init__(self):
        self.t_tilde = np.asarray(self.t_tilde, dtype=float)
        self.x_dec_tilde = np.asarray(self.x_dec_tilde, dtype=float)
        if self.t_tilde.shape != self.x_dec_tilde.shape:
            raise ValueError("t_tilde and x_dec_tilde must match")
        if self.t_tilde.size:
            if self.t_tilde.min() < 0 or self.t_tilde.max() >= 1:
                raise ValueError("t_tilde must lie in [0, 1)")
            if self.x_dec_tilde.min() < 0:
                raise ValueError("x_dec_tilde must be nonnegative")
            if np.any(np.diff(self.x_dec_tilde) < 0):
                raise ValueError("x_dec_tilde must be non-decreasing")


@dataclass
class XdecResult:
    """Outcome of the linear-fit front extraction; rejection is a result."""

    x_dec: float | None
    slope: float = float("nan")
    intercept: float = float("nan")
    n_points: int = 0
    r2: float = float("nan")
    rejected_reason: str | None = None

    @property
    def rejected(self) -> bool:
        return self.rejected_reason is not None


def critical_time(p: float) -> float:
    if p <= 0:
        return float("inf")
    return 1.0 / (2.0 * p)


def analytic_cmi_norm(t: float, x: float, p: float) -> float:
    """Normalized CMI in the infinite-coarse-graining limit.

    max{2t(1 - pt) - 2(1 - 2pt)x, 0} for t <= t_c, zero afterwards.
    """
    if t < 0 or x < 0:
        raise ValueError("t and x must be nonnegative")
    if not 0.0 <= p < 0.5:
        raise ValueError("p must lie in [0, 1/2)")
    if p > 0 and t > critical_time(p):
        return 0.0
    return max(2 * t * (1 - p * t) - 2 * (1 - 2 * p * t) * x, 0.0)


def analytic_xdec(t: float, p: float) -> float:
    """Separation where the analytic CMI first vanishes: t(1-pt)/(1-2pt)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if p == 0:
        return float(t)
    if not 0.0 < p < 0.5:
        raise ValueError("p must lie in [0, 1/2)")
    if t >= critical_time(p):
        raise ValueError("t must be below the critical time 1/(2p)")
    return t * (1 - p * t) / (1 - 2 * p * t)


def rescale(t, x, i_norm, p: float):
    """Universal rescaling (t, x, I^norm) -> (2pt, 2px, p I^norm)."""
    if p <= 0:
        raise ValueError("rescaling requires p > 0")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    i_norm = np.asarray(i_norm, dtype=float)
    return 2 * p * t, 2 * p * x, p * i_norm


def unrescale(t_tilde, x_tilde, i_tilde, p: float):
    if p <= 0:
        raise ValueError("rescaling requires p > 0")
    t_tilde = np.asarray(t_tilde, dtype=float)
    x_tilde = np.asarray(x_tilde, dtype=float)
    i_tilde = np.asarray(i_tilde, dtype=float)
    return t_tilde / (2 * p), x_tilde / (2 * p), i_tilde / p


def analytic_rescaled(t_tilde: float, x_tilde: float) -> float:
    """Error-rate-independent form: max{0, t~(1 - t~/2) - (1 - t~) x~}."""
    if not 0.0 <= t_tilde < 1.0:
        raise ValueError("t_tilde must lie in [0, 1)")
    return max(t_tilde * (1 - t_tilde / 2) - (1 - t_tilde) * x_tilde, 0.0)


def analytic_xdec_rescaled(t_tilde: float) -> float:
    """Rescaled front: t~(1 - t~/2) / (1 - t~)."""
    if not 0.0 <= t_tilde < 1.0:
        raise ValueError("t_tilde must lie in [0, 1)")
    return t_tilde * (1 - t_tilde / 2) / (1 - t_tilde)


def k1k2_model(t: float, m: int, p: float) -> tuple[float, float]:
    """Closed-form box row counts.

    k1(t) = 2m(1 - 2pt) clamped at zero after t_c; k2(t) = 2mt(1 - pt) up
    to t_c and frozen at m/(2p) beyond (where dk2/dt = k1 = 0).  They give
    I(A:BC) = k2 and I(A:B) = min{k1 x, k2}.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if p == 0:
        return 2.0 * m, 2.0 * m * t
    if not 0.0 < p < 0.5:
        raise ValueError("p must lie in [0, 1/2)")
    tc = critical_time(p)
    k1 = max(2 * m * (1 - 2 * p * t), 0.0)
    k2 = 2 * m * t * (1 - p * t) if t <= tc else m / (2 * p)
    return k1, k2


def extract_xdec(
    profile: DecayProfile,
    n_blocks: int | None = None,
    fit_window: tuple[float, float] = DEFAULT_FIT_WINDOW,
    boundary_floor: float = BOUNDARY_FLOOR_FRACTION,
) -> XdecResult:
    """Front position from the x-intercept of a least-squares line.

    The fit uses points whose value lies between lo and hi fractions of the
    value at the smallest recorded x, which isolates the linear section
    between the plateau and the exponential tail.  The whole timestep is
    rejected when the profile has not decayed at the largest recorded x
    (boundary distortion), and rejection is reported as a result rather
    than raised.
    """
    if n_blocks is None:
        n_blocks = profile.n_blocks
    x = profile.x
    v = profile.values
    if x.size < 4:
        raise ValueError("profile needs at least 4 points")
    vmax = float(v.max())
    if vmax <= 0:
        return XdecResult(None, rejected_reason="profile identically zero")
    if v[-1] > boundary_floor * vmax:
        return XdecResult(None, rejected_reason="boundary distortion")
    lo, hi = fit_window
    ref = float(v[0])
    sel = (v >= lo * ref) & (v <= hi * ref)
    n_points = int(sel.sum())
    if n_points < 2:
        return XdecResult(None, n_points=n_points, rejected_reason="fewer than 2 points in fit window")
    xs, vs = x[sel], v[sel]
    slope, intercept = np.polyfit(xs, vs, 1)
    if slope >= 0:
        return XdecResult(None, n_points=n_points, rejected_reason="profile not decaying in window")
    x_dec = float(-intercept / slope)
    # a fit on a flat staircase step extrapolates far past the actual front;
    # the intercept of a genuine linear section stays within the support
    support_end = float(x[v > 0].max())
    margin = 1.5 * float(np.median(np.diff(x)))
    if x_dec > support_end + margin:
        return XdecResult(
            None, n_points=n_points, rejected_reason="intercept beyond profile support"
        )
    fitted = slope * xs + intercept
    ss_res = float(((vs - fitted) ** 2).sum())
    ss_tot = float(((vs - vs.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return XdecResult(
        x_dec=x_dec,
        slope=float(slope),
        intercept=float(intercept),
        n_points=n_points,
        r2=r2,
    )
