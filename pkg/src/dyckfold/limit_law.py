"""The limit variable X of the normalized unfolding cost, and of M_n / n.

X is the sum of independent Unif[0, x] marks over a Poisson process on (0, 1]
with intensity 1/(2x). Its distribution function F equals
``A sin(sqrt(2x))`` on [0, 1] and continues through the delay equation

    F(x) + F'(x) + 2x F''(x) = F(x - 1),

which is marched interval by interval with a fixed-step RK4 scheme. The
survival function ``1 - F`` satisfies the same equation and is what gets
integrated, so tail values keep their relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit
from scipy import integrate, stats

EULER_GAMMA = 0.57721566490153286061
AMPLITUDE = math.sqrt(2.0 * math.exp(1.0 - EULER_GAMMA) / math.pi)

DEFAULT_XMAX = 8.0
DEFAULT_DX = 1e-4
DEFAULT_EPS = 1e-9


class SolverToleranceError(RuntimeError):
    pass


def cumulant(n: int) -> Fraction:
    """n-th cumulant of X, 1 / (2 n (n+1))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(1, 2 * n * (n + 1))


def cgf(z: complex, nodes: int = 64) -> complex:
    """K(z) = integral_0^z (e^y - 1 - y) / (2 y^2) dy by Gauss-Legendre on [0, z]."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    y = t * z
    f = (np.expm1(y) - y) / (2.0 * y * y)
    return complex(z * np.dot(w, f))


def cumulants_from_cgf(n_max: int, points: int = 128) -> np.ndarray:
    """kappa_1..kappa_n_max from Taylor coefficients of ``cgf``, via FFT on circles.

    Coefficient n is read on a circle of radius max(1, n) so that it is not
    swamped by rounding in the larger values of K.
    """
    out = np.empty(n_max)
    roots = np.exp(2j * np.pi * np.arange(points) / points)
    for n in range(1, n_max + 1):
        radius = float(max(1, n))
        vals = np.array([cgf(radius * r) for r in roots])
        coeffs = np.fft.fft(vals) / points
        out[n - 1] = (coeffs[n] / radius**n).real * math.factorial(n)
    return out


def F_closed_form(x):
    """A sin(sqrt(2x)) on [0, 1]."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("closed form holds only on [0, 1]")
    out = AMPLITUDE * np.sin(np.sqrt(2.0 * arr))
    return float(out) if out.ndim == 0 else out


def _dF_closed(x):
    s = np.sqrt(2.0 * np.asarray(x, dtype=np.float64))
    with np.errstate(divide="ignore"):
        return AMPLITUDE * np.cos(s) / s


def _int_F_closed(x):
    # antiderivative of A sin(sqrt(2t)) from 0: A (sin s - s cos s), s = sqrt(2x)
    s = np.sqrt(2.0 * np.asarray(x, dtype=np.float64))
    return AMPLITUDE * (np.sin(s) - s * np.cos(s))


@njit(cache=True)
def _march(x0, h, nsteps, y0, dy0, dl, ddl, mid_delay):
    """RK4 for y'' = (yd(x-1) - y - y') / (2x) on one unit interval.

    ``dl``/``ddl`` hold y and y' of the previous interval at the same mesh
    offsets; ``mid_delay[k]`` is y at the midpoint of step k of that interval.
    """
    y = np.empty(nsteps + 1)
    dy = np.empty(nsteps + 1)
    y[0] = y0
    dy[0] = dy0
    for k in range(nsteps):
        x = x0 + k * h
        u = y[k]
        v = dy[k]
        d0 = dl[k]
        dm = mid_delay[k]
        d1 = dl[k + 1]
        k1u = v
        k1v = (d0 - u - v) / (2.0 * x)
        u2 = u + 0.5 * h * k1u
        v2 = v + 0.5 * h * k1v
        k2u = v2
        k2v = (dm - u2 - v2) / (2.0 * (x + 0.5 * h))
        u3 = u + 0.5 * h * k2u
        v3 = v + 0.5 * h * k2v
        k3u = v3
        k3v = (dm - u3 - v3) / (2.0 * (x + 0.5 * h))
        u4 = u + h * k3u
        v4 = v + h * k3v
        k4u = v4
        k4v = (d1 - u4 - v4) / (2.0 * (x + h))
        y[k + 1] = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        dy[k + 1] = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return y, dy


@njit(cache=True)
def _rhs_first(s, u, v, amp):
    # d/ds (y, y') = s * (y', (1 - A sin s - y - y') / (2x)), x = 1 + s^2 / 2
    return s * v, s * (1.0 - amp * np.sin(s) - u - v) / (2.0 + s * s)


@njit(cache=True)
def _march_first(h, nsteps, y0, dy0, amp):
    """Survival function on [1, 2], stepping in s = sqrt(2(x - 1)).

    The delay term there is 1 - A sin(s), smooth in s but not in x. Each mesh
    step maps to an s-interval; the long ones near s = 0 are split so that
    every RK4 substep stays below 2h.
    """
    y = np.empty(nsteps + 1)
    dy = np.empty(nsteps + 1)
    y[0] = y0
    dy[0] = dy0
    u = y0
    v = dy0
    for k in range(nsteps):
        sa = np.sqrt(2.0 * k * h)
        sb = np.sqrt(2.0 * (k + 1) * h)
        sub = max(1, int(np.ceil((sb - sa) / (2.0 * h))))
        ds = (sb - sa) / sub
        for q in range(sub):
            s0 = sa + q * ds
            sm = s0 + 0.5 * ds
            k1u, k1v = _rhs_first(s0, u, v, amp)
            k2u, k2v = _rhs_first(sm, u + 0.5 * ds * k1u, v + 0.5 * ds * k1v, amp)
            k3u, k3v = _rhs_first(sm, u + 0.5 * ds * k2u, v + 0.5 * ds * k2v, amp)
            k4u, k4v = _rhs_first(s0 + ds, u + ds * k3u, v + ds * k3v, amp)
            u = u + ds / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
            v = v + ds / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        y[k + 1] = u
        dy[k + 1] = v
    return y, dy


def _hermite_mid(y0, y1, d0, d1, h):
    return 0.5 * (y0 + y1) + h * (d0 - d1) / 8.0


def _solve_sf(x_max: float, per_unit: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = 1.0 / per_unit
    units = int(math.ceil(x_max - 1e-12))
    x = np.arange(units * per_unit + 1) * h
    sf = np.empty_like(x)
    dsf = np.empty_like(x)
    head = x[: per_unit + 1]
    sf[: per_unit + 1] = 1.0 - F_closed_form(head)
    dsf[: per_unit + 1] = -_dF_closed(head)
    for j in range(1, units):
        lo = j * per_unit
        prev = slice(lo - per_unit, lo + 1)
        dl = sf[prev]
        ddl = dsf[prev]
        if j == 1:
            # half-step run: odd entries are the delay midpoints for [2, 3], where cubic
            # interpolation would lose order to the sqrt(x - 1) behaviour of F''
            y, dy = _march_first(0.5 * h, 2 * per_unit, sf[lo], dsf[lo], AMPLITUDE)
            first_mids = y[1::2].copy()
            y, dy = y[::2], dy[::2]
        else:
            if j == 2:
                mids = first_mids
            else:
                mids = _hermite_mid(dl[:-1], dl[1:], ddl[:-1], ddl[1:], h)
            y, dy = _march(float(j), h, per_unit, sf[lo], dsf[lo], dl, ddl, mids)
        sf[lo : lo + per_unit + 1] = y
        dsf[lo : lo + per_unit + 1] = dy
    return x, sf, dsf


@dataclass
class DistributionTable:
    """Distribution on a uniform mesh with value, survival and derivative columns.

    ``closed_form_until`` > 0 marks an initial stretch where the exact
    ``A sin(sqrt(2x))`` is used for evaluation and integration.
    """

    x: np.ndarray
    sf: np.ndarray  # 1 - F, accurate in the tail
    dF: np.ndarray
    dx: float
    closed_form_until: float = 0.0
    shift: float = 0.0  # support starts at ``shift``; below it F = 0
    error_estimate: float = 0.0

    @property
    def F(self) -> np.ndarray:
        return 1.0 - self.sf

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    @np.errstate(invalid="ignore")
    def _hermite(self, xq, col, dcol):
        xq = np.clip(xq, self.x[0], self.x[-1])
        k = np.minimum(((xq - self.x[0]) / self.dx).astype(np.int64), self.x.size - 2)
        t = (xq - self.x[k]) / self.dx
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return h00 * col[k] + h10 * self.dx * dcol[k] + h01 * col[k + 1] + h11 * self.dx * dcol[k + 1]

    def survival(self, xq):
        xq = np.asarray(xq, dtype=np.float64)
        out = self._hermite(xq, self.sf, -self.dF)
        if self.closed_form_until > 0:
            low = (xq >= 0) & (xq <= self.closed_form_until)
            out = np.where(low, 1.0 - AMPLITUDE * np.sin(np.sqrt(2.0 * np.clip(xq, 0, None))), out)
        out = np.where(xq <= self.shift, 1.0, out)
        out = np.where(xq > self.x_max, self._tail_extrapolate(xq), out)
        return float(out) if out.ndim == 0 else out

    def cdf(self, xq):
        s = self.survival(xq)
        return 1.0 - s

    __call__ = cdf

    def _tail_rate(self) -> float:
        # -d log(1-F)/dx at x_max; inf (no tail mass) once 1-F is down at rounding level
        rate = float(self.dF[-1] / self.sf[-1]) if self.sf[-1] > 0 else math.inf
        return rate if rate >= 1.0 else math.inf

    def _tail_extrapolate(self, xq):
        rate = self._tail_rate()
        with np.errstate(over="ignore", invalid="ignore"):
            return self.sf[-1] * np.exp(-rate * (np.asarray(xq) - self.x_max))

    def _integrate(self, col, dcol):
        # composite cubic-Hermite rule over the mesh
        y0, y1 = col[:-1], col[1:]
        d0, d1 = dcol[:-1], dcol[1:]
        return float(np.sum(0.5 * self.dx * (y0 + y1) + self.dx**2 / 12.0 * (d0 - d1)))

    def moment_integrals(self) -> tuple[float, float]:
        """(E[V], E[V^2]) as integrals of the survival function over [0, inf)."""
        lo = 0
        e1 = e2 = 0.0
        if self.closed_form_until > 0:
            c = self.closed_form_until
            sfun = lambda t: 1.0 - AMPLITUDE * math.sin(math.sqrt(2.0 * t))  # noqa: E731
            e1 += integrate.quad(sfun, 0.0, c, epsabs=1e-14, epsrel=1e-13)[0]
            e2 += integrate.quad(lambda t: 2.0 * t * sfun(t), 0.0, c, epsabs=1e-14, epsrel=1e-13)[0]
            lo = int(round((c - self.x[0]) / self.dx))
        elif self.x[0] > 0:
            e1 += self.x[0]
            e2 += self.x[0] ** 2
        sf, dsf, x = self.sf[lo:], -self.dF[lo:], self.x[lo:]
        e1 += self._integrate(sf, dsf)
        e2 += self._integrate(2 * x * sf, 2 * sf + 2 * x * dsf)
        rate = self._tail_rate()
        if math.isfinite(rate) and rate > 0:
            e1 += sf[-1] / rate
            e2 += 2 * sf[-1] * (x[-1] / rate + 1 / rate**2)
        return e1, e2

    def mean(self) -> float:
        return self.moment_integrals()[0]

    def variance(self) -> float:
        e1, e2 = self.moment_integrals()
        return e2 - e1 * e1

    def to_tsv(self, step: float | None = None, digits: int = 12) -> str:
        idx = np.arange(self.x.size)
        if step is not None and step > self.dx:
            stride = max(1, int(round(step / self.dx)))
            idx = idx[::stride]
        lines = [f"{self.x[i]:.{digits}g}\t{1.0 - self.sf[i]:.{digits}g}" for i in idx]
        return "\n".join(lines) + "\n"


def solve_F(x_max: float = DEFAULT_XMAX, dx: float = DEFAULT_DX, tol: float = 1e-9) -> DistributionTable:
    """Distribution function of X on [0, x_max].

    The error is estimated by re-solving at step 2*dx; if the difference
    exceeds ``tol`` a ``SolverToleranceError`` is raised.
    """
    if x_max < 1:
        raise ValueError("x_max must be >= 1")
    if dx > 1e-3:
        raise ValueError("dx must be <= 1e-3")
    per_unit = int(round(1.0 / dx))
    if abs(per_unit * dx - 1.0) > 1e-12:
        raise ValueError("1/dx must be an integer so the mesh hits every integer point")
    x, sf, dsf = _solve_sf(x_max, per_unit)
    err = 0.0
    if per_unit % 2 == 0:
        _, sf2, _ = _solve_sf(x_max, per_unit // 2)
        # kinks at integer points cap the order near 2.5, so skip the Richardson divisor
        err = float(np.max(np.abs(sf[::2] - sf2)))
        if err > tol:
            raise SolverToleranceError(f"estimated error {err:.3g} exceeds tolerance {tol:.3g}; reduce dx")
    keep = x <= x_max + 1e-12
    return DistributionTable(x[keep], sf[keep], -dsf[keep], 1.0 / per_unit, closed_form_until=1.0, error_estimate=err)


def unit_interval_ode_deviation(x0: float = 0.05, dx: float = DEFAULT_DX) -> float:
    """Integrate the equation from x0 to 1 (no delay term) and compare with the closed form."""
    n = int(round((1.0 - x0) / dx))
    h = (1.0 - x0) / n
    zeros = np.zeros(n + 1)
    y, _ = _march(x0, h, n, F_closed_form(x0), float(_dF_closed(x0)), zeros, zeros, zeros[:-1])
    grid = x0 + h * np.arange(n + 1)
    return float(np.max(np.abs(y - F_closed_form(np.clip(grid, 0.0, 1.0)))))


def closed_form_residual(x):
    """F + F' + 2x F'' for the closed form (zero on (0, 1) where F(x-1) = 0)."""
    x = np.asarray(x, dtype=np.float64)
    s = np.sqrt(2.0 * x)
    f = AMPLITUDE * np.sin(s)
    f1 = AMPLITUDE * np.cos(s) / s
    f2 = -AMPLITUDE * (np.sin(s) / (2.0 * x) + np.cos(s) / (s * 2.0 * x))
    return f + f1 + 2 * x * f2


def limit_M_over_n_distribution(table: DistributionTable) -> DistributionTable:
    """Distribution of 1 + X + U with U ~ Unif[0, 1] independent of X.

    With S(t) = integral_t^inf (1 - F), extended by S(t) = E(X) - t for t < 0,
    the survival function is S(y - 2) - S(y - 1). That difference of tail
    integrals stays accurate where 1 - G is tiny.
    """
    dx = table.dx
    x = table.x
    per_unit = int(round(1.0 / dx))
    seg = 0.5 * dx * (table.sf[:-1] + table.sf[1:]) + dx**2 / 12.0 * (table.dF[1:] - table.dF[:-1])
    # exact on [0, 1], where the Hermite rule would meet the sqrt singularity of F'
    seg[:per_unit] = dx - np.diff(_int_F_closed(x[: per_unit + 1]))
    rate = table._tail_rate()
    tail = table.sf[-1] / rate if math.isfinite(rate) and rate > 0 else 0.0
    S = np.empty_like(x)
    S[-1] = tail
    S[:-1] = tail + np.cumsum(seg[::-1])[::-1]
    mean_x = S[0]

    def S_at(idx):
        out = np.zeros(idx.shape)
        inside = (idx >= 0) & (idx < x.size)
        out[inside] = S[idx[inside]]
        neg = idx < 0
        out[neg] = mean_x - idx[neg] * dx
        return out

    def F_at(idx):
        out = np.ones(idx.shape)
        inside = (idx >= 0) & (idx < x.size)
        out[inside] = 1.0 - table.sf[idx[inside]]
        out[idx < 0] = 0.0
        return out

    i = np.arange(x.size + 2 * per_unit)
    y = i * dx
    sfG = np.clip(S_at(i - 2 * per_unit) - S_at(i - per_unit), 0.0, 1.0)
    dG = F_at(i - per_unit) - F_at(i - 2 * per_unit)
    return DistributionTable(y, sfG, dG, dx, shift=1.0, error_estimate=table.error_estimate)


@dataclass(frozen=True)
class PoissonProcessSample:
    points: np.ndarray  # locations in (eps, 1]
    marks: np.ndarray  # Unif[0, point] for each point
    eps: float

    @property
    def X_value(self) -> float:
        return float(self.marks.sum())


def sample_poisson_process(rng: np.random.Generator | int | None = None, eps: float = DEFAULT_EPS) -> PoissonProcessSample:
    """One realization of the process with intensity 1/(2x), truncated to (eps, 1]."""
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    rng = np.random.default_rng(rng)
    count = rng.poisson(0.5 * math.log(1.0 / eps))
    # the normalized intensity has CDF ln(x/eps)/ln(1/eps) on (eps, 1]
    pts = eps ** rng.random(count)
    return PoissonProcessSample(pts, rng.random(count) * pts, eps)


def simulate_X(rng: np.random.Generator | int | None = None, eps: float = DEFAULT_EPS, size: int | None = None):
    """Draw X by simulating the Poisson process truncated to (eps, 1].

    Point count is Poisson with mean ln(1/eps)/2, locations are eps**V with V
    uniform (the normalized intensity), marks are Unif[0, x]. The omitted part
    has mean eps/4.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    rng = np.random.default_rng(rng)
    n = 1 if size is None else int(size)
    lam = 0.5 * math.log(1.0 / eps)
    out = np.empty(n)
    chunk = 200_000
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        counts = rng.poisson(lam, hi - lo)
        total = int(counts.sum())
        xs = eps ** rng.random(total)
        marks = rng.random(total) * xs
        owner = np.repeat(np.arange(hi - lo), counts)
        out[lo:hi] = np.bincount(owner, weights=marks, minlength=hi - lo)
    return float(out[0]) if size is None else out


def expected_point_count(eps: float, a: float | None = None) -> float:
    """Mean number of process points on (a, 1] (a defaults to eps)."""
    a = eps if a is None else a
    return 0.5 * math.log(1.0 / a)


def ks_distance(samples, table: DistributionTable) -> float:
    return float(stats.kstest(np.asarray(samples), table.cdf).statistic)


def tail_profile(table: DistributionTable, start: float = 2.0, step: float = 0.25, floor: float | None = None):
    """(x, log(1-F(x)) / (x log x)) at points where 1 - F is well above the solver error."""
    if floor is None:
        floor = max(1e-13, 1e3 * table.error_estimate)
    xs = np.arange(start, table.x_max + 1e-12, step)
    sf = np.asarray(table.survival(xs))
    ok = sf > floor
    xs, sf = xs[ok], sf[ok]
    return xs, np.log(sf) / (xs * np.log(xs))


def tail_decay_check(table: DistributionTable, noise: float = 1e-14) -> bool:
    """Qualitative super-exponential decay of 1 - F on [2, x_max].

    Checks that 1 - F is nonincreasing (up to ``noise``), that log(1 - F) is
    concave on the reliable points (its slope steepens), and that
    log(1 - F) / (x log x) <= -0.5 at the last reliable point. The ratio
    itself rises towards -1 for large x, so it is not required to decrease.
    """
    if table.x_max < 4:
        raise ValueError("need x_max >= 4")
    if np.any(np.diff(table.sf) > noise):
        return False
    xs, ratio = tail_profile(table)
    if xs.size < 3:
        return False
    log_sf = ratio * xs * np.log(xs)
    return bool(np.all(np.diff(log_sf, 2) < 0) and np.all(np.diff(log_sf) < 0) and ratio[-1] <= -0.5)
