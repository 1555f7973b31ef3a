"""Empirical quadrature checkers for the weighted inequalities on the model
domain: improved Poincare, fractional Poincare, and Korn.

These measure lhs/rhs ratios for concrete functions; the inequalities hold
with finite constants, so the checkers report trends, never proofs. Quadrature is
stratified Monte Carlo over the covering cells with per-cell counter-based
seeding: results are deterministic given (seed, sample count, worker count),
and every report carries a two-run spread obtained from an independent seed.

Distance to the boundary defaults to the per-cell edge surrogate d = l_t
(constant on each cube), the same essentially-constant equivalence the
covering machinery relies on; exact graph distance is available as the
"graph" mode for diagnostics.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .covering import CubeCovering
from .decomp import CellFunction, DecompositionError, weighted_q_norm_q


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("HARDY_LAB_WORKERS")
    return max(1, int(env)) if env else 1


# -- test functions ------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Closed-form scalar function or vector field with its derivatives."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray] | None = None
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    vector: bool = False


def f_linear(axis: int = 0, shift: float = 0.5) -> TestFunction:
    def value(x):
        return x[:, axis] - shift

    def gradient(x):
        g = np.zeros_like(x)
        g[:, axis] = 1.0
        return g

    return TestFunction(f"linear[x{axis}-{shift:g}]", value, gradient)


def f_bilinear() -> TestFunction:
    """x1 * xn + x1^2: a polynomial with a genuinely varying gradient."""
    def value(x):
        return x[:, 0] * x[:, -1] + x[:, 0] ** 2

    def gradient(x):
        g = np.zeros_like(x)
        g[:, 0] = x[:, -1] + 2.0 * x[:, 0]
        g[:, -1] += x[:, 0]
        return g

    return TestFunction("bilinear", value, gradient)


def f_distance_power(profile, gamma: float) -> TestFunction:
    """(phi(x') - xn)^gamma: a distance-power-type function (the vertical gap
    to the graph is comparable to the true distance). Needs profile.dphi."""
    if profile.dphi is None:
        raise ValueError("profile must provide dphi for distance-power functions")

    def value(x):
        return (profile.phi(x[:, :-1]) - x[:, -1]) ** gamma

    def gradient(x):
        gap = profile.phi(x[:, :-1]) - x[:, -1]
        fac = gamma * gap ** (gamma - 1.0)
        g = np.empty_like(x)
        g[:, :-1] = fac[:, None] * profile.dphi(x[:, :-1])
        g[:, -1] = -fac
        return g

    return TestFunction(f"dist^{gamma:g}", value, gradient)


def u_rigid_rotation(n: int = 2) -> TestFunction:
    def value(x):
        out = np.zeros_like(x)
        out[:, 0] = x[:, 1]
        out[:, 1] = -x[:, 0]
        return out

    def jacobian(x):
        J = np.zeros((len(x), n, n))
        J[:, 0, 1] = 1.0
        J[:, 1, 0] = -1.0
        return J

    return TestFunction("rigid-rotation", value, jacobian=jacobian, vector=True)


def u_shear(n: int = 2) -> TestFunction:
    """(xn^2, 0, ...): nonzero symmetric gradient, for nontrivial Korn ratios."""
    def value(x):
        out = np.zeros_like(x)
        out[:, 0] = x[:, -1] ** 2
        return out

    def jacobian(x):
        J = np.zeros((len(x), n, n))
        J[:, 0, -1] = 2.0 * x[:, -1]
        return J

    return TestFunction("shear", value, jacobian=jacobian, vector=True)


def check_gradient(f: TestFunction, points: np.ndarray, d: np.ndarray,
                   rtol: float = 1e-6) -> float:
    """Max relative deviation of the analytic derivative from central
    differences with step 1e-5 * d(x). Raises when it exceeds rtol."""
    x = np.atleast_2d(points)
    h = 1e-5 * np.asarray(d, dtype=float)
    deriv = f.jacobian(x) if f.vector else f.gradient(x)
    worst = 0.0
    for k in range(x.shape[1]):
        xp = x.copy()
        xm = x.copy()
        xp[:, k] += h
        xm[:, k] -= h
        diff = f.value(xp) - f.value(xm)
        if f.vector:
            fd = diff / (2.0 * h)[:, None]
            exact = deriv[:, :, k]
        else:
            fd = diff / (2.0 * h)
            exact = deriv[:, k]
        scale = np.maximum(np.abs(exact), 1.0)
        worst = max(worst, float(np.max(np.abs(fd - exact) / scale)))
    if worst > rtol:
        raise ValueError(f"gradient of {f.name} deviates from finite differences "
                         f"by {worst:.3e}")
    return worst


# -- stratified sampling --------------------------------------------------------

def _allocate(samples: int, vols: np.ndarray) -> np.ndarray:
    """Largest-remainder proportional allocation; the total is exact."""
    raw = samples * vols / vols.sum()
    counts = np.floor(raw).astype(int)
    short = samples - counts.sum()
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts

def _cell_rng(seed: int, cell: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, cell)))

def _cell_box(cov: CubeCovering, t: int) -> tuple[np.ndarray, np.ndarray]:
    lo = [float(a) for a, _ in cov.base[t]] + [float(cov.vert[t][0])]
    hi = [float(b) for _, b in cov.base[t]] + [float(cov.vert[t][1])]
    return np.array(lo), np.array(hi)


def _d_values(cov: CubeCovering, t: int, pts: np.ndarray, mode: str) -> np.ndarray:
    if mode == "cell":
        return np.full(len(pts), float(cov.edge(t)))
    if mode == "graph":
        return cov.graph_distance(pts)
    raise ValueError(f"unknown distance mode {mode!r}")


@dataclass(frozen=True)
class RatioReport:
    kind: str
    lhs: float
    rhs: float
    ratio: float
    sample_count: int
    spread: float
    low_confidence: bool
    seed: int
    flags: tuple[str, ...] = ()
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": self.ratio, "sample_count": self.sample_count,
                "spread": self.spread, "low_confidence": self.low_confidence,
                "seed": self.seed, "flags": list(self.flags),
                "params": self.params}


def _ratio_with_flags(lhs: float, rhs: float) -> tuple[float, tuple[str, ...]]:
    if rhs == 0.0:
        if lhs == 0.0:
            return 0.0, ()
        return math.inf, ("inequality_violating_candidate",)
    return lhs / rhs, ()


def _map_cells(work, cells, workers: int):
    if workers <= 1:
        return [work(t) for t in cells]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(work, cells))


def _local_run(kind: str, f: TestFunction, cov: CubeCovering, beta: float,
               p: float, samples: int, seed: int, d_mode: str,
               workers: int) -> tuple[float, float]:
    """One quadrature pass for the improved Poincare or Korn ratio.

    The weighted-mean projection (scalar constant / antisymmetric matrix)
    is computed on the same nodes as the norms, so the side condition holds
    exactly on the discrete measure.
    """
    alpha = cov.profile.alpha
    n = cov.n
    cells = list(range(cov.tree.n))
    vols = np.array([float(cov.q_volume(t)) for t in cells])
    counts = _allocate(max(samples, len(cells)), vols)

    def work(t):
        m = int(counts[t])
        if m == 0:
            return None
        lo, hi = _cell_box(cov, t)
        pts = lo + _cell_rng(seed, t).random((m, n)) * (hi - lo)
        w = vols[t] / m
        d = _d_values(cov, t, pts, d_mode)
        dbp = d ** (beta * p)
        if kind == "improved_poincare":
            fv = f.value(pts)
            gv = np.linalg.norm(f.gradient(pts), axis=1)
            return (w, dbp, fv, gv, d)
        J = f.jacobian(pts)
        eta = 0.5 * (J - np.swapaxes(J, 1, 2))
        eps = 0.5 * (J + np.swapaxes(J, 1, 2))
        return (w, dbp, J, eta, eps, d)

    data = [r for r in _map_cells(work, cells, workers) if r is not None]
    denom = math.fsum(r[0] * float(np.sum(r[1])) for r in data)
    if kind == "improved_poincare":
        num = math.fsum(r[0] * float(np.sum(r[1] * r[2])) for r in data)
        c = num / denom
        lhs = math.fsum(r[0] * float(np.sum(np.abs(r[2] - c) ** p * r[1]))
                        for r in data)
        rhs = math.fsum(r[0] * float(np.sum(r[3] ** p * r[4] ** ((beta + alpha) * p)))
                        for r in data)
        return lhs ** (1.0 / p), rhs ** (1.0 / p)
    # korn: remove the weighted-mean antisymmetric part of the Jacobian
    A = np.zeros((n, n))
    for r in data:
        A += r[0] * np.einsum("i,ijk->jk", r[1], r[3])
    A /= denom
    lhs = math.fsum(
        r[0] * float(np.sum(np.linalg.norm(r[2] - A, axis=(1, 2)) ** p * r[1]))
        for r in data)
    rhs = math.fsum(
        r[0] * float(np.sum(np.linalg.norm(r[4], axis=(1, 2)) ** p
                            * r[5] ** ((beta + alpha - 1.0) * p)))
        for r in data)
    return lhs ** (1.0 / p), rhs ** (1.0 / p)


def _sphere(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    v = rng.standard_normal((m, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


_SPHERE_AREA = {2: 2.0 * math.pi, 3: 4.0 * math.pi}


def _fractional_run(f: TestFunction, cov: CubeCovering, beta: float, p: float,
                    s: float, tau: float, samples: int, seed: int,
                    d_mode: str, workers: int) -> tuple[float, float]:
    """Stratified pair sampling for the fractional seminorm.

    x is stratified by cell; the offset radius is drawn from the power law
    r ~ R u^{1/kappa} with kappa = p(1-s), which cancels the |x-y| kernel
    singularity; the tau-ball restriction enters through R = tau d(x) and
    pairs leaving the truncated domain are rejected with weight zero.
    """
    alpha = cov.profile.alpha
    n = cov.n
    kappa = p * (1.0 - s)
    cells = list(range(cov.tree.n))
    vols = np.array([float(cov.q_volume(t)) for t in cells])
    counts = _allocate(max(samples, len(cells)), vols)
    surf = _SPHERE_AREA[n]
    expo = (s + beta - alpha + 1.0) * p

    def work(t):
        m = int(counts[t])
        if m == 0:
            return None
        rng = _cell_rng(seed, t)
        lo, hi = _cell_box(cov, t)
        pts = lo + rng.random((m, n)) * (hi - lo)
        w = vols[t] / m
        dx = _d_values(cov, t, pts, d_mode)
        R = tau * dx
        r = R * rng.random(m) ** (1.0 / kappa)
        y = pts + r[:, None] * _sphere(rng, m, n)
        dy = np.empty(m)
        inside = np.empty(m, dtype=bool)
        for i in range(m):
            c = cov.locate(y[i])
            inside[i] = c >= 0
            dy[i] = float(cov.edge(c)) if (c >= 0 and d_mode == "cell") else 0.0
        if d_mode == "graph" and inside.any():
            dy[inside] = cov.graph_distance(y[inside])
        fv = f.value(pts)
        contrib = np.zeros(m)
        ok = inside & (r > 0)
        if ok.any():
            delta = np.minimum(dx[ok], dy[ok])
            diff = np.abs(fv[ok] - f.value(y[ok])) ** p
            kern = diff / r[ok] ** (n + s * p) * delta ** expo
            dens = kappa * r[ok] ** (kappa - 1.0) / R[ok] ** kappa
            contrib[ok] = kern * surf * r[ok] ** (n - 1) / dens
        dbp = dx ** (beta * p)
        return (w, dbp, fv, float(np.sum(contrib)))

    data = [r for r in _map_cells(work, cells, workers) if r is not None]
    denom = math.fsum(r[0] * float(np.sum(r[1])) for r in data)
    num = math.fsum(r[0] * float(np.sum(r[1] * r[2])) for r in data)
    c = num / denom
    lhs = math.fsum(r[0] * float(np.sum(np.abs(r[2] - c) ** p * r[1])) for r in data)
    rhs = math.fsum(r[0] * r[3] for r in data)
    return lhs ** (1.0 / p), rhs ** (1.0 / p)


KINDS = ("improved_poincare", "fractional_poincare", "korn")


def inequality_ratio(kind: str, f: TestFunction, covering: CubeCovering,
                     beta: float, p: float, s: float | None = None,
                     tau: float | None = None, samples: int = 10 ** 5,
                     seed: int = 0, workers: int | None = None,
                     d_mode: str = "cell") -> RatioReport:
    """Measured lhs/rhs for one inequality, with a two-seed spread."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind == "fractional_poincare":
        if s is None or tau is None or not (0 < s < 1 and 0 < tau < 1):
            raise ValueError("fractional_poincare needs s, tau in (0, 1)")
    if kind == "korn" and not f.vector:
        raise ValueError("korn needs a vector field")
    if kind != "korn" and f.vector:
        raise ValueError(f"{kind} needs a scalar function")
    nw = worker_count(workers)

    def run(sd: int) -> tuple[float, float]:
        if kind == "fractional_poincare":
            return _fractional_run(f, covering, beta, p, s, tau, samples, sd,
                                   d_mode, nw)
        return _local_run(kind, f, covering, beta, p, samples, sd, d_mode, nw)

    lhs, rhs = run(seed)
    lhs2, rhs2 = run(seed + 1)
    ratio, flags = _ratio_with_flags(lhs, rhs)
    ratio2, _ = _ratio_with_flags(lhs2, rhs2)
    if ratio == ratio2 == 0.0 or (math.isinf(ratio) and math.isinf(ratio2)):
        spread = 0.0
    else:
        mid = 0.5 * (ratio + ratio2)
        spread = abs(ratio - ratio2) / mid if mid > 0 and math.isfinite(mid) else math.inf
    params = {"beta": beta, "p": p, "s": s, "tau": tau, "d_mode": d_mode,
              "alpha": covering.profile.alpha, "function": f.name,
              "workers": nw}
    return RatioReport(kind, lhs, rhs, ratio, samples, spread,
                       spread > 0.10, seed, flags, params)


@dataclass(frozen=True)
class SweepRow:
    beta: float
    below_threshold: bool
    report: RatioReport
    report_small: RatioReport
    growing: bool

    def to_json(self) -> dict:
        return {"beta": self.beta, "below_threshold": self.below_threshold,
                "report": self.report.to_json(),
                "report_small": self.report_small.to_json(),
                "growing": self.growing}


def parameter_sweep(kind: str, f: TestFunction, covering: CubeCovering,
                    beta_grid: Iterable[float], p: float,
                    samples: int = 10 ** 5, seed: int = 0,
                    **kw) -> list[SweepRow]:
    """One RatioReport per beta, run at two sample sizes; growth between the
    sizes near/below beta = -alpha/p is the blow-up diagnostic."""
    alpha = covering.profile.alpha
    rows = []
    for beta in beta_grid:
        small = inequality_ratio(kind, f, covering, beta, p,
                                 samples=max(samples // 4, 1), seed=seed, **kw)
        big = inequality_ratio(kind, f, covering, beta, p,
                               samples=samples, seed=seed, **kw)
        growing = (math.isfinite(small.ratio) and small.ratio > 0
                   and (not math.isfinite(big.ratio)
                        or big.ratio > 1.25 * small.ratio))
        rows.append(SweepRow(beta, beta * p <= -alpha, big, small, growing))
    return rows


# -- the density splitting -------------------------------------------------------

@dataclass(frozen=True)
class DensityReport:
    g: CellFunction
    psi: float
    epsilon_depth: int          # smallest truncation depth with tail < epsilon
    tail_norm: float
    lhs: float                  # ||g||
    rhs: float                  # ||g + psi d^{beta p}||
    estimate_ok: bool           # lhs <= 2 rhs


def density_split(F: CellFunction, beta: float, p: float,
                  epsilon: float) -> DensityReport:
    """Split F into a compactly supported mean-zero part plus psi d^{beta p}.

    psi = int F / int d^{beta p}; the remainder is cut to the depth-D inner
    region Omega_eps (smallest D whose outside tail is below epsilon) and
    recentered on the root core cell. The estimate
    ||g|| <= 2 ||g + psi d^{beta p}|| in L^q(d^{-beta q}) is evaluated on
    the cells.
    """
    space = F.space
    alpha = space.meta.get("alpha")
    if alpha is None:
        raise DecompositionError("density_split needs a covering-derived space")
    if beta * p <= -alpha:
        raise DecompositionError("d^{beta p} is not integrable: beta p <= -alpha")
    q = p / (p - 1.0)
    tree = space.tree
    dbp = space.ell ** (beta * p)
    omega = space.ell ** beta
    vols = space.volumes()
    denom = float(dbp @ vols)
    Fv = F.as_array()
    psi = float((Fv * vols).sum()) / denom
    h = Fv - psi * dbp

    depth = np.array([tree.depth[f.connector if f.connector is not None else f.owner]
                      for f in space.fragments])
    max_depth = int(depth.max())

    def tail_norm(D):
        out = depth > D
        return float(np.sum(np.abs(h[out]) ** q * omega[out] ** (-q) * vols[out])) ** (1 / q)

    D = None
    for cand in range(max_depth + 1):
        if tail_norm(cand) < epsilon:
            D = cand
            break
    if D is None:
        raise DecompositionError(
            "epsilon too small: the inner region would exceed the truncation")
    inner = depth <= D
    ball = space.owner_frags[tree.root][0]
    tail_int = float(np.sum(h[~inner] * vols[~inner]))
    g = np.where(inner, h, 0.0)
    g[ball] += dbp[ball] / (dbp[ball] * vols[ball]) * tail_int
    gf = CellFunction(space, tuple(float(x) for x in g))
    lhs = weighted_q_norm_q(gf.values, space, omega, q) ** (1 / q)
    full = g + psi * dbp
    rhs = weighted_q_norm_q(tuple(full), space, omega, q) ** (1 / q)
    return DensityReport(gf, psi, D, tail_norm(D), lhs, rhs,
                         lhs <= 2.0 * rhs * (1 + 1e-12))
