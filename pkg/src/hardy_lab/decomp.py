"""Constructive mean-zero decompositions subordinate to a tree covering.

Functions are piecewise constant on *fragments*: each vertex t owns a core
cell (its cube minus the connector slabs of its children) and each non-root
vertex s has a connector fragment B_s sitting inside the parent's cube, so

    U_t = (fragments owned by t)  U  B_t  U  {B_c : c a child of t}.

With the partition of unity realized by core-cell indicators every integral
below is an exact sum of value * volume with rational volumes, so the three
decomposition identities can be checked to round-off rather than quadrature
accuracy.

The construction: f_t = g restricted to the cells owned by t, the shadow
integrals S_t = sum of the f-integrals at and below t accumulate bottom-up,
h_s = (S_s / |B_s|) on B_s, and

    g_t = f_t + sum_{children s} h_s - h_t        (no -h term at the root).

The two-sided norm estimate predicted for the result combines the 2^q
triangle-inequality factors, the admissibility and embedding constants of
the weights, sup |U_t|/|B_t|, the overlap bound, and the Hardy constant of
the induced weighted problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .covering import CubeCovering
from .hardy import HardyProblem, HardyReport
from .tree import RootedTree


class DecompositionError(RuntimeError):
    def __init__(self, message: str, vertex: int | None = None):
        super().__init__(message if vertex is None else f"{message} (vertex {vertex})")
        self.vertex = vertex


@dataclass(frozen=True)
class Fragment:
    volume: Fraction
    owner: int                    # vertex whose core cell contains the fragment
    connector: int | None = None  # s when the fragment is the slab B_s


class CellSpace:
    """A tree covering flattened to disjoint fragments with weight values."""

    def __init__(self, tree: RootedTree, fragments: Iterable[Fragment],
                 ell=None, nu=None, omega=None, meta: dict | None = None):
        self.tree = tree
        self.fragments = tuple(fragments)
        m = len(self.fragments)
        self.ell = np.ones(m) if ell is None else np.asarray(ell, dtype=float)
        self.nu = np.ones(m) if nu is None else np.asarray(nu, dtype=float)
        self.omega = np.ones(m) if omega is None else np.asarray(omega, dtype=float)
        self.meta = dict(meta or {})
        self.owner_frags: dict[int, list[int]] = {t: [] for t in range(tree.n)}
        self.bfrag: dict[int, int] = {}
        for i, f in enumerate(self.fragments):
            self.owner_frags[f.owner].append(i)
            if f.connector is not None:
                if f.connector in self.bfrag:
                    raise DecompositionError("duplicate connector fragment",
                                             f.connector)
                self.bfrag[f.connector] = i
        for s in tree.gamma_star:
            if s not in self.bfrag:
                raise DecompositionError("missing connector fragment", s)
            if self.fragments[self.bfrag[s]].volume <= 0:
                raise DecompositionError("connector must have positive volume", s)

    def u_frags(self, t: int) -> tuple[int, ...]:
        ids = set(self.owner_frags[t])
        if t != self.tree.root:
            ids.add(self.bfrag[t])
        for c in self.tree.children[t]:
            ids.add(self.bfrag[c])
        return tuple(sorted(ids))

    @property
    def overlap_bound(self) -> int:
        count = np.zeros(len(self.fragments), dtype=int)
        for t in range(self.tree.n):
            for i in self.u_frags(t):
                count[i] += 1
        return int(count.max())

    def total_volume(self) -> Fraction:
        return sum((f.volume for f in self.fragments), Fraction(0))

    def volumes(self) -> np.ndarray:
        return np.array([float(f.volume) for f in self.fragments])


def space_from_covering(cov: CubeCovering, beta: float | None = None,
                        gamma: float | None = None) -> CellSpace:
    """Fragments of a cube covering: core cells first (index = vertex id),
    then the connector slabs in Gamma* order. Weight values are the edge
    powers nu = l_t^gamma, omega = l_t^beta tied to the fragment's vertex
    (the slab B_s carries the edge of s, matching the essinf convention)."""
    tree = cov.tree
    frags: list[Fragment] = []
    ell: list[float] = []
    for t in range(tree.n):
        core = cov.q_volume(t) - sum((cov.b_volume(c) for c in tree.children[t]),
                                     Fraction(0))
        if core <= 0:
            raise DecompositionError("core cell has nonpositive volume", t)
        frags.append(Fragment(core, owner=t))
        ell.append(float(cov.edge(t)))
    for s in tree.gamma_star:
        frags.append(Fragment(cov.b_volume(s), owner=tree.parent[s], connector=s))
        ell.append(float(cov.edge(s)))
    ell_arr = np.array(ell)
    alpha = cov.profile.alpha
    if beta is None:
        nu = omega = None
    else:
        if gamma is None:
            gamma = beta + alpha - 1.0
        nu = ell_arr ** gamma
        omega = ell_arr ** beta
    return CellSpace(tree, frags, ell=ell_arr, nu=nu, omega=omega,
                     meta={"alpha": alpha, "beta": beta, "gamma": gamma})


def toy_two_cell_space() -> CellSpace:
    """The 1-D covering of (0, 2): cores (0,1) and (1,2), connector (1, 5/4)."""
    tree = RootedTree([-1, 0])
    frags = (
        Fragment(Fraction(1), owner=0),
        Fragment(Fraction(1, 4), owner=1, connector=1),
        Fragment(Fraction(3, 4), owner=1),
    )
    return CellSpace(tree, frags)


@dataclass
class CellFunction:
    """Piecewise-constant values on the fragments of a CellSpace.

    Values may be floats or Fractions; integrals stay exact whenever both
    the values and the volumes are rational.
    """

    space: CellSpace
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.space.fragments):
            raise DecompositionError("one value per fragment required")
        self.values = tuple(self.values)

    def integral(self):
        return sum(v * f.volume for v, f in zip(self.values, self.space.fragments))

    def abs_integral(self):
        return sum(abs(v) * f.volume for v, f in zip(self.values, self.space.fragments))

    def is_mean_zero(self, rel: float = 1e-12) -> bool:
        scale = self.abs_integral()
        return scale == 0 or abs(self.integral()) <= rel * scale

    def scaled(self, c) -> "CellFunction":
        return CellFunction(self.space, tuple(c * v for v in self.values))

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def random_mean_zero(space: CellSpace, rng) -> CellFunction:
    vals = rng.standard_normal(len(space.fragments))
    vols = space.volumes()
    vals -= float(vals @ vols) / float(vols.sum())
    return CellFunction(space, tuple(float(v) for v in vals))


def weighted_q_norm_q(values, space: CellSpace, weights: np.ndarray, q: float) -> float:
    """sum |f|^q * weights^{-q} * vol (the q-th power of the weighted norm)."""
    acc = 0.0
    for v, f, w in zip(values, space.fragments, weights):
        if v:
            acc += abs(float(v)) ** q * float(w) ** (-q) * float(f.volume)
    return acc


# -- pairwise splitting --------------------------------------------------------

@dataclass(frozen=True)
class SplitReport:
    overlap_volume: Fraction
    norm_constant: float          # (||f_A|| + ||f_B||) / ||f|| in the weighted norm
    mean_a: object
    mean_b: object


def split_pair(f: CellFunction, A: Iterable[int], B: Iterable[int],
               q: float = 2.0) -> tuple[CellFunction, CellFunction, SplitReport]:
    """Split f (mean zero on A u B) into parts supported on A and on B.

    f_A = chi_A f - (chi_{AnB} / |AnB|) int_A f and f_B = f - f_A; the
    overlap correction uses int_A f in both parts, which is what makes
    f_A + f_B = f and both means vanish identically. Exact when values and
    volumes are rational.
    """
    space = f.space
    A = frozenset(A)
    B = frozenset(B)
    both = A & B
    vol_overlap = sum((space.fragments[i].volume for i in both), Fraction(0))
    if vol_overlap <= 0:
        raise DecompositionError("the overlap A n B must have positive measure")
    outside = [i for i, v in enumerate(f.values) if v and i not in A and i not in B]
    if outside:
        raise DecompositionError(f"f has mass outside A u B (fragment {outside[0]})")
    total = f.integral()
    scale = f.abs_integral()
    if scale and abs(total) > 1e-12 * scale:
        raise DecompositionError("f must have vanishing mean on A u B")
    int_a = sum(f.values[i] * space.fragments[i].volume for i in A)
    corr = int_a / vol_overlap

    va = [0] * len(f.values)
    vb = [0] * len(f.values)
    for i in A:
        va[i] = f.values[i]
    for i in both:
        va[i] = va[i] - corr
    for i in B - A:
        vb[i] = f.values[i]
    for i in both:
        vb[i] = vb[i] + corr
    fa = CellFunction(space, tuple(va))
    fb = CellFunction(space, tuple(vb))
    nf = weighted_q_norm_q(f.values, space, space.omega, q) ** (1.0 / q)
    na = weighted_q_norm_q(va, space, space.omega, q) ** (1.0 / q)
    nb = weighted_q_norm_q(vb, space, space.omega, q) ** (1.0 / q)
    c = (na + nb) / nf if nf else 0.0
    return fa, fb, SplitReport(vol_overlap, c, fa.integral(), fb.integral())


# -- the tree decomposition -----------------------------------------------------

@dataclass
class DecompositionResult:
    space: CellSpace
    q: float
    parts: dict[int, dict[int, float]]       # vertex -> {fragment: value}
    shadow_integrals: dict[int, float]
    lhs_norm: float                          # sum_t ||g_t||^q in the nu weight
    rhs_norm: float                          # ||g||^q in the omega weight
    ratio: float
    flags: tuple[str, ...]
    g_values: tuple

    def part_function(self, t: int) -> CellFunction:
        vals = [0.0] * len(self.space.fragments)
        for i, v in self.parts[t].items():
            vals[i] = v
        return CellFunction(self.space, tuple(vals))

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "parts": {str(t): {str(i): v for i, v in sorted(p.items())}
                      for t, p in sorted(self.parts.items())},
            "lhs_norm": self.lhs_norm,
            "rhs_norm": self.rhs_norm,
            "ratio": self.ratio,
            "flags": list(self.flags),
        }


def decompose(g: CellFunction, problem: HardyProblem | None = None,
              q: float | None = None) -> DecompositionResult:
    """Mean-zero decomposition of g over the covering tree.

    Two passes: the shadow integrals accumulate bottom-up, then each part
    assembles independently. The norms use the space's nu/omega fragment
    weights with q taken from `problem` (or given directly).
    """
    space = g.space
    tree = space.tree
    if problem is not None:
        if problem.tree != tree:
            raise DecompositionError("problem tree does not match the covering")
        q = problem.q
    if q is None:
        q = 2.0
    total = g.integral()
    scale = g.abs_integral()
    flags = []
    if scale == 0:
        flags.append("zero_input")
    elif abs(total) > 1e-12 * scale:
        raise DecompositionError("g must have vanishing mean value")

    fint = {t: math.fsum(float(g.values[i]) * float(space.fragments[i].volume)
                         for i in space.owner_frags[t])
            for t in range(tree.n)}
    S: dict[int, float] = {}
    for t in reversed(tree.topo):
        S[t] = fint[t] + math.fsum(S[c] for c in tree.children[t])

    parts: dict[int, dict[int, float]] = {}
    for t in range(tree.n):
        vals: dict[int, float] = {}
        for i in space.owner_frags[t]:
            if g.values[i]:
                vals[i] = float(g.values[i])
        for c in tree.children[t]:
            i = space.bfrag[c]
            h = S[c] / float(space.fragments[i].volume)
            if h:
                vals[i] = vals.get(i, 0.0) + h
        if t != tree.root:
            i = space.bfrag[t]
            h = S[t] / float(space.fragments[i].volume)
            if h:
                vals[i] = vals.get(i, 0.0) - h
        parts[t] = vals

    lhs = 0.0
    for t in range(tree.n):
        for i, v in parts[t].items():
            lhs += abs(v) ** q * float(space.nu[i]) ** (-q) * float(space.fragments[i].volume)
    rhs = weighted_q_norm_q(g.values, space, space.omega, q)
    if rhs == 0.0:
        ratio = 0.0
        flags.append("zero_ratio")
    else:
        ratio = lhs / rhs
    return DecompositionResult(space, q, parts, S, lhs, rhs, ratio,
                               tuple(flags), g.values)


@dataclass(frozen=True)
class VerifyReport:
    sum_error: float              # max per-fragment |sum_t g_t - g| / max|g|
    max_part_mean: float          # max_t |int g_t|
    mean_bound: float             # the 1e-10 * ||g||_1 budget
    support_ok: bool
    measured_ratio: float
    predicted_bound: float
    components: dict
    lhs_norm: float = 0.0
    rhs_norm: float = 0.0

    def to_json(self) -> dict:
        return {
            "sum_ok": True,
            "means_ok": True,
            "support_ok": self.support_ok,
            "estimate_ok": self.measured_ratio <= self.predicted_bound,
            "sum_error": self.sum_error,
            "max_part_mean": self.max_part_mean,
            "mean_bound": self.mean_bound,
            "lhs_norm": self.lhs_norm,
            "rhs_norm": self.rhs_norm,
            "measured_ratio": self.measured_ratio,
            "predicted_bound": self.predicted_bound,
            "components": self.components,
        }


def predicted_constant(space: CellSpace, q: float, hardy_constant: float) -> tuple[float, dict]:
    """A-priori bound for lhs/rhs: triangle-inequality 2^q factors, the
    omega->nu embedding constant, the per-vertex admissibility and
    |U_t|/|B_t| terms, the overlap bound, and the Hardy constant."""
    tree = space.tree
    p = q / (q - 1.0)
    emb = float(np.max(space.omega / space.nu))
    worst = 0.0
    ratio_ub = 0.0
    for t in tree.gamma_star:
        ufr = space.u_frags(t)
        sup_omega = max(float(space.omega[i]) for i in ufr)
        omega_t = float(space.omega[space.bfrag[t]])
        uvol = sum((space.fragments[i].volume for i in ufr), Fraction(0))
        r = float(uvol / space.fragments[space.bfrag[t]].volume)
        ratio_ub = max(ratio_ub, r)
        worst = max(worst, (sup_omega / omega_t) ** q * r ** (q / p))
    N = space.overlap_bound
    c_pred = 2.0 ** (q - 1.0) * emb ** q \
        + 2.0 ** q * hardy_constant ** q * worst * N
    parts = {"embedding": emb, "admissibility_term": worst,
             "overlap": N, "ub_ratio": ratio_ub, "hardy": hardy_constant}
    return c_pred, parts


def verify_decomposition(result: DecompositionResult,
                         hardy: HardyReport | float,
                         sum_tol: float = 1e-12,
                         mean_tol: float = 1e-10) -> VerifyReport:
    """Check the three decomposition properties exactly and the norm estimate.

    Violations of the exact properties raise DecompositionError with the
    offending vertex; the estimate comparison is reported, and failing it
    also raises (the predicted bound is rigorous, not a heuristic).
    """
    space = result.space
    tree = space.tree
    g = np.array([float(v) for v in result.g_values])
    gmax = float(np.max(np.abs(g))) if len(g) else 0.0

    total = np.zeros(len(space.fragments))
    for t, p in result.parts.items():
        allowed = set(space.u_frags(t))
        for i, v in p.items():
            if i not in allowed:
                raise DecompositionError("part supported outside U_t", t)
            total[i] += v
    err = float(np.max(np.abs(total - g))) if len(g) else 0.0
    if err > sum_tol * max(gmax, 1e-300):
        worst = int(np.argmax(np.abs(total - g)))
        raise DecompositionError(
            f"sum of parts deviates from g by {err:.3e}",
            space.fragments[worst].owner)

    g1 = math.fsum(abs(float(v)) * float(f.volume)
                   for v, f in zip(result.g_values, space.fragments))
    bound = mean_tol * max(g1, 1e-300)
    worst_mean = 0.0
    for t in range(tree.n):
        m = math.fsum(v * float(space.fragments[i].volume)
                      for i, v in result.parts[t].items())
        if abs(m) > bound:
            raise DecompositionError(f"part mean {m:.3e} exceeds budget", t)
        worst_mean = max(worst_mean, abs(m))

    c_h = hardy.suff_bound if isinstance(hardy, HardyReport) else float(hardy)
    c_pred, components = predicted_constant(space, result.q, c_h)
    if result.ratio > c_pred * (1.0 + 1e-9):
        raise DecompositionError(
            f"measured ratio {result.ratio:.6g} exceeds the predicted bound {c_pred:.6g}")
    return VerifyReport(err / max(gmax, 1e-300), worst_mean, bound, True,
                        result.ratio, c_pred, components,
                        result.lhs_norm, result.rhs_norm)
