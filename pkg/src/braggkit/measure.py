"""Atomic (discrete) measures on ℝᵈ and their calculus: Dirac combs, support
function lookup, total variation, pure-point part, reflection, convolution,
weighting, translation bounds and restriction to closed subgroups."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    Box,
    PointSet,
    as_points,
    merge_close_rows,
    _max_box_aggregate,
    MERGE_TOL_FRACTION,
)

__all__ = [
    "AtomicMeasure",
    "SampledMeasure",
    "SubgroupSpec",
    "dirac_comb",
    "support_value",
    "total_variation",
    "pure_point_part",
    "reflect",
    "convolve",
    "weight_by",
    "translation_bound",
    "restrict",
    "add",
]

DEFAULT_PAIR_BUDGET = 10**8


@dataclass(eq=False)
class AtomicMeasure:
    """Finite list of (location, complex weight) atoms with a merge tolerance.

    Locations closer than `tol` are merged (weights summed) on construction;
    exact-zero weights are dropped so that μ({x}) = 0 exactly for x off the
    support. The optional `window` records the realization box the atoms were
    produced in (needed by safe-interior bookkeeping downstream); it defaults
    to the atom bounding box.
    """

    dim: int
    locations: np.ndarray
    weights: np.ndarray
    tol: float = None
    window: Box = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.locations = as_points(self.locations, self.dim)
        self.weights = np.asarray(self.weights, dtype=complex).ravel()
        if len(self.weights) != len(self.locations):
            raise ValueError("one weight per atom required")
        if not np.all(np.isfinite(self.locations)) or not np.all(np.isfinite(self.weights)):
            raise ValueError("atoms must be finite")
        if self.window is None:
            self.window = self._default_window()
        if self.tol is None:
            self.tol = MERGE_TOL_FRACTION * max(1.0, self.window.diameter)
        if len(self.locations):
            reps, inv = merge_close_rows(self.locations, self.tol)
            w = np.zeros(len(reps), dtype=complex)
            np.add.at(w, inv, self.weights)
            keep = w != 0
            self.locations, self.weights = reps[keep], w[keep]
        self._tree = None

    def _default_window(self):
        if len(self.locations) == 0:
            return Box.cube(1.0, self.dim)
        lo = self.locations.min(axis=0)
        hi = self.locations.max(axis=0)
        pad = np.maximum(0.5, 1e-6 * (hi - lo))
        return Box(lo - pad, hi + pad)

    def __len__(self):
        return len(self.locations)

    @property
    def is_zero(self):
        return len(self.locations) == 0

    def tree(self):
        if self._tree is None and len(self.locations):
            self._tree = cKDTree(self.locations)
        return self._tree

    def values_at(self, points):
        """Vectorized support-function lookup μ({x}) for an (n, d) array."""
        pts = as_points(points, self.dim)
        out = np.zeros(len(pts), dtype=complex)
        if len(self.locations) == 0 or len(pts) == 0:
            return out
        dist, idx = self.tree().query(pts, k=1, distance_upper_bound=self.tol)
        hit = np.isfinite(dist)
        out[hit] = self.weights[idx[hit]]
        return out

    def value_at(self, x):
        return complex(self.values_at(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def restrict_to_box(self, box):
        """Atoms inside the closed box, as a new measure windowed to it."""
        if len(self.locations) == 0:
            return AtomicMeasure(self.dim, self.locations, self.weights,
                                 tol=self.tol, window=box, provenance=self.provenance)
        keep = box.contains(self.locations)
        return AtomicMeasure(self.dim, self.locations[keep], self.weights[keep],
                             tol=self.tol, window=box, provenance=self.provenance)

    def is_positive(self, imag_tol=1e-12):
        if len(self.weights) == 0:
            return True
        scale = max(1.0, float(np.abs(self.weights).max()))
        return bool(np.all(np.abs(self.weights.imag) <= imag_tol * scale)
                    and np.all(self.weights.real >= -imag_tol * scale))

    def to_dict(self):
        d = {
            "dim": self.dim,
            "atoms": [
                {"x": loc.tolist(), "re": float(w.real), "im": float(w.imag)}
                for loc, w in zip(self.locations, self.weights)
            ],
            "tol": float(self.tol),
            "window": self.window.to_dict(),
        }
        if self.provenance.get("generator"):
            d["generator"] = self.provenance["generator"]
        return d

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        return text

    @staticmethod
    def from_dict(d):
        atoms = d.get("atoms", [])
        dim = int(d["dim"])
        locs = np.array([a["x"] for a in atoms], dtype=float).reshape(-1, dim)
        w = np.array([complex(a["re"], a.get("im", 0.0)) for a in atoms])
        window = Box.from_dict(d["window"]) if "window" in d else None
        prov = {"generator": d["generator"]} if "generator" in d else {}
        return AtomicMeasure(dim, locs, w, tol=d.get("tol"), window=window,
                             provenance=prov)

    @staticmethod
    def from_json(path):
        with open(path, encoding="utf-8") as fh:
            return AtomicMeasure.from_dict(json.load(fh))

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(f"x{i}" for i in range(self.dim)) + ",re,im\n")
            for loc, w in zip(self.locations, self.weights):
                row = [repr(float(v)) for v in loc] + [repr(float(w.real)), repr(float(w.imag))]
                fh.write(",".join(row) + "\n")


@dataclass(eq=False)
class SampledMeasure:
    """Atomic part plus an optional grid-sampled density on a box.

    The atomic/continuous split is by construction; the grid exists only so
    the pure-point extraction has something nontrivial to strip.
    """

    atomic: AtomicMeasure
    grid_box: Box = None
    grid_spacing: float = None
    density: np.ndarray = None

    def __post_init__(self):
        has_grid = self.grid_box is not None
        if has_grid:
            if self.grid_spacing is None or self.grid_spacing <= 0:
                raise ValueError("grid spacing must be positive")
            self.density = np.asarray(self.density, dtype=float)


@dataclass(eq=False)
class SubgroupSpec:
    """Closed subgroup of ℝᵈ: a rank-k lattice or a coordinate subspace.

    Membership is decided within tolerance `tol`: lattice membership by
    rounding basis⁻¹·x to the nearest integer vector and checking the
    residual, subspace membership by the off-axis coordinates vanishing.
    """

    kind: str
    basis: np.ndarray = None
    axes: np.ndarray = None
    tol: float = 1e-8

    def __post_init__(self):
        if self.kind == "lattice":
            self.basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
            if np.linalg.matrix_rank(self.basis) < self.basis.shape[1]:
                raise ValueError("lattice basis columns must be independent")
        elif self.kind == "coordinate_subspace":
            self.axes = np.asarray(self.axes, dtype=bool)
        else:
            raise ValueError(f"unknown subgroup kind {self.kind!r}")

    @staticmethod
    def lattice(basis, tol=1e-8):
        return SubgroupSpec("lattice", basis=basis, tol=tol)

    @staticmethod
    def coordinate_subspace(axes, tol=1e-8):
        return SubgroupSpec("coordinate_subspace", axes=axes, tol=tol)

    def membership_mask(self, points):
        pts = np.asarray(points, dtype=float)
        if len(pts) == 0:
            return np.zeros(0, dtype=bool)
        if self.kind == "lattice":
            coeffs, *_ = np.linalg.lstsq(self.basis, pts.T, rcond=None)
            nearest = np.round(coeffs)
            residual = pts.T - self.basis @ nearest
            return np.linalg.norm(residual, axis=0) <= self.tol
        off = pts[:, ~self.axes]
        if off.shape[1] == 0:
            return np.ones(len(pts), dtype=bool)
        return np.max(np.abs(off), axis=1) <= self.tol


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def dirac_comb(ps, weights=1.0):
    """Dirac comb over a point set: one atom per point.

    `weights` is a constant or a callable point → complex. The point set's
    generator metadata is kept as provenance so frequency candidates can be
    derived later.
    """
    if callable(weights):
        w = np.array([weights(p) for p in ps.points], dtype=complex)
    else:
        w = np.full(len(ps), complex(weights))
    return AtomicMeasure(ps.dim, ps.points.copy(), w, tol=ps.merge_tol,
                         window=ps.window,
                         provenance={"generator": ps.generator})


def support_value(mu, x):
    """μ({x}): the weight of the atom matching x at the merge tolerance,
    else 0."""
    return mu.value_at(x)


def total_variation(mu):
    """|μ|: same atoms with weights |w|."""
    return AtomicMeasure(mu.dim, mu.locations.copy(), np.abs(mu.weights),
                         tol=mu.tol, window=mu.window, provenance=mu.provenance)


def pure_point_part(sampled):
    """Atomic part of a sampled measure; positivity carries over since the
    split is by construction."""
    if isinstance(sampled, AtomicMeasure):
        return sampled
    return sampled.atomic


def reflect(mu):
    """Atom (x, w) ↦ (−x, conj(w)); an involution."""
    return AtomicMeasure(mu.dim, -mu.locations, np.conj(mu.weights),
                         tol=mu.tol, window=mu.window.scale(-1.0),
                         provenance=mu.provenance)


def add(mu, nu):
    """Measure sum: weights at coincident locations accumulate."""
    if mu.dim != nu.dim:
        raise ValueError("dimension mismatch")
    locs = np.vstack([mu.locations, nu.locations])
    w = np.concatenate([mu.weights, nu.weights])
    window = Box.hull([mu.window, nu.window])
    return AtomicMeasure(mu.dim, locs, w, tol=max(mu.tol, nu.tol), window=window)


def convolve(mu, nu, out_window=None, pair_budget=DEFAULT_PAIR_BUDGET):
    """μ ∗ ν on atoms: atoms at x+y with weights w_x·w_y, accumulated, merged
    and clipped to out_window (default: the sum of the two windows).

    Truncation artifacts live within one max-atom-norm of the out_window
    boundary; the interior beyond that margin is exact.
    """
    if mu.dim != nu.dim:
        raise ValueError("dimension mismatch")
    if out_window is None:
        out_window = Box(mu.window.lo + nu.window.lo, mu.window.hi + nu.window.hi)
    n, m = len(mu), len(nu)
    if n * m > pair_budget:
        raise ValueError("pair budget exceeded: reduce the convolution window")
    if n == 0 or m == 0:
        return AtomicMeasure(mu.dim, np.zeros((0, mu.dim)), np.zeros(0),
                             window=out_window)
    sums, weights = [], []
    chunk = max(1, int(5e6 / m))
    for s in range(0, n, chunk):
        block = (mu.locations[s:s + chunk, None, :] + nu.locations[None, :, :]).reshape(-1, mu.dim)
        wblock = (mu.weights[s:s + chunk, None] * nu.weights[None, :]).ravel()
        keep = out_window.contains(block)
        sums.append(block[keep])
        weights.append(wblock[keep])
    locs = np.vstack(sums)
    w = np.concatenate(weights)
    tol = MERGE_TOL_FRACTION * max(1.0, out_window.diameter)
    return AtomicMeasure(mu.dim, locs, w, tol=tol, window=out_window)


def weight_by(mu, h):
    """The measure h·μ: atom (x, w) ↦ (x, h(x)·w)."""
    factors = np.array([h(x) for x in mu.locations], dtype=complex)
    if not np.all(np.isfinite(factors)):
        raise ValueError("weight function must be bounded on the support")
    return AtomicMeasure(mu.dim, mu.locations.copy(), factors * mu.weights,
                         tol=mu.tol, window=mu.window, provenance=mu.provenance)


def translation_bound(mu, k_box):
    """Windowed sup over translates of |μ|(t + K): the translation-bound
    constant for the compact box K (same scan rule as weak_ud_count)."""
    if k_box.dim != mu.dim:
        raise ValueError("k_box dimension mismatch")
    if len(mu) == 0:
        return 0.0
    return float(_max_box_aggregate(mu.locations, np.abs(mu.weights), k_box))


def restrict(mu, subgroup):
    """μ|_H: keep exactly the atoms whose location lies in the subgroup
    within its membership tolerance. Idempotent."""
    mask = subgroup.membership_mask(mu.locations)
    return AtomicMeasure(mu.dim, mu.locations[mask], mu.weights[mask],
                         tol=mu.tol, window=mu.window, provenance=mu.provenance)


def comb_as_point_set(mu, window=None):
    """Locations of the atoms as a PointSet (windowed to the measure)."""
    window = window or mu.window
    return PointSet(mu.dim, mu.locations.copy(), window,
                    generator=mu.provenance.get("generator", {"kind": "explicit"}))
