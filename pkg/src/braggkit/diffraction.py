"""Finite-volume diffraction pipeline: autocorrelations over van Hove box
families, averaged exponential sums, Bragg intensity estimation, visible
Bragg sets and the Meyer-property check for high-intensity peak sets."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .geometry import (
    Box,
    PointSet,
    VanHoveFamily,
    MeyerReport,
    merge_close_rows,
    meyer_check,
)
from .measure import AtomicMeasure
from .posdef import SQRT3_MINUS_1

__all__ = [
    "AutocorrelationTrace",
    "BraggPeak",
    "DiffractionEstimate",
    "BraggMeyerReport",
    "autocorrelation",
    "autocorrelation_trace",
    "exp_sum",
    "exp_sums",
    "bragg_intensity",
    "autocorr_ft_identity_check",
    "candidate_frequencies",
    "visible_bragg_set",
    "estimate_diffraction",
    "bragg_meyer_check",
]

DEFAULT_PAIR_BUDGET = 10**8


def _thread_count():
    try:
        return max(1, int(os.environ.get("BRAGG_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# autocorrelation
# ---------------------------------------------------------------------------

def autocorrelation(omega, box, pair_budget=DEFAULT_PAIR_BUDGET):
    """Finite-volume autocorrelation: atoms at differences x − y of the
    restriction of ω to the box, weights w(x)·conj(w(y)) / |box|.

    Exactly the box-restricted comb convolved with its reflection,
    volume-normalized. Hermitian by construction; nonnegative weights in →
    nonnegative weights out.
    """
    sub = omega.restrict_to_box(box)
    n = len(sub)
    vol = box.volume
    out_window = Box(box.lo - box.hi, box.hi - box.lo)
    if n == 0:
        return AtomicMeasure(omega.dim, np.zeros((0, omega.dim)), np.zeros(0),
                             window=out_window)
    if n * n > pair_budget:
        raise ValueError("pair budget exceeded: reduce the box")
    locs, weights = [], []
    chunk = max(1, int(5e6 / n))
    for s in range(0, n, chunk):
        block = (sub.locations[s:s + chunk, None, :] - sub.locations[None, :, :]).reshape(-1, omega.dim)
        wblock = (sub.weights[s:s + chunk, None] * np.conj(sub.weights[None, :])).ravel()
        locs.append(block)
        weights.append(wblock)
    locs = np.vstack(locs)
    w = np.concatenate(weights) / vol
    tol = 1e-9 * max(1.0, out_window.diameter)
    return AtomicMeasure(omega.dim, locs, w, tol=tol, window=out_window,
                         provenance=dict(omega.provenance))


@dataclass(eq=False)
class AutocorrelationTrace:
    """Per-scale autocorrelations with per-atom Cauchy-style convergence
    evidence: an atom is marked converged when its last step changed by at
    most eps_atom. Never claims a limit."""

    family: VanHoveFamily
    gammas: list
    compare_window: Box
    locations: np.ndarray
    values: np.ndarray        # (n_scales, n_atoms) complex
    deltas: np.ndarray        # (n_scales-1, n_atoms) absolute steps
    eps_atom: float
    converged: np.ndarray     # (n_atoms,) bool

    def all_converged(self):
        return bool(np.all(self.converged))


def autocorrelation_trace(omega, family, eps_atom, compare_window=None,
                          pair_budget=DEFAULT_PAIR_BUDGET):
    """Autocorrelations along the family with per-atom convergence deltas.

    Atoms are compared inside `compare_window` (default: the smallest family
    box), where every scale realizes them without truncation.
    """
    if len(family) < 3:
        raise ValueError("need at least 3 family indices")
    gammas = [autocorrelation(omega, family.box(i), pair_budget) for i in range(len(family))]
    if compare_window is None:
        compare_window = family.box(0)
    last = gammas[-1].restrict_to_box(compare_window)
    locations = last.locations
    values = np.stack([g.values_at(locations) for g in gammas]) if len(locations) else np.zeros((len(gammas), 0), dtype=complex)
    deltas = np.abs(np.diff(values, axis=0)) if len(locations) else np.zeros((len(gammas) - 1, 0))
    converged = deltas[-1] <= eps_atom if len(locations) else np.zeros(0, dtype=bool)
    return AutocorrelationTrace(
        family=family,
        gammas=gammas,
        compare_window=compare_window,
        locations=locations,
        values=values,
        deltas=deltas,
        eps_atom=float(eps_atom),
        converged=converged,
    )


# ---------------------------------------------------------------------------
# exponential sums and Bragg intensities
# ---------------------------------------------------------------------------

def exp_sum(omega, k, box):
    """Volume-averaged character sum (1/|box|) Σ w(x)·e^{−2πi k·x} over the
    atoms of ω inside the box."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return complex(exp_sums(omega, k[None, :], box)[0])


def _exp_sum_block(ks, locs, w, vol):
    phase = np.exp(-2j * np.pi * (ks @ locs.T))
    return (phase @ w) / vol


def exp_sums(omega, ks, box):
    """Vectorized exp_sum over an (m, d) frequency array.

    Frequency chunks are independent; BRAGG_THREADS > 1 evaluates them on a
    thread pool with a fixed chunk grid, so results are deterministic.
    """
    ks = np.atleast_2d(np.asarray(ks, dtype=float))
    sub = omega.restrict_to_box(box)
    vol = box.volume
    if len(sub) == 0 or len(ks) == 0:
        return np.zeros(len(ks), dtype=complex)
    chunk = max(1, int(4e6 / max(1, len(sub))))
    blocks = [(s, min(s + chunk, len(ks))) for s in range(0, len(ks), chunk)]
    workers = _thread_count()
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda se: _exp_sum_block(ks[se[0]:se[1]], sub.locations, sub.weights, vol),
                blocks))
    else:
        parts = [_exp_sum_block(ks[s:e], sub.locations, sub.weights, vol) for s, e in blocks]
    return np.concatenate(parts)


@dataclass
class BraggPeak:
    """Intensity estimate |averaged exponential sum|² at one frequency, with
    its per-scale trace. stderr_proxy is the max step among the last two."""

    frequency: list
    intensity: float
    trace: list
    stderr_proxy: float

    def to_dict(self):
        return asdict(self)


def _intensity_traces(omega, ks, family):
    """(n_scales, m) intensity estimates for all frequencies."""
    return np.stack([np.abs(exp_sums(omega, ks, family.box(i))) ** 2
                     for i in range(len(family))])


def _stderr_proxy(trace):
    deltas = np.abs(np.diff(trace, axis=0))
    if len(deltas) == 0:
        return np.zeros(trace.shape[1])
    return deltas[-2:].max(axis=0)


def bragg_intensity(omega, k, family):
    """Bragg intensity estimate at frequency k: last-scale squared modulus of
    the averaged exponential sum, with the whole trace attached."""
    if len(family) < 2:
        raise ValueError("need at least 2 family indices")
    k = np.atleast_1d(np.asarray(k, dtype=float))
    traces = _intensity_traces(omega, k[None, :], family)
    return BraggPeak(
        frequency=k.tolist(),
        intensity=float(traces[-1, 0]),
        trace=[float(v) for v in traces[:, 0]],
        stderr_proxy=float(_stderr_proxy(traces)[0]),
    )


def autocorr_ft_identity_check(omega, k, box, pair_budget=DEFAULT_PAIR_BUDGET):
    """Internal consistency between the two estimators: the relative
    difference between |box|·|exp_sum(k)|² and the character sum
    Σ_z γ({z})·e^{−2πi k·z} against the finite-volume autocorrelation.
    Contract: ≤ 1e-9."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    vol = box.volume
    lhs = vol * abs(exp_sum(omega, k, box)) ** 2
    gamma = autocorrelation(omega, box, pair_budget)
    phases = np.exp(-2j * np.pi * (gamma.locations @ k))
    rhs = complex(np.sum(gamma.weights * phases))
    denom = max(abs(lhs), abs(rhs), 1e-30)
    return abs(lhs - rhs) / denom


# ---------------------------------------------------------------------------
# frequency candidates
# ---------------------------------------------------------------------------

def _dual_basis(basis):
    return np.linalg.inv(np.asarray(basis, dtype=float).T)


def _lattice_dual_candidates(basis, dual_window):
    from .geometry import generate_lattice
    ps = generate_lattice(_dual_basis(basis), dual_window)
    return ps.points


def _model_set_dual_candidates(embedding, dual_window, internal_bound):
    """Physical projections of dual-lattice points with bounded internal
    component; peaks at large internal norm carry negligible intensity."""
    from .geometry import _integer_candidates
    dual = _dual_basis(embedding)
    search = Box(
        np.array([dual_window.lo[0], -internal_bound]),
        np.array([dual_window.hi[0], internal_bound]),
    )
    ints = _integer_candidates(dual, search)
    pts = ints @ dual.T
    keep = (np.abs(pts[:, 1]) <= internal_bound) & dual_window.contains(pts[:, :1])
    return np.unique(pts[keep, 0])[:, None]


def _golden_section_max(f, lo, hi, iters=40):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _refine_peak(omega, box, k0, radius, iters=40):
    k = np.array(k0, dtype=float)
    for axis in range(len(k)):
        def line(v):
            kk = k.copy()
            kk[axis] = v
            return abs(exp_sum(omega, kk, box)) ** 2
        k[axis] = _golden_section_max(line, k[axis] - radius, k[axis] + radius, iters)
    return k


def _grid_candidates(omega, dual_window, grid_res, box, floor_frac=0.05,
                     refine_iters=40):
    from .geometry import _grid_nodes
    nodes = _grid_nodes(dual_window, grid_res)
    intensities = np.abs(exp_sums(omega, nodes, box)) ** 2
    i0 = abs(exp_sum(omega, np.zeros(dual_window.dim), box)) ** 2
    floor = floor_frac * max(i0, 1e-30)
    seeds = nodes[intensities >= floor]
    refined = [
        _refine_peak(omega, box, s, grid_res, refine_iters) for s in seeds
    ]
    pts = np.asarray(refined) if refined else np.zeros((0, dual_window.dim))
    pts = np.vstack([pts, np.zeros((1, dual_window.dim))])
    reps, _ = merge_close_rows(pts, grid_res / 2.0)
    return reps[dual_window.contains(reps)]


def candidate_frequencies(generator, dual_window, grid_res, omega=None,
                          box=None, internal_bound=3.0):
    """Frequencies worth probing for Bragg peaks inside the dual window.

    Lattice generators give the dual lattice, cut-and-project generators the
    projected dual lattice (internal component bounded), compositions the
    union/rescaling of their parts' candidates. Anything else falls back to a
    uniform grid scan of |exp_sum|² refined by coordinate-wise golden-section
    ascent, which needs `omega` and a sampling `box`.
    """
    if grid_res <= 0:
        raise ValueError("grid_res must be positive")
    kind = (generator or {}).get("kind", "explicit")
    if kind == "lattice":
        return _lattice_dual_candidates(generator["basis"], dual_window)
    if kind == "model_set":
        return _model_set_dual_candidates(np.asarray(generator["embedding"]),
                                          dual_window, internal_bound)
    if kind == "translate":
        return candidate_frequencies(generator["part"], dual_window, grid_res,
                                     omega, box, internal_bound)
    if kind == "scale":
        c = float(generator["c"])
        inner = candidate_frequencies(generator["part"], dual_window.scale(c),
                                      grid_res * abs(c), omega, box, internal_bound)
        pts = inner / c
        return pts[dual_window.contains(pts)]
    if kind == "union":
        parts = [candidate_frequencies(g, dual_window, grid_res, omega, box,
                                       internal_bound) for g in generator["parts"]]
        pts = np.vstack([p for p in parts if len(p)])
        reps, _ = merge_close_rows(pts, grid_res / 10.0)
        return reps
    if omega is None or box is None:
        raise ValueError("grid candidate search needs omega and a sampling box")
    return _grid_candidates(omega, dual_window, grid_res, box)


# ---------------------------------------------------------------------------
# visible Bragg sets
# ---------------------------------------------------------------------------

@dataclass
class DiffractionEstimate:
    """Estimated Bragg spectrum: one peak per candidate frequency plus the
    zero-frequency intensity. Peak intensities never exceed the mass at zero
    beyond estimator noise."""

    peaks: list
    gamma0: float
    family: dict
    window: dict

    def to_dict(self):
        return {
            "peaks": [p.to_dict() for p in self.peaks],
            "gamma0": self.gamma0,
            "family": self.family,
            "window": self.window,
        }


def estimate_diffraction(omega, candidates, family):
    """Bragg peaks at all candidate frequencies, sorted by frequency."""
    ks = np.atleast_2d(np.asarray(candidates, dtype=float))
    if len(ks):
        order = np.lexsort(ks.T[::-1])
        ks = ks[order]
    traces = _intensity_traces(omega, ks, family) if len(ks) else np.zeros((len(family), 0))
    proxies = _stderr_proxy(traces) if len(ks) else np.zeros(0)
    peaks = [
        BraggPeak(frequency=ks[i].tolist(),
                  intensity=float(traces[-1, i]),
                  trace=[float(v) for v in traces[:, i]],
                  stderr_proxy=float(proxies[i]))
        for i in range(len(ks))
    ]
    zero = bragg_intensity(omega, np.zeros(omega.dim), family)
    return DiffractionEstimate(
        peaks=peaks,
        gamma0=zero.intensity,
        family=family.to_dict(),
        window=omega.window.to_dict(),
    )


def visible_bragg_set(omega, a, candidates, family, dual_window):
    """Frequencies whose estimated intensity is ≥ a, as a PointSet in dual
    space. A mass-at-zero guard empties the result when a exceeds the
    estimated γ̂({0}) (no atom of a positive diffraction can)."""
    if a <= 0:
        raise ValueError("threshold a must be positive")
    ks = np.atleast_2d(np.asarray(candidates, dtype=float))
    gamma0 = bragg_intensity(omega, np.zeros(omega.dim), family).intensity
    if len(ks) == 0 or a > gamma0 * (1.0 + 1e-9):
        return PointSet(dual_window.dim, np.zeros((0, dual_window.dim)), dual_window)
    traces = _intensity_traces(omega, ks, family)
    intensity = traces[-1]
    guard = 1e-12 * max(1.0, float(intensity.max()))
    keep = intensity >= a - guard
    return PointSet(dual_window.dim, ks[keep], dual_window,
                    generator={"kind": "explicit"})


# ---------------------------------------------------------------------------
# Meyer property of high-intensity Bragg sets
# ---------------------------------------------------------------------------

@dataclass
class BraggMeyerReport:
    """Evidence that the a-visible Bragg set is Meyer, across dual window
    scales, together with the high-intensity hypothesis check against
    (√3−1)·γ̂({0}) and the monotone nesting of visible sets."""

    a: float
    gamma0: float
    gamma0_stderr: float
    threshold: float
    hypothesis: str           # "met" | "unmet" | "inconclusive"
    meyer: MeyerReport | None
    nesting_levels: list
    nesting_ok: bool
    verdict: str              # "pass" | "fail" | "inconclusive" | "hypothesis-unmet"

    def to_dict(self):
        d = {
            "a": self.a,
            "gamma0": self.gamma0,
            "gamma0_stderr": self.gamma0_stderr,
            "threshold": self.threshold,
            "hypothesis": self.hypothesis,
            "meyer": self.meyer.to_dict() if self.meyer else None,
            "nesting_levels": self.nesting_levels,
            "nesting_ok": self.nesting_ok,
            "verdict": self.verdict,
        }
        return d


def bragg_meyer_check(omega, a, family, dual_windows, k_box, grid_res=0.01,
                      internal_bound=3.0, sample_density=16.0, n_nesting=5,
                      guard=1e-6):
    """Check that the a-visible Bragg set of a positive comb is Meyer.

    Requires a > (√3−1)·γ̂({0}) with the zero intensity estimated on the same
    family; the estimator stderr widens the threshold into a guard band and a
    borderline a is reported inconclusive, never passed. The visible set is
    realized per dual window scale and fed to meyer_check; nesting
    I(a) ⊆ I(b) is verified on a grid of admissible b.
    """
    if not omega.is_positive():
        raise ValueError("requires a positive measure")
    zero_peak = bragg_intensity(omega, np.zeros(omega.dim), family)
    gamma0, se0 = zero_peak.intensity, zero_peak.stderr_proxy
    threshold = SQRT3_MINUS_1 * gamma0
    thr_hi = SQRT3_MINUS_1 * (gamma0 + se0) + guard * gamma0
    thr_lo = max(0.0, SQRT3_MINUS_1 * (gamma0 - se0) - guard * gamma0)
    if a > thr_hi:
        hypothesis = "met"
    elif a <= thr_lo:
        hypothesis = "unmet"
    else:
        hypothesis = "inconclusive"

    generator = omega.provenance.get("generator")
    sampling_box = family.box(len(family) - 1)

    def realizer(win):
        ks = candidate_frequencies(generator, win, grid_res, omega=omega,
                                   box=sampling_box, internal_bound=internal_bound)
        return visible_bragg_set(omega, a, ks, family, win)

    if hypothesis != "met":
        return BraggMeyerReport(
            a=float(a), gamma0=float(gamma0), gamma0_stderr=float(se0),
            threshold=float(threshold), hypothesis=hypothesis, meyer=None,
            nesting_levels=[], nesting_ok=False,
            verdict="hypothesis-unmet" if hypothesis == "unmet" else "inconclusive",
        )

    meyer = meyer_check(realizer, dual_windows, k_box, sample_density)

    largest = dual_windows[-1]
    ks = candidate_frequencies(generator, largest, grid_res, omega=omega,
                               box=sampling_box, internal_bound=internal_bound)
    set_a = visible_bragg_set(omega, a, ks, family, largest)
    bs = threshold + (a - threshold) * np.linspace(0.2, 1.0, n_nesting)
    nesting_ok = True
    levels = []
    for b in bs:
        set_b = visible_bragg_set(omega, float(b), ks, family, largest)
        ok = len(set_a) == 0 or (
            len(set_b) > 0
            and bool(np.all(set_b.tree().query(set_a.points, k=1)[0] <= set_b.merge_tol))
        )
        levels.append({"b": float(b), "size": len(set_b), "contains_I_a": ok})
        nesting_ok = nesting_ok and ok

    verdict = meyer.verdict if nesting_ok else "fail"
    return BraggMeyerReport(
        a=float(a), gamma0=float(gamma0), gamma0_stderr=float(se0),
        threshold=float(threshold), hypothesis=hypothesis, meyer=meyer,
        nesting_levels=levels, nesting_ok=nesting_ok, verdict=verdict,
    )
