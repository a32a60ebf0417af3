"""Positive-definiteness diagnostics for discrete measures via their support
functions: Gram matrix spectra, the Krein inequality, the high-intensity
sparseness threshold, and the rigidity test for Dirac combs.

Finite evidence can refute positive definiteness but never prove it, so every
report distinguishes "refuted" (definitive, with witness) from
"consistent-with-PD" (evidence only).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, asdict

import numpy as np

from .geometry import Box, PointSet, difference_set, weak_ud_count
from .measure import AtomicMeasure, dirac_comb, translation_bound

__all__ = [
    "GramReport",
    "KreinReport",
    "SparsenessReport",
    "RigidityReport",
    "gram_psd_check",
    "krein_check",
    "sparse_threshold_b",
    "high_intensity_set",
    "sparseness_verify",
    "rigidity_check",
]

SQRT3_MINUS_1 = np.sqrt(3.0) - 1.0
THRESHOLD_GUARD = 1e-12


def _report_dict(report):
    d = asdict(report)

    def clean(v):
        if isinstance(v, np.ndarray):
            return v.tolist()
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        if isinstance(v, complex):
            return {"re": v.real, "im": v.imag}
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v

    return clean(d)


@dataclass
class GramReport:
    configs_tested: int
    min_eigenvalue: float
    hermitian_violation: dict | None
    refuted: bool
    verdict: str  # "consistent-with-PD" | "refuted"
    witness: dict = field(default_factory=dict)

    def to_dict(self):
        return _report_dict(self)


@dataclass
class KreinReport:
    pairs_tested: int
    max_violation: float
    worst_pair: dict | None
    verdict: str  # "pass" | "refuted"
    flags: list = field(default_factory=list)

    def to_dict(self):
        return _report_dict(self)


@dataclass
class SparsenessReport:
    a: float
    mu0: float
    b: float
    threshold: float
    hypothesis_met: bool
    high_set_size: int
    floor_set_size: int
    translation_bound: float
    count_bound: float
    measured_max_count: int
    containment_ok: bool
    verdict: str  # "pass" | "fail" | "hypothesis-unmet"
    witness: dict = field(default_factory=dict)

    def to_dict(self):
        return _report_dict(self)


@dataclass
class RigidityReport:
    gram: GramReport
    zero_included: bool
    closed_under_difference: bool
    subgroup_ok: bool
    agree: bool
    verdict: str  # "pass" | "fail"
    witness: dict = field(default_factory=dict)

    def to_dict(self):
        d = _report_dict(self)
        d["gram"] = self.gram.to_dict()
        return d


# ---------------------------------------------------------------------------
# Gram matrices of the support function
# ---------------------------------------------------------------------------

def _default_region(mu):
    """Safe sampling region: configuration differences and translates must
    stay inside the measure window, or truncation zeros masquerade as
    refutations. Use half of the symmetrized window when available."""
    w = mu.window
    lo = np.maximum(w.lo, -w.hi)
    hi = np.minimum(w.hi, -w.lo)
    if np.all(lo < hi):
        return Box(lo / 2.0, hi / 2.0)
    c = w.center
    return Box(c - w.sides / 4.0, c + w.sides / 4.0)


def _build_configs(mu, count, size, region, rng):
    """Configuration tuples for Gram testing.

    Random tuples alone almost surely give all-zero matrices off the support,
    so half the tuples are drawn from the atom locations and all pairs/triples
    of a small seeded candidate pool (atoms + region points) are added.
    """
    size = min(size, 64)
    configs = []
    n_random = max(1, count // 2)
    for _ in range(n_random):
        configs.append(rng.uniform(region.lo, region.hi, size=(size, region.dim)))
    atoms = mu.locations[region.contains(mu.locations)] if len(mu) else mu.locations
    if len(atoms):
        n_atom = max(1, count - n_random)
        for _ in range(n_atom):
            idx = rng.integers(0, len(atoms), size=min(size, len(atoms)))
            configs.append(atoms[idx])
    pool = [np.zeros(region.dim)]  # the origin pairs atoms against f(0)
    if len(atoms):
        # atoms nearest the origin interleave the generating structure, which
        # is where subgroup-closure refutations live
        order = np.argsort(np.linalg.norm(atoms, axis=1), kind="stable")
        pool.extend(atoms[order[:10]])
    pool.extend(rng.uniform(region.lo, region.hi, size=(4, region.dim)))
    pool = np.asarray(pool)
    for r in (2, 3):
        for combo in itertools.combinations(range(len(pool)), r):
            configs.append(pool[list(combo)])
    return configs


def gram_psd_check(mu, configs=None, eps_psd=1e-9, seed=0):
    """Test positive definiteness of the support function f(x) = μ({x}) on
    sampled configurations.

    Builds matrices (f(x_k − x_l)) and checks Hermitian symmetry, then that
    all eigenvalues are ≥ −eps_psd·‖matrix‖ (max-row-sum norm estimate).
    `configs` is either a list of (N, d) arrays or a tuple
    (count, size, region) for the built-in sampler.
    """
    rng = np.random.default_rng(seed)
    if configs is None:
        configs = (40, 6, _default_region(mu))
    if isinstance(configs, tuple):
        count, size, region = configs
        configs = _build_configs(mu, count, size, region or _default_region(mu), rng)

    min_eig = np.inf
    herm_witness = None
    witness = {}
    refuted = False
    for cfg in configs:
        cfg = np.atleast_2d(np.asarray(cfg, dtype=float))
        N = len(cfg)
        if N > 64:
            raise ValueError("configuration size capped at 64")
        diffs = (cfg[:, None, :] - cfg[None, :, :]).reshape(-1, cfg.shape[1])
        F = mu.values_at(diffs).reshape(N, N)
        scale = max(1.0, float(np.abs(F).max()))
        asym = np.abs(F - F.conj().T)
        if asym.max() > 1e-9 * scale:
            k, l = np.unravel_index(np.argmax(asym), asym.shape)
            z = cfg[k] - cfg[l]
            herm_witness = {
                "x": z.tolist(),
                "f_x": {"re": F[k, l].real, "im": F[k, l].imag},
                "f_neg_x": {"re": F[l, k].real, "im": F[l, k].imag},
            }
            refuted = True
            break
        H = (F + F.conj().T) / 2.0
        norm = max(float(np.abs(H).sum(axis=1).max()), 1e-30)
        eigs = np.linalg.eigvalsh(H)
        lo = float(eigs.min())
        min_eig = min(min_eig, lo / norm)
        if lo < -eps_psd * norm:
            refuted = True
            witness = {
                "configuration": cfg.tolist(),
                "matrix_re": H.real.tolist(),
                "matrix_im": H.imag.tolist(),
                "min_eigenvalue": lo,
            }
            break
    return GramReport(
        configs_tested=len(configs),
        min_eigenvalue=float(min_eig) if np.isfinite(min_eig) else 0.0,
        hermitian_violation=herm_witness,
        refuted=refuted,
        verdict="refuted" if refuted else "consistent-with-PD",
        witness=witness,
    )


# ---------------------------------------------------------------------------
# Krein inequality
# ---------------------------------------------------------------------------

def _krein_pairs(mu, count, region, rng):
    """Sampled (x, t) pairs biased onto the support: x from atoms with t an
    atom difference (so x+t lands on the support), plus atom and uniform
    pairs; (0, atom) pairs are always included since they catch
    f(0) ≥ |f(t)| violations. Pairs are then restricted to the safe interior:
    x, t and x+t all inside the window, where truncation cannot fake a
    violation."""
    xs, ts = [], []
    zero = np.zeros(mu.dim)
    locs = mu.locations
    if len(locs):
        for loc in locs[: min(len(locs), 200)]:
            xs.append(zero)
            ts.append(loc)
        n = len(locs)
        idx = rng.integers(0, n, size=(count, 2))
        for i, j in idx:
            xs.append(locs[i])
            ts.append(locs[j] - locs[i])
        idx2 = rng.integers(0, n, size=(max(1, count // 2), 2))
        for i, j in idx2:
            xs.append(locs[i])
            ts.append(locs[j])
    for _ in range(max(4, count // 4)):
        xs.append(rng.uniform(region.lo, region.hi))
        ts.append(rng.uniform(region.lo, region.hi))
    xs, ts = np.asarray(xs), np.asarray(ts)
    w = mu.window
    keep = w.contains(xs) & w.contains(ts) & w.contains(xs + ts)
    return xs[keep], ts[keep]


def krein_check(mu, pairs=None, tol=1e-9, seed=0):
    """Krein inequality for the support function of a discrete measure:

        |f(x+t) − f(x)|² ≤ 2 f(0) [f(0) − Re f(t)]

    over sampled pairs, plus the bound f(0) ≥ |f(x)| on the atoms. The
    reported violation is the max slack; pass iff it is ≤ tol·f(0)².
    """
    rng = np.random.default_rng(seed)
    f0 = mu.value_at(np.zeros(mu.dim))
    flags = []
    scale = max(1.0, float(np.abs(mu.weights).max())) if len(mu) else 1.0
    if abs(f0.imag) > 1e-12 * scale or f0.real < -1e-12 * scale:
        flags.append("mass-at-origin-not-positive")
    f0r = f0.real

    if len(mu) and abs(f0) <= 1e-15 * scale:
        worst_i = int(np.argmax(np.abs(mu.weights)))
        return KreinReport(
            pairs_tested=0,
            max_violation=float(np.abs(mu.weights[worst_i]) ** 2),
            worst_pair={"x": mu.locations[worst_i].tolist(), "t": None,
                        "reason": "zero mass at origin with nonzero atom"},
            verdict="refuted",
            flags=flags + ["krein-refutes-pd"],
        )

    if pairs is None:
        pairs = (200, mu.window)
    if isinstance(pairs, tuple):
        count, region = pairs
        xs, ts = _krein_pairs(mu, count, region or mu.window, rng)
    else:
        xs, ts = pairs

    if len(xs) == 0:
        return KreinReport(0, 0.0, None, "pass", flags)

    fx = mu.values_at(xs)
    ft = mu.values_at(ts)
    fxt = mu.values_at(xs + ts)
    slack = np.abs(fxt - fx) ** 2 - 2.0 * f0r * (f0r - ft.real)
    worst = int(np.argmax(slack))
    max_violation = float(slack[worst])
    threshold = tol * max(f0r * f0r, 1e-30)
    verdict = "pass" if max_violation <= threshold else "refuted"
    worst_pair = {
        "x": xs[worst].tolist(),
        "t": ts[worst].tolist(),
        "violation": max_violation,
    }
    return KreinReport(
        pairs_tested=len(xs),
        max_violation=max_violation,
        worst_pair=worst_pair,
        verdict=verdict,
        flags=flags,
    )


# ---------------------------------------------------------------------------
# sparseness of high-intensity sets
# ---------------------------------------------------------------------------

def sparse_threshold_b(a, mu0):
    """The floor b = a − √(2·μ₀·(μ₀ − a)) under which all differences of
    a-heavy points stay heavy; positive exactly when a > (√3−1)·μ₀."""
    if not 0 < a <= mu0:
        raise ValueError("need 0 < a <= mu0 (Krein forces atom masses <= the mass at 0)")
    return float(a - np.sqrt(2.0 * mu0 * (mu0 - a)))


def high_intensity_set(mu, a):
    """Locations with μ({x}) ≥ a, as a PointSet windowed to the measure.

    Requires a positive measure and a > 0.
    """
    if a <= 0:
        raise ValueError("threshold a must be positive")
    if not mu.is_positive():
        raise ValueError("requires positive measure")
    w = mu.weights.real
    guard = 1e-12 * max(1.0, float(np.abs(w).max())) if len(w) else 0.0
    keep = w >= a - guard
    return PointSet(mu.dim, mu.locations[keep], mu.window,
                    generator={"kind": "explicit"})


def sparseness_verify(mu, a, k_box):
    """Windowed check that differences of a-heavy points are weakly uniformly
    discrete, with the explicit count bound C/b.

    Builds I = {μ ≥ a}, b, J = {μ ≥ b}, C = translation bound of μ on k_box;
    verifies (I−I) ∩ window ⊆ J and that the scanned max count of I−I points
    per k_box translate is ≤ C/b. If a is at or below (√3−1)·μ({0}) the
    hypothesis is unmet and the numbers are reported as informational only.
    """
    mu0 = mu.value_at(np.zeros(mu.dim)).real
    threshold = SQRT3_MINUS_1 * mu0
    hypothesis_met = a - threshold > THRESHOLD_GUARD * max(1.0, mu0)
    b = sparse_threshold_b(a, mu0)
    I = high_intensity_set(mu, a)
    J = high_intensity_set(mu, b) if b > 0 else None

    diffs = difference_set(I, mu.window)
    containment_ok = True
    witness = {}
    if b > 0 and len(diffs):
        if J is None or len(J) == 0:
            containment_ok = False
        else:
            d, _ = J.tree().query(diffs.points, k=1)
            bad = d > max(diffs.merge_tol, J.merge_tol)
            if np.any(bad):
                containment_ok = False
                witness["difference_outside_floor_set"] = diffs.points[bad][0].tolist()

    C = translation_bound(mu, k_box)
    count = weak_ud_count(diffs, k_box) if len(diffs) else 0
    bound = C / b if b > 0 else float("inf")

    if not hypothesis_met:
        verdict = "hypothesis-unmet"
    elif containment_ok and count <= bound + 1e-9:
        verdict = "pass"
    else:
        verdict = "fail"
        witness.setdefault("measured_max_count", count)
    return SparsenessReport(
        a=float(a),
        mu0=float(mu0),
        b=float(b),
        threshold=float(threshold),
        hypothesis_met=bool(hypothesis_met),
        high_set_size=len(I),
        floor_set_size=len(J) if J is not None else len(mu),
        translation_bound=float(C),
        count_bound=float(bound),
        measured_max_count=int(count),
        containment_ok=bool(containment_ok),
        verdict=verdict,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# rigidity of Dirac combs
# ---------------------------------------------------------------------------

def rigidity_check(ps, configs=None, seed=0):
    """A weakly uniformly discrete set has a positive definite Dirac comb iff
    it is a discrete subgroup; test both sides on the windowed realization.

    Gram route: gram_psd_check on the comb (configs biased onto points).
    Subgroup route: 0 ∈ Λ and Λ−Λ ⊆ Λ for all differences landing inside the
    window (the safe interior for membership checks). Disagreement between
    the two verdicts is a defect and is surfaced as failure.
    """
    comb = dirac_comb(ps)
    configs = configs or (40, 5, None)  # None region -> safe half-window
    gram = gram_psd_check(comb, configs=configs, seed=seed)

    witness = {}
    if len(ps) == 0:
        zero_in, closed = False, True
    else:
        zero_in = ps.contains_point(np.zeros(ps.dim))
        diffs = difference_set(ps, ps.window)
        d, _ = ps.tree().query(diffs.points, k=1)
        bad = d > max(ps.merge_tol, diffs.merge_tol)
        closed = not np.any(bad)
        if not closed:
            witness["difference_not_in_set"] = diffs.points[bad][0].tolist()
    if not zero_in:
        witness["zero_missing"] = True
    subgroup_ok = zero_in and closed

    agree = subgroup_ok == (not gram.refuted)
    if not agree:
        witness["verdict_disagreement"] = {
            "gram_refuted": gram.refuted,
            "subgroup_ok": subgroup_ok,
        }
    verdict = "pass" if (agree and subgroup_ok) else "fail"
    return RigidityReport(
        gram=gram,
        zero_included=bool(zero_in),
        closed_under_difference=bool(closed),
        subgroup_ok=bool(subgroup_ok),
        agree=bool(agree),
        verdict=verdict,
        witness=witness,
    )
