"""Command-line front end: generators, diffraction runs, property reports and
reproduction bundles for the built-in example configurations.

Exit codes: 0 pass, 1 fail, 2 inconclusive / hypothesis unmet, 3 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .geometry import (
    Box,
    PointSet,
    VanHoveFamily,
    covering_radius,
    difference_set,
    fibonacci_model_set,
    generate_lattice,
    generate_model_set,
    compose,
    meyer_check,
    realize,
    weak_ud_count,
)
from .measure import AtomicMeasure, add, dirac_comb
from .posdef import high_intensity_set, krein_check, rigidity_check, sparseness_verify
from .diffraction import (
    bragg_meyer_check,
    candidate_frequencies,
    estimate_diffraction,
    autocorrelation,
    visible_bragg_set,
)
from .dualsets import dual_witness_check, eps_dual, eps_dual_back

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_ERROR = 3

_VERDICT_EXIT = {
    "pass": EXIT_PASS,
    "consistent-with-PD": EXIT_PASS,
    "fail": EXIT_FAIL,
    "refuted": EXIT_FAIL,
    "inconclusive": EXIT_INCONCLUSIVE,
    "hypothesis-unmet": EXIT_INCONCLUSIVE,
}


@dataclass
class RunConfig:
    """Everything that determines a run; identical configs (same seed) give
    byte-identical reports."""

    command: str
    seed: int = 0
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _parse_box(values):
    vals = [float(v) for v in values]
    if len(vals) % 2:
        raise ValueError("window takes pairs of lo hi per axis")
    lo = vals[0::2]
    hi = vals[1::2]
    return Box(lo, hi)


def _parse_matrix(text):
    rows = [[float(v) for v in row.split()] for row in text.split(";")]
    return np.asarray(rows, dtype=float)


def _load_input(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "atoms" in data:
        return AtomicMeasure.from_dict(data)
    return PointSet.from_dict(data)


def _as_measure(obj):
    if isinstance(obj, AtomicMeasure):
        return obj
    return dirac_comb(obj)


def _fit_halfwidth(window):
    half = min(min(-window.lo), min(window.hi))
    if half <= 0:
        raise ValueError("input window must contain 0 for a centered family; "
                         "regenerate with a centered window")
    return float(half)


# ---------------------------------------------------------------------------
# built-in example configurations
# ---------------------------------------------------------------------------

def case_zpz_measure(halfwidth):
    """Sum of the unit-integer comb and the π-integer comb (mass 2 at 0)."""
    win = Box.cube(halfwidth, 1)
    z = generate_lattice([[1.0]], win)
    pz = generate_lattice([[np.pi]], win)
    mu = add(dirac_comb(z), dirac_comb(pz))
    mu.provenance = {"generator": {"kind": "union",
                                   "parts": [z.generator, pz.generator]}}
    return mu


def case_union2d_set(halfwidth):
    """ℤ² together with the (1/2, 0)-shifted ℤ×πℤ lattice."""
    win = Box.cube(halfwidth, 2)
    a = generate_lattice(np.eye(2), win)
    b = generate_lattice(np.diag([1.0, np.pi]), win.translate([-0.5, 0.0]))
    b = compose("translate", [b], v=[0.5, 0.0])
    return compose("union", [a, b])


def case_fibonacci_set(window):
    return fibonacci_model_set(window)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args):
    if args.example:
        if args.example == "zpz":
            half = _fit_halfwidth(_parse_box(args.window)) if args.window else 20.0
            case_zpz_measure(half).to_json(args.out)
        elif args.example == "union2d":
            half = _fit_halfwidth(_parse_box(args.window)) if args.window else 12.0
            case_union2d_set(half).to_json(args.out)
        elif args.example == "fibonacci":
            win = _parse_box(args.window) if args.window else Box.cube(50.0, 1)
            case_fibonacci_set(win).to_json(args.out)
        else:
            raise ValueError(f"unknown example {args.example!r}")
        print(f"wrote {args.out}")
        return EXIT_PASS
    window = _parse_box(args.window)
    if args.lattice:
        ps = generate_lattice(_parse_matrix(args.lattice), window)
    elif args.fibonacci:
        ps = fibonacci_model_set(window)
    elif args.model_set:
        emb = _parse_matrix(args.model_set)
        ps = generate_model_set(emb, tuple(args.internal), window)
    else:
        raise ValueError("choose a generator: --lattice, --fibonacci, "
                         "--model-set or --example")
    ps.to_json(args.out)
    if args.csv:
        ps.to_csv(args.csv)
    print(f"wrote {args.out} ({len(ps)} points)")
    return EXIT_PASS


def cmd_diffract(args):
    obj = _load_input(args.input)
    omega = _as_measure(obj)
    half = _fit_halfwidth(omega.window)
    family = VanHoveFamily.parse(args.family, omega.dim, half)
    dual_window = _parse_box(args.dual_window)
    generator = omega.provenance.get("generator")
    ks = candidate_frequencies(generator, dual_window, args.grid, omega=omega,
                               box=family.box(len(family) - 1))
    estimate = estimate_diffraction(omega, ks, family)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        cols = [f"k{i}" for i in range(omega.dim)]
        fh.write(",".join(cols) + ",intensity,stderr_proxy,converged\n")
        for p in estimate.peaks:
            conv = p.stderr_proxy <= args.conv_tol
            row = [repr(float(v)) for v in p.frequency]
            row += [repr(p.intensity), repr(p.stderr_proxy), str(int(conv))]
            fh.write(",".join(row) + "\n")
    if args.report:
        config = RunConfig("diffract", args.seed,
                           inputs={"input": args.input,
                                   "family": args.family,
                                   "dual_window": dual_window.to_dict(),
                                   "grid": args.grid},
                           outputs={"out": str(out)},
                           tolerances={"conv_tol": args.conv_tol})
        _write_json(args.report, {"config": config.to_dict(),
                                  "estimate": estimate.to_dict()})
    if args.autocorr:
        gamma = autocorrelation(omega, family.box(len(family) - 1))
        gamma.to_json(args.autocorr)
    print(f"wrote {out} ({len(estimate.peaks)} peaks, gamma0={estimate.gamma0:.6g})")
    return EXIT_PASS


def cmd_meyer(args):
    ps = _load_input(args.input)
    if isinstance(ps, AtomicMeasure):
        raise ValueError("meyer takes a point set input")
    scales = [Box.cube(s, ps.dim) for s in args.scales]
    k_box = _parse_box(args.kbox) if args.kbox else Box.cube(0.5, ps.dim, center=0.5)
    report = meyer_check(ps, scales, k_box, sample_density=args.density)
    config = RunConfig("meyer", args.seed,
                       inputs={"input": args.input, "scales": args.scales,
                               "kbox": k_box.to_dict()},
                       tolerances={"density": args.density})
    _write_json(args.out, {"config": config.to_dict(), "report": report.to_dict()})
    print(f"meyer: {report.verdict} (radii {report.covering_radii}, "
          f"counts {report.diff_set_counts})")
    return _VERDICT_EXIT[report.verdict]


def cmd_krein(args):
    mu = _as_measure(_load_input(args.input))
    report = krein_check(mu, pairs=(args.pairs, mu.window), tol=args.tol,
                         seed=args.seed)
    config = RunConfig("krein", args.seed,
                       inputs={"input": args.input},
                       tolerances={"tol": args.tol, "pairs": args.pairs})
    _write_json(args.out, {"config": config.to_dict(), "report": report.to_dict()})
    print(f"krein: {report.verdict} (max violation {report.max_violation:.3g})")
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


def cmd_sparse(args):
    mu = _as_measure(_load_input(args.input))
    k_box = _parse_box(args.kbox) if args.kbox else Box.cube(0.5, mu.dim, center=0.5)
    report = sparseness_verify(mu, args.a, k_box)
    config = RunConfig("sparse", args.seed,
                       inputs={"input": args.input, "a": args.a,
                               "kbox": k_box.to_dict()})
    _write_json(args.out, {"config": config.to_dict(), "report": report.to_dict()})
    print(f"sparse: {report.verdict} (b={report.b:.6g}, "
          f"count {report.measured_max_count} vs bound {report.count_bound:.6g})")
    return _VERDICT_EXIT[report.verdict]


def cmd_rigidity(args):
    ps = _load_input(args.input)
    if isinstance(ps, AtomicMeasure):
        raise ValueError("rigidity takes a point set input")
    report = rigidity_check(ps, seed=args.seed)
    config = RunConfig("rigidity", args.seed, inputs={"input": args.input})
    _write_json(args.out, {"config": config.to_dict(), "report": report.to_dict()})
    print(f"rigidity: {report.verdict} (gram {report.gram.verdict}, "
          f"subgroup {'ok' if report.subgroup_ok else 'fail'})")
    return _VERDICT_EXIT[report.verdict]


def cmd_epsdual(args):
    ps = _load_input(args.input)
    if isinstance(ps, AtomicMeasure):
        raise ValueError("epsdual takes a point set input")
    domain = _parse_box(args.domain)
    region = eps_dual(ps, args.eps, domain, args.spacing)
    payload = {"region": region.to_dict()}
    if args.back:
        back = eps_dual_back(region, args.eps, ps.window, args.spacing)
        payload["back_region"] = back.to_dict()
    config = RunConfig("epsdual", args.seed,
                       inputs={"input": args.input, "eps": args.eps,
                               "domain": domain.to_dict(),
                               "spacing": args.spacing})
    _write_json(args.out, {"config": config.to_dict(), **payload})
    print(f"epsdual: {len(region.runs())} components, "
          f"{region.fraction_true:.1%} of domain")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# reproduction bundles
# ---------------------------------------------------------------------------

def _bundle_zpz(outdir):
    """High-intensity sets of the two-comb measure: {0} above mass 1, the
    full union at mass 1 whose difference set densifies with the window."""
    items = []
    mu = case_zpz_measure(20.0)
    mu.to_json(outdir / "zpz.json")
    k_box = Box([0.0], [1.0])

    report = sparseness_verify(mu, 1.2, k_box)
    _write_json(outdir / "sparse_a1.2.json", report.to_dict())
    items.append({"name": "a=1.2 below the sparseness threshold",
                  "expected": "hypothesis-unmet", "got": report.verdict})

    I_high = high_intensity_set(mu, 1.2)
    items.append({"name": "I(1.2) = {0}", "expected": 1, "got": len(I_high)})

    radii = []
    for half in (12.0, 24.0, 48.0):
        m = case_zpz_measure(half)
        r = covering_radius(high_intensity_set(m, 1.2), sample_density=8.0)
        radii.append({"halfwidth": half, "covering_radius": r,
                      "diverges": bool(r >= 0.4 * half)})
    _write_json(outdir / "covering_radius_a1.2.json", {"trace": radii})
    items.append({"name": "I(1.2) covering radius diverges",
                  "expected": True, "got": all(r["diverges"] for r in radii)})

    counts = []
    for n in (12.0, 24.0, 48.0):
        m = case_zpz_measure(2.0 * n)  # range N realizes the window [-2N, 2N]
        I = high_intensity_set(m, 1.0)
        diffs = difference_set(I, Box.cube(3.0, 1))
        counts.append(weak_ud_count(diffs, k_box))
    _write_json(outdir / "diff_counts_a1.0.json",
                {"ranges": [12, 24, 48], "counts": counts})
    items.append({"name": "I(1.0)-I(1.0) counts grow strictly",
                  "expected": True,
                  "got": counts[0] < counts[1] < counts[2]})
    return items


def _bundle_union2d(outdir):
    """Threshold phenomenon for the shifted-union lattice: visible peak sets
    stay relatively dense at low thresholds, degenerate to a line above."""
    items = []
    ps = case_union2d_set(12.0)
    ps.to_json(outdir / "union2d.json")
    omega = dirac_comb(ps)
    family = VanHoveFamily.geometric(2, 3.0, 3)
    generator = ps.generator
    # dual scales stay below 6: past that the finite window cannot resolve
    # near-resonances like 22/(7π) from the integer row, which are honest
    # high-intensity estimates and would blur the line-degeneration demo
    traces = {}
    for a, label in ((0.9, "dense"), (1.5, "line")):
        radii = []
        for half in (2.0, 4.0, 6.0):
            win = Box.cube(half, 2)
            ks = candidate_frequencies(generator, win, 0.05)
            vis = visible_bragg_set(omega, a, ks, family, win)
            radii.append(covering_radius(vis, sample_density=8.0))
        traces[label] = {"a": a, "covering_radii": radii}
    _write_json(outdir / "threshold_traces.json", traces)
    dense = traces["dense"]["covering_radii"]
    line = traces["line"]["covering_radii"]
    items.append({"name": "low threshold stays relatively dense",
                  "expected": True, "got": max(dense) <= 1.25 * min(dense) + 0.5})
    items.append({"name": "high threshold covering radius grows",
                  "expected": True, "got": line[-1] > 2.0 * line[0]})
    return items


def _bundle_fibonacci(outdir):
    items = []
    ps = fibonacci_model_set(Box.cube(200.0, 1))
    ps.to_json(outdir / "fibonacci.json")
    omega = dirac_comb(ps)
    family = VanHoveFamily.geometric(1, 12.5, 5)
    gamma0 = estimate_diffraction(omega, np.zeros((1, 1)), family).gamma0
    report = bragg_meyer_check(
        omega, 0.8 * gamma0, family,
        [Box.cube(5.0, 1), Box.cube(10.0, 1), Box.cube(20.0, 1)],
        Box([0.0], [1.0]))
    _write_json(outdir / "bragg_meyer.json", report.to_dict())
    items.append({"name": "high-intensity Bragg set is Meyer",
                  "expected": "pass", "got": report.verdict})
    return items


def _bundle_dual_lattice(outdir):
    items = []
    ps = generate_lattice([[1.0]], Box.cube(10.0, 1))
    family = VanHoveFamily(1, (2.5, 5.0, 10.0))
    report = dual_witness_check(ps, 0.5, family, Box.cube(10.0, 1),
                                Box.cube(10.0, 1))
    _write_json(outdir / "dual_witness.json", report.to_dict())
    items.append({"name": "dual witness intensity bound",
                  "expected": "pass", "got": report.verdict})
    reps = report.witness_set.points[:, 0]
    off = float(np.abs(reps - np.round(reps)).max()) if len(reps) else np.inf
    items.append({"name": "witness set sits on the integers (within 1e-2)",
                  "expected": True, "got": off <= 1e-2})
    return items


_BUNDLES = {
    "zpz": _bundle_zpz,
    "union2d": _bundle_union2d,
    "fibonacci": _bundle_fibonacci,
    "dual_lattice": _bundle_dual_lattice,
}


def cmd_reproduce(args):
    if args.case not in _BUNDLES:
        raise ValueError(f"unknown case {args.case!r}; choose from "
                         f"{sorted(_BUNDLES)}")
    outdir = Path(args.outdir) / args.case
    outdir.mkdir(parents=True, exist_ok=True)
    items = _BUNDLES[args.case](outdir)
    ok = all(item["expected"] == item["got"] for item in items)
    manifest = {"case": args.case, "items": items, "ok": ok}
    _write_json(outdir / "manifest.json", manifest)
    for item in items:
        status = "ok" if item["expected"] == item["got"] else "MISMATCH"
        print(f"[{status}] {item['name']}: expected {item['expected']}, "
              f"got {item['got']}")
    return EXIT_PASS if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="braggkit",
        description="Diffraction of weighted point sets: generators, Bragg "
                    "peak estimation, Meyer-set and positive-definiteness "
                    "reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("generate", help="write a point set or measure JSON")
    p.add_argument("--lattice", help="basis matrix, rows ';'-separated")
    p.add_argument("--fibonacci", action="store_true")
    p.add_argument("--model-set", help="2x2 embedding matrix")
    p.add_argument("--internal", nargs=2, type=float,
                   help="internal acceptance interval [lo, hi)")
    p.add_argument("--example", choices=["zpz", "union2d", "fibonacci"])
    p.add_argument("--window", nargs="+", help="lo hi per axis")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("diffract", help="estimate the Bragg spectrum")
    p.add_argument("--input", required=True)
    p.add_argument("--family", default="geometric:5")
    p.add_argument("--dual-window", nargs="+", required=True)
    p.add_argument("--grid", type=float, default=0.01)
    p.add_argument("--conv-tol", type=float, default=0.02)
    p.add_argument("--out", required=True, help="peaks CSV")
    p.add_argument("--report", help="optional JSON report")
    p.add_argument("--autocorr", help="optional autocorrelation JSON")
    common(p)
    p.set_defaults(func=cmd_diffract)

    p = sub.add_parser("meyer", help="Meyer-property evidence across scales")
    p.add_argument("--input", required=True)
    p.add_argument("--scales", nargs="+", type=float, required=True,
                   help="window halfwidths, at least 3")
    p.add_argument("--kbox", nargs="+", help="lo hi per axis")
    p.add_argument("--density", type=float, default=16.0)
    p.add_argument("--out", default="meyer_report.json")
    common(p)
    p.set_defaults(func=cmd_meyer)

    p = sub.add_parser("krein", help="Krein inequality check")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--out", default="krein_report.json")
    common(p)
    p.set_defaults(func=cmd_krein)

    p = sub.add_parser("sparse", help="high-intensity sparseness check")
    p.add_argument("--input", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--kbox", nargs="+")
    p.add_argument("--out", default="sparse_report.json")
    common(p)
    p.set_defaults(func=cmd_sparse)

    p = sub.add_parser("rigidity", help="positive definite comb ⟺ subgroup")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="rigidity_report.json")
    common(p)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("epsdual", help="ε-dual grid region")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--domain", nargs=2, required=True)
    p.add_argument("--spacing", type=float, default=1e-3)
    p.add_argument("--back", action="store_true",
                   help="also compute the back-dual over the input window")
    p.add_argument("--out", default="epsdual_region.json")
    common(p)
    p.set_defaults(func=cmd_epsdual)

    p = sub.add_parser("reproduce", help="run a built-in example bundle")
    p.add_argument("case", choices=sorted(_BUNDLES))
    p.add_argument("--outdir", default="bundles")
    common(p)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # map anything unexpected to the error exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
