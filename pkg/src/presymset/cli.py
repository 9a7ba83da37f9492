"""Command-line front end: scene files in, CSV/SVG/report artifacts out.

Exit codes: 0 = all expectations met, 1 = expectation mismatch or numeric
degeneracy, 2 = input error. Output files are written atomically and are
byte-identical across runs when --no-timestamp is set.
"""

import argparse
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .errors import NoBranchesError, PresymError, SceneParseError
from .presym2d import a1a3_analyze, count_extrema, trace_presym2d
from .scenefile import build_a1a3, build_curve, build_scene3d, parse_scene_file, set_swept_value
from .svg import SvgCanvas

TWO_PI = 2.0 * np.pi


def _atomic_write(path, data):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


class Report:
    def __init__(self, command, digest, timestamp=True):
        self.data = {
            "tool": f"presymset {__version__}",
            "command": command,
            "scene_digest": digest,
            "checks": [],
            "artifacts": [],
        }
        self.timestamp = timestamp
        self.t0 = time.time()
        self.failed = False

    def check(self, name, value, expected=None, margin=None, passed=True):
        entry = {"name": name, "value": value}
        if expected is not None:
            entry["expected"] = expected
        if margin is not None:
            entry["margin"] = margin
        entry["passed"] = bool(passed)
        if not passed:
            self.failed = True
        self.data["checks"].append(entry)

    def artifact(self, path):
        self.data["artifacts"].append(path)

    def write(self, path):
        if self.timestamp:
            self.data["wall_time_s"] = round(time.time() - self.t0, 3)
        _atomic_write(path, json.dumps(self.data, indent=2, default=_jsonable) + "\n")

    def summary(self):
        lines = []
        for c in self.data["checks"]:
            status = "pass" if c["passed"] else "FAIL"
            extra = f" expected={c['expected']}" if "expected" in c else ""
            lines.append(f"  [{status}] {c['name']}: {c['value']}{extra}")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def cmd_presym2d(sf, args):
    curve = build_curve(sf)
    report = Report("presym2d", sf.digest(), timestamp=not args.no_timestamp)
    grid = int(sf.run.get("grid", args.grid))
    exclusion = sf.run.get("exclusion", 0.05)
    out = os.path.join(args.out_dir, "presym2d")
    rows = []
    panels = [{
        "box": (0.0, TWO_PI, 0.0, TWO_PI),
        "title": "pre-symmetry set (s, t)",
        "lines": [(((0.0, 0.0), (TWO_PI, TWO_PI)), "gray")],
        "polylines": [],
    }]
    try:
        traced = trace_presym2d(curve, grid=grid, exclusion=exclusion, tol=args.tol)
    except NoBranchesError as exc:
        report.check("branches", 0, expected="none (degenerate zero set)")
        report.check("detail", str(exc))
        traced = None
    if traced is not None:
        for b, (pts, res) in enumerate(zip(traced.branches, traced.residuals)):
            panels[0]["polylines"].append((pts, "crimson"))
            for (s, t), r in zip(pts, res):
                rows.append((b, float(s), float(t), float(r)))
        report.check("branches", len(traced.branches))
        report.check("max_residual", float(max(np.max(r) for r in traced.residuals)),
                     margin=args.tol)
    _atomic_write(out + ".csv", _csv(("branch", "s", "t", "residual"), rows))
    svg = SvgCanvas(panels, timestamp=not args.no_timestamp).render()
    _atomic_write(out + ".svg", svg)
    report.artifact(out + ".csv")
    report.artifact(out + ".svg")
    report.write(out + ".report.json")
    print(report.summary())
    return 1 if report.failed else 0


def cmd_a1a3(sf, args):
    curve_m, curve_n, r0 = build_a1a3(sf)
    report = Report("a1a3", sf.digest(), timestamp=not args.no_timestamp)
    an = a1a3_analyze(curve_m, curve_n, 0.0, 0.0, r0)
    out = os.path.join(args.out_dir, "a1a3")
    report.check("t_prime", an.t1, expected="0", margin=1e-6, passed=abs(an.t1) < 1e-6)
    report.check("t_second", an.t2, expected="0", margin=1e-6, passed=abs(an.t2) < 1e-6)
    report.check("t_third", an.t3, expected="nonzero", margin=1e-3,
                 passed=abs(an.t3) > 1e-3)
    report.check("extrema", count_extrema(an.samples[:, 1], noise=1e-13))
    rows = [(float(s), float(t), float(r)) for s, t, r in an.samples]
    _atomic_write(out + ".csv", _csv(("s", "t", "r"), rows))
    report.artifact(out + ".csv")
    report.write(out + ".report.json")
    print(report.summary())
    return 1 if report.failed else 0


def _classify_offdiag(scene, args, grid=None, half_width=None):
    from .classifier import classify_field
    from .presym3d_offdiag import solve_field

    field = solve_field(
        scene,
        n=int(grid if grid is not None else 8),
        half_width=float(half_width if half_width is not None else 0.1),
    )
    return field, classify_field(field)


def cmd_offdiag(sf, args):
    from .presym3d_offdiag import cusp_points, trace_critical_set

    scene = build_scene3d(sf)
    report = Report("offdiag", sf.digest(), timestamp=not args.no_timestamp)
    out = os.path.join(args.out_dir, "offdiag")
    field, result = _classify_offdiag(
        scene, args, sf.run.get("grid", args.grid), sf.run.get("half_width")
    )
    rows = []
    f, g = field.first, field.second
    for i, s in enumerate(field.s_axis):
        for j, t in enumerate(field.t_axis):
            if not field.ok[i, j]:
                continue
            rows.append(
                (float(s), float(t), float(field.U[i, j]), float(field.V[i, j]),
                 float(field.R[i, j]),
                 float(f["u_s"][i, j]), float(f["u_t"][i, j]),
                 float(f["v_s"][i, j]), float(f["v_t"][i, j]),
                 float(f["r_s"][i, j]), float(f["r_t"][i, j]),
                 float(g["u_ss"][i, j]), float(g["u_st"][i, j]), float(g["u_tt"][i, j]),
                 float(g["v_ss"][i, j]), float(g["v_st"][i, j]), float(g["v_tt"][i, j]),
                 float(g["r_ss"][i, j]), float(g["r_st"][i, j]), float(g["r_tt"][i, j]))
            )
    header = ("s", "t", "u", "v", "r", "u_s", "u_t", "v_s", "v_t", "r_s", "r_t",
              "u_ss", "u_st", "u_tt", "v_ss", "v_st", "v_tt", "r_ss", "r_st", "r_tt")
    _atomic_write(out + ".csv", _csv(header, rows))

    chains = trace_critical_set(field)
    cps = cusp_points(field)
    w = field.s_axis[-1]
    left = {
        "box": (-w, w, -w, w), "title": "critical set (s, t)",
        "polylines": [(c, "navy") for c in chains],
        "points": [((x, y), "crimson") for x, y in cps],
    }
    img_chains = []
    for chain in chains:
        img = []
        for s, t in chain:
            from .presym3d_offdiag import _grid_interp

            img.append((_grid_interp(field, s, t, field.U),
                        _grid_interp(field, s, t, field.V)))
        img_chains.append(np.array(img))
    uw = max((float(np.max(np.abs(c))) for c in img_chains if len(c)), default=w)
    right = {
        "box": (-1.1 * uw - 1e-9, 1.1 * uw + 1e-9, -1.1 * uw - 1e-9, 1.1 * uw + 1e-9),
        "title": "image of the critical set (u, v)",
        "polylines": [(c, "darkgreen") for c in img_chains],
    }
    svg = SvgCanvas([left, right], timestamp=not args.no_timestamp).render()
    _atomic_write(out + ".svg", svg)

    margins = {k: v for k, v in result.margins.items() if k != "fit_condition"}
    report.check("classification", result.klass.value, expected=sf.expect,
                 margin=min(margins.values()) if margins else None,
                 passed=(sf.expect is None or result.klass.value == sf.expect))
    report.check("cusp_points", len(cps))
    report.check("critical_chains", len(chains))
    report.data["margins"] = margins
    report.artifact(out + ".csv")
    report.artifact(out + ".svg")
    report.write(out + ".report.json")
    print(report.summary())
    if sf.expect is not None and result.klass.value != sf.expect:
        print(f"expectation mismatch: {result.klass.value} != {sf.expect}", file=sys.stderr)
        print(json.dumps(margins, indent=2, default=_jsonable), file=sys.stderr)
        return 1
    return 1 if report.failed else 0


def cmd_ondiag(sf, args):
    from .geometry3d import contact_type
    from .presym3d_ondiag import ondiag_classify, predicted_coeffs, symmetry_check

    scene = build_scene3d(sf)
    report = Report("ondiag", sf.digest(), timestamp=not args.no_timestamp)
    out = os.path.join(args.out_dir, "ondiag")
    case = contact_type(scene.patch_m, scene.sphere).klass.value
    h = float(sf.run.get("stencil", args.stencil))
    result, fit = ondiag_classify(scene, h=h)
    report.check("contact", case)
    report.check("classification", result.klass.value, expected=sf.expect,
                 passed=(sf.expect is None or result.klass.value == sf.expect))

    pred = predicted_coeffs(scene.patch_m.patch, case)
    if case == "A3":
        alpha = pred["alpha"]
        for key, mono in (("t_s", (1, 0)), ("t_u", (0, 1))):
            got = fit.t_coeffs[mono]
            rel = abs(got - alpha) / max(abs(alpha), 1e-12)
            report.check(f"alpha[{key}]", got, expected=alpha, margin=rel,
                         passed=rel < 1e-3)
    elif case == "A4":
        for key, mono in (("t20", (2, 0)), ("t11", (1, 1)), ("t02", (0, 2))):
            got = fit.t_coeffs[mono]
            rel = abs(got - pred[key]) / max(abs(pred[key]), 1e-12)
            report.check(key, got, expected=pred[key], margin=rel, passed=rel < 1e-2)
        ratio = fit.t_coeffs[(1, 1)] / fit.t_coeffs[(0, 2)]
        report.check("t11_over_t02", ratio, expected=4.0 / 3.0,
                     passed=abs(ratio - 4.0 / 3.0) < 1e-2)
    elif case == "A5":
        got = fit.t_coeffs[(2, 0)]
        rel = abs(got - pred["s2"]) / max(abs(pred["s2"]), 1e-12)
        report.check("s2_coeff", got, expected=pred["s2"], margin=rel, passed=rel < 1e-2)
        t21 = fit.t_coeffs[(2, 1)]
        for key, mono, want in (("su2/s2u", (1, 2), 1.0), ("u3/s2u", (0, 3), 2.0 / 3.0)):
            ratio = fit.t_coeffs[mono] / t21
            report.check(key, ratio, expected=want, passed=abs(ratio - want) < 5e-2)
    sym = symmetry_check(scene, h=h)
    report.check("swap_symmetry_defect", sym["max_defect"], margin=1e-9,
                 passed=sym["max_defect"] < 1e-9)

    rows = [
        (float(p.s), float(p.u), float(p.t), float(p.v), float(p.r), float(p.residual))
        for p in fit.samples
    ]
    _atomic_write(out + ".csv", _csv(("s", "u", "t", "v", "r", "residual"), rows))
    report.artifact(out + ".csv")
    report.write(out + ".report.json")
    print(report.summary())
    if sf.expect is not None and result.klass.value != sf.expect:
        return 1
    return 1 if report.failed else 0


def cmd_sweep(sf, args):
    from .presym3d_offdiag import cusp_points, trace_critical_set

    if not sf.sweep:
        raise SceneParseError("sweep command needs a [sweep] section", field="sweep")
    report = Report("sweep", sf.digest(), timestamp=not args.no_timestamp)
    out = os.path.join(args.out_dir, "sweep")
    lo, hi = sf.sweep["range"]
    steps = sf.sweep["steps"]
    values = np.linspace(lo, hi, steps)
    timeline = []
    for value in values:
        sf_step = set_swept_value(sf, float(value))
        scene = build_scene3d(sf_step)
        field, result = _classify_offdiag(
            scene, args, sf.run.get("grid", args.grid), sf.run.get("half_width")
        )
        cps = cusp_points(field)
        chains = trace_critical_set(field)
        timeline.append(
            {"value": float(value), "class": result.klass.value,
             "cusps": len(cps), "fold_chains": len(chains)}
        )
    transition = [
        k for k, entry in enumerate(timeline)
        if entry["class"] in ("Lips", "Beaks", "Cusp", "Degenerate")
    ]
    report.data["timeline"] = timeline
    report.check("steps", len(timeline))
    if transition:
        report.check("transition_bracket",
                     [timeline[k]["value"] for k in transition])
    rows = [(e["value"], e["class"], e["cusps"], e["fold_chains"]) for e in timeline]
    _atomic_write(out + ".csv", _csv(("value", "class", "cusps", "fold_chains"), rows))
    report.artifact(out + ".csv")
    report.write(out + ".report.json")
    print(report.summary())
    for e in timeline:
        print(f"  {e['value']:+.6f}  {e['class']:15s} cusps={e['cusps']} "
              f"folds={e['fold_chains']}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="presymset",
        description="Pre-symmetry sets: tracing, solving, classification.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("presym2d", cmd_presym2d),
        ("a1a3", cmd_a1a3),
        ("offdiag", cmd_offdiag),
        ("ondiag", cmd_ondiag),
        ("sweep", cmd_sweep),
    ):
        p = sub.add_parser(name)
        p.add_argument("scene", help="scene file path")
        p.add_argument("--grid", type=int, default=None if name != "presym2d" else 256,
                       help="grid nodes (2D trace) or grid radius (3D fields)")
        p.add_argument("--stencil", type=float, default=0.02,
                       help="stencil radius for on-diagonal fits")
        p.add_argument("--tol", type=float, default=1e-10, help="solver tolerance")
        p.add_argument("--out-dir", default=".", help="artifact output directory")
        p.add_argument("--no-timestamp", action="store_true",
                       help="suppress timestamps for byte-identical outputs")
        p.add_argument("--expect-strict", action="store_true",
                       help="treat a missing expectation as an error")
        p.set_defaults(func=fn)
    args = parser.parse_args(argv)

    try:
        sf = parse_scene_file(args.scene)
        if args.expect_strict and sf.expect is None and args.command in ("offdiag", "ondiag"):
            raise SceneParseError("scene has no 'expect' but --expect-strict is set",
                                  field="expect")
        kind_of = {"presym2d": "presym2d", "a1a3": "a1a3",
                   "offdiag": "offdiag3d", "ondiag": "ondiag3d", "sweep": "offdiag3d"}
        if sf.kind != kind_of[args.command]:
            raise SceneParseError(
                f"scene kind '{sf.kind}' does not match command '{args.command}'",
                field="kind",
            )
        return args.func(sf, args)
    except SceneParseError as exc:
        print(f"scene error: {exc}", file=sys.stderr)
        return 2
    except PresymError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
