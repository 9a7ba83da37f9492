"""Scene file parsing and scene construction.

Grammar (versioned header, then INI-like sections of key = value lines):

    presymset-scene 1
    [scene]
    kind = presym2d | a1a3 | offdiag3d | ondiag3d
    expect = Fold            # optional expected classification
    [curve] / [curve.M] / [curve.N]   (2D kinds)
    family = ellipse | perturbed-circle | local-graph
    ...
    [patch.M] / [patch.N]             (3D kinds)
    contact = A1..A5
    kappa1 = ..., kappa2 = ..., cubic = b0 b1 b2 b3, quartic = c0..c4,
    quintic = d0..d5, box = ...
    [sphere]
    radius = ..., chord_angle = ..., chord_azimuth = ...,
    transitional = true|false
    [run]
    grid = ..., half_width = ..., stencil = ..., exclusion = ..., tol = ...
    [sweep]
    parameter = patch.M.kappa1, range = lo hi, steps = n

Every diagnostic names the line and field. Unknown sections or keys are
errors: the parse is total.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import SceneParseError
from .geometry2d import PlaneCurve
from .geometry3d import (
    MongePatch,
    SceneSpec,
    assemble_scene,
    construct_scene,
    curvature_sphere_scene,
)

HEADER = "presymset-scene 1"

_SECTION_KEYS = {
    "scene": {"kind", "expect"},
    "curve": {"family", "a", "b", "radius", "cos_amps", "sin_amps", "coeffs",
              "pose_angle", "pose_offset", "halfwidth"},
    "curve.M": None,  # same keys as curve
    "curve.N": None,
    "patch.M": {"contact", "kappa1", "kappa2", "cubic", "quartic", "quintic", "box"},
    "patch.N": None,  # same as patch.M
    "sphere": {"radius", "chord_angle", "chord_azimuth", "transitional",
               "theta", "epsilon"},
    "run": {"grid", "half_width", "stencil", "exclusion", "tol"},
    "sweep": {"parameter", "range", "steps"},
}
_SECTION_KEYS["curve.M"] = _SECTION_KEYS["curve"]
_SECTION_KEYS["curve.N"] = _SECTION_KEYS["curve"]
_SECTION_KEYS["patch.N"] = _SECTION_KEYS["patch.M"]

KINDS = ("presym2d", "a1a3", "offdiag3d", "ondiag3d")


@dataclass
class SceneFile:
    kind: str
    expect: str = None
    sections: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    source: str = ""

    def digest(self):
        return hashlib.sha256(self.source.encode()).hexdigest()[:16]


def parse_scene_text(text):
    """Parse scene text into a SceneFile; diagnostics carry line numbers."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise SceneParseError(
            f"missing or wrong header; expected '{HEADER}'", line=1, field="header"
        )
    sections = {}
    current = None
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise SceneParseError("unterminated section", line=lineno, field=stripped)
            name = stripped[1:-1].strip()
            if name not in _SECTION_KEYS:
                raise SceneParseError(f"unknown section [{name}]", line=lineno, field=name)
            if name in sections:
                raise SceneParseError(f"duplicate section [{name}]", line=lineno, field=name)
            sections[name] = {}
            current = name
            continue
        if current is None:
            raise SceneParseError("key before any section", line=lineno, field=stripped)
        if "=" not in stripped:
            raise SceneParseError("expected key = value", line=lineno, field=stripped)
        key, val = (part.strip() for part in stripped.split("=", 1))
        allowed = _SECTION_KEYS[current]
        if allowed is not None and key not in allowed:
            raise SceneParseError(
                f"unknown key '{key}' in section [{current}]", line=lineno, field=key
            )
        if key in sections[current]:
            raise SceneParseError(f"duplicate key '{key}'", line=lineno, field=key)
        sections[current][key] = (val, lineno)

    if "scene" not in sections or "kind" not in sections["scene"]:
        raise SceneParseError("missing [scene] kind", field="kind")
    kind = sections["scene"]["kind"][0]
    if kind not in KINDS:
        raise SceneParseError(
            f"unknown scene kind '{kind}' (expected one of {', '.join(KINDS)})",
            line=sections["scene"]["kind"][1],
            field="kind",
        )
    expect = sections["scene"].get("expect", (None, 0))[0]
    sf = SceneFile(kind=kind, expect=expect, sections=sections, source=text)
    sf.run = {k: _number(v, ln, k) for k, (v, ln) in sections.get("run", {}).items()}
    if "sweep" in sections:
        sw = sections["sweep"]
        for needed in ("parameter", "range", "steps"):
            if needed not in sw:
                raise SceneParseError("sweep needs parameter, range, steps", field=needed)
        rng = _floats(sw["range"][0], sw["range"][1], "range")
        if len(rng) != 2:
            raise SceneParseError("range needs two numbers", line=sw["range"][1], field="range")
        sf.sweep = {
            "parameter": sw["parameter"][0],
            "range": tuple(rng),
            "steps": int(_number(sw["steps"][0], sw["steps"][1], "steps")),
        }
    return sf


def parse_scene_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_scene_text(fh.read())
    except OSError as exc:
        raise SceneParseError(f"cannot read scene file: {exc}", field=str(path))


def _number(val, lineno, key):
    try:
        return float(val)
    except ValueError:
        raise SceneParseError(f"expected a number, got '{val}'", line=lineno, field=key)


def _floats(val, lineno, key):
    try:
        return [float(p) for p in val.split()]
    except ValueError:
        raise SceneParseError(f"expected numbers, got '{val}'", line=lineno, field=key)


def _bool(val, lineno, key):
    low = val.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise SceneParseError(f"expected a boolean, got '{val}'", line=lineno, field=key)


def build_curve(sf, section="curve"):
    if section not in sf.sections:
        raise SceneParseError(f"scene kind {sf.kind} needs a [{section}] section",
                              field=section)
    items = sf.sections[section]
    if "family" not in items:
        raise SceneParseError("curve needs a family", field="family")
    family, ln = items["family"]
    kwargs = {}
    for key, (val, lineno) in items.items():
        if key == "family":
            continue
        if key in ("a", "b", "radius", "pose_angle", "halfwidth"):
            kwargs[key] = _number(val, lineno, key)
        elif key in ("cos_amps", "sin_amps", "coeffs", "pose_offset"):
            kwargs[key] = tuple(_floats(val, lineno, key))
    try:
        return PlaneCurve(family, **kwargs)
    except (ValueError, TypeError) as exc:
        raise SceneParseError(str(exc), line=ln, field="family")


def _patch_args(sf, section):
    items = sf.sections.get(section, {})
    out = {}
    for key, (val, lineno) in items.items():
        if key == "contact":
            out["contact"] = val
        elif key in ("kappa1", "kappa2", "box"):
            out[key] = _number(val, lineno, key)
        else:
            vals = tuple(_floats(val, lineno, key))
            need = {"cubic": 4, "quartic": 5, "quintic": 6}[key]
            if len(vals) != need:
                raise SceneParseError(
                    f"{key} needs {need} coefficients, got {len(vals)}",
                    line=lineno, field=key,
                )
            out[key] = vals
    return out


def build_scene3d(sf):
    """BitangentScene from a parsed offdiag3d/ondiag3d scene file."""
    sphere = sf.sections.get("sphere", {})
    r0 = _number(*sphere["radius"], "radius") if "radius" in sphere else 1.0
    m = _patch_args(sf, "patch.M")
    if sf.kind == "ondiag3d":
        patch = MongePatch(
            m.get("kappa1", 1.0), m.get("kappa2", 2.0),
            m.get("cubic", (0.0,) * 4), m.get("quartic", (0.0,) * 5),
            m.get("quintic", (0.0,) * 6), m.get("box", 0.4),
        )
        return curvature_sphere_scene(patch)
    n = _patch_args(sf, "patch.N")
    if m.get("contact", "auto") == "auto":
        # verbatim patches: realized contacts are detected, not imposed
        # (swept scenes move through the contact strata)
        patch_m = MongePatch(
            m.get("kappa1", 1.0), m.get("kappa2", 1.9),
            m.get("cubic", (0.0,) * 4), m.get("quartic", (0.0,) * 5),
            m.get("quintic", (0.0,) * 6), m.get("box", 0.4),
        )
        patch_n = MongePatch(
            n.get("kappa1", -0.35), n.get("kappa2", 0.55),
            n.get("cubic", (0.0,) * 4), n.get("quartic", (0.0,) * 5),
            n.get("quintic", (0.0,) * 6), m.get("box", 0.4),
        )
        sphere_sec = sf.sections.get("sphere", {})
        return assemble_scene(
            patch_m, patch_n, r0,
            _number(*sphere_sec["chord_angle"], "chord_angle")
            if "chord_angle" in sphere_sec else 1.1,
            _number(*sphere_sec["chord_azimuth"], "chord_azimuth")
            if "chord_azimuth" in sphere_sec else 0.0,
            _bool(*sphere_sec["transitional"], "transitional")
            if "transitional" in sphere_sec else False,
        )
    spec = SceneSpec(
        contact_m=m.get("contact", "A1"),
        contact_n=n.get("contact", "A1"),
        r0=r0,
        chord_angle=_number(*sphere["chord_angle"], "chord_angle")
        if "chord_angle" in sphere else 1.1,
        chord_azimuth=_number(*sphere["chord_azimuth"], "chord_azimuth")
        if "chord_azimuth" in sphere else 0.35,
        m_kappa1=m.get("kappa1", 0.7),
        m_kappa2=m.get("kappa2", 1.9),
        m_cubic=m.get("cubic", (0.0,) * 4),
        m_quartic=m.get("quartic", (0.0,) * 5),
        m_quintic=m.get("quintic", (0.0,) * 6),
        n_kappa1=n.get("kappa1", -0.35),
        n_kappa2=n.get("kappa2", 0.55),
        n_cubic=n.get("cubic", (0.0,) * 4),
        n_quartic=n.get("quartic", (0.0,) * 5),
        n_quintic=n.get("quintic", (0.0,) * 6),
        box=m.get("box", 0.4),
        transitional=_bool(*sphere["transitional"], "transitional")
        if "transitional" in sphere else False,
    )
    return construct_scene(spec)


def build_a1a3(sf):
    """Curves, base parameters and radius for the 2D two-circle analysis."""
    curve_m = build_curve(sf, "curve.M")
    sphere = sf.sections.get("sphere", {})
    theta = _number(*sphere["theta"], "theta") if "theta" in sphere else 2.0
    eps = _number(*sphere["epsilon"], "epsilon") if "epsilon" in sphere else 0.0
    from .geometry2d import curve_frame

    _, _, _, kappa = curve_frame(curve_m, 0.0)
    r0 = 1.0 / kappa
    c0 = np.array([0.0, r0])
    q0 = c0 + r0 * np.array([np.sin(theta), -np.cos(theta)])
    nhat = (c0 - q0) / r0
    if "curve.N" in sf.sections:
        base = sf.sections["curve.N"]
        items = {k: v for k, (v, _) in base.items()}
        coeffs = tuple(float(x) for x in items.get("coeffs", "0.35 0.1 0 0").split())
    else:
        coeffs = (0.35, 0.1, 0.0, 0.0)
    curve_n = PlaneCurve(
        "local-graph", coeffs=coeffs, pose_angle=theta,
        pose_offset=tuple(q0 + eps * nhat),
    )
    return curve_m, curve_n, r0


def set_swept_value(sf, value):
    """A copy of the scene file text with the swept scalar replaced."""
    param = sf.sweep["parameter"]
    try:
        section, key = param.rsplit(".", 1)
    except ValueError:
        raise SceneParseError(f"bad sweep parameter '{param}'", field="parameter")
    if section not in sf.sections or key not in _SECTION_KEYS.get(section, set()):
        raise SceneParseError(
            f"sweep parameter '{param}' does not name a scene key", field="parameter"
        )
    out = []
    in_section = None
    replaced = False
    for raw in sf.source.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            in_section = stripped[1:-1].strip()
        elif in_section == section and "=" in stripped:
            k = stripped.split("=", 1)[0].strip()
            if k == key:
                out.append(f"{key} = {value!r}")
                replaced = True
                continue
        out.append(raw)
    if not replaced:
        # key was defaulted: append to the section
        out2 = []
        for raw in out:
            out2.append(raw)
            stripped = raw.strip()
            if stripped == f"[{section}]":
                out2.append(f"{key} = {value!r}")
                replaced = True
        out = out2
    if not replaced:
        raise SceneParseError(
            f"sweep section [{section}] not present in the file", field="parameter"
        )
    return parse_scene_text("\n".join(out))
