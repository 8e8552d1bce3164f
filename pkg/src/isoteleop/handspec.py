"""Parser and serializer for the `.hand` kinematic fixture format.

Line-oriented, `#` starts a comment, tokens are whitespace-separated:

    hand <name>
    link <name> parent=<name|ROOT> length=<meters>
    joint <name> link=<name> axis=<x>,<y>,<z> min=<rad> max=<rad> [offset=<x>,<y>,<z>]

The `hand` directive comes first. `offset` defaults to the parent link's
distal end, (parent_length, 0, 0). Parsing collects every diagnostic it can
instead of stopping at the first; a document with errors carries no tree.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kinematics import ROOT, JointSpec, KinematicTree, LinkSpec

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    line: int  # 1-based
    severity: str
    message: str


@dataclass(frozen=True)
class HandSpecDocument:
    source_name: str
    tree: KinematicTree | None
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.tree is not None


def _parse_floats(text: str, count: int) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != count:
        raise ValueError(f"expected {count} comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_args(tokens: list[str], allowed: dict[str, bool]) -> dict[str, str]:
    """key=value tokens; `allowed` maps key -> required."""
    args = {}
    for tok in tokens:
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        key, _, value = tok.partition("=")
        if key not in allowed:
            raise ValueError(f"unknown argument {key!r}")
        if key in args:
            raise ValueError(f"duplicate argument {key!r}")
        args[key] = value
    missing = [k for k, required in allowed.items() if required and k not in args]
    if missing:
        raise ValueError(f"missing argument(s): {', '.join(missing)}")
    return args


def parse_hand_spec(text: str, source_name: str = "<string>") -> HandSpecDocument:
    """Parse `.hand` text into a document holding a tree or error diagnostics."""
    diagnostics: list[Diagnostic] = []

    def err(line: int, message: str):
        diagnostics.append(Diagnostic(line=line, severity=ERROR, message=message))

    hand_name = None
    links: list[LinkSpec] = []
    link_lines: dict[str, int] = {}
    # joint rows keep raw fields until links are known: (line, name, args)
    joint_rows: list[tuple[int, str, dict[str, str]]] = []
    joint_lines: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive, rest = tokens[0], tokens[1:]
        if hand_name is None and directive != "hand":
            err(lineno, "first directive must be 'hand <name>'")
            hand_name = "<missing>"
        if directive == "hand":
            if hand_name not in (None, "<missing>"):
                err(lineno, "duplicate 'hand' directive")
                continue
            if len(rest) != 1:
                err(lineno, "'hand' takes exactly one name")
                continue
            hand_name = rest[0]
        elif directive == "link":
            if not rest:
                err(lineno, "'link' needs a name")
                continue
            name = rest[0]
            if name in link_lines:
                err(lineno, f"duplicate link name {name!r} (first at line {link_lines[name]})")
                continue
            try:
                args = _parse_args(rest[1:], {"parent": True, "length": True})
                length = float(args["length"])
                if length < 0:
                    raise ValueError(f"length must be >= 0, got {length}")
                link_lines[name] = lineno
                links.append(LinkSpec(name=name, parent=args["parent"], length=length))
            except ValueError as exc:
                err(lineno, f"link {name!r}: {exc}")
        elif directive == "joint":
            if not rest:
                err(lineno, "'joint' needs a name")
                continue
            name = rest[0]
            if name in joint_lines:
                err(lineno, f"duplicate joint name {name!r} (first at line {joint_lines[name]})")
                continue
            try:
                args = _parse_args(
                    rest[1:],
                    {"link": True, "axis": True, "min": True, "max": True, "offset": False},
                )
                joint_lines[name] = lineno
                joint_rows.append((lineno, name, args))
            except ValueError as exc:
                err(lineno, f"joint {name!r}: {exc}")
        else:
            err(lineno, f"unknown directive {directive!r}")

    if hand_name is None:
        err(1, "empty document: missing 'hand' directive")
        hand_name = "<missing>"

    link_by_name = {l.name: l for l in links}
    for link in links:
        if link.parent != ROOT and link.parent not in link_by_name:
            err(link_lines[link.name], f"link {link.name!r}: unknown parent {link.parent!r}")

    joints: list[JointSpec] = []
    driven: dict[str, str] = {}
    for lineno, name, args in joint_rows:
        try:
            link_name = args["link"]
            if link_name not in link_by_name:
                raise ValueError(f"unknown link {link_name!r}")
            if link_name in driven:
                raise ValueError(f"link {link_name!r} already driven by joint {driven[link_name]!r}")
            axis = np.array(_parse_floats(args["axis"], 3))
            norm = float(np.linalg.norm(axis))
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"axis norm {norm:.9g} outside unit tolerance 1e-6")
            if abs(norm - 1.0) > 1e-9:
                # normalize only when the text is not already unit-accurate, so
                # serialized documents reparse to bit-identical values
                axis = axis / norm
            q_min, q_max = float(args["min"]), float(args["max"])
            if not q_min < q_max:
                raise ValueError(f"min={q_min:.9g} must be < max={q_max:.9g}")
            if q_min < -np.pi or q_max > np.pi:
                raise ValueError("limits must lie within [-pi, pi]")
            if "offset" in args:
                offset = _parse_floats(args["offset"], 3)
            else:
                parent = link_by_name[link_name].parent
                parent_len = 0.0 if parent == ROOT else link_by_name[parent].length
                offset = (parent_len, 0.0, 0.0)
            driven[link_name] = name
            joints.append(
                JointSpec(
                    name=name,
                    link=link_name,
                    axis=tuple(float(c) for c in axis),
                    q_min=q_min,
                    q_max=q_max,
                    offset=offset,
                )
            )
        except ValueError as exc:
            err(lineno, f"joint {name!r}: {exc}")

    tree = None
    if not any(d.severity == ERROR for d in diagnostics):
        try:
            tree = KinematicTree(name=hand_name, links=tuple(links), joints=tuple(joints))
        except ValueError as exc:
            err(1, str(exc))
    return HandSpecDocument(
        source_name=source_name, tree=tree, diagnostics=tuple(diagnostics)
    )


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def serialize_hand_spec(tree: KinematicTree) -> str:
    """Emit `.hand` text (LF, 9 significant digits, explicit offsets)."""
    lines = [f"hand {tree.name}"]
    for link in tree.links:
        lines.append(f"link {link.name} parent={link.parent} length={_fmt(link.length)}")
    for joint in tree.joints:
        axis = ",".join(_fmt(c) for c in joint.axis)
        offset = ",".join(_fmt(c) for c in joint.offset)
        lines.append(
            f"joint {joint.name} link={joint.link} axis={axis} "
            f"min={_fmt(joint.q_min)} max={_fmt(joint.q_max)} offset={offset}"
        )
    return "\n".join(lines) + "\n"


def load_hand_file(path: str | Path) -> HandSpecDocument:
    path = Path(path)
    return parse_hand_spec(path.read_text(encoding="utf-8"), source_name=str(path))


FIXTURES_ENV = "ISOTELEOP_FIXTURES"


def fixture_search_path() -> list[Path]:
    dirs = []
    env = os.environ.get(FIXTURES_ENV)
    if env:
        dirs.extend(Path(p) for p in env.split(os.pathsep) if p)
    dirs.append(Path(__file__).parent / "fixtures")
    return dirs


def find_fixture(name: str) -> Path:
    """Resolve a fixture file name against $ISOTELEOP_FIXTURES then the bundle."""
    candidate = Path(name)
    if candidate.is_file():
        return candidate
    for directory in fixture_search_path():
        path = directory / name
        if path.is_file():
            return path
    raise FileNotFoundError(f"fixture {name!r} not found in {fixture_search_path()}")
