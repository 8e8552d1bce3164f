"""Command-line interface.

Exit codes, stable across subcommands:
  0  success
  1  I/O or usage error
  2  parse or validation failure
  3  isomorphism check failed

Every randomized subcommand prints the effective seed; outputs are
byte-deterministic given flags plus seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .episodes import validate_episode, write_episode, read_episode
from .handspec import find_fixture, load_hand_file
from .isomorphism import ToleranceSpec, check_workspace_inclusion
from .metrics import PrecisionReport, build_summary, summary_to_csv, summary_to_json
from .scenarios import load_alignment, load_scenario, run_scenario, traces_to_csv

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_CHECK = 3

# fixed default seed for reproducibility; never time-based
DEFAULT_SEED = 20250800


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_IO)


def _load_tree_or_exit(path: str):
    try:
        doc = load_hand_file(find_fixture(path))
    except (OSError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    if doc.tree is None:
        for d in doc.diagnostics:
            print(f"{doc.source_name}:{d.line}: {d.severity}: {d.message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)
    return doc


def cmd_spec_check(args) -> int:
    doc = _load_tree_or_exit(args.path)
    for d in doc.diagnostics:
        print(f"{doc.source_name}:{d.line}: {d.severity}: {d.message}")
    tree = doc.tree
    print(f"{tree.name}: {tree.n_joints} joints, {len(tree.chains())} chains")
    return EXIT_OK


def cmd_iso_check(args) -> int:
    doc_h = _load_tree_or_exit(args.human)
    doc_r = _load_tree_or_exit(args.robot)
    tree_h, tree_r = doc_h.tree, doc_r.tree
    try:
        tree_h, tree_r, iso = load_alignment(args.human, args.robot, args.map)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    tol = ToleranceSpec(alpha=args.tolerance_axis, eps_len=args.tolerance_len_mm * 1e-3)
    report = check_isomorphism_with_workspace(tree_h, tree_r, iso, tol, args.workspace_samples, args.seed)

    if args.format == "json":
        payload = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        _emit(payload, args.out)
    elif args.format == "csv":
        lines = ["robot_joint,axis_residual,length_residual_m,range_ok"]
        for i, joint in enumerate(tree_r.joints):
            lines.append(
                f"{joint.name},{report.per_joint_axis_residual[i]:.9g},"
                f"{report.per_link_length_residual[i]:.9g},{report.range_inclusion_ok[i]}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    else:
        flipped = [tree_h.joints[j].name for j, s in enumerate(iso.signs) if s < 0]
        print(f"pair: {tree_h.name} ({tree_h.n_joints} joints) -> {tree_r.name} ({tree_r.n_joints} joints)")
        print(f"scale: {iso.scale:.9g}")
        print(f"flipped signs: {flipped if flipped else 'none'}")
        print(f"max axis residual: {report.per_joint_axis_residual.max():.3e} (tol {args.tolerance_axis})")
        print(f"max length residual: {report.per_link_length_residual.max():.3e} m (tol {args.tolerance_len_mm} mm)")
        bad_ranges = [
            tree_r.joints[i].name for i, ok in enumerate(report.range_inclusion_ok) if not ok
        ]
        print(f"range inclusion: {'all ok' if not bad_ranges else 'violated at ' + ', '.join(bad_ranges)}")
        if report.max_cartesian_deviation is not None:
            print(f"workspace: max tip deviation {report.max_cartesian_deviation:.3e} m "
                  f"over {args.workspace_samples} samples (seed {args.seed})")
        print("PASSED" if report.passed else "FAILED")
    return EXIT_OK if report.passed else EXIT_CHECK


def check_isomorphism_with_workspace(tree_h, tree_r, iso, tol, n_samples, seed):
    from dataclasses import replace

    from .isomorphism import check_isomorphism

    report = check_isomorphism(tree_h, tree_r, iso, tol)
    if n_samples > 0 and report.passed:
        # pair each human chain tip with the robot link driven by the mapped joint
        tips = []
        for tip in (chain[-1] for chain in tree_h.chains()):
            joint_idx = next(
                (j for j, joint in enumerate(tree_h.joints) if joint.link == tip), None
            )
            if joint_idx is None:
                continue  # rigid tip link: no joint to map through
            tips.append((tip, tree_r.joints[iso.pi(joint_idx)].link))
        deviation, in_range = check_workspace_inclusion(
            tree_h, tree_r, iso, tips, n_samples, seed
        )
        report = replace(
            report,
            max_cartesian_deviation=deviation,
            passed=report.passed and in_range,
        )
    return report


def cmd_simulate(args) -> int:
    try:
        scenario = load_scenario(find_fixture(args.scenario))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: bad scenario config: {exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.rate is not None:
        from dataclasses import replace

        scenario = replace(scenario, program=replace(scenario.program, rate_hz=args.rate))
    result = run_scenario(
        scenario,
        seed=args.seed,
        sync_tolerance_s=args.sync_tolerance,
        interpolate_joints=args.interpolate,
    )
    print(f"scenario: {scenario.name} (kind {scenario.kind}, effective seed {result.seed})")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(result.report.to_json(), encoding="utf-8")
    (out / "report.csv").write_text(result.report.to_csv(), encoding="utf-8")
    (out / "traces.csv").write_text(traces_to_csv(result), encoding="utf-8")

    rep = result.report
    print(f"aggregate MAE: {rep.aggregate_mae_deg:.3f} deg | aggregate MaxAE: {rep.aggregate_maxae_deg:.3f} deg")
    if rep.estimated_latency_s is not None:
        print(f"estimated latency: {rep.estimated_latency_s * 1000.0:.1f} ms")

    if result.episode is not None:
        episode_dir = out / "episode"
        write_episode(result.episode, episode_dir, overwrite=True)
        validation = validate_episode(episode_dir)
        print(f"episode: {episode_dir} ({result.episode.timestamps.shape[0]} ticks, "
              f"{'VALID' if validation.valid else 'INVALID: ' + ', '.join(validation.failed_checks())})")
        if not validation.valid:
            return EXIT_PARSE
    print(f"row key: {scenario.row_key}")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate_episode(args.episode)
    for check in report.checks:
        status = "ok" if check.passed else "FAIL"
        detail = f" ({check.detail})" if check.detail else ""
        print(f"{check.name}: {status}{detail}")
    print("VALID" if report.valid else "INVALID")
    return EXIT_OK if report.valid else EXIT_PARSE


def _load_report(path: str) -> PrecisionReport:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    import numpy as np

    return PrecisionReport(
        per_joint_mae_deg=np.array(data["per_joint_mae_deg"]),
        per_joint_maxae_deg=np.array(data["per_joint_maxae_deg"]),
        aggregate_mae_deg=data["aggregate_mae_deg"],
        aggregate_maxae_deg=data["aggregate_maxae_deg"],
        pooled_mae_deg=data["pooled_mae_deg"],
        sample_count=data["sample_count"],
        estimated_latency_s=data["estimated_latency_s"],
        joint_names=tuple(data["joint_names"]) if data.get("joint_names") else None,
    )


def cmd_report(args) -> int:
    reports = {}
    for key, path in (
        ("single_joint_no_mi", args.single_no_mi),
        ("single_joint_with_mi", args.single_with_mi),
        ("multi_joint", args.multi),
        ("teleoperation", args.teleop),
    ):
        if path:
            try:
                reports[key] = _load_report(path)
            except (OSError, KeyError, ValueError) as exc:
                print(f"error: cannot load report {path}: {exc}", file=sys.stderr)
                return EXIT_IO
    rows = build_summary(reports)
    text = summary_to_json(rows) if args.format == "json" else summary_to_csv(rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_dump(args) -> int:
    try:
        episode = read_episode(args.episode)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ts_lines = ["t"] + [repr(float(t)) for t in episode.timestamps]
    (out / "timestamps.csv").write_text("\n".join(ts_lines) + "\n", encoding="utf-8")
    for name in ("proprio_qr", "action_qh"):
        stream = episode.streams[name]
        lines = [",".join(f"q{j}" for j in range(stream.joints.shape[1]))]
        for row in stream.joints:
            lines.append(",".join(repr(float(v)) for v in row))
        (out / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    from .frames import decode_frame_stamp

    lines = ["stream,tick,stamp,bytes"]
    for name, stream in episode.streams.items():
        if stream.frames is None:
            continue
        for i, payload in enumerate(stream.frames):
            lines.append(f"{name},{i},{decode_frame_stamp(payload)},{len(payload)}")
    (out / "frames.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"dumped {episode.timestamps.shape[0]} ticks to {out}")
    return EXIT_OK


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isoteleop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spec-check", help="parse a .hand fixture and report diagnostics")
    p.add_argument("path")
    p.set_defaults(func=cmd_spec_check)

    p = sub.add_parser("iso-check", help="verify mechanical isomorphism of a fixture pair")
    p.add_argument("human")
    p.add_argument("robot")
    p.add_argument("--map", required=True, help="joint pairing JSON")
    p.add_argument("--tolerance-axis", type=float, default=0.02)
    p.add_argument("--tolerance-len-mm", type=float, default=0.5)
    p.add_argument("--workspace-samples", type=int, default=0,
                   help="also sample the workspace inclusion check")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--format", choices=("human", "json", "csv"), default="human")
    p.add_argument("--out")
    p.set_defaults(func=cmd_iso_check)

    p = sub.add_parser("simulate", help="run a scenario config; write traces/report/episode")
    p.add_argument("scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--rate", type=float, default=None, help="override the observation rate (Hz)")
    p.add_argument("--sync-tolerance", type=float, default=None,
                   help="episode synchronization tolerance in seconds")
    p.add_argument("--interpolate", action="store_true",
                   help="interpolate joint streams during synchronization")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="validate an episode directory")
    p.add_argument("episode")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="build the precision summary table")
    p.add_argument("--single-no-mi", dest="single_no_mi")
    p.add_argument("--single-with-mi", dest="single_with_mi")
    p.add_argument("--multi")
    p.add_argument("--teleop")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dump", help="dump episode arrays to reference CSV files")
    p.add_argument("episode")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except SystemExit:
        raise
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_IO
    raise SystemExit(code)


if __name__ == "__main__":
    main()
