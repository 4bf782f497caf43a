"""Command-line interface.

Subcommands: dataset gen, train, eval, pam characterize, dsp response,
fsm export-table, scenario run, compare, serve. Every subcommand accepts
--seed and --config; --json prints a machine-readable summary to stdout.
Report paths write figures next to their delimited outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import dsp, fsm, pam
from .compare import run_comparison
from .config import SimConfig
from .loop import (
    BUILTIN_SCENARIOS,
    ModelClassifier,
    Scenario,
    measure_latency,
    replay_motions_1_to_4,
    run_scenario,
)
from .net.checkpoint import load_checkpoint, save_checkpoint
from .net.training import train_all_muscles
from .signals import MOTIONS, Muscle, make_dataset, load_dataset, save_dataset


def _emit(args, payload: dict, human: str | None = None):
    if args.json:
        print(json.dumps(payload, indent=2, default=str))
    elif human is not None:
        print(human)


def _common(parser):
    parser.add_argument("--seed", type=int, default=None, help="override RNG seed")
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable JSON output")
    parser.add_argument("--report-dir", type=Path, default=None,
                        help="directory for figures and delimited reports")


def _load_cfg(args) -> SimConfig:
    return SimConfig.load(args.config, seed=args.seed)


def _report_dir(args) -> Path:
    out = args.report_dir or Path("reports")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_dataset_gen(args) -> int:
    cfg = _load_cfg(args)
    spec = cfg.dataset
    if args.reps:
        from dataclasses import replace

        spec = replace(spec, reps=args.reps)
    dataset = make_dataset(spec)
    out = save_dataset(dataset, args.out)
    payload = {
        "out": str(out),
        "motions": list(spec.motions),
        "reps": spec.reps,
        "repetitions": len(dataset.repetitions),
        "seed": spec.seed,
    }
    _emit(args, payload,
          f"wrote {len(dataset.repetitions)} repetitions to {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    t0 = time.time()
    if args.dataset:
        dataset = load_dataset(args.dataset)
    else:
        dataset = make_dataset(cfg.dataset)
    log = None if args.json else lambda s: print(s, file=sys.stderr)
    models, report = train_all_muscles(dataset, cfg.hyper, log=log)
    ckpt = save_checkpoint(
        args.out, {m: tm.params for m, tm in models.items()}, cfg.hyper
    )
    report["checkpoint"] = str(ckpt)
    report["train_seconds"] = round(time.time() - t0, 1)
    report_dir = _report_dir(args)
    from .reports import confusion_figure, history_figure

    confusion_figure(report, report_dir / "confusion.png")
    history_figure(
        {m.value: tm.history for m, tm in models.items()},
        report_dir / "training_history.png",
    )
    (report_dir / "train_report.json").write_text(
        json.dumps(report, indent=2, default=str)
    )
    human = "\n".join(
        [
            f"pair {p}: accuracy {cm['accuracy']*100:.2f}% "
            f"(reference {report['reference_pair_accuracy'][p]*100:.2f}%)"
            for p, cm in report["pairs"].items()
        ]
        + [f"checkpoint: {ckpt}", f"figures: {report_dir}"]
    )
    _emit(args, report, human)
    return 0


def cmd_eval(args) -> int:
    cfg = _load_cfg(args)
    models, hyper, dsp_cfg = load_checkpoint(args.checkpoint)
    if args.dataset:
        dataset = load_dataset(args.dataset)
    else:
        dataset = make_dataset(cfg.dataset)
    from .net.training import (
        MUSCLE_PAIRS,
        REFERENCE_PAIR_ACCURACY,
        build_muscle_splits,
        evaluate,
    )

    confusions = {}
    for muscle in Muscle:
        splits = build_muscle_splits(dataset, muscle)
        confusions[muscle] = evaluate(models[muscle], splits["test"])
    payload = {
        "per_muscle": {m.value: confusions[m].as_dict() for m in Muscle},
        "pairs": {
            name: (confusions[m1] + confusions[m2]).as_dict()
            for name, (m1, m2) in MUSCLE_PAIRS.items()
        },
        "reference_pair_accuracy": REFERENCE_PAIR_ACCURACY,
    }
    lines = []
    for name, cm in payload["pairs"].items():
        lines.append(f"pair {name}: accuracy {cm['accuracy']*100:.2f}%")
        lines.append(f"  counts: {cm['counts']}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_pam_characterize(args) -> int:
    cfg = _load_cfg(args)
    report_dir = _report_dir(args)
    out_csv = args.out or (report_dir / "pam_characterization.csv")
    pam.characterize_csv(out_csv, cfg.pam)
    curves = pam.characterize(cfg.pam)
    from .reports import pam_curves_figure

    fig = pam_curves_figure(curves, report_dir / "pam_characterization.png")
    payload = {
        "csv": str(out_csv),
        "figure": str(fig),
        "pressures_psi": sorted(curves),
        "anchors": {
            "force_at_80psi_blocked": pam.static_force(80.0, 0.0, cfg.pam),
            "max_contraction_at_80psi": pam.max_contraction(80.0, cfg.pam),
        },
    }
    _emit(args, payload, f"wrote {out_csv} and {fig}")
    return 0


def cmd_dsp_response(args) -> int:
    report_dir = _report_dir(args)
    out_csv = args.out or (report_dir / "filter_response.csv")
    dsp.dump_response_csv(out_csv)
    freq, bp_db, n_db = dsp.frequency_response()
    from .reports import filter_response_figure

    fig = filter_response_figure(freq, bp_db, n_db, report_dir / "filter_response.png")
    _emit(args, {"csv": str(out_csv), "figure": str(fig)},
          f"wrote {out_csv} and {fig}")
    return 0


def cmd_fsm_export(args) -> int:
    out = args.out or Path("reports/transition_table.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    fsm.export_table_csv(out)
    rows = fsm.transition_table()
    _emit(args, {"csv": str(out), "rows": len(rows)},
          f"wrote {len(rows)} transitions to {out}")
    return 0


def cmd_scenario_run(args) -> int:
    cfg = _load_cfg(args)
    if args.file:
        scenario = Scenario.from_json(args.file)
    elif args.name:
        if args.name not in BUILTIN_SCENARIOS:
            print(f"unknown scenario {args.name!r}; "
                  f"choose from {sorted(BUILTIN_SCENARIOS)}", file=sys.stderr)
            return 2
        scenario = BUILTIN_SCENARIOS[args.name]()
    else:
        print("scenario run needs --name or --file", file=sys.stderr)
        return 2
    classifier = None
    if args.checkpoint:
        models, _, _ = load_checkpoint(args.checkpoint)
        classifier = ModelClassifier(models)
    # Precedence: CLI --seed, then the scenario file's seed, then the default.
    seed = args.seed
    if seed is None:
        seed = scenario.seed if scenario.seed is not None else 42
    latency = cfg.latency
    if scenario.latency_overrides:
        from dataclasses import replace

        overrides = dict(scenario.latency_overrides)
        if "cloud_inference_ms" in overrides:
            overrides["cloud_inference_ms"] = tuple(overrides["cloud_inference_ms"])
        latency = replace(latency, **overrides)
    timeline = run_scenario(scenario, latency, seed, classifier=classifier)
    report_dir = _report_dir(args)
    out = args.out or (report_dir / f"{scenario.name}_timeline.jsonl")
    timeline.to_jsonl(out)
    from .reports import timeline_figure

    fig = timeline_figure(timeline, report_dir / f"{scenario.name}_timeline.png")
    payload = {
        "scenario": scenario.name,
        "seed": seed,
        "events": len(timeline.events),
        "timeline": str(out),
        "figure": str(fig),
    }
    if args.measure_latency:
        try:
            payload["latency"] = measure_latency(timeline)
        except ValueError as exc:
            payload["latency_error"] = str(exc)
    human = f"{scenario.name}: {len(timeline.events)} events -> {out}"
    if "latency" in payload:
        lat = payload["latency"]
        human += (
            f"\nlatency mean {lat['mean_ms']:.1f} ms "
            f"[{lat['min_ms']:.1f}, {lat['max_ms']:.1f}] "
            f"spec band ok: {lat['spec_band_ok']} "
            f"(reference band: {lat['reference_band_flag']})"
        )
    _emit(args, payload, human)
    return 0


def cmd_replay(args) -> int:
    cfg = _load_cfg(args)
    models = None
    if args.checkpoint:
        models, _, _ = load_checkpoint(args.checkpoint)
    seed = args.seed if args.seed is not None else 42
    results = replay_motions_1_to_4(cfg.latency, seed, models)
    lines = [
        f"{name}: {'PASS' if results[name]['passed'] else 'FAIL'} "
        f"(entered {results[name]['expected_state']}: {results[name]['entered']})"
        for name in ("motion1", "motion2", "motion3", "motion4")
    ]
    _emit(args, results, "\n".join(lines))
    return 0 if results["all_passed"] else 1


def cmd_compare(args) -> int:
    cfg = _load_cfg(args)
    seed = args.seed if args.seed is not None else 42
    report = run_comparison(
        args.motion,
        assisted=not args.no_assist,
        reps=args.reps,
        load_kg=args.load_kg,
        seed=seed,
        latency=cfg.latency,
        pam_cfg=cfg.pam,
        plant_cfg=cfg.plant,
    )
    report_dir = _report_dir(args)
    stem = f"compare_{args.motion}_load{args.load_kg:g}"
    report.to_json(report_dir / f"{stem}.json")
    from .reports import comparison_figure

    fig = comparison_figure(report, report_dir / f"{stem}.png")
    payload = json.loads(report.to_json())
    payload["figure"] = str(fig)
    human = (
        f"{args.motion} (load {args.load_kg:g} kg): "
        f"unassisted {report.unassisted_mean_pct_mvc:.1f}%MVC, "
        f"assisted {report.assisted_mean_pct_mvc:.1f}%MVC, "
        f"reduction ratio {report.reduction_ratio:.2f}x"
    )
    _emit(args, payload, human)
    return 0


def cmd_serve(args) -> int:
    from .gateway import serve

    cfg = _load_cfg(args)
    scenario = BUILTIN_SCENARIOS[args.scenario]()
    models = None
    if args.checkpoint:
        models, _, _ = load_checkpoint(args.checkpoint)
    seed = args.seed if args.seed is not None else 42
    print(
        f"serving scenario {scenario.name!r} on tcp://{args.host}:{args.port}"
        + (f" and ws://{args.host}:{args.ws_port}" if args.ws_port else ""),
        file=sys.stderr,
    )
    serve(
        scenario,
        host=args.host,
        port=args.port,
        ws_port=args.ws_port,
        latency=cfg.latency,
        seed=seed,
        speed=args.speed,
        models=models,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exosim",
        description="Intent-driven upper-limb exoskeleton simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dataset = sub.add_parser("dataset", help="dataset tools")
    dataset_sub = p_dataset.add_subparsers(dest="subcommand", required=True)
    p_gen = dataset_sub.add_parser("gen", help="generate a labeled dataset")
    p_gen.add_argument("--out", type=Path, required=True)
    p_gen.add_argument("--reps", type=int, default=None)
    _common(p_gen)
    p_gen.set_defaults(func=cmd_dataset_gen)

    p_train = sub.add_parser("train", help="train the four muscle models")
    p_train.add_argument("--dataset", type=Path, default=None,
                         help="dataset directory (default: synthetic in-memory)")
    p_train.add_argument("--out", type=Path, default=Path("exosim.ckpt.json"))
    _common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a test split")
    p_eval.add_argument("--checkpoint", type=Path, required=True)
    p_eval.add_argument("--dataset", type=Path, default=None)
    _common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_pam = sub.add_parser("pam", help="actuator tools")
    pam_sub = p_pam.add_subparsers(dest="subcommand", required=True)
    p_char = pam_sub.add_parser("characterize",
                                help="force/contraction sweep, 10-80 psi")
    p_char.add_argument("--out", type=Path, default=None)
    _common(p_char)
    p_char.set_defaults(func=cmd_pam_characterize)

    p_dsp = sub.add_parser("dsp", help="signal chain tools")
    dsp_sub = p_dsp.add_subparsers(dest="subcommand", required=True)
    p_resp = dsp_sub.add_parser("response", help="dump filter frequency response")
    p_resp.add_argument("--out", type=Path, default=None)
    _common(p_resp)
    p_resp.set_defaults(func=cmd_dsp_response)

    p_fsm = sub.add_parser("fsm", help="state machine tools")
    fsm_sub = p_fsm.add_subparsers(dest="subcommand", required=True)
    p_table = fsm_sub.add_parser("export-table", help="write the transition table")
    p_table.add_argument("--out", type=Path, default=None)
    _common(p_table)
    p_table.set_defaults(func=cmd_fsm_export)

    p_scenario = sub.add_parser("scenario", help="closed-loop scenario tools")
    scen_sub = p_scenario.add_subparsers(dest="subcommand", required=True)
    p_run = scen_sub.add_parser("run", help="run a scenario, export the timeline")
    p_run.add_argument("--name", default=None,
                       help=f"builtin: {', '.join(sorted(BUILTIN_SCENARIOS))}")
    p_run.add_argument("--file", type=Path, default=None, help="scenario JSON")
    p_run.add_argument("--checkpoint", type=Path, default=None,
                       help="classify with trained models instead of labels")
    p_run.add_argument("--out", type=Path, default=None)
    p_run.add_argument("--measure-latency", action="store_true")
    _common(p_run)
    p_run.set_defaults(func=cmd_scenario_run)
    p_rep = scen_sub.add_parser("replay-motions",
                                help="replay the four demo motions")
    p_rep.add_argument("--checkpoint", type=Path, default=None)
    _common(p_rep)
    p_rep.set_defaults(func=cmd_replay)

    p_cmp = sub.add_parser("compare", help="assisted vs unassisted EMG reduction")
    p_cmp.add_argument("--motion", required=True, choices=list(MOTIONS))
    p_cmp.add_argument("--load-kg", type=float, default=0.0)
    p_cmp.add_argument("--reps", type=int, default=5)
    p_cmp.add_argument("--no-assist", action="store_true",
                       help="disable assistance in the assisted arm (control)")
    _common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_serve = sub.add_parser("serve", help="run the telemetry/command gateway")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--ws-port", type=int, default=None)
    p_serve.add_argument("--scenario", default="idle",
                         choices=sorted(BUILTIN_SCENARIOS))
    p_serve.add_argument("--speed", type=float, default=1.0)
    p_serve.add_argument("--checkpoint", type=Path, default=None)
    _common(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
