"""Command-line surface: split / validate / evaluate / ensemble / report / synth.

Exit codes: 0 success, 1 validation or domain error, 2 I/O or environment
error.  All randomness enters through --seed and every command is
idempotent: identical inputs produce byte-identical outputs, and no
partial files are left behind on failure.

A config file of ``key = value`` lines may supply any long option;
explicit flags override it.  HEMOBENCH_JOBS is the fallback for --jobs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .core import ClassTaxonomy, ValidationError, slugify
from .ensemble import (
    TIE_POLICIES,
    ValidationData,
    config_to_dict,
    ensemble_predict,
    select_members,
)
from .formats import (
    discover_prediction_files,
    load_manifest,
    load_plan,
    load_predictions,
    read_json,
    save_plan,
    atomic_write_text,
    write_json,
)
from .metrics import (
    AGGREGATION_MODES,
    evaluate,
    evaluate_labels,
    result_from_dict,
    result_to_dict,
)
from .report import (
    confusion_csv_name,
    load_references,
    render_comparison_table,
    render_confusion,
    render_model_table,
    render_report_markdown,
)
from .split import SplitRatios, plan_split, verify_split
from .synth import SynthModelSpec, synth_manifest, write_synth_predictions

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _err(message: str) -> None:
    print(f"hemobench: error: {message}", file=sys.stderr)


def _warn(message: str) -> None:
    print(f"hemobench: warning: {message}", file=sys.stderr)


def _file_sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _provenance(command: str, inputs: dict[str, Path], config: dict) -> dict:
    return {
        "tool": {"name": "hemobench", "version": __version__},
        "command": command,
        "inputs": {
            key: {"file": path.name, "sha256": _file_sha256(path)}
            for key, path in sorted(inputs.items())
        },
        "config": config,
    }


def _jobs_default(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("HEMOBENCH_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            _warn(f"ignoring non-integer HEMOBENCH_JOBS={env!r}")
    return max(1, os.cpu_count() or 1)


def _load_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path}: line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merged(args: argparse.Namespace, key: str, default=None):
    """Flag value if given, else config-file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    return getattr(args, "_config", {}).get(key, default)


# ---------------------------------------------------------------------------
# split


def cmd_split(args) -> int:
    manifest_path = Path(_required(args, "manifest"))
    out_path = Path(_required(args, "out"))
    ratios = SplitRatios.parse(str(_merged(args, "ratios", "0.64,0.24,0.12")))
    seed = int(_merged(args, "seed", 0))
    manifest = load_manifest(manifest_path)
    plan = plan_split(manifest, ratios, seed)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_plan(plan, out_path)
    counts = {s: 0 for s in ("train", "val", "test")}
    for split in plan.assignments.values():
        counts[split] += 1
    print(
        f"wrote {out_path} ({len(plan.assignments)} samples: "
        f"{counts['train']} train / {counts['val']} val / {counts['test']} test)"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    manifest_path = Path(_required(args, "manifest"))
    plan_path = _merged(args, "plan")
    pred_dir = _merged(args, "pred_dir")

    failures = 0
    warnings = 0

    def check(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "ok" if ok else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f": {detail}"
        print(line)
        if not ok:
            failures += 1

    try:
        manifest = load_manifest(manifest_path)
        check("manifest", True, f"{len(manifest)} samples")
    except ValidationError as exc:
        check("manifest", False, str(exc))
        print(f"{failures} check(s) failed")
        return EXIT_VALIDATION

    plan = None
    if plan_path:
        try:
            plan = load_plan(Path(plan_path))
            verification = verify_split(manifest, plan)
            for entry in verification.checks:
                check(f"plan.{entry.name}", entry.passed, entry.detail)
        except ValidationError as exc:
            check("plan", False, str(exc))

    if pred_dir:
        files = discover_prediction_files(Path(pred_dir))
        if not files:
            check("predictions", False, f"no prediction files in {pred_dir}")
        for path in files:
            try:
                preds = load_predictions(path, manifest.taxonomy, manifest)
                check(f"predictions.{path.name}", True, f"{len(preds.sample_ids)} rows")
                missing_meta = [
                    key
                    for key in ("seed", "input_size", "epochs")
                    if key not in preds.metadata
                ]
                if missing_meta:
                    _warn(
                        f"{path.name}: sidecar missing recommended "
                        f"key(s): {', '.join(missing_meta)}"
                    )
                    warnings += 1
                if plan is not None:
                    covered = set(preds.sample_ids)
                    full = [
                        s
                        for s in ("train", "val", "test")
                        if set(plan.ids_for(s)) <= covered
                    ]
                    if not full:
                        _warn(f"{path.name}: does not fully cover any split")
                        warnings += 1
            except ValidationError as exc:
                check(f"predictions.{path.name}", False, str(exc))

    if failures:
        print(f"{failures} check(s) failed")
        return EXIT_VALIDATION
    print(f"all checks passed ({warnings} warning(s))")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate


def _evaluate_one(path, manifest, plan, split, aggregation):
    preds = load_predictions(path, manifest.taxonomy, manifest)
    result = evaluate(preds, manifest, plan, split, aggregation=aggregation)
    source = {
        "file": path.name,
        "architecture": preds.architecture,
        "score_kind": preds.score_kind,
    }
    source.update(
        {k: preds.metadata[k] for k in ("seed", "input_size", "epochs")
         if k in preds.metadata}
    )
    return result, source


def cmd_evaluate(args) -> int:
    manifest_path = Path(_required(args, "manifest"))
    plan_path = Path(_required(args, "plan"))
    pred_dir = Path(_required(args, "pred_dir"))
    out_dir = Path(_required(args, "out"))
    split = str(_merged(args, "split", "test"))
    aggregation = str(_merged(args, "aggregation", "macro"))
    if aggregation not in AGGREGATION_MODES:
        raise ValidationError(f"unknown aggregation mode {aggregation!r}")
    jobs_opt = _merged(args, "jobs")
    jobs = _jobs_default(int(jobs_opt) if jobs_opt is not None else None)

    manifest = load_manifest(manifest_path)
    plan = load_plan(plan_path)
    files = discover_prediction_files(pred_dir)
    if not files:
        raise ValidationError(f"no prediction files in {pred_dir}")

    results = []
    failed = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = {
            path: pool.submit(_evaluate_one, path, manifest, plan, split, aggregation)
            for path in files
        }
        for path in files:
            try:
                results.append(futures[path].result())
            except (ValidationError, OSError, json.JSONDecodeError) as exc:
                _warn(f"skipping {path.name}: {exc}")
                failed.append(path.name)
    if not results:
        raise ValidationError("all prediction files failed validation")

    # deterministic output order regardless of scheduling
    results.sort(key=lambda pair: pair[0].model_name)
    out_dir.mkdir(parents=True, exist_ok=True)
    for result, source in results:
        doc = result_to_dict(result, source=source)
        write_json(out_dir / f"{slugify(result.model_name)}.result.json", doc)

    table = render_model_table([r for r, _ in results])
    atomic_write_text(out_dir / "report.md", render_report_markdown(table))
    atomic_write_text(out_dir / "report.csv", table.to_csv())
    provenance = _provenance(
        "evaluate",
        {"manifest": manifest_path, "plan": plan_path},
        {
            "split": split,
            "aggregation": aggregation,
            "models": [r.model_name for r, _ in results],
            "skipped": failed,
        },
    )
    write_json(out_dir / "provenance.json", provenance)
    print(f"evaluated {len(results)} model(s) on {split} -> {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ensemble


def cmd_ensemble(args) -> int:
    manifest_path = Path(_required(args, "manifest"))
    plan_path = Path(_required(args, "plan"))
    pred_dir = Path(_required(args, "pred_dir"))
    results_dir = Path(_required(args, "results"))
    out_dir = Path(_required(args, "out"))
    k = int(_merged(args, "k", 4))
    policy = str(_merged(args, "policy", "sum_prob"))
    selection = str(_merged(args, "selection", "paper"))
    aggregation = str(_merged(args, "aggregation", "macro"))
    if k < 1:
        raise ValidationError("k must be >= 1")
    if policy not in TIE_POLICIES:
        raise ValidationError(f"unknown tie policy {policy!r}")
    if selection not in ("paper", "validation"):
        raise ValidationError("selection must be 'paper' or 'validation'")

    manifest = load_manifest(manifest_path)
    plan = load_plan(plan_path)
    files = discover_prediction_files(pred_dir)
    if not files:
        raise ValidationError(f"no prediction files in {pred_dir}")
    predictions = {}
    for path in files:
        preds = load_predictions(path, manifest.taxonomy, manifest)
        predictions[preds.model_name] = preds

    label_of = manifest.labels_by_id()
    val_ids = tuple(plan.ids_for("val"))
    validation = ValidationData(
        sample_ids=val_ids,
        true_labels=tuple(label_of[sid] for sid in val_ids),
        predictions=predictions,
    )

    # candidate ranking: stored test results in paper mode, fresh
    # validation evaluations otherwise
    if selection == "paper":
        selection_metric = "test_accuracy"
        candidates = []
        for path in sorted(results_dir.glob("*.result.json")):
            doc = read_json(path)
            result = result_from_dict(doc)
            if result.model_name not in predictions:
                raise ValidationError(
                    f"result {path.name} has no matching prediction file"
                )
            candidates.append((result.model_name, result))
    else:
        selection_metric = "validation_accuracy"
        candidates = [
            (name, evaluate(preds, manifest, plan, "val", aggregation=aggregation))
            for name, preds in sorted(predictions.items())
        ]
    if len(candidates) < k:
        raise ValidationError(f"need at least k={k} candidates, got {len(candidates)}")

    config, record = select_members(
        candidates,
        k,
        tie_policy=policy,
        selection_metric=selection_metric,
        validation=validation,
    )

    test_ids = plan.ids_for("test")
    members = [predictions[name] for name in config.members]
    predicted = ensemble_predict(members, test_ids, policy)
    true = [label_of[sid] for sid in test_ids]
    ensemble_result = evaluate_labels(
        true,
        predicted,
        manifest.taxonomy,
        model_name="Ensemble (majority vote)",
        split="test",
        aggregation=aggregation,
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "ensemble.result.json", result_to_dict(ensemble_result))
    write_json(out_dir / "ensemble.config.json", config_to_dict(config, record))

    member_results = []
    for name in config.members:
        path = results_dir / f"{slugify(name)}.result.json"
        if path.exists():
            member_results.append(result_from_dict(read_json(path)))
    comparison = render_comparison_table(
        member_results, ensemble_result, load_references(args.references)
    )
    atomic_write_text(out_dir / "comparison.md", comparison.to_markdown())
    atomic_write_text(out_dir / "comparison.csv", comparison.to_csv())

    provenance = _provenance(
        "ensemble",
        {"manifest": manifest_path, "plan": plan_path},
        {
            "k": k,
            "tie_policy": policy,
            "selection": selection,
            "selection_metric": selection_metric,
            "aggregation": aggregation,
            "members": list(config.members),
            "selection_record": record.to_dict(),
        },
    )
    write_json(out_dir / "provenance.json", provenance)
    print(f"ensemble members: {', '.join(config.members)} -> {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    results_dir = Path(_required(args, "results"))
    out_dir = Path(_required(args, "out"))
    ensemble_path = _merged(args, "ensemble_result")

    results = []
    for path in sorted(results_dir.glob("*.result.json")):
        if path.name == "ensemble.result.json":
            continue
        results.append(result_from_dict(read_json(path)))
    if not results:
        raise ValidationError(f"no result files in {results_dir}")
    ensemble_result = (
        result_from_dict(read_json(ensemble_path)) if ensemble_path else None
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    model_table = render_model_table(results)
    comparison = None
    if ensemble_result is not None:
        comparison = render_comparison_table(
            results, ensemble_result, load_references(args.references)
        )
        atomic_write_text(out_dir / "comparison.csv", comparison.to_csv())

    confusions = []
    everything = results + ([ensemble_result] if ensemble_result else [])
    for result in everything:
        grid = render_confusion(result.confusion, normalize="counts")
        atomic_write_text(out_dir / confusion_csv_name(result.model_name), grid.to_csv())
        confusions.append(
            (result.model_name, render_confusion(result.confusion, "row_percent"))
        )

    provenance = _provenance(
        "report",
        {},
        {"models": [r.model_name for r in results],
         "ensemble": bool(ensemble_result)},
    )
    prov_lines = [
        f"tool: hemobench {__version__}",
        f"models: {', '.join(r.model_name for r in results)}",
    ]
    atomic_write_text(
        out_dir / "report.md",
        render_report_markdown(model_table, comparison, confusions, prov_lines),
    )
    atomic_write_text(out_dir / "report.csv", model_table.to_csv())
    write_json(out_dir / "provenance.json", provenance)
    print(f"report for {len(results)} model(s) -> {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth


def cmd_synth_manifest(args) -> int:
    out_path = Path(_required(args, "out"))
    counts = None
    counts_opt = _merged(args, "counts")
    if counts_opt:
        taxonomy = ClassTaxonomy.canonical()
        values = [int(v) for v in str(counts_opt).split(",")]
        if len(values) != taxonomy.count:
            raise ValidationError(
                f"expected {taxonomy.count} comma-separated counts"
            )
        counts = dict(zip(taxonomy.classes, values))
    manifest = synth_manifest(counts)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    from .formats import save_manifest

    save_manifest(manifest, out_path)
    print(f"wrote {out_path} ({len(manifest)} samples)")
    return EXIT_OK


def cmd_synth_predictions(args) -> int:
    manifest_path = Path(_required(args, "manifest"))
    plan_path = Path(_required(args, "plan"))
    models_path = Path(_required(args, "models"))
    out_dir = Path(_required(args, "out"))

    manifest = load_manifest(manifest_path)
    plan = load_plan(plan_path)
    specs = [SynthModelSpec.from_dict(doc) for doc in read_json(models_path)]
    out_dir.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        path = write_synth_predictions(manifest, plan, spec, out_dir)
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser plumbing


def _required(args, key: str):
    value = _merged(args, key)
    if value is None:
        raise ValidationError(f"missing required option --{key.replace('_', '-')}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hemobench",
        description="Blood cell classification benchmark harness.",
    )
    parser.add_argument("--version", action="version", version=f"hemobench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file; flags override")

    p_split = sub.add_parser("split", help="plan a stratified train/val/test split")
    common(p_split)
    p_split.add_argument("--manifest")
    p_split.add_argument("--ratios", help="train,val,test fractions (default 0.64,0.24,0.12)")
    p_split.add_argument("--seed", type=int)
    p_split.add_argument("--out", help="output plan CSV path")
    p_split.set_defaults(func=cmd_split)

    p_val = sub.add_parser("validate", help="check manifest / plan / prediction files")
    common(p_val)
    p_val.add_argument("--manifest")
    p_val.add_argument("--plan")
    p_val.add_argument("--pred-dir", dest="pred_dir")
    p_val.set_defaults(func=cmd_validate)

    p_eval = sub.add_parser("evaluate", help="score prediction files on one split")
    common(p_eval)
    p_eval.add_argument("--manifest")
    p_eval.add_argument("--plan")
    p_eval.add_argument("--pred-dir", dest="pred_dir")
    p_eval.add_argument("--split", choices=("train", "val", "test"))
    p_eval.add_argument("--aggregation", choices=AGGREGATION_MODES)
    p_eval.add_argument("--jobs", type=int, help="parallel evaluations (env HEMOBENCH_JOBS)")
    p_eval.add_argument("--out")
    p_eval.set_defaults(func=cmd_evaluate)

    p_ens = sub.add_parser("ensemble", help="select members and run the majority vote")
    common(p_ens)
    p_ens.add_argument("--manifest")
    p_ens.add_argument("--plan")
    p_ens.add_argument("--pred-dir", dest="pred_dir")
    p_ens.add_argument("--results", help="directory of *.result.json from evaluate")
    p_ens.add_argument("--k", type=int)
    p_ens.add_argument("--policy", choices=TIE_POLICIES)
    p_ens.add_argument("--selection", choices=("paper", "validation"))
    p_ens.add_argument("--aggregation", choices=AGGREGATION_MODES)
    p_ens.add_argument("--references", help="references JSON (default: bundled)")
    p_ens.add_argument("--out")
    p_ens.set_defaults(func=cmd_ensemble)

    p_rep = sub.add_parser("report", help="render tables from stored results")
    common(p_rep)
    p_rep.add_argument("--results")
    p_rep.add_argument("--ensemble-result", dest="ensemble_result")
    p_rep.add_argument("--references")
    p_rep.add_argument("--out")
    p_rep.set_defaults(func=cmd_report)

    p_synth = sub.add_parser("synth", help="generate synthetic fixtures")
    synth_sub = p_synth.add_subparsers(dest="synth_command", required=True)
    p_sm = synth_sub.add_parser("manifest", help="synthetic manifest CSV")
    common(p_sm)
    p_sm.add_argument("--out")
    p_sm.add_argument("--counts", help="per-class sample counts, comma separated")
    p_sm.set_defaults(func=cmd_synth_manifest)
    p_sp = synth_sub.add_parser("predictions", help="seeded synthetic prediction files")
    common(p_sp)
    p_sp.add_argument("--manifest")
    p_sp.add_argument("--plan")
    p_sp.add_argument("--models", help="JSON list of synthetic model specs")
    p_sp.add_argument("--out")
    p_sp.set_defaults(func=cmd_synth_predictions)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = _load_config_file(getattr(args, "config", None))
    except FileNotFoundError as exc:
        _err(str(exc))
        return EXIT_IO
    except ValidationError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ValidationError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_IO


def main_entry() -> None:
    sys.exit(main())
