"""Command-line entry point and experiment orchestration.

Subcommands cover the full workflow: ``generate`` and ``validate``
materialize and check task bundles on disk, ``train``/``predict``/
``evaluate`` handle single cells and external prediction files, and
``run-matrix`` sweeps every (learner, task, rate) cell, applies the
control filter, and emits reports, a summary CSV, text matrices, and
figures.

Exit codes: 0 success, 2 validation or schema failure, 3 when matrix
cells failed (remaining cells still complete).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import functools
import json
import os
import sys
from dataclasses import dataclass, fields

import yaml

from .assembly import (
    AssemblyError,
    INOCULATION_RATES,
    TaskSpec,
    assemble_task,
    mix_inoculation,
    read_bundle,
    validate_bundle,
    write_bundle,
)
from .features import LINGUISTIC_FEATURES, SURFACE_FEATURES, task_features
from .figures import render_figures
from .learners import (
    LEARNER_IDS,
    LearnerError,
    TrainConfig,
    dump_weights,
    load_model,
    save_model,
    train_learner,
)
from .lexicon import load_lexicon
from .metrics import (
    DEFAULT_CONTROL_THRESHOLD,
    EvalReport,
    MetricsError,
    aggregate,
    build_report,
    read_predictions,
    read_report,
    render_matrix_text,
    render_rate_summary,
    write_predictions,
    write_summary_csv,
)
from .templates import load_templates

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CELL_FAILURES = 3

DEFAULT_AMBIGUOUS_TOTAL = 50_000
DEFAULT_CONTROL_TOTAL = 30_000


def default_task_ids(enable_lexical_semantics=False):
    """All 20 ambiguous tasks plus the control tasks, in canonical order."""
    ambiguous = [
        f"{linguistic}_x_{surface}"
        for linguistic in LINGUISTIC_FEATURES
        for surface in SURFACE_FEATURES
    ]
    controls = [f"control_{feature}" for feature in
                LINGUISTIC_FEATURES + SURFACE_FEATURES]
    if enable_lexical_semantics:
        controls.append("control_lexical_semantics")
    return tuple(ambiguous + controls)


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one invocation; YAML file plus flag overrides."""

    out_dir: str = "out"
    reports_dir: str = "reports"
    lexicon_path: str | None = None
    templates_path: str | None = None
    tasks: tuple = ()
    rates: tuple = INOCULATION_RATES
    learners: tuple = LEARNER_IDS
    seed: int = 0
    threshold: float = DEFAULT_CONTROL_THRESHOLD
    ambiguous_size: int = DEFAULT_AMBIGUOUS_TOTAL
    control_size: int = DEFAULT_CONTROL_TOTAL
    enable_lexical_semantics: bool = False
    allow_custom_rates: bool = False
    jobs: int = 0  # 0 means "use the CPU count"

    @property
    def task_ids(self):
        if self.tasks:
            return tuple(self.tasks)
        return default_task_ids(self.enable_lexical_semantics)

    @property
    def worker_count(self):
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)


class ConfigError(ValueError):
    pass


def load_config(path=None, overrides=None):
    """Build a RunConfig from an optional YAML file and CLI overrides."""
    values = {}
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            payload = yaml.safe_load(handle) or {}
        if not isinstance(payload, dict):
            raise ConfigError(f"{path}: config must be a mapping")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
        values.update(payload)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("tasks", "rates", "learners"):
        if key in values and values[key] is not None:
            values[key] = tuple(values[key])
    config = RunConfig(**values)
    _check_config(config)
    return config


def _check_config(config):
    canonical = set(INOCULATION_RATES)
    if not config.allow_custom_rates:
        bad = [r for r in config.rates if r not in canonical]
        if bad:
            raise ConfigError(
                f"non-canonical inoculation rates {bad}; canonical rates are "
                f"{sorted(canonical)} (pass --allow-custom-rates to override)")
    for rate in config.rates:
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"inoculation rate out of range: {rate}")
    known_learners = set(LEARNER_IDS)
    bad = [l for l in config.learners if l not in known_learners]
    if bad:
        raise ConfigError(f"unknown learners {bad}; available: {LEARNER_IDS}")
    valid_tasks = set(default_task_ids(True))
    bad = [t for t in config.task_ids if t not in valid_tasks]
    if bad:
        raise ConfigError(f"unknown tasks {bad}")
    if config.threshold < -1.0 or config.threshold > 1.0:
        raise ConfigError(f"threshold must lie in [-1, 1]: {config.threshold}")


def _task_total(config, task_id):
    return (config.control_size if task_id.startswith("control_")
            else config.ambiguous_size)


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


# --- resources shared by worker processes -----------------------------------

@functools.lru_cache(maxsize=1)
def _resources(lexicon_path, templates_path):
    return load_lexicon(lexicon_path), load_templates(templates_path)


@functools.lru_cache(maxsize=2)
def _cached_bundle(task_dir):
    return read_bundle(task_dir)


def _scorable_records(bundle):
    """Everything except the unreleased inoculation pool.

    After mixing, swapped-in training records keep their pool condition;
    they ride along unscored but their uids stay known to the scorer.
    """
    out = []
    for condition, items in bundle.records.items():
        if condition == "inoculating":
            continue
        out.extend(items)
    return out


def _generate_one(args):
    """Worker: assemble, validate, and write a single task bundle."""
    (task_id, total, seed, rate, out_dir, lexicon_path, templates_path) = args
    lexicon, templates = _resources(lexicon_path, templates_path)
    spec = TaskSpec.make(task_id, total_size=total, seed=seed)
    bundle = assemble_task(spec, lexicon, templates)
    if rate and not spec.is_control:
        bundle = mix_inoculation(bundle, rate)
    report = validate_bundle(bundle, lexicon)
    if not report.ok:
        first = report.violations[0]
        return (task_id, False,
                f"{len(report.violations)} violation(s); first: "
                f"uid={first.uid} {first.code}: {first.message}")
    task_dir = os.path.join(out_dir, task_id)
    write_bundle(bundle, task_dir)
    n = sum(len(v) for v in bundle.records.values())
    return (task_id, True, f"{n} records -> {task_dir}")


def cmd_generate(config, rate=0.0):
    jobs = min(config.worker_count, len(config.task_ids))
    work = [
        (task_id, _task_total(config, task_id), config.seed, rate,
         config.out_dir, config.lexicon_path, config.templates_path)
        for task_id in config.task_ids
    ]
    os.makedirs(config.out_dir, exist_ok=True)
    if jobs <= 1:
        results = [_generate_one(item) for item in work]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_generate_one, work))
    failures = 0
    for task_id, ok, message in results:
        print(f"{'ok  ' if ok else 'FAIL'} {task_id}: {message}")
        if not ok:
            failures += 1
    return EXIT_VALIDATION if failures else EXIT_OK


def cmd_validate(config):
    lexicon, _ = _resources(config.lexicon_path, config.templates_path)
    failures = 0
    for task_id in config.task_ids:
        task_dir = os.path.join(config.out_dir, task_id)
        if not os.path.isdir(task_dir):
            print(f"FAIL {task_id}: missing bundle directory {task_dir}")
            failures += 1
            continue
        bundle = read_bundle(task_dir)
        report = validate_bundle(bundle, lexicon)
        if report.ok:
            print(f"ok   {task_id}: {report.n_records} records")
        else:
            failures += 1
            print(f"FAIL {task_id}: {len(report.violations)} violation(s)")
            for violation in report.violations[:5]:
                print(f"     uid={violation.uid} {violation.code}: "
                      f"{violation.message}")
    return EXIT_VALIDATION if failures else EXIT_OK


# --- matrix ------------------------------------------------------------------

def _control_mcc_key(task_id):
    linguistic, surface = task_features(task_id)
    return {
        "control_linguistic": f"control_{linguistic}",
        "control_surface": f"control_{surface}",
    }


def _run_cell(args):
    """Worker: one (learner, task, rate) cell; returns a report dict."""
    (learner_id, task_dir, rate, threshold, control_mcc) = args
    bundle = _cached_bundle(task_dir)
    if rate and not bundle.task.is_control:
        bundle = mix_inoculation(bundle, rate)
    model = train_learner(learner_id, bundle)
    scored = _scorable_records(bundle)
    predictions = model.predict(scored)
    notes = ()
    diagnostics = getattr(model, "diagnostics", None)
    if diagnostics and not diagnostics.get("converged", True):
        notes = (f"training did not converge: final_loss="
                 f"{diagnostics['final_loss']:.6f} "
                 f"grad_norm={diagnostics['grad_norm']:.3g}",)
    report = build_report(
        bundle.task.task_id, learner_id, rate, scored, predictions,
        threshold=threshold, control_mcc=control_mcc, notes=notes)
    return report.to_dict()


def _report_path(reports_dir, learner_id, task_id, rate):
    return os.path.join(reports_dir, learner_id, f"{task_id}@{rate:g}.json")


def cmd_run_matrix(config):
    task_ids = config.task_ids
    control_tasks = [t for t in task_ids if t.startswith("control_")]
    ambiguous_tasks = [t for t in task_ids if not t.startswith("control_")]
    for task_id in task_ids:
        task_dir = os.path.join(config.out_dir, task_id)
        if not os.path.isdir(task_dir):
            print(f"error: missing bundle for {task_id} under {config.out_dir}; "
                  f"run `biasprobe generate` first", file=sys.stderr)
            return EXIT_VALIDATION

    expected = len(config.learners) * (
        len(control_tasks) + len(ambiguous_tasks) * len(config.rates))
    control_plan = [(learner, task) for learner in config.learners
                    for task in control_tasks]
    ambiguous_plan = [(learner, task, rate) for learner in config.learners
                      for task in ambiguous_tasks for rate in config.rates]
    assert len(control_plan) + len(ambiguous_plan) == expected, \
        "matrix plan does not match the configured cell count"
    print(f"matrix: {expected} cells "
          f"({len(control_plan)} control, {len(ambiguous_plan)} ambiguous)")

    jobs = min(config.worker_count, max(len(control_plan), len(ambiguous_plan), 1))
    reports = []
    failures = []

    def run_phase(plan, make_args):
        results = []
        work = [make_args(*cell) for cell in plan]
        if jobs <= 1 or len(work) <= 1:
            outcomes = []
            for cell, args in zip(plan, work):
                try:
                    outcomes.append((cell, _run_cell(args), None))
                except Exception as exc:  # cell isolation: matrix must finish
                    outcomes.append((cell, None, f"{type(exc).__name__}: {exc}"))
        else:
            outcomes = []
            with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = {pool.submit(_run_cell, args): cell
                           for cell, args in zip(plan, work)}
                for future in concurrent.futures.as_completed(futures):
                    cell = futures[future]
                    try:
                        outcomes.append((cell, future.result(), None))
                    except Exception as exc:
                        outcomes.append(
                            (cell, None, f"{type(exc).__name__}: {exc}"))
        for cell, payload, error in sorted(outcomes, key=lambda x: str(x[0])):
            if error is not None:
                failures.append((cell, error))
                print(f"FAIL {cell}: {error}")
                continue
            report = EvalReport.from_dict(payload)
            results.append(report)
            path = _report_path(config.reports_dir, report.learner_id,
                                report.task_id, report.inoculation_rate)
            os.makedirs(os.path.dirname(path), exist_ok=True)
            _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return results

    # Phase 1: control tasks; their out-of-domain scores feed the filter.
    control_reports = run_phase(
        control_plan,
        lambda learner, task: (
            learner, os.path.join(config.out_dir, task), 0.0,
            config.threshold, None))
    reports.extend(control_reports)
    control_out = {
        (r.learner_id, r.task_id): r.mcc.get("control_out")
        for r in control_reports
    }

    def ambiguous_args(learner, task, rate):
        wanted = _control_mcc_key(task)
        control_mcc = {
            key: control_out.get((learner, control_task))
            for key, control_task in wanted.items()
            if (learner, control_task) in control_out
        }
        return (learner, os.path.join(config.out_dir, task), rate,
                config.threshold, control_mcc)

    reports.extend(run_phase(ambiguous_plan, ambiguous_args))

    write_outputs(reports, config)
    done = len(reports)
    print(f"completed {done}/{expected} cells; "
          f"{len(failures)} failed")
    return EXIT_CELL_FAILURES if failures else EXIT_OK


def write_outputs(reports, config):
    """Summary CSV, text matrices, and figures for a set of reports."""
    os.makedirs(config.reports_dir, exist_ok=True)
    write_summary_csv(reports, os.path.join(config.reports_dir, "summary.csv"))
    table = aggregate(reports)
    blocks = []
    for learner_id in table.learners:
        for rate in table.rates:
            if any(key[0] == learner_id and key[1] == rate for key in table.cells):
                blocks.append(render_matrix_text(table, learner_id, rate))
        if any(key[0] == learner_id for key in table.cells):
            blocks.append(render_rate_summary(table, learner_id))
    if blocks:
        _atomic_write(os.path.join(config.reports_dir, "matrix.txt"),
                      "\n\n".join(blocks) + "\n")
    figure_dir = os.path.join(config.reports_dir, "figures")
    written = render_figures(table, figure_dir)
    print(f"wrote summary.csv, matrix.txt, and {len(written)} figure file(s) "
          f"under {config.reports_dir}")


def cmd_report(config):
    reports = []
    if not os.path.isdir(config.reports_dir):
        print(f"error: no reports directory at {config.reports_dir}",
              file=sys.stderr)
        return EXIT_VALIDATION
    for root, _, names in os.walk(config.reports_dir):
        for name in sorted(names):
            if name.endswith(".json"):
                reports.append(read_report(os.path.join(root, name)))
    if not reports:
        print(f"error: no report files under {config.reports_dir}",
              file=sys.stderr)
        return EXIT_VALIDATION
    write_outputs(reports, config)
    return EXIT_OK


# --- single-cell commands ----------------------------------------------------

def cmd_train(task_dir, learner_id, rate, model_out, weights_out=None):
    bundle = read_bundle(task_dir)
    if rate and not bundle.task.is_control:
        bundle = mix_inoculation(bundle, rate)
    model = train_learner(learner_id, bundle, TrainConfig())
    save_model(model, model_out)
    if weights_out:
        _atomic_write(weights_out, dump_weights(model))
    diagnostics = getattr(model, "diagnostics", None)
    if diagnostics:
        status = "converged" if diagnostics.get("converged") else "NOT converged"
        print(f"trained {learner_id} on {bundle.task.task_id} rate={rate:g}: "
              f"{status} (loss={diagnostics['final_loss']:.6f}, "
              f"grad_norm={diagnostics['grad_norm']:.3g})")
    else:
        print(f"prepared {learner_id} (no training required)")
    print(f"model -> {model_out}")
    return EXIT_OK


def cmd_predict(model_path, task_dir, conditions, out_path, rate=0.0):
    model = load_model(model_path)
    bundle = read_bundle(task_dir)
    if rate and not bundle.task.is_control:
        bundle = mix_inoculation(bundle, rate)
    wanted = conditions or [c for c in bundle.records if c != "inoculating"]
    missing = [c for c in wanted if c not in bundle.records]
    if missing:
        print(f"error: conditions not in bundle: {missing}", file=sys.stderr)
        return EXIT_VALIDATION
    records = [r for c in wanted for r in bundle.records[c]]
    write_predictions(model.predict(records), out_path)
    print(f"wrote {len(records)} predictions -> {out_path}")
    return EXIT_OK


def cmd_evaluate(task_dir, predictions_path, learner_id, rate, threshold,
                 report_out=None, rate_in_bundle=0.0):
    bundle = read_bundle(task_dir)
    if rate_in_bundle and not bundle.task.is_control:
        bundle = mix_inoculation(bundle, rate_in_bundle)
    try:
        predictions = read_predictions(predictions_path)
        records = _scorable_records(bundle)
        report = build_report(bundle.task.task_id, learner_id, rate, records,
                              predictions, threshold=threshold)
    except MetricsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    print(payload)
    if report_out:
        _atomic_write(report_out, payload + "\n")
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------

def _add_config_flags(parser):
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--out", dest="out_dir", help="bundle output directory")
    parser.add_argument("--reports", dest="reports_dir",
                        help="reports output directory")
    parser.add_argument("--lexicon", dest="lexicon_path", help="lexicon TSV path")
    parser.add_argument("--templates", dest="templates_path",
                        help="template file path")
    parser.add_argument("--tasks", help="comma-separated task ids")
    parser.add_argument("--rates", help="comma-separated inoculation rates")
    parser.add_argument("--learners", help="comma-separated learner ids")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--threshold", type=float,
                        help="control filter threshold (default 0.7)")
    parser.add_argument("--ambiguous-size", type=int, dest="ambiguous_size",
                        help="records per ambiguous task (default 50000)")
    parser.add_argument("--control-size", type=int, dest="control_size",
                        help="records per control task (default 30000)")
    parser.add_argument("--jobs", type=int, help="worker processes (default: CPUs)")
    parser.add_argument("--enable-lexical-semantics", action="store_const",
                        const=True, dest="enable_lexical_semantics",
                        help="include the extra lexical_semantics control task")
    parser.add_argument("--allow-custom-rates", action="store_const",
                        const=True, dest="allow_custom_rates",
                        help="permit rates outside the canonical four")


def _config_from_args(args):
    overrides = {}
    for key in ("out_dir", "reports_dir", "lexicon_path", "templates_path",
                "seed", "threshold", "ambiguous_size", "control_size", "jobs",
                "enable_lexical_semantics", "allow_custom_rates"):
        overrides[key] = getattr(args, key, None)
    if getattr(args, "tasks", None):
        overrides["tasks"] = tuple(t.strip() for t in args.tasks.split(",")
                                   if t.strip())
    if getattr(args, "rates", None):
        overrides["rates"] = tuple(float(r) for r in args.rates.split(","))
    if getattr(args, "learners", None):
        overrides["learners"] = tuple(l.strip() for l in args.learners.split(",")
                                      if l.strip())
    return load_config(getattr(args, "config", None), overrides)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="biasprobe",
        description="Generate mixed-signal generalization benchmarks and "
                    "measure learners' inductive bias on them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="assemble and write task bundles")
    _add_config_flags(p)
    p.add_argument("--rate", type=float, default=0.0,
                   help="bake this inoculation rate into the written bundles")

    p = sub.add_parser("validate", help="re-validate bundles on disk")
    _add_config_flags(p)

    p = sub.add_parser("run-matrix",
                       help="train and score every (learner, task, rate) cell")
    _add_config_flags(p)

    p = sub.add_parser("report", help="rebuild summary outputs from reports")
    _add_config_flags(p)

    p = sub.add_parser("train", help="train one learner on one task bundle")
    p.add_argument("--task-dir", required=True)
    p.add_argument("--learner", required=True, choices=LEARNER_IDS)
    p.add_argument("--rate", type=float, default=0.0)
    p.add_argument("--model-out", required=True)
    p.add_argument("--weights-out", help="also dump readable weights here")

    p = sub.add_parser("predict", help="apply a saved model to a task bundle")
    p.add_argument("--model", required=True)
    p.add_argument("--task-dir", required=True)
    p.add_argument("--conditions",
                   help="comma-separated conditions (default: all but the pool)")
    p.add_argument("--rate", type=float, default=0.0,
                   help="inoculation rate to apply to the bundle first")
    p.add_argument("--out", required=True, dest="predictions_out")

    p = sub.add_parser("evaluate",
                       help="score an externally produced predictions file")
    p.add_argument("--task-dir", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--learner-id", default="external")
    p.add_argument("--rate", type=float, default=0.0,
                   help="inoculation rate to record in the report")
    p.add_argument("--apply-rate", type=float, default=0.0,
                   help="inoculation rate to apply to the bundle before scoring")
    p.add_argument("--threshold", type=float, default=DEFAULT_CONTROL_THRESHOLD)
    p.add_argument("--report-out")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            config = _config_from_args(args)
            return cmd_generate(config, rate=args.rate)
        if args.command == "validate":
            config = _config_from_args(args)
            return cmd_validate(config)
        if args.command == "run-matrix":
            config = _config_from_args(args)
            return cmd_run_matrix(config)
        if args.command == "report":
            config = _config_from_args(args)
            return cmd_report(config)
        if args.command == "train":
            return cmd_train(args.task_dir, args.learner, args.rate,
                             args.model_out, args.weights_out)
        if args.command == "predict":
            conditions = None
            if args.conditions:
                conditions = [c.strip() for c in args.conditions.split(",")]
            return cmd_predict(args.model, args.task_dir, conditions,
                               args.predictions_out, rate=args.rate)
        if args.command == "evaluate":
            return cmd_evaluate(args.task_dir, args.predictions,
                                args.learner_id, args.rate, args.threshold,
                                args.report_out, rate_in_bundle=args.apply_rate)
    except (AssemblyError, ConfigError, LearnerError, MetricsError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    raise AssertionError(f"unhandled command: {args.command}")


if __name__ == "__main__":
    sys.exit(main())
