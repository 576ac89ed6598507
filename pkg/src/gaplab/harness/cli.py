"""Command-line entry points.

    gaplab train  --task pd --method ADV --steps 300000 --seed 1 --out runs/
    gaplab sweep  --task pd --method PPO --n 5 --steps 300000 --seed 0 --out runs/
    gaplab eval   --checkpoint runs/x.ckpt --episodes 200
    gaplab demos  --task wc --episodes 256 --seed 0 --out demos.gdem
    gaplab report --runs runs/ --out report/

Every subcommand accepts --config FILE (a JSON object of defaults; flags
override it). The output root for relative --out paths can be overridden
with the GAPLAB_OUT environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from ..envs import task_ids, resolve_task
from ..experts import make_expert, record_demonstrations, save_demos
from ..learners import METHODS, MethodConfig, resolve_method_id, sample_method_config
from ..seeding import rng_for

OUT_ROOT_VAR = "GAPLAB_OUT"


class CliError(Exception):
    pass


def _resolve_out(path):
    if path is None:
        return None
    root = os.environ.get(OUT_ROOT_VAR)
    if root and not os.path.isabs(path):
        return os.path.join(root, path)
    return path


def _load_config_defaults(argv):
    """Pre-scan for --config and return its JSON dict."""
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            with open(argv[i + 1], "r", encoding="utf-8") as f:
                cfg = json.load(f)
            if not isinstance(cfg, dict):
                raise CliError("--config must hold a JSON object")
            return cfg
        if a.startswith("--config="):
            with open(a.split("=", 1)[1], "r", encoding="utf-8") as f:
                return json.load(f)
    return {}


def _task_or_die(args):
    try:
        overrides = {}
        if getattr(args, "task_param", None):
            for kv in args.task_param:
                key, val = kv.split("=", 1)
                overrides[key] = json.loads(val)
        return resolve_task(args.task, overrides)
    except KeyError:
        raise CliError(f"unknown task {args.task!r}; valid tasks: "
                       + ", ".join(task_ids()))


def _method_id_or_die(name):
    try:
        return resolve_method_id(name)
    except KeyError:
        raise CliError(f"unknown method {name!r}; valid methods: "
                       + ", ".join(sorted(METHODS)))


def _method_config(args) -> MethodConfig:
    method_id = _method_id_or_die(args.method)
    if args.lr is None:
        return sample_method_config(method_id, rng_for(args.seed, "hp"))
    return MethodConfig(method_id, lr=args.lr, stage_split=args.stage_split,
                        alpha=args.alpha)


def _add_common(p, with_method=True):
    p.add_argument("--config", help="JSON file of argument defaults")
    p.add_argument("--task", help="task id from the catalog")
    p.add_argument("--task-param", action="append", metavar="KEY=JSON",
                   help="override one task parameter (repeatable)")
    if with_method:
        p.add_argument("--method")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output directory")
    p.add_argument("--expert-radius", type=int, default=None,
                   help="expert view radius (lighthouse capability study)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaplab",
                                     description="training laboratory CLI")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="one training run")
    _add_common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float, default=None,
                   help="fixed learning rate (default: sample from the search space)")
    p.add_argument("--stage-split", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--eval-episodes", type=int, default=None)

    p = sub.add_parser("sweep", help="n runs with sampled hyperparameters")
    _add_common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--eval-episodes", type=int, default=None)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--config", help="JSON file of argument defaults")
    p.add_argument("--checkpoint")
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--lanes", type=int, default=20)

    p = sub.add_parser("demos", help="record expert demonstrations")
    _add_common(p, with_method=False)
    p.add_argument("--episodes", type=int, default=256)

    p = sub.add_parser("report", help="fold run records into a sweep report")
    p.add_argument("--config", help="JSON file of argument defaults")
    p.add_argument("--runs", help="directory of .jsonl records")
    p.add_argument("--out", help="report output directory")
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering even if gapplot is available")
    return parser


_REQUIRED = {"train": ("task", "method", "steps"),
             "sweep": ("task", "method", "steps", "n"),
             "eval": ("checkpoint",),
             "demos": ("task",),
             "report": ("runs", "out")}


def _merge_config(args, defaults: dict) -> None:
    for key, val in defaults.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, val)
    if getattr(args, "seed", None) is None:
        args.seed = 0
    missing = [f for f in _REQUIRED[args.command]
               if getattr(args, f, None) is None]
    if missing:
        raise CliError(f"missing required arguments for {args.command}: "
                       + ", ".join("--" + m.replace("_", "-") for m in missing))


def _cmd_train(args) -> int:
    from .training import run_training
    task = _task_or_die(args)
    method = _method_config(args)
    kwargs = {}
    if args.eval_episodes is not None:
        kwargs["eval_episodes"] = args.eval_episodes
    record, _ = run_training(task, method, args.steps, args.seed,
                             out_dir=_resolve_out(args.out),
                             expert_radius=args.expert_radius, **kwargs)
    best = record.best_reward()
    print(json.dumps({"task": task.task_id, "method": method.method_id,
                      "failed": record.failed, "best_reward": best,
                      "validations": len(record.rows)}))
    return 0


def _cmd_sweep(args) -> int:
    from .sweep import run_sweep
    task = _task_or_die(args)
    method_id = _method_id_or_die(args.method)
    records = run_sweep(task, method_id, args.n, args.steps, args.seed,
                        out_dir=_resolve_out(args.out),
                        expert_radius=args.expert_radius,
                        eval_episodes=args.eval_episodes,
                        progress=lambda i, r: print(
                            f"run {i}: best={r.best_reward()} failed={r.failed}",
                            file=sys.stderr))
    bests = [r.best_reward() for r in records]
    print(json.dumps({"task": task.task_id, "method": method_id,
                      "n_runs": len(records), "best_values": bests}))
    return 0


def _cmd_eval(args) -> int:
    from ..envs import make_env, TaskConfig
    from .evaluation import evaluate_policy
    from .training import load_policy_checkpoint
    policy, params, metadata = load_policy_checkpoint(args.checkpoint)
    task = TaskConfig.from_dict(metadata["task"])
    env_seed = metadata.get("seed", 0)
    metrics = evaluate_policy(policy, params,
                              lambda: make_env(task, env_seed=env_seed),
                              args.episodes, n_lanes=args.lanes)
    print(json.dumps(metrics))
    return 0


def _cmd_demos(args) -> int:
    task = _task_or_die(args)
    from ..envs import make_env
    env = make_env(task, env_seed=args.seed)
    demos = record_demonstrations(env, make_expert(env, args.expert_radius),
                                  args.episodes, args.seed,
                                  task_dict=task.to_dict())
    out = _resolve_out(args.out) or f"{task.task_id}_demos.gdem"
    parent = os.path.dirname(out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_demos(out, demos)
    print(json.dumps({"task": task.task_id, "episodes": args.episodes,
                      "transitions": demos.n_transitions, "path": out}))
    return 0


def _cmd_report(args) -> int:
    from .report import write_report
    result = write_report(args.runs, _resolve_out(args.out),
                          n_resamples=args.resamples,
                          render=not args.no_figures)
    print(json.dumps({"paths": result["paths"]}))
    return 0


_COMMANDS = {"train": _cmd_train, "sweep": _cmd_sweep, "eval": _cmd_eval,
             "demos": _cmd_demos, "report": _cmd_report}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args, _load_config_defaults(argv))
        return _COMMANDS[args.command](args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
