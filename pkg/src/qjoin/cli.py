"""Command-line interface: discover, join, bench.

``discover`` maps a repository to join tasks and pair clusters.
``join`` learns transformation chains for the tasks, executes the
adaptive fuzzy joins, and maintains the reuse library. ``bench`` runs
source/target/ground-truth cases and reports precision/recall/F1.
Every report path writes delimited files plus rendered figures; all
commands are deterministic under a fixed seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .agent import PairEnv, Trainer
from .config import EngineConfig, load_config, save_config
from .corpus import ColumnRef, Repository, load_repository, stable_seed
from .joiner import adaptive_threshold, fuzzy_join, score_against_truth
from .operators import compose_chain
from .pipeline import (
    JoinTask,
    build_descriptor,
    build_folders,
    cluster_pairs,
    discover_candidates,
    filter_candidates,
    mst_tasks,
    order_tasks,
    prescore_pairs,
    prune_trivial,
)
from .report import plot_bench_scores, plot_cluster_scatter, plot_reward_traces, plot_task_alcs
from .reuse import ReuseEntry, ReuseLibrary, apply_reuse, reverse_direction_ok

logger = logging.getLogger(__name__)

TRACE_ENV = "QJOIN_TRACE"


def _load_engine_config(path: str | None, seed_override: int | None) -> EngineConfig:
    cfg = load_config(path) if path else EngineConfig()
    if seed_override is not None:
        cfg = EngineConfig(
            alcs=cfg.alcs,
            reward=cfg.reward,
            agent=cfg.agent,
            pipeline=cfg.pipeline,
            joiner=cfg.joiner,
            reuse=cfg.reuse,
            seed=seed_override,
        )
    return cfg


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _task_slug(task: JoinTask) -> str:
    return f"{task.t_a}__{task.c_a}__{task.t_b}__{task.c_b}".replace(os.sep, "_")


def _trace_writer(out_dir: Path):
    """Reward-trace sink, active when QJOIN_TRACE is set non-empty."""
    if not os.environ.get(TRACE_ENV):
        return None, None
    path = out_dir / "trace.log"
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = path.open("w", encoding="utf-8")

    def sink(action_id: str, breakdown) -> None:
        fh.write(json.dumps({"action": action_id, **asdict(breakdown)}, sort_keys=True) + "\n")

    return sink, fh


# --- discover ----------------------------------------------------------------


def _discovery(repo: Repository, cfg: EngineConfig):
    pipeline_cfg = cfg.pipeline
    candidates = discover_candidates(repo, pipeline_cfg.lsh_threshold, pipeline_cfg, cfg.seed)
    retained = prune_trivial(candidates, repo, pipeline_cfg.lsh_threshold, pipeline_cfg, cfg.seed)
    descriptors = prescore_pairs(retained, repo, pipeline_cfg, cfg.seed, cfg.alcs)
    filtered = filter_candidates(
        descriptors, pipeline_cfg.prescore_threshold, pipeline_cfg.top_k_pairs
    )
    model = cluster_pairs(filtered, pipeline_cfg.cluster_cut) if filtered else None
    tasks = mst_tasks(retained)
    return candidates, retained, descriptors, filtered, model, tasks


def cmd_discover(repo_path: str, config_path: str | None, out_dir: str, seed: int | None) -> int:
    cfg = _load_engine_config(config_path, seed)
    repo = load_repository(repo_path)
    candidates, retained, descriptors, filtered, model, tasks = _discovery(repo, cfg)
    folders = build_folders(tasks)
    out = Path(out_dir)

    task_rows = []
    for folder_name in ("same_names", "date_names", "else_names"):
        for task in folders[folder_name]:
            task_rows.append([task.t_a, task.c_a, task.t_b, task.c_b, task.j_hat, task.folder])
    _write_csv(out / "tasks.csv", ["t_a", "c_a", "t_b", "c_b", "j_hat", "folder"], task_rows)

    cluster_rows = []
    if model is not None:
        for d in filtered:
            cluster_rows.append(
                [d.pair[0].key, d.pair[1].key, model.labels[d.key], *d.features]
            )
    _write_csv(
        out / "clusters.csv",
        [
            "pair_a", "pair_b", "cluster_id",
            "s_j", "s_a", "delta_a", "length_ratio",
            "entropy_a", "entropy_b", "distinct_a", "distinct_b",
        ],
        cluster_rows,
    )
    if model is not None and filtered:
        plot_cluster_scatter(filtered, model.labels, out / "clusters.png")

    n_clusters = len(set(model.labels.values())) if model else 0
    print(
        f"tables={len(repo.tables)} candidates={len(candidates)} retained={len(retained)} "
        f"filtered={len(filtered)} clusters={n_clusters} tasks={len(tasks)}"
    )
    print(f"wrote {out / 'tasks.csv'} and {out / 'clusters.csv'}")
    return 0


# --- join --------------------------------------------------------------------


def _read_tasks(path: Path) -> list[JoinTask]:
    tasks = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            tasks.append(
                JoinTask(
                    t_a=row["t_a"], c_a=row["c_a"], t_b=row["t_b"], c_b=row["c_b"],
                    j_hat=float(row["j_hat"]), folder=row["folder"],
                )
            )
    return tasks


def _run_task(
    repo: Repository,
    task: JoinTask,
    cfg: EngineConfig,
    candidate_sims: list[float],
    descriptor,
    cluster_id: int,
    cluster_map: dict,
    library: ReuseLibrary,
    reuse_mode: str,
    eval_sink,
) -> dict:
    pair = task.pair
    env = PairEnv(
        repo,
        pair,
        agent_cfg=cfg.agent,
        reward_cfg=cfg.reward,
        alcs_cfg=cfg.alcs,
        candidate_sims=candidate_sims,
        seed=stable_seed(cfg.seed, task.key[0], task.key[1]),
        include_numeric_partners=cfg.pipeline.include_numeric,
    )
    env.eval_sink = eval_sink
    outcome = None
    warm_start = None
    if reuse_mode != "off" and cluster_id >= 0:
        mode = "one_shot" if reuse_mode == "one-shot" else "sequential"
        outcome = apply_reuse(
            env, descriptor.features, cluster_id, cluster_map, library, mode, cfg.reuse
        )
        warm_start = outcome.warm_start_q if outcome.fell_back_to_training else None

    episode_rewards: list[float] = []
    trained_policy: dict = {}
    trained_q: dict = {}
    if outcome is not None and outcome.hit:
        chain_a, chain_b = outcome.accepted_chain
        iterations = 0
        best_reward = outcome.reward_delta
        steps = outcome.accepted_steps
        _, _, final_cfg = env.evaluate_steps(env.initial_config(), steps)
        final_alcs = final_cfg.matrix.mean_row_max
        reuse_hit = True
    else:
        trainer = Trainer(
            env,
            warm_start=warm_start,
            seed=stable_seed(cfg.seed, "train", task.key[0], task.key[1]),
        )
        result = trainer.train()
        chain_a, chain_b = result.best_chains
        iterations = result.iterations
        best_reward = result.best_reward
        steps = result.best_steps
        final_alcs = result.final_alcs_mean
        reuse_hit = False
        trained_policy = result.agent.policy
        trained_q = result.agent.q
        by_episode: dict[int, float] = {}
        for step in result.reward_trace:
            by_episode[step.episode] = step.cumulative
        episode_rewards = [by_episode[e] for e in sorted(by_episode)]

    # Persist a validated entry: positive reward on this pair and no
    # regression when scored from the opposite direction.
    if best_reward > 0 and steps:
        _, _, final_cfg = env.evaluate_steps(env.initial_config(), steps)
        if reverse_direction_ok(env, final_cfg.values_a, final_cfg.values_b):
            entry = ReuseEntry(
                steps=tuple((slot, s.text) for slot, s in steps),
                base_a=pair[0].column,
                base_b=pair[1].column,
                cluster_id=cluster_id,
                feature_signature=descriptor.features,
                best_reward=best_reward,
                final_alcs=final_alcs,
                policy=trained_policy,
                q=trained_q,
                pair_a_key=pair[0].key,
                pair_b_key=pair[1].key,
                sequence=library.next_sequence(),
            )
            library.store(entry)

    table_a = repo.tables[task.t_a]
    table_b = repo.tables[task.t_b]
    values_a = compose_chain(chain_a, table_a)
    values_b = compose_chain(chain_b, table_b)
    thr = adaptive_threshold(values_a, values_b, cfg.joiner, cfg.alcs)
    result_join = fuzzy_join(values_a, values_b, thr, cfg.alcs)
    return {
        "task": task,
        "chain_a": chain_a,
        "chain_b": chain_b,
        "iterations": iterations,
        "reuse_hit": reuse_hit,
        "best_reward": best_reward,
        "final_alcs": final_alcs,
        "join": result_join,
        "episode_rewards": episode_rewards,
    }


def cmd_join(
    repo_path: str,
    tasks_path: str,
    config_path: str | None,
    out_dir: str,
    reuse_mode: str,
    library_path: str | None,
    seed: int | None,
) -> int:
    cfg = _load_engine_config(config_path, seed)
    repo = load_repository(repo_path)
    tasks = _read_tasks(Path(tasks_path))
    if not tasks:
        print("no tasks to run", file=sys.stderr)
        return 1
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    eval_sink, trace_fh = _trace_writer(out)

    # Rebuild descriptors and clusters for the task pairs; candidate
    # similarities per table pair come from the full discovery output so
    # the adaptive concat weighting sees the same landscape.
    _, retained, descriptors, _, _, _ = _discovery(repo, cfg)
    desc_by_key = {d.key: d for d in descriptors}
    task_descriptors = []
    for task in tasks:
        d = desc_by_key.get(task.key)
        if d is None:
            d = build_descriptor(task.pair, repo, cfg.pipeline, cfg.seed, cfg.alcs)
            desc_by_key[task.key] = d
        task_descriptors.append(d)
    model = cluster_pairs(task_descriptors, cfg.pipeline.cluster_cut)
    cluster_map: dict[int, list[tuple[str, str]]] = {}
    for d in task_descriptors:
        cluster_map.setdefault(model.labels[d.key], []).append(d.key)
    sims_by_tables: dict[tuple[str, str], list[float]] = {}
    for d in descriptors:
        key = (d.pair[0].table, d.pair[1].table)
        sims_by_tables.setdefault(key, []).append(d.best_prescore)

    library = ReuseLibrary.load(library_path) if library_path else ReuseLibrary()
    # Within each folder, front-load tasks whose columns already appear in
    # the library and whose alignment clears the per-folder percentile.
    transformed = {key for e in library.entries for key in e.provenance}
    folders = build_folders(tasks)
    task_by_key = {t.key: t for t in tasks}
    ordered_tasks = []
    for name in ("same_names", "date_names", "else_names"):
        members = [desc_by_key[t.key] for t in folders[name]]
        for d in order_tasks(members, task_descriptors, transformed, cfg.pipeline.order_percentile):
            ordered_tasks.append(task_by_key[d.key])

    report_rows = []
    traces: dict[str, list[float]] = {}
    alcs_by_task: dict[str, float] = {}
    failures = 0
    reuse_hits = 0
    total_iterations = 0
    for task in ordered_tasks:
        descriptor = desc_by_key[task.key]
        sims = sims_by_tables.get((task.t_a, task.t_b)) or [descriptor.best_prescore]
        try:
            outcome = _run_task(
                repo, task, cfg, sims, descriptor, model.labels[descriptor.key],
                cluster_map, library, reuse_mode, eval_sink,
            )
        except Exception as exc:
            logger.error("task %s failed: %s", task.key, exc)
            failures += 1
            continue
        slug = _task_slug(task)
        task_dir = out / "tasks" / slug
        join_result = outcome["join"]
        _write_csv(
            task_dir / "joined.csv",
            ["source_row", "target_row", "score"],
            [[i, j, s] for i, j, s in join_result.matches],
        )
        thr = join_result.threshold
        metrics = {
            "task": "~".join(task.key),
            "folder": task.folder,
            "chain_a": outcome["chain_a"].to_text(),
            "chain_b": outcome["chain_b"].to_text(),
            "iterations": outcome["iterations"],
            "reuse_hit": int(outcome["reuse_hit"]),
            "best_reward": outcome["best_reward"],
            "final_alcs": outcome["final_alcs"],
            "thr_join": thr.thr_join,
            "tolerance": thr.tolerance,
            "regime": thr.regime,
            "match_count": join_result.match_count,
            "distinct_sources": join_result.distinct_sources,
            "distinct_targets": join_result.distinct_targets,
        }
        with (task_dir / "metrics.txt").open("w", encoding="utf-8") as fh:
            for key, value in metrics.items():
                fh.write(f"{key}={value}\n")
        report_rows.append(
            [
                task.t_a, task.c_a, task.t_b, task.c_b, task.folder,
                outcome["iterations"], int(outcome["reuse_hit"]),
                outcome["best_reward"], outcome["final_alcs"],
                join_result.match_count,
                outcome["chain_a"].to_text(), outcome["chain_b"].to_text(),
            ]
        )
        reuse_hits += int(outcome["reuse_hit"])
        total_iterations += outcome["iterations"]
        if outcome["episode_rewards"]:
            traces[slug] = outcome["episode_rewards"]
        alcs_by_task[slug] = outcome["final_alcs"]
    _write_csv(
        out / "report.csv",
        [
            "t_a", "c_a", "t_b", "c_b", "folder", "iterations", "reuse_hit",
            "best_reward", "final_alcs", "match_count", "chain_a", "chain_b",
        ],
        report_rows,
    )
    if traces:
        plot_reward_traces(traces, out / "reward_traces.png")
    if alcs_by_task:
        plot_task_alcs(alcs_by_task, out / "task_alcs.png")
    if library_path:
        library.save(library_path)
    if trace_fh is not None:
        trace_fh.close()
    print(
        f"tasks={len(ordered_tasks)} completed={len(ordered_tasks) - failures} "
        f"reuse_hits={reuse_hits} iterations={total_iterations} library={len(library.entries)}"
    )
    return 1 if failures == len(ordered_tasks) else 0


# --- bench -------------------------------------------------------------------


def _read_truth(path: Path) -> list[tuple[int, int]]:
    pairs = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            pairs.append((int(row["source_row"]), int(row["target_row"])))
    return pairs


def cmd_bench(bench_dir: str, config_path: str | None, out_dir: str, seed: int | None) -> int:
    cfg = _load_engine_config(config_path, seed)
    bench = Path(bench_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for case_dir in sorted(p for p in bench.iterdir() if p.is_dir()):
        source_path = case_dir / "source.csv"
        target_path = case_dir / "target.csv"
        truth_path = case_dir / "ground_truth.csv"
        if not (source_path.exists() and target_path.exists()):
            logger.warning("skipping %s: missing source/target", case_dir.name)
            continue
        if not truth_path.exists():
            logger.warning("skipping %s: missing ground truth", case_dir.name)
            continue
        repo = load_repository(case_dir)
        repo.tables.pop("ground_truth", None)
        source = repo.tables["source"]
        target = repo.tables["target"]
        pairs = [
            (ColumnRef("source", ca.name), ColumnRef("target", cb.name))
            for ca in source.columns
            for cb in target.columns
            if any(ca.values) and any(cb.values)
        ]
        if not pairs:
            logger.warning("skipping %s: no usable column pairs", case_dir.name)
            continue
        descriptors = [
            build_descriptor(pair, repo, cfg.pipeline, cfg.seed, cfg.alcs) for pair in pairs
        ]
        sims = [d.best_prescore for d in descriptors]
        best = max(descriptors, key=lambda d: (d.best_prescore, d.key))
        env = PairEnv(
            repo,
            best.pair,
            agent_cfg=cfg.agent,
            reward_cfg=cfg.reward,
            alcs_cfg=cfg.alcs,
            candidate_sims=sims,
            seed=stable_seed(cfg.seed, case_dir.name),
            include_numeric_partners=True,
        )
        trainer = Trainer(env, seed=stable_seed(cfg.seed, "bench", case_dir.name))
        result = trainer.train()
        chain_a, chain_b = result.best_chains
        values_a = compose_chain(chain_a, source)
        values_b = compose_chain(chain_b, target)
        thr = adaptive_threshold(values_a, values_b, cfg.joiner, cfg.alcs)
        join_result = fuzzy_join(values_a, values_b, thr, cfg.alcs)
        truth = _read_truth(truth_path)
        precision, recall, f1 = score_against_truth(join_result, truth)
        rows.append(
            {
                "case": case_dir.name,
                "pair_a": best.pair[0].key,
                "pair_b": best.pair[1].key,
                "precision": precision,
                "recall": recall,
                "f1": f1,
                "matches": join_result.match_count,
                "iterations": result.iterations,
                "chain_a": chain_a.to_text(),
                "chain_b": chain_b.to_text(),
            }
        )
        print(f"{case_dir.name}: P={precision:.3f} R={recall:.3f} F1={f1:.3f}")
    if not rows:
        print("no runnable benchmark cases", file=sys.stderr)
        return 1
    avg = {
        "case": "average",
        "pair_a": "",
        "pair_b": "",
        "precision": sum(r["precision"] for r in rows) / len(rows),
        "recall": sum(r["recall"] for r in rows) / len(rows),
        "f1": sum(r["f1"] for r in rows) / len(rows),
        "matches": "",
        "iterations": "",
        "chain_a": "",
        "chain_b": "",
    }
    header = ["case", "pair_a", "pair_b", "precision", "recall", "f1", "matches", "iterations", "chain_a", "chain_b"]
    _write_csv(out / "bench_report.csv", header, [[r[h] for h in header] for r in rows + [avg]])
    plot_bench_scores(rows, out / "bench_scores.png")
    print(f"average F1 = {avg['f1']:.3f} over {len(rows)} cases")
    return 0


# --- entry point -------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qjoin", description="Transformation-aware join discovery")
    parser.add_argument("--verbose", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_disc = sub.add_parser("discover", help="find joinable column pairs and emit tasks")
    p_disc.add_argument("--repo", required=True)
    p_disc.add_argument("--config")
    p_disc.add_argument("--seed", type=int)
    p_disc.add_argument("--out", default="qjoin-out")

    p_join = sub.add_parser("join", help="learn chains and execute joins for a task list")
    p_join.add_argument("--repo", required=True)
    p_join.add_argument("--tasks", required=True)
    p_join.add_argument("--config")
    p_join.add_argument("--seed", type=int)
    p_join.add_argument("--reuse", choices=["off", "one-shot", "sequential"], default="off")
    p_join.add_argument("--library")
    p_join.add_argument("--out", default="qjoin-out")

    p_bench = sub.add_parser("bench", help="run source/target/ground-truth benchmark cases")
    p_bench.add_argument("--bench", required=True)
    p_bench.add_argument("--config")
    p_bench.add_argument("--seed", type=int)
    p_bench.add_argument("--out", default="qjoin-out")

    p_cfg = sub.add_parser("init-config", help="write the default configuration")
    p_cfg.add_argument("path")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "discover":
            return cmd_discover(args.repo, args.config, args.out, args.seed)
        if args.command == "join":
            return cmd_join(
                args.repo, args.tasks, args.config, args.out, args.reuse, args.library, args.seed
            )
        if args.command == "bench":
            return cmd_bench(args.bench, args.config, args.out, args.seed)
        if args.command == "init-config":
            save_config(EngineConfig(), args.path)
            print(f"wrote {args.path}")
            return 0
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
