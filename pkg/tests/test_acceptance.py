"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Every tolerance is pinned here; nothing is deferred to later
calibration.
"""

import csv
import random
import time

import pytest

from qjoin.agent import AgentConfig, PairEnv, StateKey, Trainer, init_agent, update
from qjoin.cli import main
from qjoin.config import load_config
from qjoin.corpus import ColumnRef, load_repository, stable_seed
from qjoin.operators import Action, ExclusionDicts, default_library
from qjoin.pipeline import mst_tasks
from qjoin.similarity import alcs, jaccard_qgram, lcs_substring
from qjoin.reuse import ReuseEntry, ReuseLibrary, apply_reuse

from conftest import (
    FIXTURES,
    brute_force_max_forest,
    dp_lcs,
    enumerate_best_chain,
)

NYC = str(FIXTURES / "nyc_names")
NYC_CFG = str(FIXTURES / "nyc_names" / "config.json")


def _report(n: int, message: str) -> None:
    print(f"PASS criterion {n:02d}: {message}")


# -- criterion 1 ---------------------------------------------------------------


def test_criterion_01_similarity_oracle_suite():
    rng = random.Random(20240601)
    alphabet = "abcdef"
    started = time.perf_counter()
    for _ in range(10_000):
        s1 = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 65)))
        s2 = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 65)))
        expected = dp_lcs(s1, s2)
        assert lcs_substring(s1, s2) == expected
        total = len(s1) + len(s2)
        want = (2.0 * expected / total) if (total and expected >= 3) else 0.0
        assert alcs(s1, s2) == want
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"oracle suite took {elapsed:.2f}s"
    _report(1, f"10,000 random pairs match the DP oracle exactly in {elapsed:.2f}s")


# -- criterion 2 ---------------------------------------------------------------


def _run_of(rng, alphabet, lo, hi):
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(lo, hi)))


def test_criterion_02_alcs_lemma_properties():
    rng = random.Random(7)
    for _ in range(1_000):
        x = _run_of(rng, "ab", 4, 9)
        y = _run_of(rng, "ab", 4, 9)
        f1 = [_run_of(rng, "cd", 1, 6) for _ in range(3)]
        f2 = [_run_of(rng, "ef", 1, 6) for _ in range(3)]
        split1 = f1[0] + x + f1[1] + y + f1[2]
        split2 = f2[0] + x + f2[1] + y + f2[2]
        merged1 = f1[0] + x + y + f1[1] + f1[2]
        merged2 = f2[0] + x + y + f2[1] + f2[2]
        assert len(merged1) == len(split1) and len(merged2) == len(split2)
        assert alcs(merged1, merged2) > alcs(split1, split2)

    hits = 0
    for _ in range(100):
        block = _run_of(rng, "ab", 10, 16)
        s1 = _run_of(rng, "cd", 8, 14) + block + _run_of(rng, "cd", 8, 14)
        s2 = _run_of(rng, "ef", 8, 14) + block + _run_of(rng, "ef", 8, 14)
        if alcs(s1, s2) > jaccard_qgram(s1, s2, 3):
            hits += 1
    assert hits == 100
    _report(2, "merge monotonicity holds on 1,000 instances; ALCS beats gram Jaccard on 100/100")


# -- criterion 3 ---------------------------------------------------------------


def test_criterion_03_reward_collapse_repellence(ids_repo, ids_pair):
    env = PairEnv(ids_repo, ids_pair, seed=0, include_numeric_partners=True)
    config = env.initial_config()
    checked = 0
    for action in env.legal_actions(config, ExclusionDicts()):
        if action.op.kind == "substring" and action.op.direction == "prefix":
            breakdown, _ = env.evaluate_action(config, action, 0)
            assert breakdown.total <= 0, (action.id, breakdown.total)
            checked += 1
    assert checked == 6

    result = Trainer(env, seed=0).train()
    assert all("substring(prefix,1)" not in step.text for _, step in result.best_steps)
    oracle_reward, oracle_steps = enumerate_best_chain(env, max_depth=3)
    assert all("substring(prefix,1)" not in s for s in oracle_steps)
    assert result.best_reward == pytest.approx(oracle_reward, abs=1e-9)
    _report(3, "all 6 prefix-truncation actions score <= 0 and no selected chain uses prefix-1")


# -- criterion 4 ---------------------------------------------------------------


def test_criterion_04_candidate_names_end_to_end(tmp_path):
    started = time.perf_counter()
    disc = tmp_path / "disc"
    assert main(["discover", "--repo", NYC, "--config", NYC_CFG, "--out", str(disc)]) == 0
    out = tmp_path / "join"
    assert main(
        [
            "join", "--repo", NYC, "--tasks", str(disc / "tasks.csv"),
            "--config", NYC_CFG, "--out", str(out),
            "--library", str(tmp_path / "lib.qjl"),
        ]
    ) == 0
    elapsed = time.perf_counter() - started

    task_dir = out / "tasks" / "campaign_expenditures__CANDLAST__funds_payments__CANDNAME"
    with (task_dir / "joined.csv").open(newline="") as fh:
        got = {(int(r["source_row"]), int(r["target_row"])) for r in csv.DictReader(fh)}
    truth = {(i, i) for i in range(7)}
    hit = len(got & truth)
    precision = hit / len(got)
    recall = hit / len(truth)
    f1 = 2 * precision * recall / (precision + recall)
    assert f1 == 1.0

    metrics = dict(
        line.split("=", 1) for line in (task_dir / "metrics.txt").read_text().splitlines()
    )
    assert "concat_back" in metrics["chain_a"], "expected a multi-column concatenation chain"
    assert elapsed < 30.0, f"end-to-end took {elapsed:.2f}s"

    # Chain equivalence against exhaustive depth-3 enumeration, rebuilt
    # with the same environment the CLI used for this task.
    cfg = load_config(NYC_CFG)
    repo = load_repository(NYC)
    pair = (
        ColumnRef("campaign_expenditures", "CANDLAST"),
        ColumnRef("funds_payments", "CANDNAME"),
    )
    from qjoin.cli import _discovery

    _, _, descriptors, _, _, _ = _discovery(repo, cfg)
    sims = [
        d.best_prescore
        for d in descriptors
        if (d.pair[0].table, d.pair[1].table) == (pair[0].table, pair[1].table)
    ]
    env = PairEnv(
        repo, pair,
        agent_cfg=cfg.agent, reward_cfg=cfg.reward, alcs_cfg=cfg.alcs,
        candidate_sims=sims,
        seed=stable_seed(cfg.seed, pair[0].key, pair[1].key),
        include_numeric_partners=cfg.pipeline.include_numeric,
    )
    result = Trainer(
        env, seed=stable_seed(cfg.seed, "train", pair[0].key, pair[1].key)
    ).train()
    assert result.best_chains[0].to_text() == metrics["chain_a"]
    assert result.best_chains[1].to_text() == metrics["chain_b"]
    oracle_reward, _ = enumerate_best_chain(env, max_depth=3)
    assert result.best_reward == pytest.approx(oracle_reward, abs=1e-9)
    _report(4, f"F1=1.00 with chain {metrics['chain_a']!r} in {elapsed:.1f}s; engine == depth-3 oracle")


# -- criterion 5 ---------------------------------------------------------------


def test_criterion_05_update_correctness():
    library = default_library()
    ops = [op for op in library if op.clazz == "unary"][:5]
    rng = random.Random(99)
    cfg_pool = [AgentConfig(learning_rate=lr, discount=g)
                for lr in (0.05, 0.1, 0.5, 1.0) for g in (0.0, 0.5, 1.0)]
    state = StateKey("~", 5, 10, 0)
    nxt = StateKey("x~", 6, 10, 1)
    for _ in range(10_000):
        cfg = cfg_pool[rng.randrange(len(cfg_pool))]
        agent = init_agent(library, cfg)
        action = Action(rng.choice(("a", "b")), ops[rng.randrange(len(ops))])
        q0 = rng.uniform(-3, 3)
        reward = rng.uniform(-3, 3)
        nq = [rng.uniform(-3, 3) for _ in range(3)]
        agent.q[state.text] = {action.id: q0}
        agent.q[nxt.text] = {f"n{i}": v for i, v in enumerate(nq)}
        update(agent, state, action, reward, nxt, cfg)
        expected = (1 - cfg.learning_rate) * q0 + cfg.learning_rate * (
            reward + cfg.discount * max(nq)
        )
        assert agent.q[state.text][action.id] == pytest.approx(expected, abs=1e-12)

    cfg = AgentConfig(learning_rate=0.3)
    agent = init_agent(library, cfg)
    actions = [Action("a", op) for op in ops] + [Action("b", op) for op in ops]
    for _ in range(2_000):
        update(agent, state, actions[rng.randrange(len(actions))], rng.uniform(-1, 1), nxt, cfg)
        for slot in agent.policy:
            assert abs(sum(agent.policy[slot].values()) - 1.0) <= 1e-9
    _report(5, "10,000 Q-updates match the closed form; policy rows stay normalized to 1e-9")


# -- criterion 6 ---------------------------------------------------------------


def test_criterion_06_mst_correctness():
    rng = random.Random(123)
    for _ in range(500):
        n = rng.randrange(2, 7)
        possible = [(i, j) for i in range(n) for j in range(i + 1, n)]
        rng.shuffle(possible)
        count = rng.randrange(0, min(10, len(possible)) + 1)
        edges = [(i, j, round(rng.uniform(0.05, 1.0), 4)) for i, j in possible[:count]]
        candidates = [
            (ColumnRef(f"T{i}", "c"), ColumnRef(f"T{j}", "c"), w) for i, j, w in edges
        ]
        got = sum(t.j_hat for t in mst_tasks(candidates))
        want = brute_force_max_forest(n, edges)
        assert got == pytest.approx(want, abs=1e-12)
    _report(6, "maximum-spanning-forest weight exact on 500 random graphs")


# -- criterion 7 ---------------------------------------------------------------


def _write_clone_corpus(root, clones=10):
    """Ten byte-identical copies of the candidate-names task.

    Cross-clone pairs over the same column are exact duplicates, so the
    trivial-pair pruning removes them; what remains is a spanning forest
    of CANDLAST-to-CANDNAME tasks that all share one transformation.
    """
    base = [
        ("de Blasio", "Bill", ""),
        ("Chen", "Ethel", "T"),
        ("Perkins", "Bill", ""),
        ("Chen", "Hailing", ""),
        ("Chen", "Jin Liang", ""),
        ("Qiu", "Helen", "J"),
        ("Sears", "Helen", ""),
    ]
    root.mkdir(parents=True, exist_ok=True)
    for i in range(clones):
        with (root / f"expenditures_{i:02d}.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["CANDLAST", "CANDFIRST", "CANDMI"])
            w.writerows(base)
        with (root / f"payments_{i:02d}.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["CANDNAME"])
            for last, first, mi in base:
                name = f"{last}, {first}"
                if mi:
                    name += f" {mi}"
                w.writerow([name])


def _join_iterations(out_dir):
    with (out_dir / "report.csv").open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows, sum(int(r["iterations"]) for r in rows)


def test_criterion_07_reuse_efficacy(tmp_path):
    corpus = tmp_path / "clones"
    _write_clone_corpus(corpus)
    disc = tmp_path / "disc"
    assert main(["discover", "--repo", str(corpus), "--config", NYC_CFG, "--out", str(disc)]) == 0
    with (disc / "tasks.csv").open(newline="") as fh:
        tasks = list(csv.DictReader(fh))
    # Spanning forest over the 20 tables: every task is a clone of the
    # CANDLAST -> CANDNAME transformation problem.
    assert len(tasks) == 19
    assert all(t["c_a"] == "CANDLAST" and t["c_b"] == "CANDNAME" for t in tasks)

    out_off = tmp_path / "off"
    assert main(
        ["join", "--repo", str(corpus), "--tasks", str(disc / "tasks.csv"),
         "--config", NYC_CFG, "--out", str(out_off), "--reuse", "off",
         "--library", str(tmp_path / "lib_off.qjl")]
    ) == 0
    rows_off, iters_off = _join_iterations(out_off)

    out_reuse = tmp_path / "oneshot"
    assert main(
        ["join", "--repo", str(corpus), "--tasks", str(disc / "tasks.csv"),
         "--config", NYC_CFG, "--out", str(out_reuse), "--reuse", "one-shot",
         "--library", str(tmp_path / "lib_reuse.qjl")]
    ) == 0
    rows_reuse, iters_reuse = _join_iterations(out_reuse)

    assert iters_reuse <= 0.25 * iters_off, (iters_reuse, iters_off)
    assert sum(int(r["reuse_hit"]) for r in rows_reuse) >= 18

    def all_tasks_perfect(out_dir, rows):
        for row in rows:
            slug = f"{row['t_a']}__{row['c_a']}__{row['t_b']}__{row['c_b']}"
            with (out_dir / "tasks" / slug / "joined.csv").open(newline="") as fh:
                got = {(int(r["source_row"]), int(r["target_row"])) for r in csv.DictReader(fh)}
            assert got == {(i, i) for i in range(7)}, slug

    all_tasks_perfect(out_off, rows_off)
    all_tasks_perfect(out_reuse, rows_reuse)
    _report(
        7,
        f"10-clone corpus: {iters_reuse} iterations with one-shot reuse vs {iters_off} without; F1 stays 1.00",
    )


# -- criterion 8 ---------------------------------------------------------------


def test_criterion_08_sequential_mode_contract(tmp_path):
    (tmp_path / "left.csv").write_text(
        "code\n  ABC1  \n  BCD2  \n  ABD3  \n  CDE4  \n", encoding="utf-8"
    )
    (tmp_path / "right.csv").write_text("code\nabc1\nbcd2\nabd3\ncde4\n", encoding="utf-8")
    repo = load_repository(tmp_path)
    pair = (ColumnRef("left", "code"), ColumnRef("right", "code"))
    env = PairEnv(repo, pair, seed=0)
    stored = ReuseEntry(
        steps=(("a", "lowercase"), ("a", "trim"), ("a", "substring(prefix,1)")),
        base_a="code", base_b="code", cluster_id=0,
        feature_signature=(0.5,) * 8, best_reward=1.0, final_alcs=0.9,
        policy={}, q={}, pair_a_key="left.code", pair_b_key="right.code",
    )
    lib = ReuseLibrary()
    lib.store(stored)
    out = apply_reuse(env, (0.5,) * 8, 0, {0: [("left.code", "right.code")]}, lib, "sequential")
    assert out.hit
    assert [step.text for _, step in out.accepted_steps] == ["lowercase", "trim"]
    _report(8, "sequential reuse accepts exactly steps 1-2 of the 3-step stored chain")


# -- criterion 9 ---------------------------------------------------------------


def test_criterion_09_determinism(tmp_path):
    outputs = []
    for run in ("r1", "r2"):
        disc = tmp_path / run / "disc"
        join = tmp_path / run / "join"
        lib = tmp_path / run / "lib.qjl"
        assert main(["discover", "--repo", NYC, "--config", NYC_CFG, "--out", str(disc)]) == 0
        assert main(
            ["join", "--repo", NYC, "--tasks", str(disc / "tasks.csv"),
             "--config", NYC_CFG, "--out", str(join), "--library", str(lib),
             "--reuse", "one-shot"]
        ) == 0
        joined = sorted((join / "tasks").rglob("joined.csv"))
        outputs.append(
            (
                (disc / "tasks.csv").read_bytes(),
                [p.read_bytes() for p in joined],
                lib.read_bytes(),
            )
        )
    assert outputs[0] == outputs[1]
    _report(9, "tasks.csv, joined.csv, and the library file are byte-identical across runs")


# -- criterion 10 --------------------------------------------------------------


def test_criterion_10_bench_harness(tmp_path):
    out = tmp_path / "bench"
    assert main(["bench", "--bench", str(FIXTURES / "bench"), "--out", str(out)]) == 0
    with (out / "bench_report.csv").open(newline="") as fh:
        rows = {r["case"]: r for r in csv.DictReader(fh)}
    assert set(rows) == {"case_email", "case_id_prefix", "case_identity", "average"}
    assert float(rows["case_identity"]["f1"]) == 1.0
    assert float(rows["case_email"]["f1"]) == 1.0
    assert float(rows["case_id_prefix"]["f1"]) >= 0.5
    per_case = [float(rows[c]["f1"]) for c in rows if c != "average"]
    assert float(rows["average"]["f1"]) == pytest.approx(sum(per_case) / len(per_case))
    for name, row in rows.items():
        if name != "average":
            assert 0.0 <= float(row["precision"]) <= 1.0
            assert 0.0 <= float(row["recall"]) <= 1.0
    _report(10, "bench harness reports per-case P/R/F1 plus the average on the 3-case fixture")
