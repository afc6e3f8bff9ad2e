"""Acceptance battery: one test per release criterion, each printing a
pass/fail line with its runtime (run with `pytest tests/test_acceptance.py -v -s`).
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

import qualmon as qm
from qualmon.classifiers import best_split, kkt_violations, mlp_jacobian, nw_init, train_svm
from qualmon.data import DataView
from qualmon.doe import OperatingPoint, build_plan, envelope, factor_effects
from qualmon.ensemble import ClassifierPool
from qualmon.evaluation import ConfusionMatrix, mcnemar_u, rates

from test_ensemble import oracle_best_prefix, oracle_sad, random_pool
from test_knn import brute_force_neighbors
from test_mlp import finite_difference_jacobian
from test_tree import brute_force_split


@contextmanager
def criterion(number, budget_seconds, label):
    t0 = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[criterion {number}] FAIL ({time.perf_counter() - t0:.1f}s) - {label}")
        raise
    elapsed = time.perf_counter() - t0
    print(f"[criterion {number}] PASS ({elapsed:.1f}s) - {label}")
    assert elapsed < budget_seconds, f"criterion {number} exceeded {budget_seconds}s budget"


def test_criterion_1_metric_oracle_vs_reference_counts():
    with criterion(1, 1.0, "rates reproduce the frozen reference confusion rows"):
        nn = rates(ConfusionMatrix(tp=95, fn=32, fp=93, tn=848))
        knn = rates(ConfusionMatrix(tp=29, fn=98, fp=18, tn=923))
        assert nn.cm.total == 1068 and knn.cm.total == 1068
        for got, reference in (
            (nn.s01, 0.117), (nn.fa, 0.099), (nn.nd, 0.252),
            (knn.s01, 0.109), (knn.fa, 0.019), (knn.nd, 0.772),
        ):
            assert abs(got - reference) < 0.0005  # 0.05 percentage points


def test_criterion_2_mcnemar_properties():
    with criterion(2, 5.0, "McNemar symmetry/zero/hand-case over 1000 random trios"):
        truth = np.zeros(60, dtype=int)
        best = np.zeros(60, dtype=int)
        other = np.zeros(60, dtype=int)
        other[:20] = 1
        best[20:25] = 1
        u, reject = mcnemar_u(truth, best, other)
        assert u == 3.0 and reject

        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 1000:
            n = int(rng.integers(5, 120))
            t = rng.integers(0, 2, size=n)
            a = rng.integers(0, 2, size=n)
            b = rng.integers(0, 2, size=n)
            n10 = int(np.sum((a == t) & (b != t)))
            n01 = int(np.sum((a != t) & (b == t)))
            if n10 + n01 == 0:
                with pytest.raises(ValueError):
                    mcnemar_u(t, a, b)
                continue
            u_ab, rej_ab = mcnemar_u(t, a, b)
            u_ba, rej_ba = mcnemar_u(t, b, a)
            assert u_ab == u_ba and rej_ab == rej_ba
            assert u_ab >= 0
            assert (u_ab == 0) == (n10 == n01)
            assert rej_ab == (u_ab > 1.96)
            assert u_ab == pytest.approx(abs(n10 - n01) / np.sqrt(n10 + n01))
            checked += 1


def test_criterion_3_double_fault_properties():
    with criterion(3, 5.0, "double fault vs brute-force counter, 20 classifiers x 500 rows"):
        rng = np.random.default_rng(33)
        v = 500
        truth = rng.integers(0, 2, size=v)
        classes = np.empty((20, v), dtype=int)
        for j in range(20):
            correct = rng.random(v) < rng.uniform(0.5, 0.95)
            classes[j] = np.where(correct, truth, 1 - truth)
        pool = ClassifierPool.from_predictions(classes, truth)
        dm = qm.ensemble.diversity_matrix(pool)
        errors = pool.errors
        for i in range(20):
            assert dm.df[i, i] == errors[i]
            for j in range(20):
                brute = sum(
                    1 for r in range(v) if classes[i, r] != truth[r] and classes[j, r] != truth[r]
                ) / v
                assert dm.df[i, j] == brute  # exact: integer counts over v
                assert dm.df[i, j] == dm.df[j, i]
                assert 0.0 <= dm.df[i, j] <= 1.0
                assert qm.double_fault(classes[i], classes[j], truth) == brute


def test_criterion_4_selection_oracles():
    with criterion(4, 60.0, "accuracy-prefix and diversity-growth selection vs replay, 100 pools"):
        rng = np.random.default_rng(44)
        for trial in range(100):
            pool = random_pool(rng)  # <= 8 members x <= 200 rows
            scheme = "vote" if trial % 2 == 0 else "mean"
            sel, err = oracle_best_prefix(pool, scheme)
            ens = qm.select_by_accuracy(pool, scheme)
            assert ens.provenance["member_indices"] == sel
            assert ens.provenance["validation_error"] == pytest.approx(err)
            sel_sad, err_sad = oracle_sad(pool, scheme)
            ens_sad = qm.select_sad(pool, scheme, initial_size=3)
            assert ens_sad.provenance["member_indices"] == sel_sad
            assert ens_sad.provenance["validation_error"] == pytest.approx(err_sad)


def test_criterion_5_base_learner_oracles():
    with criterion(5, 120.0, "CART/kNN/MLP/SVM against independent oracles"):
        rng = np.random.default_rng(55)
        # CART: chosen split equals exhaustive enumeration on 100 tiny sets
        for _ in range(100):
            n = int(rng.integers(4, 25))
            d = int(rng.integers(1, 4))
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 2, size=n)
            expected = brute_force_split(X, y)
            got = best_split(X, y)
            if expected is None:
                assert got is None
            else:
                assert got[0] == expected[0] and got[1] == expected[1]

        # kNN: neighbor sets equal exhaustive Mahalanobis search
        ds = qm.synth_generate(qm.default_schema(), 300, 0.15, seed=9)
        split = qm.holdout_split(ds.n, 0.6, seed=1)
        model = qm.train_family("knn", ds.view(split.train), seed=2).model
        queries = ds.X[split.validation][:50]
        assert np.array_equal(model.neighbors(queries), brute_force_neighbors(model, queries))

        # MLP: analytic Jacobian matches central finite differences
        for trial in range(20):
            d = int(rng.integers(1, 5))
            h = int(rng.integers(1, 5))
            net = nw_init(d, h, seed=trial)
            Xs = rng.normal(size=(4, d))
            J = mlp_jacobian(net, Xs)
            Jfd = finite_difference_jacobian(net, Xs)
            assert np.linalg.norm(J - Jfd) / np.linalg.norm(Jfd) < 1e-4

        # SVM: zero training error on separable blobs, KKT audited independently
        blob_a = rng.normal(size=(40, 2)) * 0.3
        blob_b = rng.normal(size=(40, 2)) * 0.3 + 4.0
        view = DataView(X=np.vstack([blob_a, blob_b]), y=np.asarray([0] * 40 + [1] * 40))
        svm, alphas = train_svm(view, C=10.0, gamma=0.5, tol=1e-3, seed=0, with_alphas=True)
        preds = (svm.score(view.X) >= 0.5).astype(int)
        assert np.mean(preds != view.y) == 0.0
        t = np.where(view.y == 1, 1.0, -1.0)
        assert kkt_violations(svm.decision(view.X), t, alphas, C=10.0, tol=1e-3).max() <= 1e-3 + 1e-9
        noisy = qm.synth_generate(qm.default_schema(), 400, 0.2, seed=3)
        nview = noisy.view(np.arange(400))
        svm2, alphas2 = train_svm(nview, C=10.0, gamma=1 / 15, tol=1e-3, seed=1, with_alphas=True)
        t2 = np.where(nview.y == 1, 1.0, -1.0)
        assert kkt_violations(svm2.decision(nview.X), t2, alphas2, C=10.0, tol=1e-3).max() <= 1e-3 + 1e-9


def test_criterion_6_ensemble_beats_members_trend():
    with criterion(6, 1800.0, "selected ensemble vs best member over 20 synthetic datasets"):
        config = qm.TrainingConfig(
            mlp_hidden=8, mlp_max_iter=60, mlp_prune_retrain_iters=8, knn_folds=3
        )
        wins = 0
        gaps = []  # ensemble error minus best member error, percentage points
        for run in range(20):
            ds = qm.synth_generate(qm.default_schema(), 2270, 0.12, seed=1000 + run)
            split = qm.holdout_split(ds.n, 1202 / 2270, seed=run)
            pool = qm.generate_pool(
                ds, split, ["tree", "knn", "mlp", "svm"], 8, base_seed=run, config=config, workers=2
            )
            mie_value, _ = qm.mie(pool)
            candidates = [
                qm.select_by_accuracy(pool, "vote"),
                qm.select_by_accuracy(pool, "mean"),
                qm.select_sad(pool, "vote", initial_size=3),
                qm.select_sad(pool, "mean", initial_size=3),
            ]
            best = min(c.provenance["validation_error"] for c in candidates)
            gaps.append(100.0 * (best - mie_value))
            wins += best <= mie_value
        assert wins >= 14, f"ensemble matched/beat best member in only {wins}/20 runs"
        assert np.mean(gaps) <= 1.0, f"mean gap {np.mean(gaps):.2f}pp exceeds 1pp"
        print(f"  wins {wins}/20, mean gap {np.mean(gaps):+.3f}pp", end=" ")


def test_criterion_7_doe_identities():
    with criterion(7, 10.0, "exact zero-sum effects, envelope containment, plan shape"):
        from fractions import Fraction

        schema = [
            qm.FactorSpec(n, "continuous", bounds=(0.0, 1.0), controllable=True)
            for n in ("f1", "f2", "f3")
        ] + [qm.FactorSpec("env", "continuous", bounds=(0.0, 1.0))]
        op = OperatingPoint(values={"env": 0.5})
        plan = build_plan(schema, op, 10)
        assert plan.n_runs == 1000

        rng = np.random.default_rng(77)
        incidence = rng.integers(0, 2, size=(1000, 12))
        table = factor_effects(incidence, plan)
        for m in range(12):
            for name in ("f1", "f2", "f3"):
                assert sum(table.effects[m][name], Fraction(0)) == 0
        env = envelope(table)
        for name in ("f1", "f2", "f3"):
            for li in range(10):
                lo, up = env.lower[name][li], env.upper[name][li]
                assert lo <= up
                for m in range(12):
                    assert lo <= table.effects[m][name][li] <= up

        indicator = (plan.run_level_idx[:, 0] == 3).astype(int)[:, None]
        effects = factor_effects(indicator, plan).effects[0]["f1"]
        assert effects[3] == Fraction(9, 10)
        assert all(effects[i] == Fraction(-1, 10) for i in range(10) if i != 3)


def test_criterion_8_pipeline_determinism_and_persistence(tmp_path):
    with criterion(8, 600.0, "byte-identical pipeline reruns + bit-identical reload"):
        from qualmon.cli import main
        from qualmon.store import load_model

        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({"mlp_hidden": 6, "mlp_max_iter": 40, "mlp_prune_retrain_iters": 6}))

        def pipeline(out):
            assert main(["synth", "--n", "2270", "--rate", "0.12", "--seed", "11", "--out", out]) == 0
            assert main([
                "pool", "--data", f"{out}/data.csv", "--schema", f"{out}/schema.json",
                "--families", "tree,knn,mlp,svm", "--count", "4",
                "--seed", "11", "--config", str(cfg), "--out", out,
            ]) == 0
            assert main([
                "select", "--pool", f"{out}/pool.json", "--strategy", "all", "--fusion", "all",
                "--name", "demo defect", "--seed", "11", "--out", out,
            ]) == 0
            assert main([
                "eval", "--pool", f"{out}/pool.json", "--model", "demo_defect",
                "--store", f"{out}/store", "--out", out,
            ]) == 0
            assert main([
                "doe", "--model", "demo_defect", "--store", f"{out}/store", "--levels", "10",
                "--data", f"{out}/data.csv", "--schema", f"{out}/schema.json", "--out", out,
            ]) == 0

        run_a, run_b = str(tmp_path / "a"), str(tmp_path / "b")
        pipeline(run_a)
        pipeline(run_b)
        artifacts = [
            "data.csv", "schema.json", "pool.json", "selection_report.json",
            "store/demo_defect.json", "store/index.json",
            "eval_report.json", "eval_tables.txt", "doe.json", "envelope_plot.json",
        ]
        for name in artifacts:
            with open(f"{run_a}/{name}", "rb") as fa, open(f"{run_b}/{name}", "rb") as fb:
                assert fa.read() == fb.read(), f"artifact {name} differs between runs"

        record = load_model(f"{run_a}/store", "demo_defect")
        probes = qm.synth_generate(qm.default_schema(), 1000, 0.12, seed=999)
        reloaded = load_model(f"{run_a}/store", "demo_defect")
        c0, r0 = record.ensemble.predict(record.encoder.encode_many(probes.raw))
        c1, r1 = reloaded.ensemble.predict(reloaded.encoder.encode_many(probes.raw))
        assert np.array_equal(c0, c1) and np.array_equal(r0, r1)


def test_criterion_9_stratification():
    with criterion(9, 5.0, "10-fold positive counts stay within +-1 of proportional"):
        ds = qm.synth_generate(qm.default_schema(), 2270, 0.12, seed=4)
        fa = qm.stratified_kfold(ds.y, 10, seed=0)
        n_pos = int(ds.y.sum())
        sizes = []
        for fold in range(10):
            idx = fa.fold_indices(fold)
            sizes.append(len(idx))
            expected = n_pos * len(idx) / ds.n
            assert abs(int(ds.y[idx].sum()) - expected) <= 1
        assert max(sizes) - min(sizes) <= 1
