"""Package acceptance gate.

Eleven checks, one test each, covering the analytic gradient, circuit
symmetry, optimizer arithmetic, the trainability integral, the GP
surrogate, Hyperband bracket structure, expressibility estimation,
the depth/frequency link, end-to-end classification quality, encoding
interval equivalence, and command-line reproducibility. Each test
prints a single PASS/FAIL line; failures carry the measured numbers.
"""

import csv
import json
import math
import time
from functools import lru_cache

import numpy as np

from qrulab import analysis, cli, dataio, hpo, qcore, training
from qrulab import circuit as qc

SANDWICH_AXES = ("xyx", "xzx", "yxy", "yzy", "zxz", "zyz")
TRIPLET_AXES = ("xyz", "xzy", "yxz", "yzx", "zxy", "zyx")


def report(number, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{status}] criterion {number:2d}: {description}{suffix}")
    return ok


# --------------------------------------------------------------------------
# 1. analytic gradient vs central finite differences
# --------------------------------------------------------------------------


def test_c01_gradient_matches_finite_differences():
    rng = np.random.default_rng(101)
    eps = 1e-6
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(100):
        ppi = i % 5 + 1
        depth = i % 6 + 1
        pool = SANDWICH_AXES if i % 2 == 0 else TRIPLET_AXES
        axes = pool[int(rng.integers(len(pool)))]
        nf = 1 + i % 3
        spec = qc.CircuitSpec(depth, nf, qc.EncodingScheme.from_axes(axes, ppi))
        params = rng.uniform(-2.5, 2.5, qc.param_count(spec))
        x = rng.uniform(-math.pi, math.pi, nf)
        got = qc.gradient(spec, params, x)
        for j in range(len(params)):
            hi, lo = params.copy(), params.copy()
            hi[j] += eps
            lo[j] -= eps
            fd = (qc.forward(spec, hi, x) - qc.forward(spec, lo, x)) / (2 * eps)
            worst = max(worst, abs(got[j] - fd) / max(1.0, abs(fd)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 10.0
    assert report(
        1,
        "gradient matches central differences on 100 circuits (all 5 encodings, "
        "both axis families, depths 1-6) within 1e-5",
        ok,
        f"worst rel err {worst:.2e}, {elapsed:.1f}s",
    )


# --------------------------------------------------------------------------
# 2. even symmetry of low-order sandwich circuits
# --------------------------------------------------------------------------


def test_c02_sandwich_evenness():
    rng = np.random.default_rng(102)
    spec = qc.CircuitSpec(10, 3, qc.EncodingScheme.from_axes("xyx", 3))
    gap = 0.0
    t0 = time.perf_counter()
    for _ in range(50):
        params = rng.uniform(-4, 4, qc.param_count(spec))
        x = rng.uniform(-math.pi, math.pi, 3)
        gap = max(gap, abs(qc.forward(spec, params, x) - qc.forward(spec, params, -x)))
    elapsed = time.perf_counter() - t0
    ok = gap < 1e-9 and elapsed < 5.0
    assert report(
        2,
        "depth-10 sandwich scale-encoded circuit is even, h(x) = h(-x), over 50 draws",
        ok,
        f"max gap {gap:.2e}, {elapsed:.1f}s",
    )


# --------------------------------------------------------------------------
# 3. optimizer update arithmetic
# --------------------------------------------------------------------------

# two steps from theta0=[0.5,-0.25] with g1=[0.2,-0.1], g2=[-0.05,0.3],
# lr=0.1; reference values derived by hand from each update rule
TWO_STEP_REFERENCE = {
    "sgd": (0.485, -0.27),
    "rmsprop": (0.26435482101753727, -0.23528500740955582),
    "adagrad": (0.4242535663271625, -0.24486833680505043),
    "adadelta": (0.49979773298650115, -0.25011017396647356),
    "adam": (0.3530531911004468, -0.1994189911200654),
    "adamw": (0.3521536910954468, -0.1990192411100654),
    "adamax": (0.3657552356270758, -0.18684211403508671),
    "nadam": (0.2858043438748453, -0.1750756464652956),
}


def test_c03_optimizer_two_step_values():
    worst = 0.0
    for name in training.OPTIMIZER_NAMES:
        kind = training.OptimizerKind(name)
        params = np.array([0.5, -0.25])
        state = training.init_state(kind, 2)
        for g in (np.array([0.2, -0.1]), np.array([-0.05, 0.3])):
            params, state = training.optimizer_step(kind, state, params, g, 0.1)
        worst = max(worst, float(np.max(np.abs(params - TWO_STEP_REFERENCE[name]))))
    ok = worst <= 1e-10 and len(training.OPTIMIZER_NAMES) == 8
    assert report(
        3,
        "all 8 optimizers reproduce hand-derived two-step updates within 1e-10",
        ok,
        f"worst abs err {worst:.2e}",
    )


# --------------------------------------------------------------------------
# 4. trainability integral
# --------------------------------------------------------------------------


def test_c04_trainability_of_linear_descent():
    results = {}
    for epochs in (30, 7):
        curve = np.linspace(1.0, 0.0, epochs + 1).tolist()
        results[epochs] = training.trainability(curve)
    ok = all(abs(results[e] - e / 2) <= 1e-12 for e in results)
    assert report(
        4,
        "trainability of a linear 1->0 loss curve over E epochs equals E/2",
        ok,
        ", ".join(f"E={e}: {v:.12g}" for e, v in results.items()),
    )


# --------------------------------------------------------------------------
# 5. Gaussian-process closed forms
# --------------------------------------------------------------------------


def test_c05_gp_posterior_closed_forms():
    prior = hpo.gp_posterior(
        hpo.GpModel(X=np.empty((0, 4)), y=np.empty(0)), np.full(4, 0.25)
    )
    prior_ok = prior[0] == 0.0 and abs(prior[1] - 1.0) <= 1e-12

    x0 = np.array([0.2, 0.4, 0.6, 0.8])
    single = hpo.gp_posterior(hpo.GpModel(X=x0[None, :], y=np.array([-0.7])), x0)
    single_ok = abs(single[0] - (-0.7)) <= 1e-6 and abs(single[1]) <= 1e-6

    X = np.array([[0.1, 0.9, 0.3, 0.5], [0.7, 0.2, 0.8, 0.1]])
    y = np.array([0.4, -1.1])
    model = hpo.GpModel(X=X, y=y)
    d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=2)
    K = np.exp(-d2 / (2 * 0.5**2)) + 1e-8 * np.eye(2)
    K_inv = np.linalg.inv(K)
    worst = 0.0
    rng = np.random.default_rng(105)
    for _ in range(5):
        q = rng.uniform(0, 1, 4)
        ks = np.exp(-np.sum((X - q) ** 2, axis=1) / (2 * 0.5**2))
        want_mu = float(ks @ K_inv @ y)
        want_var = max(0.0, float(1.0 - ks @ K_inv @ ks))
        mu, var = hpo.gp_posterior(model, q)
        worst = max(worst, abs(mu - want_mu), abs(var - want_var))
    pair_ok = worst <= 1e-10

    ok = prior_ok and single_ok and pair_ok
    assert report(
        5,
        "GP prior is (0, signal variance), one observation interpolates, "
        "two-point posterior matches a direct solve",
        ok,
        f"prior={prior}, single mu err {abs(single[0] + 0.7):.1e}, "
        f"two-point worst err {worst:.1e}",
    )


# --------------------------------------------------------------------------
# 6. Hyperband bracket structure
# --------------------------------------------------------------------------


def test_c06_hyperband_brackets():
    brackets = hpo.hyperband_brackets(30, 3)
    table_ok = brackets == [(27, 1), (12, 3), (6, 10), (4, 30)]

    space = hpo.HpoSpace(
        depth_choices=(1, 2, 3, 4),
        lr_choices=(0.1, 0.01),
        loss_choices=(training.L2,),
        optimizer_choices=(training.OptimizerKind("sgd"),),
    )
    result = hpo.hyperband_search(
        space, lambda cfg, b: cfg.depth + 1.0 / b, max_budget=30, eta=3, seed=106
    )
    budgets = [t.budget for t in result.trials]
    counts = {b: budgets.count(b) for b in sorted(set(budgets))}
    # rung sizes implied by the brackets: 27,9,3,1 | 12,4,1 | 6,2 | 4
    run_ok = (
        max(budgets) == 30
        and counts == {1: 27, 3: 21, 10: 13, 30: 8}
        and len(result.trials) == 69
    )
    ok = table_ok and run_ok
    assert report(
        6,
        "Hyperband at budget 30, eta 3 runs brackets (27,1),(12,3),(6,10),(4,30) "
        "and never exceeds the budget",
        ok,
        f"brackets={brackets}, rung budget counts={counts}",
    )


# --------------------------------------------------------------------------
# 7. expressibility estimator endpoints
# --------------------------------------------------------------------------


def test_c07_expressibility_endpoints():
    t0 = time.perf_counter()
    rng = np.random.default_rng(107)
    fids = np.array([
        qcore.state_fidelity(qcore.haar_state(rng), qcore.haar_state(rng))
        for _ in range(5000)
    ])
    haar_kl = analysis.kl_vs_haar(fids, 75)
    fixed_kl = analysis.kl_vs_haar(np.full(5000, 0.42), 75)
    elapsed = time.perf_counter() - t0
    ok = haar_kl < 0.05 and abs(fixed_kl - math.log(75)) <= 1e-6 and elapsed < 30.0
    assert report(
        7,
        "KL estimator: Haar pairs score < 0.05 and a collapsed ensemble scores "
        "ln(75), at 5000 pairs / 75 bins",
        ok,
        f"haar {haar_kl:.4f}, fixed {fixed_kl:.9f} vs {math.log(75):.9f}, {elapsed:.1f}s",
    )


# --------------------------------------------------------------------------
# 8. depth bounds the frequency content at unit scaling
# --------------------------------------------------------------------------


def test_c08_depth_three_spectrum():
    rng = np.random.default_rng(108)
    spec = qc.CircuitSpec(3, 1, qc.EncodingScheme.from_axes("xyx", 3))
    params = np.empty(qc.param_count(spec))
    params[0::3] = rng.uniform(-2, 2, 3)
    params[1::3] = 1.0  # unit scaling pins each harmonic step to 1
    params[2::3] = rng.uniform(-2, 2, 3)
    curve = analysis.hypothesis_curve(spec, params, (-math.pi, math.pi), 201)
    r3 = analysis.spectrum_fit(curve, 3).residual_rms
    r2 = analysis.spectrum_fit(curve, 2).residual_rms
    ok = r3 < 1e-8 and r2 >= 10 * max(r3, 1e-12)
    assert report(
        8,
        "depth-3 unit-scaling circuit fits exactly with 3 harmonics and loses "
        ">= 10x accuracy with 2",
        ok,
        f"residual rms: 3 harmonics {r3:.2e}, 2 harmonics {r2:.2e}",
    )


# --------------------------------------------------------------------------
# 9 & 10. end-to-end classification on the synthetic benchmark
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def baseline_accuracy(depth, seed, lo, hi):
    ds = dataio.generate_synthetic(dataio.SynthConfig(n_per_class=500), 42)
    train_raw, test_raw = dataio.split_shuffle(ds, 0.8, seed)
    train = dataio.normalize(train_raw, lo, hi)
    test = dataio.apply_normalization(test_raw, train.normalization)
    spec = qc.CircuitSpec(depth, 3, qc.EncodingScheme.from_axes("xyx", 3))
    cfg = training.TrainConfig(
        spec=spec,
        epochs=30,
        batch_size=1,
        lr=5e-4,
        optimizer=training.OptimizerKind("adam"),
        loss=training.L2,
        seed=seed,
    )
    return training.fit(cfg, train, test).test_acc[-1]


SEEDS = (0, 1, 2)


def test_c09_depth_four_beats_depth_one():
    t0 = time.perf_counter()
    deep = [baseline_accuracy(4, s, -math.pi, math.pi) for s in SEEDS]
    shallow = [baseline_accuracy(1, s, -math.pi, math.pi) for s in SEEDS]
    elapsed = time.perf_counter() - t0
    deep_med = float(np.median(deep))
    shallow_med = float(np.median(shallow))
    ok = deep_med >= 0.90 and deep_med - shallow_med >= 0.03 and elapsed < 900.0
    assert report(
        9,
        "baseline recipe on the synthetic benchmark: depth-4 median test accuracy "
        ">= 0.90 and beats depth-1 by >= 0.03 over 3 seeds",
        ok,
        f"depth-4 {deep_med:.4f}, depth-1 {shallow_med:.4f}, {elapsed:.0f}s",
    )


def test_c10_encoding_interval_equivalence():
    diffs = [
        abs(
            baseline_accuracy(4, s, -math.pi, math.pi)
            - baseline_accuracy(4, s, 0.0, 2.0 * math.pi)
        )
        for s in SEEDS
    ]
    med = float(np.median(diffs))
    ok = med <= 0.02
    assert report(
        10,
        "depth-4 accuracy on [-pi,pi] and [0,2pi] normalizations agrees within "
        "0.02 (median over 3 seeds)",
        ok,
        "per-seed diffs " + ", ".join(f"{d:.4f}" for d in diffs),
    )


# --------------------------------------------------------------------------
# 11. command-line reproducibility
# --------------------------------------------------------------------------


def test_c11_cli_reruns_byte_identical(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("depth = 1\nepochs = 2\n")
    data = tmp_path / "data.csv"
    assert cli.run(["gen-data", "--out", str(data), "--n", "10", "--seed", "5"]) == 0

    def run_all(tag):
        d = tmp_path / tag
        d.mkdir()
        gen = d / "gen.csv"
        assert cli.run(["gen-data", "--out", str(gen), "--n", "10", "--seed", "5"]) == 0
        curves = d / "curves.csv"
        assert cli.run([
            "train", "--config", str(cfg), "--data", str(data),
            "--out", str(d / "rep.json"), "--curves", str(curves),
        ]) == 0
        sweep = d / "sweep.csv"
        assert cli.run([
            "sweep", "--config", str(cfg), "--data", str(data), "--out", str(sweep),
            "--dim", "depth", "--values", "1,2", "--threads", "2",
        ]) == 0
        spect = d / "spect.csv"
        assert cli.run([
            "analyze", "--task", "spectrum", "--config", str(cfg),
            "--out", str(spect), "--points", "41", "--max-freq", "2",
        ]) == 0
        with open(sweep, newline="") as fh:
            sweep_rows = [row[:-1] for row in csv.reader(fh)]  # wall-time column off
        payload = json.loads((d / "rep.json").read_text())
        payload["final"].pop("wall_time")
        return {
            "gen": gen.read_bytes(),
            "curves": curves.read_bytes(),
            "report": payload,
            "sweep": sweep_rows,
            "spect": spect.read_bytes(),
        }

    first, second = run_all("first"), run_all("second")
    mismatched = [k for k in first if first[k] != second[k]]
    ok = not mismatched
    assert report(
        11,
        "re-running gen-data/train/sweep/analyze with identical seeds reproduces "
        "byte-identical CSV bodies (wall-clock columns excluded)",
        ok,
        "all outputs identical" if ok else f"mismatch in {mismatched}",
    )
