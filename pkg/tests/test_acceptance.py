"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary) and
then asserts. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import os
import time
from fractions import Fraction

import numpy as np
import pytest

from shiftcraft.augment import ALL_GROUPS, BasicAugConfig
from shiftcraft.bte import BteParams, BteTrace, extract_bte
from shiftcraft.imgcore.threshold import LEVELS
from shiftcraft.imgcore import (
    compute_threshold,
    gaussian_blur,
    histogram,
    hysteresis,
    label_components,
    nonmax_suppress,
    quantize_orientation,
    remove_small_components,
    sobel_gradients,
    to_grayscale,
)
from shiftcraft.protocol import (
    ExperimentRecord,
    OraclePolicyError,
    TestVariant,
    average_ranks,
    ensemble_predict,
    evaluate,
    grid_lambda,
    grid_lr,
    grid_w,
    select,
    spearman,
    tcv_split,
    tcv_validate,
)
from shiftcraft.protocol.experiment import ExperimentConfig, run_experiment
from shiftcraft.rng import derive_rng
from shiftcraft.synthdata import SynthSpec, generate_source
from shiftcraft.trainer import TrainConfig, gradient_check, init_model, train
from shiftcraft.valset import EvalSet, LabeledImage, build_augmented, build_standard, save_evalset

from .test_edges import OFFSETS

pytestmark = pytest.mark.acceptance


# -- 1 --------------------------------------------------------------------------

def exhaustive_otsu_bin(hist):
    """Maximizer over all 255 cuts of w0*w1*(mu0-mu1)^2, in exact rationals; first max wins."""
    hist = [int(h) for h in hist]
    n = sum(hist)
    best, best_k = Fraction(-1), None
    n0 = s0 = 0
    total = sum(i * h for i, h in enumerate(hist))
    for k in range(255):
        n0 += hist[k]
        s0 += k * hist[k]
        n1, s1 = n - n0, total - s0
        var = Fraction(0) if n0 == 0 or n1 == 0 else Fraction(n0 * n1, n * n) * (Fraction(s0, n0) - Fraction(s1, n1)) ** 2
        if var > best:
            best, best_k = var, k
    return best_k


def random_image(rng, k, size=64):
    kind = k % 4
    if kind == 0:
        img = rng.random((size, size))
    elif kind == 1:
        img = np.clip(rng.normal(rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3), (size, size)), 0, 1)
    elif kind == 2:
        mask = rng.random((size, size)) < rng.uniform(0.1, 0.9)
        img = np.clip(np.where(mask, rng.uniform(0.5, 1.0), rng.uniform(0.0, 0.5)) + rng.normal(0, 0.08, (size, size)), 0, 1)
    else:
        img = np.rint(rng.random((size, size)) * rng.integers(2, 12)) / 12.0
    return img


def test_criterion_01_otsu_matches_exhaustive_search(criterion):
    rng = np.random.default_rng(1)
    imgs = [random_image(rng, k) for k in range(100)]
    t0 = time.perf_counter()
    got = [compute_threshold(im, "otsu") for im in imgs]
    elapsed = time.perf_counter() - t0
    mismatches = 0
    for im, t in zip(imgs, got):
        if t != LEVELS[exhaustive_otsu_bin(histogram(im))]:
            mismatches += 1
    ok = criterion(1, mismatches == 0 and elapsed < 5.0, f"{mismatches}/100 bin mismatches, {elapsed:.3f}s")
    assert ok


# -- 2 --------------------------------------------------------------------------

def structured_images(size=64):
    r, c = np.mgrid[0:size, 0:size].astype(float)
    out = [
        np.where((abs(r - 32) < 14) & (abs(c - 32) < 14), 0.1, 0.9),
        np.where((r - 30) ** 2 + (c - 34) ** 2 < 18**2, 0.8, 0.2),
        (c / (size - 1)),
        0.5 + 0.5 * np.sin(c / 3.0),
        np.where(((r // 8) + (c // 8)) % 2 == 0, 0.0, 1.0),
        np.where(r > c, 0.3, 0.7),
        np.where(abs(r - c) < 3, 1.0, 0.0),
        np.where(((r - 32) ** 2 + (c - 32) ** 2 > 10**2) & ((r - 32) ** 2 + (c - 32) ** 2 < 20**2), 0.9, 0.1),
        0.5 + 0.4 * np.sin(r / 4.0) * np.cos(c / 5.0),
        np.where((r > 10) & (r < 20), 0.9, 0.1) * np.where((c > 40) & (c < 44), 0.4, 1.0),
    ]
    return [np.clip(x, 0, 1) for x in out]


def directional_local_max(mag, bins, r, c):
    h, w = mag.shape
    for dr, dc in OFFSETS[int(bins[r, c])]:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and mag[rr, cc] > mag[r, c]:
            return False
    return True


def test_criterion_02_edge_pipeline_invariants(criterion):
    rng = np.random.default_rng(2)
    random_imgs = []
    for k in range(50):
        base = gaussian_blur(rng.random((64, 64)), float(rng.choice([0.0, 1.0, 2.0])))
        random_imgs.append(base if k % 2 else np.clip(base + structured_images()[k % 10] * 0.5, 0, 1))
    images = random_imgs + structured_images()
    violations = {"nms_support": 0, "nms_localmax": 0, "hyst_unanchored": 0, "not_binary": 0, "reprune": 0, "constant": 0}
    t0 = time.perf_counter()
    for k, img in enumerate(images):
        for sigma in (0.0, 1.0, 2.0):
            grad = sobel_gradients(gaussian_blur(to_grayscale(img), sigma))
            thinned = nonmax_suppress(grad)
            bins = quantize_orientation(grad.orientation)
            kept = thinned > 0
            violations["nms_support"] += int(np.any(kept & ~(grad.magnitude > 0)))
            violations["nms_support"] += int(np.any(thinned[kept] != grad.magnitude[kept]))
            for r, c in np.argwhere(kept):
                violations["nms_localmax"] += int(not directional_local_max(grad.magnitude, bins, r, c))
            peak = grad.magnitude.max()
            for low, high in ((0.1, 0.3), (0.05 * peak, 0.2 * peak), (0.2 * peak, 0.2 * peak)):
                on = hysteresis(thinned, low, high)
                labels, n = label_components(on)
                strong = on & (thinned >= high)
                anchored = set(np.unique(labels[strong])) - {0}
                violations["hyst_unanchored"] += n - len(anchored)
            for frac in (2e-4, 5e-3):
                params = BteParams(sigma=sigma, min_area_fraction=frac)
                tr = BteTrace(None, None, None)
                out = extract_bte(img, params, tr)
                violations["not_binary"] += int(out.dtype != bool)
                violations["reprune"] += int(not np.array_equal(remove_small_components(out, tr.min_area), out))
    for v in (0.0, 0.37, 1.0):
        for sigma in (0.0, 1.0, 2.0):
            violations["constant"] += int(extract_bte(np.full((64, 64, 3), v), BteParams(sigma=sigma)).any())
    elapsed = time.perf_counter() - t0
    total = sum(violations.values())
    detail = ", ".join(f"{k}={v}" for k, v in violations.items()) + f"; {len(images)} images, {elapsed:.2f}s"
    assert criterion(2, total == 0 and elapsed < 10.0, detail)


# -- 3 --------------------------------------------------------------------------

def test_criterion_03_ensemble_identities(criterion):
    rng = np.random.default_rng(3)
    p = rng.dirichlet(np.ones(7), 10_000)
    q = rng.dirichlet(np.ones(7), 10_000)
    err1 = np.max(np.abs(ensemble_predict(p, q, 1.0) - p))
    err0 = np.max(np.abs(ensemble_predict(p, q, 0.0) - q))
    # exact rational value: scores sqrt(1/2 * 9/10) : sqrt(1/2 * 1/10), whose squared ratio is 9
    ratio_sq = (Fraction(1, 2) * Fraction(9, 10)) / (Fraction(1, 2) * Fraction(1, 10))
    root = Fraction(int(ratio_sq.numerator ** 0.5), int(ratio_sq.denominator ** 0.5))
    assert root * root == ratio_sq
    expected = [root / (root + 1), 1 / (root + 1)]
    hand = ensemble_predict([0.5, 0.5], [0.9, 0.1], 0.5)
    hand_err = max(abs(float(e) - h) for e, h in zip(expected, hand))
    flips = 0
    for w in (0.0, 0.25, 0.5, 0.75, 1.0, float(rng.random())):
        c1 = rng.uniform(0.01, 100.0, (10_000, 1))
        c2 = rng.uniform(0.01, 100.0, (10_000, 1))
        a = np.argmax(ensemble_predict(p, q, w), axis=1)
        b = np.argmax(ensemble_predict(c1 * p, c2 * q, w), axis=1)
        flips += int(np.sum(a != b))
    ok = err1 < 1e-9 and err0 < 1e-9 and hand_err < 1e-12 and flips == 0
    assert criterion(3, ok, f"w=1 err {err1:.1e}, w=0 err {err0:.1e}, hand case {[float(h) for h in hand]} err {hand_err:.1e}, argmax flips {flips}/60000")


# -- 4 --------------------------------------------------------------------------

def test_criterion_04_grids(criterion):
    lr = grid_lr()
    log_ratio = np.diff(np.log10(lr))
    ok_lr = len(lr) == 33 and abs(lr[0] - 1e-5) <= 1e-12 * 1e-5 and lr[-1] == 1.0 and np.max(np.abs(log_ratio - log_ratio[0])) < 1e-12
    lam = grid_lambda()
    ok_lam = len(lam) == 17 and all(Fraction(x) == Fraction(j, 16) for j, x in enumerate(lam))
    ok_w = grid_w().tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    detail = f"lr: {len(lr)} entries [{lr[0]:g}, {lr[-1]:g}], log-step spread {np.ptp(log_ratio):.1e}; lambda j/16 {ok_lam}; w {grid_w().tolist()}"
    assert criterion(4, ok_lr and ok_lam and ok_w, detail)


# -- 5 --------------------------------------------------------------------------

def test_criterion_05_tcv(criterion):
    split_bad = 0
    for seed in range(100):
        a0, b0 = tcv_split(ALL_GROUPS, 0, seed)
        a1, b1 = tcv_split(ALL_GROUPS, 1, seed)
        ok = len(a0) == len(b0) == 5 and not set(a0) & set(b0) and set(a0) | set(b0) == set(ALL_GROUPS) and (a1, b1) == (b0, a0)
        split_bad += int(not ok)
    spec = SynthSpec(class_count=3, image_size=16, per_class_train=6, per_class_val=3)
    train_items, val_items = generate_source(spec)
    basic = BasicAugConfig.digits(16)
    leaks = mean_errors = runs = 0
    for variant in ("I_hat", "I_hat_S", "I_hat_plus_BTE"):
        for split_seed in range(4):
            cfg = TrainConfig(variant, lam=0.5, lr=0.1, epochs=1, batch_images=8, basic=basic, seed=split_seed)
            tv = TestVariant("IS", 0.5) if variant == "I_hat_S" else TestVariant("I")
            res = tcv_validate(train_items, cfg, val_items, tv, split_seed=split_seed, valset_seed=split_seed)
            runs += 1
            for vset, tg in zip(res.val_sets, res.train_groups):
                leaks += sum(1 for p in vset.provenance if p.group in set(tg))
            mean_errors += int(res.score != (res.fold_accuracies[0] + res.fold_accuracies[1]) / 2.0)
    ok = split_bad == 0 and leaks == 0 and mean_errors == 0
    assert criterion(5, ok, f"bad splits {split_bad}/100; {runs} I_hat-family TCV runs: leaked items {leaks}, score != fold mean {mean_errors}")


# -- 6 --------------------------------------------------------------------------

def test_criterion_06_gradient_check(criterion):
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst = {}
    for arch in ("linear", "mlp"):
        m = init_model((6, 6, 3), 5, arch, hidden=8, rng=rng)
        m.params = [0.2 * rng.standard_normal(p.shape) for p in m.params]
        X, y = rng.random((8, m.input_dim)), rng.integers(0, 5, 8)
        Xs, ys = rng.random((8, m.input_dim)), rng.integers(0, 5, 8)
        worst[arch] = max(gradient_check(m, X, y), gradient_check(m, X, y, X_s=Xs, y_s=ys, lam=0.5))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-4 and elapsed < 5.0
    assert criterion(6, ok, f"max rel err linear {worst['linear']:.2e}, mlp {worst['mlp']:.2e}, {elapsed:.2f}s")


# -- 7 --------------------------------------------------------------------------

def test_criterion_07_schedule_and_lambda_zero(criterion):
    spec = SynthSpec(class_count=4, image_size=16, per_class_train=25, per_class_val=1)
    data, _ = generate_source(spec)
    common = dict(lr=0.1, epochs=10, batch_images=10, basic=BasicAugConfig.digits(16), seed=11, architecture="mlp", hidden=8)
    log = []
    traj_i, traj_is = [], []
    train(data, TrainConfig("I", **common), log=log, callback=lambda s, lr, ms, e: traj_i.append([p.copy() for p in ms[0].params]))
    train(data, TrainConfig("IS", lam=0.0, **common), callback=lambda s, lr, ms, e: traj_is.append([p.copy() for p in ms[0].params]))
    ratio_err = abs(log[-1].lr / log[0].lr - 0.01)
    dev = max(float(np.max(np.abs(a - b))) for pa, pb in zip(traj_i, traj_is) for a, b in zip(pa, pb))
    ok = ratio_err < 1e-12 and len(traj_i) == len(traj_is) == 100 and dev <= 1e-12
    assert criterion(7, ok, f"lr_T/lr_0 error {ratio_err:.1e}; {len(traj_i)} steps, max weight deviation {dev:.1e}")


# -- 8 --------------------------------------------------------------------------

def test_criterion_08_augmented_valset(criterion, tmp_path):
    _, val = generate_source(SynthSpec())
    vs = build_standard(val)
    va = build_augmented(val, ALL_GROUPS, seed=8)
    size_ok = len(va) == 10 * len(vs)
    per_source = {}
    for p in va.provenance:
        per_source.setdefault(p.source_id, []).append(p.group)
    multiset_bad = sum(1 for gs in per_source.values() if sorted(g.value for g in gs) != sorted(g.value for g in ALL_GROUPS))
    multiset_bad += len(set(per_source) ^ {it.id for it in val})
    again = build_augmented(val, ALL_GROUPS, seed=8)
    arrays_identical = all(a.image.tobytes() == b.image.tobytes() for a, b in zip(va.items, again.items)) and va.provenance == again.provenance
    da, db = save_evalset(va, tmp_path / "a"), save_evalset(again, tmp_path / "b")
    files_identical = all(f.read_bytes() == (db / f.name).read_bytes() for f in da.iterdir())
    ok = size_ok and multiset_bad == 0 and arrays_identical and files_identical
    assert criterion(8, ok, f"|V_A|={len(va)} |V_S|={len(vs)}; bad per-source multisets {multiset_bad}; rebuild identical arrays={arrays_identical} files={files_identical}")


# -- 9 --------------------------------------------------------------------------

def test_criterion_09_augmented_validation_tracks_target(criterion):
    t0 = time.perf_counter()
    rows = []
    for seed in range(5):
        cfg = ExperimentConfig(seed=seed, ws=(0.25, 0.5, 0.75), workers=min(4, os.cpu_count() or 1))
        res = run_experiment(cfg)
        configs = len({(r.train_variant, r.test_variant, r.w, r.lam, r.lr) for r in res.records})
        rho_s = res.correlations["standard"][0]
        rho_a = res.correlations["augmented"][0]
        sel_s = res.selections["standard"].chosen.test_accuracy
        sel_a = res.selections["augmented"].chosen.test_accuracy
        rows.append((seed, configs, rho_s, rho_a, sel_s, sel_a))
        print(f"  seed {seed}: {configs} configs, rho(V_S)={rho_s:.3f} rho(V_A)={rho_a:.3f}, target acc of V_S pick {sel_s:.3f}, of V_A pick {sel_a:.3f}")
    elapsed = time.perf_counter() - t0
    rho_wins = sum(1 for _, _, rs, ra, _, _ in rows if ra > rs and ra >= 0.5)
    sel_wins = sum(1 for *_, ss, sa in rows if sa >= ss)
    ok = all(r[1] >= 12 for r in rows) and rho_wins >= 4 and sel_wins >= 4 and elapsed < 900
    detail = (
        f"rho(V_A)>rho(V_S) and rho(V_A)>=0.5 in {rho_wins}/5 seeds (need 4); "
        f"V_A pick >= V_S pick on target in {sel_wins}/5 (need 4); "
        f"rho_S={[round(r[2], 3) for r in rows]} rho_A={[round(r[3], 3) for r in rows]}; {elapsed:.0f}s on {os.cpu_count()} core(s)"
    )
    assert criterion(9, ok, detail)


# -- 10 -------------------------------------------------------------------------

def rank_then_pearson(x, y):
    def ranks(v):
        return np.array([sum(b < a for b in v) + (sum(b == a for b in v) + 1) / 2.0 for a in v])

    rx, ry = ranks(list(x)), ranks(list(y))
    rx, ry = rx - rx.mean(), ry - ry.mean()
    return float((rx * ry).sum() / np.sqrt((rx * rx).sum() * (ry * ry).sum()))


def test_criterion_10_spearman_oracle(criterion):
    rng = np.random.default_rng(10)
    worst, n, ties = 0.0, 0, 0
    while n < 1000:
        x, y = rng.integers(0, 8, 20), rng.integers(0, 8, 20)
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        ties += int(len(set(x)) < 20 or len(set(y)) < 20)
        worst = max(worst, abs(spearman(x, y) - rank_then_pearson(x, y)))
        n += 1
    assert criterion(10, worst < 1e-12 and ties == 1000, f"{n} tied vector pairs, max |diff| {worst:.1e}")


# -- 11 -------------------------------------------------------------------------

def test_criterion_11_oracle_guard(criterion):
    records = [ExperimentRecord("I", "I", 1.0, None, lr, 0, "oracle", acc, acc) for lr, acc in ((0.1, 0.6), (0.03, 0.7))]
    refused = False
    try:
        select(records, "oracle")
    except OraclePolicyError:
        refused = True
    upper = select(records, "oracle", upper_bound=True).chosen.lr == 0.03
    eval_refused = False
    try:
        evaluate(init_model((4, 4, 3), 2), EvalSet("oracle", [LabeledImage(np.zeros((4, 4, 3)), 0, "o")]))
    except OraclePolicyError:
        eval_refused = True
    assert criterion(11, refused and upper and eval_refused, f"select refused without flag: {refused}; allowed with upper_bound: {upper}; evaluate refused: {eval_refused}")
