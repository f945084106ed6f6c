"""Acceptance suite: every release-gating property at its stated tolerance.

Each test prints one PASS/FAIL line (visible with `pytest -s`). The graph
quality criterion builds the full 20k-word benchmark and dominates the
suite's runtime.
"""

import time

import numpy as np

from vproj import (
    FrequencyTable,
    GraphParams,
    SearchIndex,
    build_graph,
    build_index,
    check_consistency,
    compute_bound,
    decode_topk,
    matching_value,
    metric_rho,
    oracle_topk,
    run_eval,
    save_index,
    smooth_consistent,
    smooth_laplacian,
    synth_dataset,
    transform_points,
    transform_query,
)
from vproj.report import format_records_tsv, format_summary

from conftest import random_projection


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _flat_index(projection, dtype):
    """Index wrapper for flat-mode decoding; the graph is kept trivial."""
    bound = compute_bound(projection)
    points = transform_points(projection, bound, dtype=dtype)
    graph = build_graph(points, GraphParams(m=2, ef_construction=2, level_mult=1e-9))
    return SearchIndex(bound=bound, points=points, graph=graph)


def test_c1_flat_decode_matches_oracle():
    """decode_topk(flat) must reproduce the full-projection oracle exactly:
    200 random instances, K in {1, 5, |V|}, 64-bit path, zero mismatches,
    under 60 seconds."""
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    mismatches = 0
    worst_sphere = 0.0
    worst_logit = 0.0
    for _ in range(200):
        vocab = int(rng.integers(16, 513))
        dim = int(rng.integers(2, 33))
        proj = random_projection(rng, vocab, dim)
        index = _flat_index(proj, np.float64)
        norms = np.sqrt(np.einsum("ij,ij->i", index.points.z, index.points.z))
        worst_sphere = max(worst_sphere, float(np.abs(norms - index.u).max() / index.u))
        h = rng.standard_normal(dim)
        for k in (1, 5, vocab):
            got = decode_topk(index, h, k, mode="flat")
            exact = oracle_topk(proj, h, k)
            if got.ids.tolist() != exact.ids.tolist():
                mismatches += 1
            scale = np.maximum(np.abs(exact.logits), 1e-9)
            worst_logit = max(
                worst_logit, float(np.max(np.abs(got.logits - exact.logits) / scale))
            )
    elapsed = time.perf_counter() - t0
    _report(
        "flat-oracle-equivalence",
        mismatches == 0 and elapsed < 60.0,
        f"0 mismatches required, saw {mismatches}; {elapsed:.1f}s (< 60s)",
    )
    _report(
        "sphere-invariant-64bit",
        worst_sphere <= 1e-9,
        f"max relative radius error {worst_sphere:.2e} (<= 1e-9)",
    )
    _report(
        "inverse-transform-64bit",
        worst_logit <= 1e-9,
        f"max relative logit recovery error {worst_logit:.2e} (<= 1e-9)",
    )


def test_c2_sphere_and_inverse_transform_32bit():
    """Float32 point storage: radius within 1e-4 relative, recovered logits
    within 1e-3 absolute on unit-scale data."""
    rng = np.random.default_rng(203)
    worst_sphere = 0.0
    worst_logit = 0.0
    for _ in range(50):
        vocab = int(rng.integers(16, 257))
        dim = int(rng.integers(2, 33))
        proj = random_projection(rng, vocab, dim)
        index = _flat_index(proj, np.float32)
        z = index.points.z_math
        norms = np.sqrt(np.einsum("ij,ij->i", z, z))
        worst_sphere = max(worst_sphere, float(np.abs(norms - index.u).max() / index.u))
        h = rng.standard_normal(dim)
        got = decode_topk(index, h, vocab, mode="flat")
        direct = proj.weights.astype(np.float64) @ h + proj.biases.astype(np.float64)
        worst_logit = max(worst_logit, float(np.abs(got.logits - direct[got.ids]).max()))
    _report(
        "sphere-invariant-32bit",
        worst_sphere <= 1e-4,
        f"max relative radius error {worst_sphere:.2e} (<= 1e-4)",
    )
    _report(
        "inverse-transform-32bit",
        worst_logit <= 1e-3,
        f"max absolute logit recovery error {worst_logit:.2e} (<= 1e-3)",
    )


def test_c3_metric_and_lipschitz():
    """10k sampled triangle inequalities and 10k Lipschitz pairs."""
    rng = np.random.default_rng(204)
    proj = random_projection(rng, 512, 16)
    points = transform_points(proj, compute_bound(proj), dtype=np.float64)
    worst_triangle = np.inf
    for _ in range(10_000):
        a, b, c = (int(x) for x in rng.integers(0, 512, size=3))
        slack = (
            metric_rho(a, b, points) + metric_rho(b, c, points) - metric_rho(a, c, points)
        )
        worst_triangle = min(worst_triangle, slack)
    worst_lipschitz = -np.inf
    for _ in range(10_000):
        i, j = (int(x) for x in rng.integers(0, 512, size=2))
        q = transform_query(rng.standard_normal(16))
        gap = abs(matching_value(i, points, q) - matching_value(j, points, q))
        worst_lipschitz = max(worst_lipschitz, gap - metric_rho(i, j, points))
    _report(
        "metric-triangle-inequality",
        worst_triangle >= -1e-9,
        f"min slack {worst_triangle:.2e} (>= -1e-9) over 10000 triples",
    )
    _report(
        "matching-function-lipschitz",
        worst_lipschitz <= 1e-9,
        f"max violation {worst_lipschitz:.2e} (<= 1e-9) over 10000 pairs",
    )


def test_c4_smoothing_consistency():
    """1000 random instances all satisfy the three consistency conditions
    and normalize within 1e-10; the dense-frequency counterexample breaks
    top-set dominance."""
    rng = np.random.default_rng(205)
    failures = 0
    worst_sum = 0.0
    trials = 0
    while trials < 1000:
        vocab = int(rng.integers(2, 257))
        k = int(rng.integers(1, vocab + 1))
        ids = rng.choice(vocab, size=k, replace=False)
        y = rng.random(k) + 1e-4
        y /= y.sum()
        eps = float(rng.uniform(0.0, float(y.min())))
        if not (0.0 < eps < float(y.min())):
            continue
        freq = FrequencyTable(rng.random(vocab) + 1e-4)
        dist = smooth_consistent(ids, y, freq, epsilon=eps)
        if not check_consistency(dist, y).consistent:
            failures += 1
        worst_sum = max(worst_sum, abs(float(dist.materialize().sum()) - 1.0))
        trials += 1
    counter_freq = FrequencyTable(np.array([0.01, 0.01, 0.98]))
    counter = smooth_laplacian(np.array([0.5, 0.5, 0.0]), counter_freq, epsilon=1.0)
    counter_report = check_consistency(counter, np.array([0.5, 0.5]))
    _report(
        "consistent-smoothing-guarantee",
        failures == 0 and worst_sum <= 1e-10,
        f"{failures} inconsistent of 1000; worst |sum-1| {worst_sum:.2e} (<= 1e-10)",
    )
    _report(
        "laplacian-counterexample",
        counter_report.positivity
        and counter_report.order_preserved
        and not counter_report.topk_dominates,
        "dense frequency smoothing violates top-set dominance as constructed",
    )


def test_c5_exactness_at_limit():
    """ef_search = |V| on small indexes returns the exact answer for every
    query and every K."""
    rng = np.random.default_rng(206)
    total = 0
    exact_hits = 0
    for vocab, dim in ((17, 3), (64, 8), (256, 16)):
        proj = random_projection(rng, vocab, dim)
        index = build_index(proj, GraphParams(m=4, ef_construction=16))
        for _ in range(20):
            h = rng.standard_normal(dim)
            for k in (1, 5, vocab):
                got = decode_topk(index, h, k, ef_search=vocab)
                exact = oracle_topk(proj, h, k)
                total += 1
                if got.ids.tolist() == exact.ids.tolist():
                    exact_hits += 1
    _report(
        "exactness-at-limit",
        exact_hits == total,
        f"{exact_hits}/{total} queries exact at ef_search = |V|",
    )


def test_c6_determinism():
    """Byte-identical index files from identical inputs; byte-identical
    eval metrics (timing excluded) across runs."""
    import os
    import tempfile

    proj, freq, queries = synth_dataset(600, 16, seed=11, n_queries=30)
    params = GraphParams(m=8, ef_construction=64, seed=11)
    blobs = []
    for path in ("det_a.idx", "det_b.idx"):
        index = build_index(proj, params)
        with tempfile.TemporaryDirectory() as td:
            full = os.path.join(td, path)
            save_index(index, full)
            blobs.append(open(full, "rb").read())
    index = build_index(proj, params)
    r1 = run_eval(index, proj, queries, 10, 64, warmup=0)
    r2 = run_eval(index, proj, queries, 10, 64, warmup=0)
    same_metrics = format_summary(r1, include_timing=False) == format_summary(
        r2, include_timing=False
    ) and format_records_tsv(r1, include_timing=False) == format_records_tsv(
        r2, include_timing=False
    )
    _report(
        "build-determinism",
        blobs[0] == blobs[1],
        f"two builds, {len(blobs[0])} bytes, byte-identical",
    )
    _report("eval-determinism", same_metrics, "metric fields byte-identical across runs")


def test_c7_graph_retrieval_quality():
    """The 20k benchmark: precision@10 >= 0.95 at ef_search=128 with mean
    distance evaluations <= 0.25 |V|, built and evaluated within budget."""
    t0 = time.perf_counter()
    proj, freq, queries = synth_dataset(20_000, 64, seed=42, n_queries=1000)
    index = build_index(proj)  # default GraphParams
    build_s = time.perf_counter() - t0
    t1 = time.perf_counter()
    report = run_eval(index, proj, queries, 10, 128)
    eval_s = time.perf_counter() - t1
    ok = (
        report.mean_precision >= 0.95
        and report.mean_distance_evals <= 0.25 * 20_000
        and build_s < 300.0
        and eval_s < 120.0
    )
    _report(
        "graph-retrieval-quality",
        ok,
        f"precision@10 {report.mean_precision:.4f} (>= 0.95), "
        f"mean evals {report.mean_distance_evals:.0f} (<= 5000), "
        f"build {build_s:.0f}s (< 300s), eval {eval_s:.0f}s (< 120s)",
    )
    _report(
        "flat-mode-exactness-at-20k",
        report.mean_flat_precision == 1.0,
        "flat scan matches the oracle on every query",
    )
    evals_64 = np.mean(
        [
            decode_topk(index, h, 10, ef_search=64).distance_evals
            for h in queries[:200]
        ]
    )
    _report(
        "sublinearity-witness",
        evals_64 < 0.25 * 20_000,
        f"mean distance evals {evals_64:.0f} at ef_search=64 (< 5000 = 0.25 |V|)",
    )
