"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance is pinned here, nothing is calibrated at run time.
"""

import math
import subprocess
import sys
import time

import numpy as np

from graphdtn import (
    SpectrumHit,
    attach,
    counting_function,
    default_corpus,
    deserialize,
    dtn_matrix,
    eigenvalues_sym,
    glue,
    metric_graph,
    read_matrix,
    scale_lengths,
    segment,
    serialize,
    subdivide_edge,
    synthesize,
    verify_counting_bounds,
    verify_neumann_dirichlet_count,
    verify_robin_count,
    write_matrix,
)
from graphdtn.cli import main

GRID = np.linspace(0.2, 30.0, 50)


def max_abs(a):
    return float(np.max(np.abs(a)))


def random_symmetric(rng, k, scale=3.0):
    a = rng.uniform(-scale, scale, size=(k, k))
    return (a + a.T) / 2


def announce(number, ok, text):
    print(f"criterion {number:02d}: {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, text


def test_c01_synthesis_round_trip():
    rng = np.random.default_rng(101)
    start = time.time()
    worst = 0.0
    for i in range(100):
        k = int(rng.integers(2, 6))
        a = random_symmetric(rng, k)
        for lam in (0.5, 1.0, 4.0):
            g = synthesize(a, lam)
            residual = max_abs(dtn_matrix(g, lam) - a)
            assert residual <= 1e-8 * (1.0 + max_abs(a)), (i, k, lam, residual)
            worst = max(worst, residual)
    elapsed = time.time() - start
    announce(1, elapsed < 10.0,
             f"100 random targets, k in 2..5, three parameters each; "
             f"worst residual {worst:.2e}, {elapsed:.1f}s")


def test_c02_segment_closed_form():
    rng = np.random.default_rng(102)
    checked = 0
    while checked < 100:
        length = rng.uniform(0.1, 6.0)
        lam = rng.uniform(0.1, 20.0)
        w = math.sqrt(lam)
        if abs(math.sin(w * length)) <= 0.1:
            continue
        expected = w * np.array(
            [[math.cos(w * length) / math.sin(w * length), -1.0 / math.sin(w * length)],
             [-1.0 / math.sin(w * length), math.cos(w * length) / math.sin(w * length)]]
        )
        assert max_abs(dtn_matrix(segment(length), lam) - expected) <= 1e-10
        checked += 1
    announce(2, True, "100 random segments match the closed-form kernel within 1e-10")


def test_c03_neumann_dirichlet_identity_on_corpus():
    start = time.time()
    skipped = 0
    total = 0
    for name, g in default_corpus():
        for lam in GRID:
            report = verify_neumann_dirichlet_count(g, lam)
            total += 1
            if report.verdict == "skipped":
                skipped += 1
                continue
            assert report.verdict == "pass", (name, lam, report.counts)
            assert report.stable
            assert report.neumann_count - report.dirichlet_count == report.dtn_count
    elapsed = time.time() - start
    assert skipped <= total // 10, f"too many skipped points: {skipped}/{total}"
    announce(3, elapsed < 60.0,
             f"count identity exact at {total - skipped}/{total} grid points "
             f"({skipped} skipped), {elapsed:.1f}s")


def test_c04_robin_identity_on_corpus():
    skipped = 0
    total = 0
    for name, g in default_corpus():
        for lam in GRID:
            report = verify_robin_count(g, lam, 0.5, 2.0)
            total += 1
            if report.verdict == "skipped":
                skipped += 1
                continue
            assert report.verdict == "pass", (name, lam, report.counts)
            assert report.robin_a_count - report.robin_b_count == report.dtn_count
    assert skipped <= total // 10
    announce(4, True,
             f"Robin pair (0.5, 2.0) identity exact at {total - skipped}/{total} points "
             f"({skipped} skipped)")


def test_c05_count_difference_bounds():
    for name, g in default_corpus():
        report = verify_counting_bounds(g, GRID)
        for point in report.points:
            if point.verdict == "skipped":
                continue
            gap = point.neumann_count - point.dirichlet_count
            assert 0 <= gap <= g.boundary_size, (name, point.lam, gap)
    # analytic interlacing on the unit segment, first 20 eigenvalues
    free = [((j - 1) * math.pi) ** 2 for j in range(1, 24)]
    clamped = [(j * math.pi) ** 2 for j in range(1, 21)]
    for j in range(1, 21):
        assert free[j - 1] <= clamped[j - 1] <= free[j + 1]
    announce(5, True, "0 <= N_free - N_clamped <= k on the corpus grid; "
                      "segment interlacing holds for j <= 20")


def test_c06_symmetry_of_every_assembled_matrix():
    rng = np.random.default_rng(106)
    matrices = []
    for _, g in default_corpus():
        for lam in GRID:
            try:
                matrices.append(dtn_matrix(g, lam))
            except SpectrumHit:
                continue
    for _ in range(20):
        k = int(rng.integers(2, 6))
        a = random_symmetric(rng, k)
        lam = float(rng.choice([0.5, 1.0, 4.0]))
        matrices.append(dtn_matrix(synthesize(a, lam), lam))
    worst = max(max_abs(r - r.T) / (1.0 + max_abs(r)) for r in matrices)
    announce(6, worst <= 1e-10,
             f"{len(matrices)} assembled matrices symmetric, worst relative gap {worst:.2e}")


def test_c07_monotonicity_along_spectrum_free_intervals():
    rng = np.random.default_rng(107)
    checked_intervals = 0
    for name, g in default_corpus():
        rows = []
        for lam in GRID:
            try:
                r = dtn_matrix(g, lam)
            except SpectrumHit:
                rows.append(None)
                continue
            n_clamped, stable, _ = counting_function(g, "dirichlet", lam)
            rows.append((lam, r, n_clamped) if stable else None)
        k = g.boundary_size
        vectors = rng.standard_normal((10, k))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        # split into runs between clamped-spectrum crossings
        run = []
        runs = []
        for row in rows:
            if row is None or (run and run[-1][2] != row[2]):
                if len(run) >= 2:
                    runs.append(run)
                run = [] if row is None else [row]
            else:
                run.append(row)
        if len(run) >= 2:
            runs.append(run)
        assert runs, f"no spectrum-free runs found for {name}"
        for run in runs:
            checked_intervals += 1
            for x in vectors:
                values = [float(x @ r @ x) for _, r, _ in run]
                lams = [lam for lam, _, _ in run]
                assert all(b < a for a, b in zip(values, values[1:])), (name, lams)
                for i in range(1, len(values) - 1):
                    slope = (values[i + 1] - values[i - 1]) / (lams[i + 1] - lams[i - 1])
                    assert slope < 0, (name, lams[i])
    announce(7, True,
             f"quadratic form strictly decreasing on {checked_intervals} spectrum-free runs, "
             "central differences negative")


def test_c08_positivity_below_zero():
    smallest = math.inf
    for _, g in default_corpus():
        for tau in (0.1, 1.0, 10.0):
            smallest = min(smallest, float(eigenvalues_sym(dtn_matrix(g, -tau))[0]))
    announce(8, smallest > 0.0,
             f"R(-tau) positive definite on the corpus, smallest eigenvalue {smallest:.3e}")


def test_c09_scaling_law():
    worst = 0.0
    for _, g in default_corpus():
        for lam in (0.25, 2.0, 9.0):
            root = math.sqrt(lam)
            gap = max_abs(dtn_matrix(g, lam) - root * dtn_matrix(scale_lengths(g, root), 1.0))
            worst = max(worst, gap)
    announce(9, worst <= 1e-10, f"length-scaling relation holds, worst gap {worst:.2e}")


def test_c10_subdivision_invariance():
    rng = np.random.default_rng(110)
    worst = 0.0
    for _, g in default_corpus():
        for lam in (0.7, 1.0, 5.2):
            r = dtn_matrix(g, lam)
            for _ in range(3):
                edge = int(rng.choice([e.id for e in g.edges]))
                t = float(rng.uniform(0.1, 0.9))
                gap = max_abs(dtn_matrix(subdivide_edge(g, edge, t), lam) - r)
                worst = max(worst, gap)
    announce(10, worst <= 1e-10,
             f"inserting degree-2 vertices changes R by at most {worst:.2e}")


def _random_two_boundary_block(rng, lam):
    """A random valid 2-boundary block that does not resonate at lam."""
    for _ in range(50):
        kind = rng.integers(0, 3)
        lengths = rng.uniform(0.3, 2.8, size=2)
        if kind == 0:
            g = segment(float(lengths[0]))
        elif kind == 1:
            g = metric_graph([(0, 1, float(lengths[0])), (0, 1, float(lengths[1]))],
                             boundary=(0, 1))
        else:
            g = metric_graph([(0, 2, float(lengths[0])), (2, 1, float(lengths[1]))],
                             boundary=(0, 1))
        try:
            return g, dtn_matrix(g, lam)
        except SpectrumHit:
            continue
    raise AssertionError("could not draw a non-resonant block")


def test_c11_gluing_and_attach_additivity():
    rng = np.random.default_rng(111)
    worst = 0.0
    attach_outputs = []
    for _ in range(30):
        lam = float(rng.choice([0.7, 1.0, 2.3]))
        k = int(rng.integers(2, 5))
        pairs = [(i, i + 1) for i in range(k - 1)]
        extras = [(i, j) for i in range(k) for j in range(i + 1, k) if (i, j) not in pairs]
        for pair in extras:
            if rng.random() < 0.5:
                pairs.append(pair)
        blocks = []
        expected = np.zeros((k, k))
        for i, j in pairs:
            block, r = _random_two_boundary_block(rng, lam)
            blocks.append((block, i, j))
            expected[np.ix_([i, j], [i, j])] += r
        composite = attach(range(k), blocks)
        try:
            actual = dtn_matrix(composite, lam)
        except SpectrumHit:
            continue
        worst = max(worst, max_abs(actual - expected))
        attach_outputs.append((composite, lam))
    assert len(attach_outputs) >= 25

    glue_checks = 0
    while glue_checks < 20:
        i, j = rng.integers(0, len(attach_outputs), size=2)
        g1, lam1 = attach_outputs[i]
        g2, _ = attach_outputs[j]
        if g1.boundary_size != g2.boundary_size:
            continue
        try:
            expected = dtn_matrix(g1, lam1) + dtn_matrix(g2, lam1)
            actual = dtn_matrix(glue(g1, g2), lam1)
        except SpectrumHit:
            continue
        worst = max(worst, max_abs(actual - expected))
        glue_checks += 1
    announce(11, worst <= 1e-10,
             f"additivity over {len(attach_outputs)} attach and {glue_checks} glue "
             f"configurations, worst gap {worst:.2e}")


def test_c12_cli_end_to_end(tmp_path, capsys):
    rng = np.random.default_rng(112)
    a = random_symmetric(rng, 4)
    matrix_path = tmp_path / "target.json"
    matrix_path.write_text(write_matrix(a))
    graph_path = tmp_path / "built.json"

    synth = subprocess.run(
        [sys.executable, "-m", "graphdtn", "synthesize", str(matrix_path),
         "--lambda", "2", "--out", str(graph_path)],
        capture_output=True, text=True,
    )
    assert synth.returncode == 0, synth.stderr
    assemble = subprocess.run(
        [sys.executable, "-m", "graphdtn", "assemble", str(graph_path), "--lambda", "2"],
        capture_output=True, text=True,
    )
    assert assemble.returncode == 0, assemble.stderr
    recovered = read_matrix(assemble.stdout)
    assert max_abs(recovered - a) <= 1e-8 * (1.0 + max_abs(a))

    # byte-identical file round-trip
    text = graph_path.read_text().strip()
    assert serialize(deserialize(text)) == text

    # exit codes: input error, numerical failure, verification success
    bad_matrix = tmp_path / "k1.json"
    bad_matrix.write_text(write_matrix(np.array([[1.0]])))
    assert main(["synthesize", str(bad_matrix), "--lambda", "1",
                 "--out", str(tmp_path / "x.json")]) == 2
    resonant = tmp_path / "resonant.json"
    resonant.write_text(serialize(segment(math.pi)))
    assert main(["assemble", str(resonant), "--lambda", "1"]) == 3
    seg_path = tmp_path / "seg.json"
    seg_path.write_text(serialize(segment(1.0)))
    assert main(["verify", str(seg_path), "--lambda-grid", "0.5:8:4"]) == 0
    out = capsys.readouterr().out
    assert "pass" in out
    announce(12, True, "synthesize/assemble pipe reproduces the target; exit codes "
                       "and byte-identical serialization verified")
