"""Acceptance gate: one test per shipped guarantee.

Every test prints a single [PASS]/[FAIL] line naming its criterion (echoed
again in the terminal summary); oracles are recomputed locally from first
principles rather than by calling the code under test twice.
"""
import math
import os
import statistics
import time
from dataclasses import replace

import numpy as np

from divex.catalog import CatalogSnapshot, FrameSampleRecord, Granularity, ItemKey, ShotRecord, VideoRecord
from divex.explore import FilterCriteria, FilterMode, FilterUnit, filter_videos
from divex.features import ConceptDetection, FeatureKind, FeatureStore, FeatureVector
from divex.pipeline import build_snapshot, ingest
from divex.search import Measure, build_concept_index, concept_query, knn
from divex.som import SomParams, _epoch, assign_unique_cells, bmu, decay, quantization_error, train_som
from divex.synth import random_catalog, write_fixture_corpus

from goldens import BINARY_REQUESTS, REQUESTS, golden_path

KIND_DIMS = {
    FeatureKind.COLOR: 128,
    FeatureKind.TEXTURE: 80,
    FeatureKind.MOTION: 16,
    FeatureKind.CONCEPT: 12,
}


class TestIngestionFixture:
    BUDGET_SEC = 5.0

    def test_fixture_ingests_exactly(self, acceptance, tmp_path):
        start = time.perf_counter()
        corpus = write_fixture_corpus(tmp_path / "corpus")
        snap = build_snapshot(corpus.manifest_path, corpus.score_paths)
        elapsed = time.perf_counter() - start

        failures = []
        expected_shots = {
            "v1": [(0, 9, 4), (10, 19, 14)],
            "v2": [(0, 14, 7), (15, 29, 22)],
            "v3": [(0, 7, 3)],
        }
        for video_id, want in expected_shots.items():
            got = [(s.start_frame, s.end_frame, s.keyframe) for s in snap.shots[video_id]]
            if got != want:
                failures.append(f"{video_id} shots {got} != {want}")

        expected_samples = {
            "v1": [(0, 0), (1, 10)],
            "v2": [(0, 0), (1, 10), (2, 20)],
            "v3": [(0, 0), (1, 3), (2, 5)],
        }
        for video_id, want in expected_samples.items():
            got = [(s.t_sec, s.frame_index) for s in snap.samples[video_id]]
            if got != want:
                failures.append(f"{video_id} samples {got} != {want}")
        # the t < duration rule also pins the counts
        for video_id, want in expected_samples.items():
            if len(snap.samples[video_id]) != int(snap.video(video_id).duration_sec):
                failures.append(f"{video_id} sample count breaks the t<duration rule")

        if elapsed >= self.BUDGET_SEC:
            failures.append(f"took {elapsed:.2f}s, budget {self.BUDGET_SEC}s")

        acceptance(
            "ingestion-fixture",
            not failures,
            failures[0] if failures else f"3 videos, exact boundaries and samples, {elapsed:.2f}s (budget {self.BUDGET_SEC:.0f}s)",
        )
        assert not failures, "; ".join(failures)


def build_knn_catalog(n_videos: int = 100, shots_per_video: int = 10, pool_size: int = 250) -> CatalogSnapshot:
    """1000 shots and 1000 frames whose vectors come from a small pool, so
    exact distance ties are common and the tie-break is genuinely exercised."""
    rng = np.random.default_rng(424242)
    pools = {kind: rng.random((pool_size, dims)) for kind, dims in KIND_DIMS.items()}
    videos, shots, samples = [], {}, {}
    vectors: dict[tuple[str, FeatureKind], FeatureVector] = {}

    for v in range(n_videos):
        video_id = f"kv{v:03d}"
        videos.append(
            VideoRecord(
                video_id=video_id,
                frame_path=f"/nonexistent/{video_id}",
                fps=10.0,
                duration_sec=float(shots_per_video),
                creation_time="2010-01-01T00:00:00Z",
                title=f"knn video {v}",
                description="",
            )
        )
        video_shots = []
        for s in range(shots_per_video):
            start = s * 10
            video_shots.append(ShotRecord(video_id, s, start, start + 9, start + 4))
            key = ItemKey.shot(video_id, s).canonical()
            for kind in FeatureKind:
                vectors[(key, kind)] = FeatureVector(
                    kind, pools[kind][rng.integers(0, pool_size)]
                )
        shots[video_id] = tuple(video_shots)
        video_samples = []
        for t in range(shots_per_video):
            video_samples.append(FrameSampleRecord(video_id, t, t * 10))
            key = ItemKey.frame(video_id, t).canonical()
            for kind in (FeatureKind.COLOR, FeatureKind.TEXTURE, FeatureKind.CONCEPT):
                vectors[(key, kind)] = FeatureVector(
                    kind, pools[kind][rng.integers(0, pool_size)]
                )
        samples[video_id] = tuple(video_samples)

    return replace(
        CatalogSnapshot.empty(),
        videos=tuple(videos),
        shots=shots,
        samples=samples,
        features=FeatureStore(vectors),
    )


def oracle_distances(matrix: np.ndarray, q: np.ndarray, kind: FeatureKind) -> list[float]:
    """Reference distances, written out per row rather than vectorized."""
    out = []
    for row in matrix:
        if kind in (FeatureKind.COLOR, FeatureKind.TEXTURE):
            out.append(float(np.abs(row - q).sum()))
        elif kind is FeatureKind.MOTION:
            out.append(math.sqrt(float(((row - q) ** 2).sum())))
        else:
            nr = math.sqrt(float((row * row).sum()))
            nq = math.sqrt(float((q * q).sum()))
            if nr == 0.0 and nq == 0.0:
                out.append(0.0)
            elif nr == 0.0 or nq == 0.0:
                out.append(1.0)
            else:
                out.append(max(0.0, 1.0 - float(np.dot(row, q)) / (nr * nq)))
    return out


class TestKnnOracle:
    BUDGET_SEC = 30.0

    def test_top10_matches_brute_force(self, acceptance):
        start = time.perf_counter()
        cat = build_knn_catalog()
        rng = np.random.default_rng(99)
        failures = []
        combos = checked = 0
        tie_groups = 0

        for kind in FeatureKind:
            measure = Measure.for_kind(kind)
            granularities = [Granularity.SHOT] if kind is FeatureKind.MOTION else [
                Granularity.SHOT,
                Granularity.FRAME,
            ]
            for granularity in granularities:
                combos += 1
                items, matrix = cat.features.matrix(granularity, kind)
                if len(items) != 1000:
                    failures.append(f"{kind.value}/{granularity.value}: {len(items)} items, wanted 1000")
                    continue
                canon = [i.canonical() for i in items]
                for _ in range(5):
                    query = ItemKey.shot(f"kv{rng.integers(0, 100):03d}", int(rng.integers(0, 10)))
                    hits = knn(cat, query, measure, granularity, k=10)
                    qvec = cat.features.vector(query, kind).values
                    dists = oracle_distances(matrix, qvec, kind)
                    ranked = sorted(
                        (d, c) for d, c in zip(dists, canon) if c != query.canonical()
                    )[:10]
                    checked += 1
                    got = [h.item.canonical() for h in hits]
                    want = [c for _, c in ranked]
                    if got != want:
                        failures.append(f"{kind.value}/{granularity.value} from {query.canonical()}: rank mismatch {got[:3]}... vs {want[:3]}...")
                        continue
                    for h, (d, _) in zip(hits, ranked):
                        if abs(h.score - d) > 1e-9:
                            failures.append(f"{kind.value} score {h.score} vs oracle {d}")
                            break
                    scores = [round(h.score, 12) for h in hits]
                    if len(set(scores)) < len(scores):
                        tie_groups += 1

        elapsed = time.perf_counter() - start
        if tie_groups == 0:
            failures.append("no distance ties occurred; tie-break never exercised")
        if elapsed >= self.BUDGET_SEC:
            failures.append(f"took {elapsed:.1f}s, budget {self.BUDGET_SEC}s")
        acceptance(
            "knn-oracle",
            not failures,
            failures[0]
            if failures
            else f"{combos} measure/granularity combos, {checked} queries over 1000+1000 items, ties in {tie_groups} queries, {elapsed:.1f}s (budget {self.BUDGET_SEC:.0f}s)",
        )
        assert not failures, "; ".join(failures)


class TestConceptIndexOracle:
    N_DETECTIONS = 10_000
    N_COMBOS = 100

    def test_query_matches_linear_scan(self, acceptance):
        rng = np.random.default_rng(7119)
        concepts = [f"c{i:02d}" for i in range(10)]
        sources = ["srcA", "srcB", "srcC"]
        items = [ItemKey.shot(f"cv{v:02d}", s) for v in range(40) for s in range(10)]
        detections = [
            ConceptDetection(
                items[rng.integers(0, len(items))],
                sources[rng.integers(0, len(sources))],
                concepts[rng.integers(0, len(concepts))],
                float(rng.integers(0, 1001)) / 1000.0,
            )
            for _ in range(self.N_DETECTIONS)
        ]
        index = build_concept_index(detections)

        # raw best score per (item, source, concept): the scan's ground truth
        best: dict[tuple[str, str, str], float] = {}
        for det in detections:
            key = (det.item.canonical(), det.source, det.concept_id)
            best[key] = max(best.get(key, 0.0), det.score)

        def scan(tokens, source, threshold):
            threshold = max(threshold, 0.0)
            per_item: dict[str, float] = {}
            for item in {c for c, _, _ in best}:
                token_best = {}
                for t in set(tokens):
                    candidates = [
                        v
                        for (c, s, cid), v in best.items()
                        if c == item and cid == t and (source is None or s == source)
                    ]
                    if candidates:
                        token_best[t] = max(candidates)
                if all(token_best.get(t, -1.0) >= threshold for t in set(tokens)):
                    per_item[item] = sum(token_best[t] for t in tokens)
            return sorted(per_item.items(), key=lambda kv: (-kv[1], kv[0]))

        failures = []
        monotone_checked = 0
        for i in range(self.N_COMBOS):
            n_tokens = int(rng.integers(1, 4))
            tokens = [concepts[rng.integers(0, len(concepts))] for _ in range(n_tokens)]
            threshold = float(rng.integers(0, 1001)) / 1000.0
            source = [None, *sources][rng.integers(0, 4)]
            hits = concept_query(index, tokens, source=source, threshold=threshold, k=10_000)
            got = [(h.item.canonical(), h.score) for h in hits]
            want = scan(tokens, source, threshold)
            if got != want:
                failures.append(
                    f"combo {i} tokens={tokens} source={source} threshold={threshold}: {len(got)} vs {len(want)} rows"
                )
                continue
            higher = min(1.0, threshold + 0.25)
            tighter = {
                h.item.canonical()
                for h in concept_query(index, tokens, source=source, threshold=higher, k=10_000)
            }
            if not tighter <= {c for c, _ in got}:
                failures.append(f"combo {i}: threshold {higher} grew the result set")
            monotone_checked += 1

        acceptance(
            "concept-index-oracle",
            not failures,
            failures[0]
            if failures
            else f"{self.N_COMBOS} combos over {self.N_DETECTIONS} detections match the scan; monotone in all {monotone_checked} pairs",
        )
        assert not failures, "; ".join(failures)


class TestSomInvariants:
    BUDGET_SEC = 60.0

    def test_som_suite(self, acceptance):
        start = time.perf_counter()
        failures = []

        # single point: the unit must land on it
        point = [(ItemKey.shot("solo", 0), FeatureVector(FeatureKind.CONCEPT, np.array([0.3, 0.7, 0.1])))]
        final_qe = quantization_error(train_som(point, SomParams(seed=3)), point)
        if final_qe >= 1e-3:
            failures.append(f"single-point final QE {final_qe:.2e} >= 1e-3")

        # per-epoch monotonicity, from a unit that starts away from the point
        x = np.array([0.3, 0.7, 0.1])
        units = np.array([x + 0.1])
        coords = np.array([[0.0, 0.0]])
        params = SomParams()
        errors = [float(np.linalg.norm(units[0] - x))]
        for t in range(params.epochs):
            eta = decay(params.eta0, params.eta_f, t, params.epochs)
            _epoch(units, coords, np.array([x]), np.array([0]), eta, sigma=0.5)
            errors.append(float(np.linalg.norm(units[0] - x)))
        if any(b > a for a, b in zip(errors, errors[1:])):
            failures.append("per-epoch error increased during single-point training")
        if errors[-1] >= 1e-3:
            failures.append(f"perturbed single-point QE {errors[-1]:.2e} >= 1e-3")

        # determinism
        rng = np.random.default_rng(5)
        det_items = [
            (ItemKey.shot(f"d{i:03d}", 0), FeatureVector(FeatureKind.CONCEPT, rng.random(6)))
            for i in range(50)
        ]
        lay_a = assign_unique_cells(train_som(det_items, SomParams(epochs=10, seed=11)), det_items)
        lay_b = assign_unique_cells(train_som(det_items, SomParams(epochs=10, seed=11)), det_items)
        if lay_a != lay_b:
            failures.append("same seed produced different layouts")

        # bijectivity on 200 random instances
        bijective = 0
        for seed in range(200):
            inst_rng = np.random.default_rng(seed)
            n = 1 + seed % 40
            items = [
                (ItemKey.shot(f"b{i:03d}", 0), FeatureVector(FeatureKind.CONCEPT, inst_rng.random(4)))
                for i in range(n)
            ]
            layout = assign_unique_cells(train_som(items, SomParams(epochs=3, seed=seed)), items)
            placed = set(layout.cells.values())
            if len(layout.cells) == n and len(placed) == n and all(
                0 <= c < layout.width * layout.height for c in layout.cells
            ):
                bijective += 1
        if bijective != 200:
            failures.append(f"bijectivity held in {bijective}/200 instances")

        # two separated clusters must not share any BMU cell
        separated = 0
        for seed in range(20):
            c_rng = np.random.default_rng(1000 + seed)
            a = c_rng.normal(0.0, 0.05, size=(10, 4))
            b = c_rng.normal(5.0, 0.05, size=(10, 4))
            items = [
                (ItemKey.shot(f"a{i}", 0), FeatureVector(FeatureKind.CONCEPT, a[i])) for i in range(10)
            ] + [
                (ItemKey.shot(f"b{i}", 0), FeatureVector(FeatureKind.CONCEPT, b[i])) for i in range(10)
            ]
            grid = train_som(items, SomParams(epochs=20, seed=seed))
            bmus_a = {bmu(grid, vec) for _, vec in items[:10]}
            bmus_b = {bmu(grid, vec) for _, vec in items[10:]}
            if not bmus_a & bmus_b:
                separated += 1
        if separated < 18:
            failures.append(f"cluster separation in {separated}/20 runs, need >= 18")

        elapsed = time.perf_counter() - start
        if elapsed >= self.BUDGET_SEC:
            failures.append(f"took {elapsed:.1f}s, budget {self.BUDGET_SEC}s")
        acceptance(
            "som-invariants",
            not failures,
            failures[0]
            if failures
            else f"single-point QE {final_qe:.1e}, monotone epochs, deterministic, 200/200 bijective, {separated}/20 separated, {elapsed:.1f}s (budget {self.BUDGET_SEC:.0f}s)",
        )
        assert not failures, "; ".join(failures)


class TestFilterConjunction:
    N_TRIPLES = 100

    def test_conjunction_law_and_values(self, acceptance):
        cat = random_catalog(np.random.default_rng(2024), n_videos=50)
        rng = np.random.default_rng(515)
        concept_pool = ["car", "person", "apple", "beach", "tree", "boat"]

        # ground truth from raw frame detections only
        raw: dict[tuple[str, int, str], float] = {}
        for det in cat.detections:
            if det.item.granularity is not Granularity.FRAME:
                continue
            key = (det.item.video_id, det.item.ordinal, det.concept_id)
            raw[key] = max(raw.get(key, 0.0), det.score)

        def scope_samples(scope):
            times = [s.t_sec for s in cat.samples[scope.video_id]]
            if hasattr(scope, "seg_index"):
                times = [t for t in times if scope.start_sec <= t < scope.end_sec]
            return times

        def brute_value(scope, criteria):
            if not criteria.concepts:
                return 0.0
            times = scope_samples(scope)
            if criteria.mode is FilterMode.FREQUENCY:
                total = 0
                for concept in criteria.concepts:
                    n = sum(
                        1
                        for t in times
                        if raw.get((scope.video_id, t, concept), -1.0) >= criteria.tau
                    )
                    if n < 1:
                        return None
                    total += n
                return float(total)
            worst = None
            for concept in criteria.concepts:
                conf = max(
                    (raw.get((scope.video_id, t, concept), 0.0) for t in times), default=0.0
                )
                if conf <= 0.0:
                    return None
                worst = conf if worst is None else min(worst, conf)
            return worst

        def identity(scope):
            return (scope.video_id, getattr(scope, "seg_index", None))

        failures = []
        values_checked = 0
        for i in range(self.N_TRIPLES):
            yf = 2005 + int(rng.integers(0, 11))
            yt = yf + int(rng.integers(0, 11 - (yf - 2005)))
            tokens = tuple(
                concept_pool[rng.integers(0, len(concept_pool))]
                for _ in range(int(rng.integers(1, 3)))
            )
            mode = FilterMode.FREQUENCY if rng.integers(0, 2) else FilterMode.CONFIDENCE
            unit = FilterUnit.SEGMENT if rng.integers(0, 2) else FilterUnit.VIDEO
            seg_sec = [5.0, 10.0, 30.0][rng.integers(0, 3)]
            tau = [0.0, 0.25, 0.5, 0.75][rng.integers(0, 4)]
            shared = dict(unit=unit, segment_sec=seg_sec, mode=mode, tau=tau)

            year_only = FilterCriteria(year_from=yf, year_to=yt, **shared)
            concept_only = FilterCriteria(concepts=tokens, **shared)
            combined = FilterCriteria(year_from=yf, year_to=yt, concepts=tokens, **shared)

            ids_year = {identity(s) for s, _ in filter_videos(cat, year_only)}
            ids_concept = {identity(s) for s, _ in filter_videos(cat, concept_only)}
            combined_rows = filter_videos(cat, combined)
            ids_combined = {identity(s) for s, _ in combined_rows}
            if ids_combined != ids_year & ids_concept:
                failures.append(f"triple {i}: conjunction law broken for {combined}")
                continue

            for scope, value in combined_rows:
                expect = brute_value(scope, combined)
                if expect is None or value != expect:
                    failures.append(
                        f"triple {i}: value {value} != brute force {expect} on {identity(scope)}"
                    )
                    break
                values_checked += 1

        acceptance(
            "filter-conjunction",
            not failures,
            failures[0]
            if failures
            else f"{self.N_TRIPLES} criteria triples on 50 videos obey the conjunction law; {values_checked} values match brute force exactly",
        )
        assert not failures, "; ".join(failures)


class TestServiceContract:
    LATENCY_BUDGET = 0.050

    def test_goldens_and_latency(self, acceptance, client):
        failures = []
        latencies = []
        for name, path in REQUESTS:
            golden = open(golden_path(name), "rb").read()
            for _ in range(3):
                t0 = time.perf_counter()
                response = client.get(path)
                latencies.append(time.perf_counter() - t0)
            if response.content != golden:
                failures.append(f"{name}: body diverged from golden")
        for name, path in BINARY_REQUESTS:
            golden = open(golden_path(name, binary=True), "rb").read()
            for _ in range(3):
                t0 = time.perf_counter()
                response = client.get(path)
                latencies.append(time.perf_counter() - t0)
            if response.content != golden:
                failures.append(f"{name}: bytes diverged from golden")

        median = statistics.median(latencies)
        if median >= self.LATENCY_BUDGET:
            failures.append(f"median latency {median * 1000:.1f}ms >= {self.LATENCY_BUDGET * 1000:.0f}ms")
        acceptance(
            "service-contract",
            not failures,
            failures[0]
            if failures
            else f"{len(REQUESTS) + len(BINARY_REQUESTS)} endpoints byte-identical to goldens; median latency {median * 1000:.1f}ms (budget 50ms)",
        )
        assert not failures, "; ".join(failures)


class TestEndToEndDeterminism:
    def test_repeat_ingest_byte_identical(self, acceptance, tmp_path):
        corpus = write_fixture_corpus(tmp_path / "corpus")
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        ingest(corpus.manifest_path, corpus.score_paths, str(out_a), seed=7, precompute_maps=True)
        ingest(corpus.manifest_path, corpus.score_paths, str(out_b), seed=7, precompute_maps=True)

        failures = []
        names_a = sorted(os.listdir(out_a))
        names_b = sorted(os.listdir(out_b))
        if names_a != names_b:
            failures.append(f"file sets differ: {names_a} vs {names_b}")
        for name in names_a:
            if (out_a / name).read_bytes() != (out_b / name).read_bytes():
                failures.append(f"{name} differs between runs")

        acceptance(
            "determinism-end-to-end",
            not failures,
            failures[0] if failures else f"two ingest runs byte-identical across {len(names_a)} catalog files",
        )
        assert not failures, "; ".join(failures)
