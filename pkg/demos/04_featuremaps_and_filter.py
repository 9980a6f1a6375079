"""
Featuremap grids and the combinable video filter
================================================

A featuremap lays the best shots for one (concept, detector) pair out on a
near-square grid: either self-organized by vector similarity, or simply
ordered by confidence or by video.  The filter combines a creation-period
range with per-concept frequency/confidence predicates.
"""
import os
import tempfile

from divex.explore import (
    FilterCriteria,
    FilterMode,
    FilterOrder,
    FilterUnit,
    build_featuremap,
    filter_videos,
    maps_for_concept,
)
from divex.pipeline import ingest, load_catalog
from divex.som import LayoutMode
from divex.synth import write_fixture_corpus

work = tempfile.mkdtemp(prefix="divex_demo_")
corpus = write_fixture_corpus(os.path.join(work, "corpus"))
out = os.path.join(work, "catalog")
ingest(corpus.manifest_path, corpus.score_paths, out)
snapshot = load_catalog(out)


def show(fmap):
    d = fmap.descriptor
    print(f"  {d.concept}@{d.source}: {d.item_count} shots on a {d.grid_shape[0]}x{d.grid_shape[1]} grid")
    for cell in sorted(fmap.layout.cells):
        key = fmap.layout.cells[cell]
        x, y = cell % fmap.layout.width, cell // fmap.layout.width
        print(f"    cell ({x},{y}): {key.canonical()}  score={fmap.scores[key.canonical()]}")


# One map per detector that knows the concept.
print("maps available for 'car':")
for desc in maps_for_concept(snapshot, "car"):
    print(f"  {desc.source}: {desc.item_count} shots, grid {desc.grid_shape}")

# The som organization clusters similar shots onto nearby cells and is
# deterministic for a given seed.
print("\nself-organized:")
show(build_featuremap(snapshot, "car", "netA", seed=7))

# Confidence organization is a plain best-first reading order.
print("\nby confidence:")
show(build_featuremap(snapshot, "car", "netA", organization=LayoutMode.CONFIDENCE))

# Video organization groups shots of the same video together.
print("\nby video:")
show(build_featuremap(snapshot, "car", "netA", organization=LayoutMode.VIDEO))

# The filter: all criteria AND together.  Frequency mode counts qualifying
# sampled frames; confidence mode takes the weakest concept's best score.
print("\nvideos from 2008-2012:")
for scope, value in filter_videos(snapshot, FilterCriteria(year_from=2008, year_to=2012)):
    print(f"  {scope.video_id}")

print("\nvideos where 'car' clears 0.4 at least once, best first:")
criteria = FilterCriteria(concepts=("car",), mode=FilterMode.FREQUENCY, tau=0.4, order=FilterOrder.VALUE)
for scope, value in filter_videos(snapshot, criteria):
    print(f"  {scope.video_id}  qualifying samples={value:.0f}")

print("\n30s segments are too coarse here; 1s segments localize 'person':")
criteria = FilterCriteria(
    concepts=("person",), mode=FilterMode.CONFIDENCE, unit=FilterUnit.SEGMENT, segment_sec=1.0
)
for scope, value in filter_videos(snapshot, criteria):
    print(f"  {scope.video_id} segment {scope.seg_index} [{scope.start_sec}s, {scope.end_sec}s)  confidence={value}")
