"""
Concept and metadata search over a catalog
==========================================

Concept detections are (item, source, conceptId, score) rows; searching them
is an AND-query with a score threshold, and a token no detector has ever
emitted is a distinguishable error rather than an empty result.
"""
import os
import tempfile

from divex.catalog import Granularity
from divex.errors import UnknownConceptError
from divex.pipeline import ingest, load_catalog
from divex.search import concept_query, metadata_query
from divex.synth import write_fixture_corpus

work = tempfile.mkdtemp(prefix="divex_demo_")
corpus = write_fixture_corpus(os.path.join(work, "corpus"))
out = os.path.join(work, "catalog")
ingest(corpus.manifest_path, corpus.score_paths, out)
snapshot = load_catalog(out)
index = snapshot.concept_index

print("sources and what they know:")
for source, vocab in sorted(index.vocabularies.items()):
    print(f"  {source}: {', '.join(vocab)}")

# A single token, thresholded: only shots whose best "car" score clears 0.5.
print("\ncar at threshold 0.5:")
for hit in concept_query(index, ["car"], threshold=0.5):
    print(f"  {hit.item.canonical()}  score={hit.score}")

# Dropping the threshold ranks everything with any car detection at all.
print("\ncar, no threshold:")
for hit in concept_query(index, ["car"]):
    print(f"  {hit.item.canonical()}  score={hit.score}")

# Multiple tokens AND together; the rank score sums each token's best.
print("\nperson AND apple:")
for hit in concept_query(index, ["person", "apple"]):
    print(f"  {hit.item.canonical()}  score={hit.score}")

# Restricting to one detector ignores every other source's scores.
print("\ncar according to netB only:")
for hit in concept_query(index, ["car"], source="netB"):
    print(f"  {hit.item.canonical()}  score={hit.score}")

# Frame granularity searches the sampled frames instead of shots.
print("\ncar over frame samples:")
for hit in concept_query(index, ["car"], granularity=Granularity.FRAME, threshold=0.5):
    print(f"  {hit.item.canonical()}  score={hit.score}")

# No detector knows "zebra": that is a typo-shaped situation, and the
# engine refuses instead of silently returning nothing.
try:
    concept_query(index, ["zebra"])
except UnknownConceptError as err:
    print(f"\nzebra -> {err.code}: {err}")

# Metadata search is a plain substring match over title and description.
print("\nvideos mentioning 'card':", metadata_query(snapshot, "card"))
print("videos mentioning 'beach':", metadata_query(snapshot, "beach"))
