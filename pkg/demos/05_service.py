"""
The HTTP surface, end to end
============================

Walks every endpoint group against an in-process app instance.  Running a
real server is one command (`divex serve --catalog <dir>`); this demo uses
the test client so it needs no open port.
"""
import json
import os
import tempfile

from fastapi.testclient import TestClient

from divex.pipeline import ingest, load_catalog, load_precomputed_featuremaps
from divex.service import ServiceConfig, create_app
from divex.synth import write_fixture_corpus

work = tempfile.mkdtemp(prefix="divex_demo_")
corpus = write_fixture_corpus(os.path.join(work, "corpus"))
out = os.path.join(work, "catalog")
ingest(corpus.manifest_path, corpus.score_paths, out, seed=7, precompute_maps=True)

snapshot = load_catalog(out)
maps = load_precomputed_featuremaps(out)
client = TestClient(create_app(snapshot, ServiceConfig(som_seed=7), maps))


def get(path):
    response = client.get(path)
    print(f"\nGET {path}  ->  {response.status_code}")
    if response.headers["content-type"].startswith("application/json"):
        print(json.dumps(response.json(), indent=2)[:600])
    else:
        print(f"  {response.headers['content-type']}, {len(response.content)} bytes")
    return response


get("/status")
get("/videos/v1")
get("/search/concepts?q=car&threshold=0.5")
get("/search/metadata?q=beach")
get("/similar/v:v1/s:0?measure=color&k=3")
get("/featuremaps?concept=car")
get("/featuremaps/car/netA?organization=confidence")
get("/filter?concepts=person,apple&mode=confidence&order=value")
get("/thumbs/v1/4.ppm")

# Errors carry a machine-readable code and an HTTP status from a fixed map.
get("/videos/nope")
get("/search/concepts?q=zebra")
get("/search/concepts?q=car&k=banana")
