# The completeness matrix over the twelve front-end/back-end fixtures.
# Run: python demos/03_corpus_matrix.py

import json
import time
from pathlib import Path

from pysbom.corpus import run_corpus, score_matrix

corpus = Path(__file__).resolve().parent.parent / "corpus"

start = time.perf_counter()
runs = run_corpus(corpus)
elapsed = time.perf_counter() - start

# rows are the four completeness questions, columns the fixtures
matrix = score_matrix({r.fixture.id: r.score for r in runs})
print(matrix.text())
print(f"{len(runs)} fixtures in {elapsed:.2f}s")

# size of each SBOM; edges come from the lockfile, else from index metadata
for r in runs:
    nonroot = [e for e in r.edges if e[0] is not None]
    lock = "lockfile" if r.fixture.expected.transitive_available else "index"
    print(f"{r.fixture.id:<18} components={len(json.loads(r.sbom)['components']):>3} edges={len(nonroot):>3} ({lock})")
