"""Shared fixtures: the all-forms showcase CAO and a deterministic fuzz corpus."""

from __future__ import annotations

import random

import pytest

from caosim import CaoSpec, parse, random_cao, random_state

# One CAO exercising every operator form: an M fans (i, j) into (d, s),
# an L and a D push d and s onward into (g, u), and an F collapses (g, u)
# into the final h. Starts at (100, 100, 0, ...).
SHOWCASE_TEXT = """\
cao showcase {
  initial i = 100
  initial j = 100
  intermediate d
  intermediate s
  intermediate g
  intermediate u
  final h

  M (i:10, j:8) -> (d:1, s:2)
  L (d:8) -> (g:2)
  D (s:10) -> (g:1, u:3)
  F (g:4, u:2) -> (h:1)
}
"""

# Its hand-checked trajectory: state and common-carry vector at every step,
# in entity order (i, j, d, s, g, u, h). The run settles after three updates.
SHOWCASE_TRAJECTORY = (
    ((100, 100, 0, 0, 0, 0, 0), (10, 10, 0, 0, 0, 0, 0)),
    ((0, 20, 10, 20, 0, 0, 0), (0, 0, 1, 2, 0, 0, 0)),
    ((0, 20, 2, 0, 4, 6, 0), (0, 0, 0, 0, 1, 1, 0)),
    ((0, 20, 2, 0, 0, 4, 1), (0, 0, 0, 0, 0, 0, 0)),
)

CORPUS_SEED = 0xCA05
CORPUS_SIZE = 1000


@pytest.fixture(scope="session")
def showcase() -> CaoSpec:
    return parse(SHOWCASE_TEXT)


@pytest.fixture(scope="session")
def fuzz_corpus() -> list[tuple[CaoSpec, tuple[int, ...]]]:
    """1000 random acyclic CAOs with random start states, fixed seed."""
    rng = random.Random(CORPUS_SEED)
    corpus = []
    for i in range(CORPUS_SIZE):
        spec = random_cao(rng, name=f"fuzz{i}")
        corpus.append((spec, random_state(rng, spec)))
    return corpus
