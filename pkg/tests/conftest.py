"""Shared test plumbing: acceptance summary lines and benchmark discovery.

The benchmark datasets are not shipped with the repository. Point
``KGALIGN_DATA`` at a directory holding the standard-format subsets
(``dbp15k_zh_en``, ``dbp15k_ja_en``, ``dbp15k_fr_en``, ``srprs_fr_en``,
``srprs_de_en``, each with triples_1/triples_2/ent_ids_1/ent_ids_2/
ref_ent_ids and a ``vectors.txt`` word-vector file) to enable the
benchmark-gated acceptance tests; they skip otherwise.
"""

import os
from pathlib import Path

import pytest

BENCHMARK_ENV = "KGALIGN_DATA"

_LABELS = {"passed": "PASS", "failed": "FAIL", "error": "ERROR", "skipped": "SKIP"}
_PRECEDENCE = {"PASS": 0, "SKIP": 1, "ERROR": 2, "FAIL": 3}


@pytest.fixture(scope="session")
def benchmark_root():
    root = os.environ.get(BENCHMARK_ENV)
    if not root:
        return None
    path = Path(root)
    return path if path.is_dir() else None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines: dict[str, str] = {}
    for outcome, label in _LABELS.items():
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            if name not in lines or _PRECEDENCE[label] > _PRECEDENCE[lines[name]]:
                lines[name] = label
    if lines:
        terminalreporter.write_sep("=", "acceptance summary")
        for name in sorted(lines):
            terminalreporter.write_line(f"[ACCEPTANCE] {name}: {lines[name]}")
