#!/usr/bin/env python3
"""Lint every .dkg program under a directory and print a summary table.

Usage: python scripts/lint_corpus.py [DIR]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dkg.cli import lint_text  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 \
        else ROOT / "tests" / "fixtures" / "corpus"
    dirty = 0
    for path in sorted(target.rglob("*.dkg")):
        report = lint_text(path.read_text(encoding="utf-8"), file=str(path))
        status = "clean" if report.error_free and not report.warning_count else \
            f"{report.error_count}E/{report.warning_count}W"
        print(f"{path.relative_to(target)}: {status}")
        dirty += not report.error_free
    sys.exit(1 if dirty else 0)
