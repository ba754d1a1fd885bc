#!/usr/bin/env python3
"""Rebuild the demonstration store from the raw JSONL corpus.

Usage: python scripts/build_demo_store.py [--input PATH] [--output PATH]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dkg.cli import main  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", default=str(ROOT / "tests/fixtures/demos.jsonl"))
    parser.add_argument("--output", default=str(ROOT / "tests/fixtures/demo_store.jsonl"))
    args = parser.parse_args()
    sys.exit(main(["embed-store", "--input", args.input, "--output", args.output]))
