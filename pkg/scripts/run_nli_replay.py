#!/usr/bin/env python3
"""Replay the bundled NLI session end to end and write its export archive.

Pass --record to regenerate the transcript from the script's embedded
responses (needed after any change to prompts or windowing).

Usage: python scripts/run_nli_replay.py [--record] [--output PATH]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dkg.cli import main  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--record", action="store_true")
    parser.add_argument("--output", default="nli-session.zip")
    args = parser.parse_args()
    argv = [
        "replay", str(FIXTURES / "nli" / "session_script.json"),
        "--transcript", str(FIXTURES / "nli" / "transcript.jsonl"),
        "--output", args.output,
        "--store", str(FIXTURES / "demo_store.jsonl"),
    ]
    if args.record:
        argv.append("--record")
    sys.exit(main(argv))
