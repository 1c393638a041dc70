"""Rewrite tests/golden/*.txt from the current parser (run after an intended CLI change)."""
from __future__ import annotations

import os
from pathlib import Path

os.environ["COLUMNS"] = "80"

from maxpareto.cli import COMMANDS, build_parser  # noqa: E402

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def help_texts() -> dict[str, str]:
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    texts = {"maxpareto": parser.format_help()}
    for name in COMMANDS:
        texts[name] = sub.choices[name].format_help()
    return texts


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, text in help_texts().items():
        (GOLDEN / f"{name}.txt").write_text(text)
        print(f"wrote {name}.txt")
