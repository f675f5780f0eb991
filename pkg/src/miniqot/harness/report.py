"""Read and summarise results files written by :func:`miniqot.harness.stats.write_results`.

Usage::

    python3 -m miniqot.harness.report results.jsonl
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def load_results(path) -> list[dict]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            row = json.loads(line)
            missing = {"test", "N", "estimate", "bound", "pass"} - set(row)
            if missing:
                raise ValueError(f"result row lacks {sorted(missing)}")
            rows.append(row)
    return rows


def format_table(rows: list[dict]) -> str:
    width = max([len(r["test"]) for r in rows] + [4])
    lines = [f"{'test':<{width}}  {'N':>6}  {'estimate':>10}  {'bound':<20}  result"]
    for r in rows:
        bound = r["bound"]
        bound = f"{bound:.4g}" if isinstance(bound, float) else json.dumps(bound)
        lines.append(f"{r['test']:<{width}}  {r['N']:>6}  {r['estimate']:>10.4g}  {bound:<20}  "
                     f"{'pass' if r['pass'] else 'FAIL'}")
    n_pass = sum(1 for r in rows if r["pass"])
    lines.append(f"{n_pass}/{len(rows)} passed")
    return "\n".join(lines)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="miniqot.harness.report", description=__doc__.splitlines()[0])
    p.add_argument("results", help="JSON-lines results file")
    args = p.parse_args(argv)
    rows = load_results(args.results)
    print(format_table(rows))
    return 0 if all(r["pass"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
