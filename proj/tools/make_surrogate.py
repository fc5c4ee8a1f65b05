#!/usr/bin/env python3
"""Writes data/surrogate_classroom.txt, the planted-structure test classroom.

26 children (15 girls, 11 boys), 61 peer reports, five planted groups.
Two children are ambiguous on purpose: Heather splits her reports between
two girls' groups and Ken is rarely named at all.

The output is deterministic; rerun after changing anything here and commit
the regenerated file.
"""

import argparse
import random
from pathlib import Path

GROUPS = {
    "girls_a": ["Amy", "Beth", "Cara", "Dana", "Erin", "Faye", "Gina"],
    "girls_b": ["Heather", "Iris", "Jill", "Kim"],
    "girls_c": ["Lena", "Mia", "Nora", "Opal"],
    "boys_a": ["Arn", "Bo", "Cal", "Dev", "Eli", "Finn", "Ken"],
    "boys_b": ["Gus", "Hal", "Ian", "Jon"],
}

SEED = 1993


def subset(rng, members, size, must=()):
    rest = [m for m in members if m not in must]
    return list(must) + rng.sample(rest, size - len(must))


def build(rng):
    g = GROUPS
    reports = []

    # Report sizes are fixed so the margins match the documented benchmark:
    # 28 reports of four, the largest of twelve, Arn named 15 times, Ken 3.
    for size in [4, 4, 4, 5, 5, 5, 6, 6, 4, 5, 6, 4, 5]:
        reports.append(subset(rng, g["girls_a"], size))
    # girls_b without Heather, plus Heather's own mixed reports
    for _ in range(6):
        reports.append(subset(rng, g["girls_b"][1:], 3))
    for _ in range(2):
        reports.append(["Heather"] + subset(rng, g["girls_b"][1:], 3))
    for _ in range(2):
        reports.append(["Heather"] + subset(rng, g["girls_b"][1:], 2))
    for _ in range(4):
        reports.append(["Heather"] + subset(rng, g["girls_a"], 3))
    for size in [4, 4, 4, 3, 4, 3, 4, 3, 4]:
        reports.append(subset(rng, g["girls_c"], size))
    # boys_a: Arn is in nearly every report, Ken in only three
    core = [b for b in g["boys_a"] if b != "Ken"]
    for size in [4, 4, 5, 4, 4, 5, 4, 3, 4, 5, 4, 4, 5]:
        reports.append(subset(rng, core, size, must=["Arn"]))
    for _ in range(2):
        reports.append(["Ken"] + subset(rng, core, 3, must=["Arn"]))
    reports.append(["Ken"] + g["boys_b"][:3])
    for _ in range(8):
        reports.append(subset(rng, g["boys_b"], 3))
    # one long "popular girls" report spanning two groups
    reports.append(g["girls_a"] + g["girls_c"] + ["Heather"])
    return reports


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path,
                    default=Path(__file__).resolve().parent.parent / "data" / "surrogate_classroom.txt")
    args = ap.parse_args()

    rng = random.Random(SEED)
    reports = build(rng)
    children = sorted({c for r in reports for c in r})
    assert len(children) == 26, len(children)
    assert len(reports) == 61, len(reports)
    sizes = [len(r) for r in reports]
    assert sizes.count(4) == 28 and max(sizes) == 12, sizes
    assert sum("Arn" in r for r in reports) == 15
    assert sum("Ken" in r for r in reports) == 3

    lines = ["# Planted-structure surrogate classroom: 26 children, 61 reports.",
             "# Generated by tools/make_surrogate.py; do not edit by hand.",
             "# planted groups:"]
    for name, members in GROUPS.items():
        lines.append(f"#   {name}: {','.join(members)}")
    lines += [",".join(r) for r in reports]
    args.out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
