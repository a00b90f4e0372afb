"""Corpus verification: re-read every emitted file and check the format
invariants plus corpus-wide feature-width consistency."""

import os

from .tsf import TsfError, read_header, read_manifest, read_matrix


def verify_corpus(directory):
    """Returns (checked file count, list of problem strings)."""
    manifest = os.path.join(directory, "manifest.tsv")
    if not os.path.exists(manifest):
        return 0, [f"no manifest: {manifest}"]
    problems = []
    try:
        records = read_manifest(manifest)
    except TsfError as e:
        return 0, [str(e)]
    if not records:
        problems.append(f"{manifest}: no records")
    widths = {}
    checked = 0
    for label, rel in records:
        path = os.path.join(directory, rel)
        if not os.path.exists(path):
            problems.append(f"{rel}: referenced by manifest but missing")
            continue
        try:
            n, k = read_header(path)
            read_matrix(path)  # full finiteness pass
        except TsfError as e:
            problems.append(str(e))
            continue
        widths.setdefault(n, []).append(rel)
        if k < 2:
            problems.append(f"{rel}: only {k} frame(s); consumers need at least 2")
        checked += 1
    if len(widths) > 1:
        detail = ", ".join(f"n={n} ({len(v)} files)" for n, v in sorted(widths.items()))
        problems.append(f"inconsistent feature width across corpus: {detail}")
    return checked, problems
