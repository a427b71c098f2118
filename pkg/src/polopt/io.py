"""Edge-list and opinion files.

Graph files hold one edge per line as ``u v [w]`` (weight defaults to 1);
a line with a single label declares a node, which keeps isolated nodes and
node order intact on round trips.  ``#`` starts a comment.  Labels are
arbitrary strings mapped to dense ids in order of first appearance.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import WeightedGraph

log = logging.getLogger(__name__)


class InputError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True)
class GraphData:
    graph: WeightedGraph
    labels: tuple[str, ...]
    self_loops: int = 0
    duplicates: int = 0

    def label_map(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def read_graph(path) -> GraphData:
    ids: dict[str, int] = {}
    weights: dict[tuple[int, int], float] = {}
    self_loops = duplicates = 0

    def node(label):
        if label not in ids:
            ids[label] = len(ids)
        return ids[label]

    for lineno, parts in _content_lines(path):
        if len(parts) == 1:
            node(parts[0])
            continue
        if len(parts) > 3:
            raise InputError(f"{path}:{lineno}: expected 'u v [w]', got {len(parts)} fields")
        u, v = node(parts[0]), node(parts[1])
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise InputError(f"{path}:{lineno}: weight {parts[2]!r} is not a number") from None
            if not math.isfinite(w) or w <= 0:
                raise InputError(f"{path}:{lineno}: weight must be positive and finite, got {w}")
        if u == v:
            self_loops += 1
            continue
        key = (min(u, v), max(u, v))
        if key in weights:
            duplicates += 1
            weights[key] += w
        else:
            weights[key] = w
    if not ids:
        raise InputError(f"{path}: graph file is empty")
    if self_loops:
        log.warning("%s: dropped %d self-loops", path, self_loops)
    g = WeightedGraph(len(ids), tuple((u, v, w) for (u, v), w in weights.items()))
    labels = tuple(sorted(ids, key=ids.get))
    return GraphData(g, labels, self_loops, duplicates)


def write_graph(path, g: WeightedGraph, labels=None) -> None:
    labels = [str(i) for i in range(g.n)] if labels is None else [str(x) for x in labels]
    if len(labels) != g.n:
        raise ValueError("need one label per node")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n} m={g.m}\n")
        for lab in labels:
            fh.write(f"{lab}\n")
        for u, v, w in g.edges:
            fh.write(f"{labels[u]} {labels[v]} {w!r}\n")


def read_opinions(path, labels=None) -> np.ndarray:
    """Opinion vector aligned to ``labels`` (the graph's label order).

    Accepts either bare values in node-id order or ``label value`` lines.
    """
    rows = list(_content_lines(path))
    if not rows:
        raise InputError(f"{path}: opinion file is empty")
    widths = {len(p) for _, p in rows}
    if not widths <= {1, 2} or len(widths) != 1:
        raise InputError(f"{path}: lines must all be 'value' or all be 'label value'")

    def parse(lineno, text):
        try:
            val = float(text)
        except ValueError:
            raise InputError(f"{path}:{lineno}: {text!r} is not a number") from None
        if not 0.0 <= val <= 1.0:
            raise InputError(f"{path}:{lineno}: opinion {val} outside [0, 1]")
        return val

    if widths == {1}:
        s = np.array([parse(ln, p[0]) for ln, p in rows])
        if labels is not None and len(labels) != s.size:
            raise InputError(f"{path}: {s.size} opinions for {len(labels)} nodes")
        return s

    values = {}
    for lineno, (lab, text) in rows:
        if lab in values:
            raise InputError(f"{path}:{lineno}: duplicate opinion for node {lab!r}")
        values[lab] = parse(lineno, text)
    if labels is None:
        labels = list(values)
    missing = [lab for lab in labels if lab not in values]
    if missing:
        raise InputError(f"{path}: no opinion for node {missing[0]!r}")
    extra = set(values) - set(labels)
    if extra:
        raise InputError(f"{path}: opinion given for unknown node {sorted(extra)[0]!r}")
    return np.array([values[lab] for lab in labels])


def write_opinions(path, s, labels=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, val in enumerate(np.asarray(s, dtype=float)):
            if labels is None:
                fh.write(f"{float(val)!r}\n")
            else:
                fh.write(f"{labels[i]} {float(val)!r}\n")


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
