"""Instance files, generators and result serialization.

Instance text format (keywords are case-insensitive, ``#`` starts a comment)::

    SECTION Comment            (optional)
    Name "figure1 l=4 k=2"
    <Key> "<free text>"        (any number of key/value lines)
    END

    SECTION Graph
    Nodes <n>
    Edges <m>
    E <u> <v> <length>         (m lines, 1-based vertices, lengths >= 0)
    END

    SECTION Terminals
    Terminals <t>              (optional, for terminals outside every pair)
    T <v>                      (t lines)
    Pairs <p>
    TP <u> <v>                 (p lines, p >= 1)
    END

    EOF

Every pair endpoint is a terminal.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import shlex
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import BadParams, ParseError, ValidationError
from .forest import Forest
from .instance import MetricInstance, WeightedGraph, metric_closure

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class InstanceFile:
    graph: WeightedGraph
    pairs: tuple[tuple[int, int], ...]
    extra_terminals: tuple[int, ...] = ()
    comments: tuple[tuple[str, str], ...] = ()

    @property
    def terminals(self) -> tuple[int, ...]:
        return tuple(sorted({v for p in self.pairs for v in p} | set(self.extra_terminals)))

    def comment(self, key: str) -> str | None:
        return next((v for k, v in self.comments if k.lower() == key.lower()), None)

    def to_instance(self) -> MetricInstance:
        return metric_closure(self.graph, self.terminals, self.pairs)

    def digest(self) -> str:
        return hashlib.sha256(serialize_instance(self).encode()).hexdigest()[:16]


# -- parsing -------------------------------------------------------------------


def _int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(line, f"{what} must be an integer, got {tok!r}") from None


def parse_instance_file(text: str) -> InstanceFile:
    """Strict parse into an :class:`InstanceFile`.

    Syntax problems raise :class:`ParseError` with the 1-based line number;
    well-formed files with bad values raise :class:`ValidationError`.
    """
    section = None
    seen: set[str] = set()
    nodes = n_edges = n_pairs = n_terms = None
    edges: list[tuple[int, int, int]] = []
    pairs: list[tuple[int, int]] = []
    extra: list[int] = []
    comments: list[tuple[str, str]] = []
    ended = False
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip() if section != "comment" else raw.strip()
        if not line:
            continue
        if ended:
            raise ParseError(lineno, "content after EOF")
        try:
            toks = shlex.split(line)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        head = toks[0].lower()
        if section is None:
            if head == "eof":
                ended = True
                continue
            if head != "section" or len(toks) != 2:
                raise ParseError(lineno, "expected 'SECTION <name>'")
            section = toks[1].lower()
            if section not in ("comment", "graph", "terminals"):
                raise ParseError(lineno, f"unknown section {toks[1]!r}")
            if section in seen:
                raise ParseError(lineno, f"duplicate section {toks[1]!r}")
            seen.add(section)
            continue
        if head == "end" and len(toks) == 1:
            if section == "graph" and n_edges is not None and len(edges) != n_edges:
                raise ParseError(lineno, f"declared {n_edges} edges, found {len(edges)}")
            if section == "terminals":
                if n_pairs is not None and len(pairs) != n_pairs:
                    raise ParseError(lineno, f"declared {n_pairs} pairs, found {len(pairs)}")
                if n_terms is not None and len(extra) != n_terms:
                    raise ParseError(lineno, f"declared {n_terms} terminals, found {len(extra)}")
            section = None
            continue
        if section == "comment":
            if len(toks) != 2:
                raise ParseError(lineno, 'comment lines look like: Key "text"')
            comments.append((toks[0], toks[1]))
        elif section == "graph":
            if head == "nodes" and len(toks) == 2:
                nodes = _int(toks[1], lineno, "node count")
            elif head == "edges" and len(toks) == 2:
                n_edges = _int(toks[1], lineno, "edge count")
            elif head == "e" and len(toks) == 4:
                u, v, w = (_int(t, lineno, "edge field") for t in toks[1:])
                edges.append((u, v, w))
            else:
                raise ParseError(lineno, f"unexpected line in Graph section: {line!r}")
        else:
            if head == "pairs" and len(toks) == 2:
                n_pairs = _int(toks[1], lineno, "pair count")
            elif head == "terminals" and len(toks) == 2:
                n_terms = _int(toks[1], lineno, "terminal count")
            elif head == "tp" and len(toks) == 3:
                pairs.append((_int(toks[1], lineno, "pair endpoint"), _int(toks[2], lineno, "pair endpoint")))
            elif head == "t" and len(toks) == 2:
                extra.append(_int(toks[1], lineno, "terminal"))
            else:
                raise ParseError(lineno, f"unexpected line in Terminals section: {line!r}")
    if section is not None:
        raise ParseError(lineno, f"section {section!r} is not closed")
    for name in ("graph", "terminals"):
        if name not in seen:
            raise ParseError(lineno, f"missing section {name!r}")
    if nodes is None:
        raise ParseError(lineno, "Graph section lacks a Nodes line")
    graph = WeightedGraph(nodes, tuple(edges))
    if not pairs:
        raise ValidationError("an instance needs at least one terminal pair")
    for v in [x for p in pairs for x in p] + extra:
        if not 1 <= v <= nodes:
            raise ValidationError(f"terminal {v} is outside 1..{nodes}")
    return InstanceFile(graph, tuple(pairs), tuple(extra), tuple(comments))


def parse_instance(text: str) -> tuple[WeightedGraph, tuple[int, ...], tuple[tuple[int, int], ...]]:
    f = parse_instance_file(text)
    return f.graph, f.terminals, f.pairs


def serialize_instance(f: InstanceFile) -> str:
    out = []
    if f.comments:
        out.append("SECTION Comment")
        for k, v in f.comments:
            out.append(f"{k} {json.dumps(v)}")
        out.append("END")
        out.append("")
    out.append("SECTION Graph")
    out.append(f"Nodes {f.graph.vertex_count}")
    out.append(f"Edges {len(f.graph.edges)}")
    out.extend(f"E {u} {v} {w}" for u, v, w in f.graph.edges)
    out.append("END")
    out.append("")
    out.append("SECTION Terminals")
    if f.extra_terminals:
        out.append(f"Terminals {len(f.extra_terminals)}")
        out.extend(f"T {v}" for v in f.extra_terminals)
    out.append(f"Pairs {len(f.pairs)}")
    out.extend(f"TP {u} {v}" for u, v in f.pairs)
    out.append("END")
    out.append("")
    out.append("EOF")
    return "\n".join(out) + "\n"


# -- generators ----------------------------------------------------------------


def figure1_layout(l: int) -> dict[str, int]:
    """Vertex ids along the line s_1, s_2, t_2, ..., s_l, t_l, t_1."""
    ids = {"s1": 1, "t1": 2 * l}
    for i in range(2, l + 1):
        ids[f"s{i}"] = 2 * i - 2
        ids[f"t{i}"] = 2 * i - 1
    return ids


def figure1_costs(l: int, k: int) -> tuple[int, int]:
    """(chain cost, pair-edges-plus-bypass cost) in units scaled by k."""
    return l * l + (l - 1) * k, (2 * l - 1) * k


def figure1_chain(l: int) -> list[tuple[int, int]]:
    """Label edges of the chain solution: every line edge, no bypass."""
    return [(v, v + 1) for v in range(1, 2 * l)]


def gen_figure1(l: int, k: int) -> InstanceFile:
    """The line family where single-edge swaps get stuck.

    Lengths are multiplied by k: connectors have length l, pair edges k, and
    the s_1-t_1 bypass is one edge of length l*k.
    """
    if not (isinstance(l, int) and isinstance(k, int)) or k < 1 or l <= k:
        raise BadParams(f"need integers l > k >= 1, got l={l}, k={k}")
    ids = figure1_layout(l)
    edges = []
    for v in range(1, 2 * l):
        pair_edge = v % 2 == 0
        edges.append((v, v + 1, k if pair_edge else l))
    edges.append((1, 2 * l, l * k))
    pairs = [(ids[f"s{i}"], ids[f"t{i}"]) for i in range(1, l + 1)]
    chain, blue = figure1_costs(l, k)
    comments = (
        ("Name", f"figure1 l={l} k={k}"),
        ("Chain", str(chain)),
        ("Optimum", str(blue)),
    )
    return InstanceFile(WeightedGraph(2 * l, tuple(edges)), tuple(pairs), (), comments)


def gen_random(
    n_terminals: int,
    n_pairs: int,
    weight_range: Sequence[int] = (1, 100),
    seed: int = 0,
    allow_shared: bool = False,
) -> InstanceFile:
    """Complete graph with uniform integer edge lengths; every vertex is a
    terminal.  Deterministic for a given seed."""
    if n_pairs <= 0:
        raise ValidationError("n_pairs must be at least 1")
    lo, hi = (int(x) for x in weight_range)
    if n_terminals < 2 or lo < 0 or lo > hi:
        raise BadParams(f"bad generator parameters n={n_terminals}, weights=[{lo},{hi}]")
    if not allow_shared and 2 * n_pairs > n_terminals:
        raise BadParams(f"{n_pairs} disjoint pairs need at least {2 * n_pairs} terminals")
    if n_pairs > n_terminals * (n_terminals - 1) // 2:
        raise BadParams(f"at most {n_terminals * (n_terminals - 1) // 2} distinct pairs exist")
    rng = np.random.default_rng(seed)
    n = n_terminals
    edges = tuple((u, v, int(rng.integers(lo, hi + 1))) for u in range(1, n + 1) for v in range(u + 1, n + 1))
    if allow_shared:
        chosen: list[tuple[int, int]] = []
        while len(chosen) < n_pairs:
            u, v = sorted(int(x) + 1 for x in rng.choice(n, size=2, replace=False))
            if (u, v) not in chosen:
                chosen.append((u, v))
        pairs = tuple(chosen)
    else:
        perm = [int(x) + 1 for x in rng.permutation(n)]
        pairs = tuple((perm[2 * i], perm[2 * i + 1]) for i in range(n_pairs))
    comments = (("Name", f"random n={n} p={n_pairs} w=[{lo},{hi}] seed={seed}"),)
    # isolated-by-pairs vertices still count as terminals (they may be used as hubs)
    extra = tuple(v for v in range(1, n + 1) if all(v not in p for p in pairs))
    return InstanceFile(WeightedGraph(n, edges), pairs, extra, comments)


# -- results -------------------------------------------------------------------


@dataclass
class RunRecord:
    instance: str
    digest: str
    config: dict[str, Any]
    final_cost: int
    oracle_cost: int | None = None
    ratio: float | None = None
    bound: float | None = None
    iterations: int = 0
    iteration_bound: float | None = None
    move_counts: dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0
    final_edges: list[tuple[int, int]] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.oracle_cost and self.ratio is not None and self.ratio < 1 - 1e-12:
            raise ValidationError(f"ratio {self.ratio} below 1 contradicts the oracle")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


CSV_FIELDS = ("instance", "digest", "final_cost", "oracle_cost", "ratio", "bound", "iterations", "wall_time")


def records_to_csv(records: Iterable[RunRecord], extra_fields: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    fields = list(CSV_FIELDS) + list(extra_fields)
    w = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(asdict(r) if isinstance(r, RunRecord) else r)
    return buf.getvalue()


def error_json(kind: str, message: str) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "error": kind, "message": message}, indent=2)


def _dot_cluster(name: str, title: str, f: Forest) -> list[str]:
    inst = f.inst
    lines = [f"  subgraph cluster_{name} {{", f'    label="{title} (d={f.length})";']
    for lab in inst.labels:
        lines.append(f'    {name}_{lab} [label="{lab}"];')
    for e in sorted(f.edges):
        a, b = inst.labels_of_edge(e)
        lines.append(f'    {name}_{a} -- {name}_{b} [label="{inst.d(e)}"];')
    lines.append("  }")
    return lines


def forests_to_dot(final: Forest, opt: Forest | None = None) -> str:
    """Final forest and (optionally) the optimum side by side."""
    lines = ["graph solution {", "  node [shape=circle];"]
    lines += _dot_cluster("final", "local optimum", final)
    if opt is not None:
        lines += _dot_cluster("opt", "optimum", opt)
    lines.append("}")
    return "\n".join(lines) + "\n"
