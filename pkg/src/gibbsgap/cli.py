"""Command line front end.

Every invocation materialises a run directory holding the exact
configuration (``config.json``), the result table (``results.csv``)
and a human-readable log (``log.txt``).  Exit codes: 0 success,
1 usage or parameter problem, 2 numerical failure, 3 a verification
suite reported failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .algebra import DenseOperator, Lattice, Region, embed_stack
from .certify import (certificate_1d, ising_envelope, ising_gap_corollary,
                      qd_abelian_gap_corollary, qd_general_gap_corollary)
from .davies import build_davies, db_defect, dissipator_gaps
from .errors import (GibbsgapError, ModelError, ParameterError,
                     PartitionError)
from .gibbs import gibbs_state
from .mixing import (Partition, delta_constrained, delta_direct,
                     shield_partition)
from .models import (Interaction, cyclic_group, ising_ring, quantum_double,
                     random_ring, symmetric_group_s3)
from .purified import (DENSE_OP_CAP, eta_bound, martingale_defect,
                       purified_hamiltonian, spectral_gap)

__all__ = [
    "ResultRow",
    "RunConfig",
    "parse_partition",
    "format_partition",
    "load_model",
    "save_model",
    "main",
]

COLUMNS = ("model", "n", "beta", "quantity", "partition", "value",
           "method", "runtime_ms", "seed")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclasses.dataclass(frozen=True)
class ResultRow:
    """One line of a results table."""

    model: str
    n: int
    beta: float
    quantity: str
    partition: str
    value: float
    method: str
    runtime_ms: int | None
    seed: int

    def as_csv(self) -> list[str]:
        return [self.model, str(self.n), _fmt(self.beta), self.quantity,
                self.partition, _fmt(self.value), self.method,
                "" if self.runtime_ms is None else str(self.runtime_ms),
                str(self.seed)]


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """The reproducible description of one invocation."""

    command: str
    options: dict

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "options": self.options},
                          indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        return cls(str(data["command"]), dict(data["options"]))


# --- partition grammar -----------------------------------------------------

def _split_items(body: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    items: list[str] = []
    depth = 0
    cur: list[str] = []
    for ch in body:
        if ch == "," and depth == 0:
            items.append("".join(cur).strip())
            cur = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise PartitionError(f"unbalanced parentheses in {body!r}")
        cur.append(ch)
    if depth != 0:
        raise PartitionError(f"unbalanced parentheses in {body!r}")
    items.append("".join(cur).strip())
    return [i for i in items if i]


def _rect_sites(item: str, lattice: Lattice) -> list[int]:
    if lattice.kind != "torus_edges":
        raise PartitionError("rect(...) blocks need a torus model")
    if not item.endswith(")"):
        raise PartitionError(f"malformed rectangle {item!r}")
    fields = [f.strip() for f in item[len("rect("):-1].split(",")]
    if len(fields) != 5:
        raise PartitionError(f"rect takes x0,y0,x1,y1,orient: {item!r}")
    try:
        x0, y0, x1, y1 = (int(f) for f in fields[:4])
    except ValueError as exc:
        raise PartitionError(f"bad rectangle corner in {item!r}") from exc
    spec = fields[4]
    orients = {"*": (0, 1), "h": (0,), "0": (0,), "v": (1,), "1": (1,)}
    if spec not in orients:
        raise PartitionError(f"orientation {spec!r} not one of *, h, v")
    n = lattice.extent

    def span(a: int, b: int) -> list[int]:
        a %= n
        b %= n
        return [(a + i) % n for i in range(((b - a) % n) + 1)]

    return [lattice.edge_index(x, y, o)
            for x in span(x0, x1) for y in span(y0, y1)
            for o in orients[spec]]


def _parse_sites(body: str, lattice: Lattice) -> tuple[int, ...]:
    sites: list[int] = []
    for item in _split_items(body):
        if item.startswith("rect("):
            sites.extend(_rect_sites(item, lattice))
            continue
        lo, dash, hi = item.partition("-")
        try:
            if dash and lo and hi:
                a, b = int(lo), int(hi)
                if a <= b:
                    sites.extend(range(a, b + 1))
                elif lattice.kind == "ring":
                    n = lattice.site_count
                    sites.extend((a + i) % n for i in range((b - a) % n + 1))
                else:
                    raise PartitionError(f"descending range {item!r}")
            else:
                sites.append(int(item))
        except ValueError as exc:
            raise PartitionError(f"bad site item {item!r}") from exc
    bad = [s for s in sites if not 0 <= s < lattice.site_count]
    if bad:
        raise PartitionError(f"sites {sorted(set(bad))} outside the "
                             f"{lattice.site_count}-site lattice")
    return tuple(sites)


def parse_partition(text: str, lattice: Lattice) -> Partition:
    """Parse ``A=0-2;B=3,7;C=4-6;D=`` (torus blocks may use
    ``rect(x0,y0,x1,y1,orient)`` with orient one of ``*``, ``h``, ``v``)."""
    blocks: dict[str, tuple[int, ...]] = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, eq, body = chunk.partition("=")
        name = name.strip().upper()
        if not eq or name not in ("A", "B", "C", "D"):
            raise PartitionError(f"expected NAME=sites with NAME in "
                                 f"A,B,C,D; got {chunk!r}")
        if name in blocks:
            raise PartitionError(f"block {name} given twice")
        blocks[name] = _parse_sites(body.strip(), lattice)
    missing = [n for n in "ABCD" if n not in blocks]
    if missing:
        raise PartitionError(f"missing blocks: {', '.join(missing)}")
    return Partition(*(Region(lattice, blocks[n]) for n in "ABCD"))


def _format_sites(sites: tuple[int, ...]) -> str:
    runs: list[str] = []
    i = 0
    while i < len(sites):
        j = i
        while j + 1 < len(sites) and sites[j + 1] == sites[j] + 1:
            j += 1
        runs.append(str(sites[i]) if i == j else f"{sites[i]}-{sites[j]}")
        i = j + 1
    return ",".join(runs)


def format_partition(part: Partition) -> str:
    """Inverse of parse_partition, always in plain site-range form."""
    return ";".join(f"{name}={_format_sites(reg.sites)}"
                    for name, reg in part.blocks().items())


# --- model construction ----------------------------------------------------

def _group_from_name(name: str):
    name = name.strip().lower()
    if name == "s3":
        return symmetric_group_s3()
    if name.startswith("z") and name[1:].isdigit():
        return cyclic_group(int(name[1:]))
    raise ModelError(f"unknown group {name!r}; use z<k> or s3")


def load_model(path: str | Path) -> tuple[Interaction, float | None]:
    """Read a model description file; returns the interaction and the
    file's beta (None when absent)."""
    try:
        data = json.loads(Path(path).read_text())
        lat_d = data["lattice"]
        lat = Lattice(str(lat_d["kind"]), int(lat_d["n"]),
                      int(lat_d.get("local_dim", 2)))
        beta = data.get("beta")
        inter_d = data["interaction"]
        if "builtin" in inter_d:
            b = inter_d["builtin"]
            name = str(b["name"])
            if name == "ising":
                inter = ising_ring(lat.extent, lat.local_dim)
            elif name == "random":
                inter = random_ring(lat.extent, int(b.get("range", 2)),
                                    float(b.get("strength", 1.0)),
                                    seed=int(b.get("seed", 0)),
                                    local_dim=lat.local_dim)
            elif name == "quantum_double":
                inter = quantum_double(lat.extent,
                                       _group_from_name(b.get("group", "z2")))
            else:
                raise ModelError(f"unknown builtin model {name!r}")
        elif "terms" in inter_d:
            terms = []
            for t in inter_d["terms"]:
                mat_d = t["matrix"]
                mat = np.asarray(mat_d["re"], dtype=float).astype(complex)
                if "im" in mat_d:
                    mat = mat + 1j * np.asarray(mat_d["im"], dtype=float)
                support = Region(lat, tuple(int(s) for s in t["support"]))
                terms.append(DenseOperator(support, mat))
            inter = Interaction(lat, tuple(terms))
        else:
            raise ModelError("interaction needs a 'builtin' or 'terms' key")
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model file {path}: {exc}") from exc
    return inter, None if beta is None else float(beta)


def save_model(interaction: Interaction, beta: float | None,
               path: str | Path) -> None:
    """Write a model as an explicit-terms description file."""
    lat = interaction.lattice
    data = {
        "lattice": {"kind": lat.kind, "n": lat.extent,
                    "local_dim": lat.local_dim},
        "beta": beta,
        "interaction": {"terms": [
            {"support": list(t.support.sites),
             "matrix": {"re": t.matrix.real.tolist(),
                        "im": t.matrix.imag.tolist()}}
            for t in interaction.terms]},
    }
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True))


def _build_model(ns) -> tuple[Interaction, str, float | None]:
    if getattr(ns, "model", None):
        inter, file_beta = load_model(ns.model)
        beta = ns.beta if ns.beta is not None else file_beta
        return inter, f"file:{Path(ns.model).stem}", beta
    builtin = ns.builtin
    if builtin == "ising":
        return ising_ring(ns.n, ns.local_dim), "ising", ns.beta
    if builtin == "random":
        inter = random_ring(ns.n, ns.range, ns.strength, seed=ns.seed,
                            local_dim=ns.local_dim)
        return inter, f"random-r{ns.range}", ns.beta
    if builtin == "qd":
        group = _group_from_name(ns.group)
        return quantum_double(ns.n, group), f"qd-{ns.group.lower()}", ns.beta
    raise ParameterError(f"unknown builtin {builtin!r}")


def _need_beta(beta: float | None) -> float:
    if beta is None:
        raise ParameterError("this command needs --beta (or a model file "
                             "that sets it)")
    return beta


def _region_gap(sigma, region, *, seed: int):
    """Spectral gap of the purified Hamiltonian on ``region``; switches
    to the deflated iterative path above the dense ceiling."""
    op = purified_hamiltonian(sigma, region)
    if op.op_dim <= DENSE_OP_CAP:
        return spectral_gap(op, seed=seed), "dense"
    lam = sigma.support
    rest = (region if region is not None else lam).complement()
    if rest.dim ** 2 > DENSE_OP_CAP:
        raise ParameterError(f"kernel basis too large "
                             f"({rest.dim ** 2} vectors); "
                             "choose a smaller complement")
    d = lam.lattice.local_dim
    units = np.eye(rest.dim ** 2, dtype=complex).reshape(-1, rest.dim,
                                                         rest.dim)
    kernel = list(embed_stack(units, rest.sites, lam.sites, d) @ sigma.sqrt) \
        if not rest.is_empty else [sigma.sqrt]
    res = spectral_gap(op, known_kernel=kernel, method="iterative",
                       seed=seed)
    return res, "iterative"


# --- run directory ---------------------------------------------------------

class _Run:
    def __init__(self, ns, command: str):
        out = getattr(ns, "out", None)
        if out is None:
            out = Path("runs") / f"{command}-{time.strftime('%Y%m%d-%H%M%S')}"
        self.dir = Path(out)
        self.dir.mkdir(parents=True, exist_ok=True)
        options = {k: v for k, v in vars(ns).items()
                   if k not in ("func", "command") and not k.startswith("_")}
        options["out"] = str(self.dir)
        self.config = RunConfig(command, options)
        (self.dir / "config.json").write_text(self.config.to_json() + "\n")
        self.log: list[str] = [f"command: {command}"]

    def note(self, line: str) -> None:
        self.log.append(line)

    def write_rows(self, rows: list[ResultRow],
                   statuses: list[str] | None = None) -> None:
        with open(self.dir / "results.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            header = list(COLUMNS) + (["status"] if statuses is not None
                                      else [])
            writer.writerow(header)
            for i, row in enumerate(rows):
                rec = row.as_csv()
                if statuses is not None:
                    rec.append(statuses[i])
                writer.writerow(rec)
        for i, row in enumerate(rows):
            status = "" if statuses is None else f" [{statuses[i]}]"
            self.note(f"{row.quantity}={_fmt(row.value)} "
                      f"method={row.method}{status}")

    def finish(self) -> None:
        (self.dir / "log.txt").write_text("\n".join(self.log) + "\n")


def _timed(fn):
    t0 = time.perf_counter()
    value = fn()
    return value, int(round(1000.0 * (time.perf_counter() - t0)))


# --- subcommands -----------------------------------------------------------

def _cmd_model(ns) -> int:
    run = _Run(ns, "model")
    inter, label, beta = _build_model(ns)
    n = inter.lattice.site_count
    b = beta if beta is not None else 0.0
    rows = []
    for quantity, value in (("strength", inter.strength),
                            ("range", float(inter.range)),
                            ("commuting", 1.0 if inter.commuting else 0.0)):
        rows.append(ResultRow(label, n, b, quantity, "", value,
                              "structural", 0, ns.seed))
    if ns.save:
        save_model(inter, beta, ns.save)
        run.note(f"model written to {ns.save}")
    run.write_rows(rows)
    run.finish()
    return 0


def _cmd_delta(ns) -> int:
    run = _Run(ns, "delta")
    inter, label, beta = _build_model(ns)
    beta = _need_beta(beta)
    part = parse_partition(ns.partition, inter.lattice)
    spec = format_partition(part)
    sigma = gibbs_state(inter, beta)
    n = inter.lattice.site_count
    rows = []
    methods = (("direct", "constrained", "martingale")
               if ns.method == "all" else (ns.method,))
    for method in methods:
        if method == "direct":
            value, ms = _timed(lambda: delta_direct(sigma, part).delta)
        elif method == "constrained":
            value, ms = _timed(lambda: delta_constrained(sigma, part))
        else:
            value, ms = _timed(lambda: martingale_defect(
                sigma, part.a, part.b, part.c, seed=ns.seed))
        rows.append(ResultRow(label, n, beta, "delta", spec, value,
                              method, ms, ns.seed))
    run.write_rows(rows)
    run.finish()
    return 0


def _cmd_gap(ns) -> int:
    run = _Run(ns, "gap")
    inter, label, beta = _build_model(ns)
    beta = _need_beta(beta)
    sigma = gibbs_state(inter, beta)
    region = None
    spec = ""
    if ns.region:
        region = Region(inter.lattice, _parse_sites(ns.region,
                                                    inter.lattice))
        spec = _format_sites(region.sites)
    (res, method), ms = _timed(lambda: _region_gap(sigma, region,
                                                   seed=ns.seed))
    for w in res.warnings:
        run.note(f"warning: {w}")
    run.note(f"kernel dimension {res.kernel_dim}, "
             f"largest eigenvalue {_fmt(res.max_eigenvalue)}")
    rows = [ResultRow(label, inter.lattice.site_count, beta, "gap", spec,
                      res.value, method, ms, ns.seed)]
    run.write_rows(rows)
    run.finish()
    return 0


def _cmd_eta(ns) -> int:
    run = _Run(ns, "eta")
    inter, label, beta = _build_model(ns)
    beta = _need_beta(beta)
    sigma = gibbs_state(inter, beta)
    region = Region(inter.lattice, _parse_sites(ns.region, inter.lattice))
    eb, ms = _timed(lambda: eta_bound(sigma, region, method=ns.method,
                                      interaction=inter, beta=beta))
    run.note(f"gap lower bound eta^-4 = {_fmt(eb.gap_lower)}")
    rows = [ResultRow(label, inter.lattice.site_count, beta, "eta",
                      _format_sites(region.sites), eb.value, ns.method,
                      ms, ns.seed)]
    run.write_rows(rows)
    run.finish()
    return 0


def _cmd_davies(ns) -> int:
    run = _Run(ns, "davies")
    inter, label, beta = _build_model(ns)
    beta = _need_beta(beta)
    gen, ms_build = _timed(lambda: build_davies(inter, beta,
                                                profile=ns.profile))
    run.note(f"{len(gen.jumps)} jump operators, built in {ms_build} ms")
    n = inter.lattice.site_count
    defect, ms_d = _timed(lambda: db_defect(gen.dissipative, gen.sigma,
                                            seed=ns.seed))
    comp, ms_g = _timed(lambda: dissipator_gaps(gen, seed=ns.seed))
    run.note(f"margin over local x parent bound: {_fmt(comp.margin)}")
    rows = [
        ResultRow(label, n, beta, "db_defect", "", defect,
                  "weighted-symmetry", ms_d, ns.seed),
        ResultRow(label, n, beta, "gap", "", comp.dissipative_gap,
                  "dissipative", ms_g, ns.seed),
        ResultRow(label, n, beta, "gap", "", comp.parent_gap,
                  "parent", 0, ns.seed),
        ResultRow(label, n, beta, "gap", "", comp.lower_bound,
                  "site-product", 0, ns.seed),
    ]
    run.write_rows(rows)
    run.finish()
    return 0


def _certificate_rows(family: str, beta: float, n: int | None,
                      mu: int | None, order: int,
                      seed: int) -> list[ResultRow]:
    rows = []
    if family == "ising":
        value, ms = _timed(lambda: ising_gap_corollary(beta))
        rows.append(ResultRow("ising", n or 0, beta, "certificate", "",
                              value, "corollary", ms, seed))
        if n is not None:
            m = mu if mu is not None else 9
            # eta <= exp(beta |X| * strength) on windows of length <= m;
            # the Ising strength is exactly 2.
            eta_small = math.exp(2.0 * beta * m)
            cert, ms = _timed(lambda: certificate_1d(
                ising_envelope(beta), eta_small, n, m))
            rows.append(ResultRow("ising", n, beta, "certificate", "",
                                  cert.lower_bound, "recursion", ms, seed))
    elif family == "qd-abelian":
        value, ms = _timed(lambda: qd_abelian_gap_corollary(beta, order))
        rows.append(ResultRow(f"qd-z{order}", 0, beta, "certificate", "",
                              value, "corollary", ms, seed))
    elif family == "qd-general":
        value, ms = _timed(lambda: qd_general_gap_corollary(beta, order))
        rows.append(ResultRow(f"qd-order{order}", 0, beta, "certificate",
                              "", value, "corollary", ms, seed))
    else:
        raise ParameterError(f"unknown certificate family {family!r}")
    return rows


def _cmd_certify(ns) -> int:
    run = _Run(ns, "certify")
    beta = _need_beta(ns.beta)
    rows = _certificate_rows(ns.family, beta, ns.n, ns.mu, ns.order,
                             ns.seed)
    run.write_rows(rows)
    run.finish()
    return 0


# --- sweep -----------------------------------------------------------------

_GRID_VARS = ("beta", "ell", "n", "order")


def _parse_grid(text: str) -> tuple[str, list[float]]:
    name, eq, body = text.partition("=")
    name = name.strip()
    if not eq or name not in _GRID_VARS:
        raise ParameterError(f"grid must be var=start:stop:step with var "
                             f"in {_GRID_VARS}; got {text!r}")
    parts = body.split(":")
    if len(parts) != 3:
        raise ParameterError(f"grid range must be start:stop:step; "
                             f"got {body!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ParameterError(f"non-numeric grid bound in {body!r}") from exc
    if step <= 0:
        raise ParameterError("grid step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [start + k * step for k in range(max(count, 0))]
    if name in ("ell", "n", "order"):
        values = [float(int(round(v))) for v in values]
    return name, values


def _sweep_point(payload: dict) -> dict:
    """Evaluate one grid point; runs inside worker processes, so every
    failure is folded into the status column instead of raising."""
    out = {"value": math.nan, "method": "", "partition": "",
           "model": payload.get("family") or payload.get("builtin") or "",
           "n": int(payload.get("n") or 0),
           "beta": float(payload.get("beta") or 0.0), "status": "ok"}
    try:
        quantity = payload["quantity"]
        seed = payload["seed"]
        if quantity == "certificate":
            rows = _certificate_rows(payload["family"], payload["beta"],
                                     None, None, payload["order"], seed)
            out["value"] = rows[0].value
            out["method"] = rows[0].method
            out["model"] = rows[0].model
            out["n"] = rows[0].n
        else:
            ns = argparse.Namespace(
                model=payload.get("model"), builtin=payload["builtin"],
                n=int(payload["n"]), range=payload["range"],
                strength=payload["strength"], group=payload["group"],
                local_dim=payload["local_dim"], beta=payload["beta"],
                seed=seed)
            inter, label, beta = _build_model(ns)
            beta = _need_beta(beta)
            out["model"] = label
            out["n"] = inter.lattice.site_count
            out["beta"] = beta
            if quantity == "gap":
                sigma = gibbs_state(inter, beta)
                res, method = _region_gap(sigma, None, seed=seed)
                out["value"] = res.value
                out["method"] = method
            elif quantity == "delta":
                sigma = gibbs_state(inter, beta)
                part = shield_partition(inter.lattice,
                                        int(payload["ell"]))
                out["value"] = delta_direct(sigma, part).delta
                out["method"] = "direct"
                out["partition"] = format_partition(part)
            elif quantity == "eta":
                sigma = gibbs_state(inter, beta)
                region = Region(inter.lattice,
                                _parse_sites(payload["region"],
                                             inter.lattice))
                eb = eta_bound(sigma, region, method="gibbs-boundary",
                               interaction=inter, beta=beta)
                out["value"] = eb.value
                out["method"] = "gibbs-boundary"
                out["partition"] = _format_sites(region.sites)
            elif quantity == "db_defect":
                gen = build_davies(inter, beta)
                out["value"] = db_defect(gen.dissipative, gen.sigma,
                                         seed=seed)
                out["method"] = "weighted-symmetry"
            else:
                raise ParameterError(f"unknown sweep quantity "
                                     f"{quantity!r}")
    except Exception as exc:  # noqa: BLE001 - reported via the status column
        out["status"] = f"error:{type(exc).__name__}"
        out["value"] = math.nan
    return out


def _cmd_sweep(ns) -> int:
    run = _Run(ns, "sweep")
    var, values = _parse_grid(ns.grid)
    base = {"quantity": ns.quantity, "family": ns.family,
            "model": ns.model, "builtin": ns.builtin, "n": ns.n,
            "range": ns.range, "strength": ns.strength, "group": ns.group,
            "local_dim": ns.local_dim, "beta": ns.beta, "ell": ns.ell,
            "region": ns.region, "order": ns.order, "seed": ns.seed}
    payloads = []
    for v in values:
        p = dict(base)
        p[var] = v if var == "beta" else int(v)
        payloads.append(p)
    if ns.jobs <= 1:
        outs = [_sweep_point(p) for p in payloads]
    else:
        # a worker killed by the OS (not a Python exception) breaks the
        # whole pool; mark the unfinished tail instead of losing the run
        outs = []
        try:
            with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
                for out in pool.map(_sweep_point, payloads):
                    outs.append(out)
        except BrokenProcessPool:
            run.note("worker pool died; remaining points marked failed")
            while len(outs) < len(payloads):
                outs.append({"value": math.nan, "method": "",
                             "partition": "", "model": "", "n": 0,
                             "beta": 0.0,
                             "status": "error:BrokenProcessPool"})
    rows = []
    statuses = []
    for o in outs:
        rows.append(ResultRow(o["model"], o["n"], o["beta"], ns.quantity,
                              o["partition"], o["value"], o["method"],
                              None, ns.seed))
        statuses.append(o["status"])
    run.note(f"grid {var}: {len(values)} points, jobs={ns.jobs}")
    run.write_rows(rows, statuses)
    run.finish()
    return 0 if all(s == "ok" for s in statuses) else 2


def _cmd_verify(ns) -> int:
    run = _Run(ns, "verify")
    report = verify_mod.run_suite(ns.suite, seed=ns.seed)
    (run.dir / "report.json").write_text(report.to_json() + "\n")
    rows = []
    for check in report.results:
        rows.append(ResultRow("verify", check.criterion, 0.0, check.name,
                              "", check.margin if check.margin is not None
                              else float(check.passed),
                              "pass" if check.passed else "fail",
                              check.runtime_ms, ns.seed))
    run.write_rows(rows)
    for line in report.lines():
        run.note(line)
        print(line)
    run.finish()
    return 0 if report.passed else 3


# --- parser ----------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _model_flags(parser) -> None:
    parser.add_argument("--model", help="model description file (JSON)")
    parser.add_argument("--builtin", default="ising",
                        choices=("ising", "random", "qd"))
    parser.add_argument("--n", type=int, default=6,
                        help="ring size, or torus extent for qd")
    parser.add_argument("--range", type=int, default=2,
                        help="window length of random terms")
    parser.add_argument("--strength", type=float, default=1.0)
    parser.add_argument("--group", default="z2", help="z<k> or s3")
    parser.add_argument("--local-dim", dest="local_dim", type=int,
                        default=2)
    parser.add_argument("--beta", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gibbsgap",
                     description="Spectral gaps of purified commuting "
                                 "Gibbs samplers: measurements, "
                                 "certificates and cross-checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, model=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", default=None, help="run directory")
        p.add_argument("--seed", type=int, default=0)
        if model:
            _model_flags(p)
        p.set_defaults(func=fn)
        return p

    p = add("model", _cmd_model, "build a model and report its structure",
            model=True)
    p.add_argument("--save", default=None,
                   help="also write the model to this file")

    p = add("delta", _cmd_delta, "conditional mixing coefficient",
            model=True)
    p.add_argument("--partition", required=True,
                   help="A=..;B=..;C=..;D=.. site lists")
    p.add_argument("--method", default="direct",
                   choices=("direct", "constrained", "martingale", "all"))

    p = add("gap", _cmd_gap, "spectral gap of the purified Hamiltonian",
            model=True)
    p.add_argument("--region", default=None,
                   help="site list; omitted means the full lattice")

    p = add("eta", _cmd_eta, "boundary distortion and its gap bound",
            model=True)
    p.add_argument("--region", required=True)
    p.add_argument("--method", default="trivial",
                   choices=("trivial", "closed-form", "gibbs-boundary"))

    p = add("davies", _cmd_davies, "thermal generator diagnostics",
            model=True)
    p.add_argument("--profile", default="glauber",
                   choices=("glauber", "sqrt"))

    p = add("certify", _cmd_certify, "closed-form gap certificates")
    p.add_argument("--family", required=True,
                   choices=("ising", "qd-abelian", "qd-general"))
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, default=None,
                   help="ring size for the recursion certificate")
    p.add_argument("--mu", type=int, default=None,
                   help="base interval length (default 9)")
    p.add_argument("--order", type=int, default=2, help="group order")

    p = add("sweep", _cmd_sweep, "evaluate a quantity over a grid",
            model=True)
    p.add_argument("--quantity", required=True,
                   choices=("certificate", "gap", "delta", "eta",
                            "db_defect"))
    p.add_argument("--grid", required=True, help="var=start:stop:step")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--family", default="ising",
                   choices=("ising", "qd-abelian", "qd-general"))
    p.add_argument("--ell", type=int, default=1,
                   help="shield width for delta sweeps")
    p.add_argument("--region", default="0",
                   help="region for eta sweeps")
    p.add_argument("--order", type=int, default=2)

    p = add("verify", _cmd_verify, "run a verification suite")
    p.add_argument("--suite", default="all",
                   choices=tuple(sorted(verify_mod.SUITES)))

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return ns.func(ns)
    except GibbsgapError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001 - uniform numeric-failure exit
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
