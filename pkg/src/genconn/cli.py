"""Batch front end: run a JSON scenario and write a deterministic JSON report.

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .basis import gram_matrix, make_spin_network
from .cyl import CylFunction, expr_from_json, rewrite_over_paths
from .errors import GenConnError
from .family import Chart, Inconsistent, reconstruct_from_family
from .groupoid import Alphabet, Edge, TameSubgroupoid, parse_letters
from .groups import Group
from .measure import SIGMAS, UNIFORM, FiniteFamily, check_consistency, integrate
from .methods import MonteCarlo, method_from_json
from .symmetry import GaugeTransformation, GroupoidAutomorphism, invariance_report

SCHEMA = 1
COMMANDS = ("integrate", "consistency", "invariance", "gram", "reconstruct")
KIND_ALIASES = {"zn": "zn", "u1": "u1", "su2": "su2"}


class ScenarioError(Exception):
    def __init__(self, field: str, message: str):
        super().__init__(f"scenario field '{field}': {message}")
        self.field = field


class _Field:
    """Run a parsing step and re-raise any failure against a field path."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if ev is None or isinstance(ev, ScenarioError):
            return False
        if isinstance(ev, (GenConnError, ValueError, KeyError, TypeError, IndexError)):
            msg = f"missing key {ev}" if isinstance(ev, KeyError) else str(ev)
            raise ScenarioError(self.name, msg) from ev
        return False


class Scenario:
    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise ScenarioError("<root>", "scenario must be a JSON object")
        self.data = data
        if data.get("schema") != SCHEMA:
            raise ScenarioError("schema", f"expected schema {SCHEMA}, got {data.get('schema')!r}")
        self.command = data.get("command")
        if self.command not in COMMANDS:
            raise ScenarioError("command", f"unknown command {self.command!r}; expected one of {COMMANDS}")
        g = data.get("group")
        if not isinstance(g, dict):
            raise ScenarioError("group", "missing group descriptor")
        if g.get("kind") not in KIND_ALIASES:
            raise ScenarioError("group.kind", f"unknown group kind {g.get('kind')!r}")
        with _Field("group.n"):
            self.group = Group.from_json(g)
        with _Field("alphabet"):
            self.alphabet = Alphabet.from_json(data["alphabet"])
        self.edges = {}
        for name, tokens in data.get("edges", {}).items():
            with _Field(f"edges.{name}"):
                self.edges[name] = Edge(self.alphabet, tuple(parse_letters(tokens)))
        self.subgroupoids = {}
        for name, gens in data.get("subgroupoids", {}).items():
            with _Field(f"subgroupoids.{name}"):
                self.subgroupoids[name] = TameSubgroupoid(tuple(self._edge(x, f"subgroupoids.{name}") for x in gens))
        self.functions = {}
        for name, spec in data.get("functions", {}).items():
            self.functions[name] = self._function(spec, f"functions.{name}")
        with _Field("method"):
            self.method = method_from_json(data.get("method", {"kind": "exact"}))
        self.output = data.get("output")

    def _edge(self, ref, field: str) -> Edge:
        if isinstance(ref, str):
            if ref not in self.edges:
                raise ScenarioError(field, f"unknown edge {ref!r}")
            return self.edges[ref]
        return Edge(self.alphabet, tuple(parse_letters(ref)))

    def subgroupoid(self, ref, field: str) -> TameSubgroupoid:
        if isinstance(ref, str):
            if ref not in self.subgroupoids:
                raise ScenarioError(field, f"unknown subgroupoid {ref!r}")
            return self.subgroupoids[ref]
        with _Field(field):
            return TameSubgroupoid(tuple(self._edge(x, field) for x in ref))

    def name_of(self, L: TameSubgroupoid) -> str:
        for name, M in self.subgroupoids.items():
            if M == L:
                return name
        return str(L)

    def _function(self, spec: dict, field: str) -> CylFunction:
        with _Field(f"{field}.expr"):
            expr = expr_from_json(spec["expr"], self.group)
        if "paths" in spec:
            with _Field(f"{field}.paths"):
                paths = [parse_letters(p) for p in spec["paths"]]
                return rewrite_over_paths(expr, paths, self.group, self.alphabet)
        L = self.subgroupoid(spec.get("subgroupoid"), f"{field}.subgroupoid")
        with _Field(field):
            return CylFunction(L, expr, self.group)

    def targets(self) -> list:
        names = self.data.get("targets", list(self.functions))
        for n in names:
            if n not in self.functions:
                raise ScenarioError("targets", f"unknown function {n!r}")
        return names

    def measure(self):
        spec = self.data.get("measure", {"kind": "uniform"})
        kind = spec.get("kind")
        if kind == "uniform":
            return UNIFORM
        if kind != "family":
            raise ScenarioError("measure.kind", f"unknown measure kind {kind!r}")
        tables = {}
        for name, t in spec.get("tables", {}).items():
            L = self.subgroupoid(name, f"measure.tables.{name}")
            with _Field(f"measure.tables.{name}"):
                arr = np.zeros((self.group.order,) * len(L))
                for key, mass in t["entries"]:
                    arr[tuple(key)] = float(mass)
                tables[L] = arr
        with _Field("measure"):
            return FiniteFamily(self.group, tables)


def _apply_overrides(method, seed, samples, workers):
    if seed is None and samples is None and workers is None:
        return method
    base = method if isinstance(method, MonteCarlo) else None
    if base is None and samples is None:
        raise ScenarioError("method", "--seed/--workers need a Monte Carlo method or --samples")
    base = base or MonteCarlo(samples)
    return MonteCarlo(
        samples if samples is not None else base.samples,
        seed if seed is not None else base.seed,
        workers if workers is not None else base.workers,
    )


def _cmd_integrate(sc: Scenario, method) -> tuple[bool, list]:
    m = sc.measure()
    results = []
    for name in sc.targets():
        with _Field(f"functions.{name}"):
            est = integrate(sc.functions[name], m, method)
        results.append({"function": name, "estimate": est.to_json()})
    return True, results


def _cmd_consistency(sc: Scenario, method) -> tuple[bool, list]:
    m = sc.measure()
    ok, results = True, []
    pairs = sc.data.get("pairs")
    if not pairs:
        raise ScenarioError("pairs", "consistency needs at least one [coarse, fine] pair")
    for i, pair in enumerate(pairs):
        L = sc.subgroupoid(pair[0], f"pairs[{i}][0]")
        Lp = sc.subgroupoid(pair[1], f"pairs[{i}][1]")
        with _Field(f"pairs[{i}]"):
            rep = check_consistency(m, L, Lp, sc.group, method, sc.data.get("battery"))
        ok = ok and rep.passed
        results.append(
            {
                "coarse": pair[0],
                "fine": pair[1],
                "pass": rep.passed,
                "max_discrepancy": rep.max_discrepancy,
                "method": rep.method,
                "checks": rep.checks,
            }
        )
    return ok, results


def _transformations(sc: Scenario) -> list:
    out = []
    if "gauge" in sc.data:
        with _Field("gauge"):
            vals = {v: sc.group.element_from_json(x) for v, x in sc.data["gauge"].items()}
            for v in vals:
                if v not in sc.alphabet.vertices:
                    raise ValueError(f"unknown vertex {v!r}")
            out.append(("gauge", GaugeTransformation(sc.group, vals)))
    if "automorphism" in sc.data:
        with _Field("automorphism"):
            out.append(("automorphism", GroupoidAutomorphism.from_json(sc.alphabet, sc.data["automorphism"])))
    if not out:
        raise ScenarioError("gauge", "invariance needs a 'gauge' or 'automorphism' entry")
    return out


def _cmd_invariance(sc: Scenario, method) -> tuple[bool, list]:
    ok, results = True, []
    for kind, T in _transformations(sc):
        for name in sc.targets():
            with _Field(f"functions.{name}"):
                rep = invariance_report(sc.functions[name], T, method)
            ok = ok and rep.passed
            results.append({"function": name, "transformation": kind, **rep.to_json()})
    return ok, results


def _cmd_gram(sc: Scenario, method) -> tuple[bool, list]:
    specs = sc.data.get("spin_networks")
    if specs is None and "spin_network" in sc.data:
        specs = [sc.data["spin_network"]]
    if not specs:
        raise ScenarioError("spin_networks", "gram needs spin network entries")
    funcs = []
    for i, spec in enumerate(specs):
        field = f"spin_networks[{i}]"
        L = sc.subgroupoid(spec.get("edges"), f"{field}.edges")
        with _Field(f"{field}.labels"):
            funcs.append(make_spin_network(L, spec["labels"], sc.group))
    with _Field("spin_networks"):
        gram = gram_matrix(funcs, method)
    ok = True
    keys = [(f.label.canonical_key(), f.labels) for f in funcs]
    for i, row in enumerate(gram):
        for j, est in enumerate(row):
            want = 1.0 if keys[i] == keys[j] else 0.0
            if est.method == "exact":
                ok = ok and abs(est.mean - want) <= 1e-12
            else:
                ok = ok and est.within(want, SIGMAS)
    return ok, [{"row": i, "entries": [e.to_json() for e in row]} for i, row in enumerate(gram)]


def _cmd_reconstruct(sc: Scenario, method) -> tuple[bool, list]:
    charts = {}
    for name, values in sc.data.get("charts", {}).items():
        L = sc.subgroupoid(name, f"charts.{name}")
        with _Field(f"charts.{name}"):
            vals = tuple(sc.group.element_from_json(v) for v in values)
            charts[L] = Chart(L, vals, sc.group)
    with _Field("charts"):
        res = reconstruct_from_family(charts)
    if isinstance(res, Inconsistent):
        return False, [
            {
                "consistent": False,
                "coarse": sc.name_of(res.coarse),
                "fine": sc.name_of(res.fine),
                "discrepancy": res.discrepancy,
            }
        ]
    return True, [{"consistent": True, "connection": res.to_json()}]


HANDLERS = {
    "integrate": _cmd_integrate,
    "consistency": _cmd_consistency,
    "invariance": _cmd_invariance,
    "gram": _cmd_gram,
    "reconstruct": _cmd_reconstruct,
}


def _method_json(method) -> dict:
    if isinstance(method, MonteCarlo):
        return {"kind": "mc", "samples": method.samples, "seed": method.seed, "workers": method.workers}
    return {"kind": "exact"}


def build_report(sc: Scenario, method) -> tuple[bool, dict]:
    t0 = time.perf_counter()
    ok, results = HANDLERS[sc.command](sc, method)
    is_mc = isinstance(method, MonteCarlo)
    report = {
        "schema": SCHEMA,
        "command": sc.command,
        "group": sc.group.to_json(),
        "method": _method_json(method),
        "seed": method.seed if is_mc else None,
        "workers": method.workers if is_mc else None,
        "pass": ok,
        "results": results,
        "wall_time": time.perf_counter() - t0,
    }
    return ok, report


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(scenario_path, seed=None, samples=None, workers=None, out=None) -> tuple[int, dict | None]:
    try:
        with open(scenario_path) as fh:
            data = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return 2, None
    except json.JSONDecodeError as exc:
        print(f"error: scenario is not valid JSON: {exc}", file=sys.stderr)
        return 2, None
    try:
        sc = Scenario(data)
        with _Field("method"):
            method = _apply_overrides(sc.method, seed, samples, workers)
        ok, report = build_report(sc, method)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    text = json.dumps(report, indent=2) + "\n"
    target = out or sc.output
    if target:
        write_atomic(Path(target), text)
    else:
        sys.stdout.write(text)
    if not ok:
        print("check failed: " + _failure_summary(report), file=sys.stderr)
    return (0 if ok else 1), report


def _failure_summary(report: dict) -> str:
    for r in report["results"]:
        if r.get("pass") is False:
            if "coarse" in r:
                return f"pair ({r['coarse']}, {r['fine']}) max_discrepancy={r['max_discrepancy']:g}"
            return f"function {r.get('function')} under {r.get('transformation')} discrepancy={r['discrepancy']:g}"
        if r.get("consistent") is False:
            return f"inconsistent pair ({r['coarse']}, {r['fine']}) discrepancy={r['discrepancy']:g}"
    return report["command"]


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="genconn", description=__doc__.splitlines()[0])
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=int, help="override Monte Carlo seed (u64)")
    p.add_argument("--samples", type=int, help="override Monte Carlo sample count")
    p.add_argument("--workers", type=int, help="override Monte Carlo worker count")
    p.add_argument("--out", help="report path (default: scenario 'output' or stdout)")
    args = p.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        p.error("--seed must be an unsigned 64-bit integer")
    code, _ = run(args.scenario, args.seed, args.samples, args.workers, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
