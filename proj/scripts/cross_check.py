#!/usr/bin/env python3
"""Cross-checks the built-in exact solver against an external MILP solver.

Generates tiny instances with the tars CLI, exports each model as an LP
file, solves the LP with scipy's HiGHS-backed MILP solver, and compares
objectives against `tars solve` to 1e-6.

Usage: scripts/cross_check.py [--tars build/tools/tars] [--seeds 5]
"""

import argparse
import re
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy.optimize import LinearConstraint, milp


def parse_lp(path):
    """Parses the subset of LP format written by `tars export-lp`."""
    sections = {"Minimize": [], "Subject To": [], "Binary": []}
    current = None
    for raw in Path(path).read_text().splitlines():
        line = raw.rstrip()
        if line.startswith("\\"):
            continue
        stripped = line.strip()
        if stripped in ("Minimize", "Subject To", "Binary", "End"):
            current = stripped if stripped != "End" else None
            continue
        if current:
            sections[current].append(line)

    variables = [v.strip() for v in sections["Binary"] if v.strip()]
    var_index = {v: i for i, v in enumerate(variables)}

    def parse_expr(tokens):
        coeffs = {}
        sign = 1.0
        pending = None
        for tok in tokens:
            if tok == "+":
                sign = 1.0
            elif tok == "-":
                sign = -1.0
            elif re.fullmatch(r"[-+]?[0-9.eE+-]+", tok) and not tok in var_index:
                pending = float(tok)
            else:
                coeffs[var_index[tok]] = coeffs.get(var_index[tok], 0.0) + sign * (
                    1.0 if pending is None else pending
                )
                sign, pending = 1.0, None
        return coeffs

    obj_tokens = " ".join(sections["Minimize"]).split()
    assert obj_tokens[0] == "obj:", obj_tokens[:3]
    c = np.zeros(len(variables))
    for idx, v in parse_expr(obj_tokens[1:]).items():
        c[idx] = v

    rows = []
    row_tokens = []
    for line in sections["Subject To"]:
        toks = line.split()
        if toks and toks[0].endswith(":"):
            if row_tokens:
                rows.append(row_tokens)
            row_tokens = toks[1:]
        else:
            row_tokens += toks
    if row_tokens:
        rows.append(row_tokens)

    a_rows, lbs, ubs = [], [], []
    for toks in rows:
        sense = "<=" if "<=" in toks else "="
        pos = toks.index(sense)
        rhs = float(toks[pos + 1])
        coeffs = parse_expr(toks[:pos])
        row = np.zeros(len(variables))
        for idx, v in coeffs.items():
            row[idx] = v
        a_rows.append(row)
        lbs.append(rhs if sense == "=" else -np.inf)
        ubs.append(rhs)
    return c, np.array(a_rows), np.array(lbs), np.array(ubs)


def solve_lp_file(path):
    c, a, lb, ub = parse_lp(path)
    res = milp(
        c,
        constraints=LinearConstraint(a, lb, ub),
        integrality=np.ones_like(c),
        bounds=(0, 1),
    )
    if not res.success:
        raise RuntimeError(f"external solver failed on {path}: {res.message}")
    return res.fun


def run(cmd):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(map(str, cmd))} failed:\n{proc.stderr}")
    return proc.stdout


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tars", default="build/tools/tars")
    ap.add_argument("--topology", default="data/triangle.txt")
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for seed in range(1, args.seeds + 1):
            inst = tmp / f"inst{seed}.txt"
            run([args.tars, "gen", "--topology", args.topology, "--seed", str(seed),
                 "--flows-per-pair", "1", "-o", str(inst)])
            for scenario in ("best_effort", "qos"):
                lp = tmp / f"model{seed}_{scenario}.lp"
                sol = tmp / f"sol{seed}_{scenario}.txt"
                run([args.tars, "export-lp", "--instance", str(inst),
                     "--scenario", scenario, "-o", str(lp)])
                run([args.tars, "solve", "--instance", str(inst),
                     "--scenario", scenario, "-o", str(sol)])
                internal = None
                for line in sol.read_text().splitlines():
                    if line.startswith("objective "):
                        internal = float(line.split()[1])
                if internal is None:
                    raise RuntimeError(f"no objective in {sol}")
                external = solve_lp_file(lp)
                ok = abs(internal - external) <= 1e-6 * max(1.0, abs(external))
                print(f"seed {seed} {scenario:11s}: tars {internal:.9g}  "
                      f"external {external:.9g}  {'OK' if ok else 'MISMATCH'}")
                failures += not ok
    print("cross-check:", "all matched" if failures == 0 else f"{failures} mismatches")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
