#!/usr/bin/env python3
"""Command-line MILP solver speaking the LP-file contract used by rep2h.

Reads a model in LP text format (the CPLEX-style subset: Maximize/Minimize,
Subject To, Bounds, Binary, General, End), solves it with scipy.optimize.milp
(HiGHS branch-and-cut), and writes a HiGHS-style plain-text solution file:

    Model status
    Optimal

    # Primal solution values
    Feasible
    Objective <value>
    # Columns <n>
    <name> <value>
    ...

Usage:
    lp_solve_scipy.py MODEL.lp --solution_file OUT.sol [--mip-gap G] [--time-limit S]

This makes any machine with scipy a drop-in stand-in for a native `highs`
binary from the point of view of the rep2h external-solver bridge.
"""

import argparse
import re
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

SECTION_WORDS = {
    "maximize": ("objective", +1),
    "maximise": ("objective", +1),
    "max": ("objective", +1),
    "minimize": ("objective", -1),
    "minimise": ("objective", -1),
    "min": ("objective", -1),
    "subject to": ("rows", 0),
    "st": ("rows", 0),
    "s.t.": ("rows", 0),
    "such that": ("rows", 0),
    "bounds": ("bounds", 0),
    "binary": ("binary", 0),
    "binaries": ("binary", 0),
    "bin": ("binary", 0),
    "general": ("general", 0),
    "generals": ("general", 0),
    "integer": ("general", 0),
    "integers": ("general", 0),
    "end": ("end", 0),
}

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class LpModel:
    def __init__(self):
        self.maximize = False
        self.obj = {}
        self.obj_offset = 0.0
        self.rows = []  # (name, {var: coef}, sense, rhs)
        self.bounds = {}  # var -> [lo, hi]
        self.binary = set()
        self.general = set()
        self.order = []
        self.seen = set()

    def note(self, name):
        if name not in self.seen:
            self.seen.add(name)
            self.order.append(name)


def parse_number(tok):
    t = tok.strip().lower()
    if t in ("inf", "+inf", "infinity", "1e30"):
        return float("inf")
    if t in ("-inf", "-infinity", "-1e30"):
        return float("-inf")
    return float(tok)


def parse_terms(text, model):
    """Parse `2 x - 3e-1 y + z + 4` -> ({x: 2, y: -0.3, z: 1}, 4.0)."""
    terms = {}
    constant = 0.0
    toks = text.split()
    i = 0
    sign = 1.0
    while i < len(toks):
        tok = toks[i]
        if tok == "+":
            sign = 1.0
            i += 1
            continue
        if tok == "-":
            sign = -1.0
            i += 1
            continue
        tok_sign = 1.0
        if tok.startswith("-"):
            tok_sign, tok = -1.0, tok[1:]
        elif tok.startswith("+"):
            tok = tok[1:]
        total = sign * tok_sign
        try:
            num = float(tok)
            is_num = True
        except ValueError:
            is_num = False
        if is_num:
            if i + 1 < len(toks) and NAME_RE.match(toks[i + 1]):
                name = toks[i + 1]
                model.note(name)
                terms[name] = terms.get(name, 0.0) + total * num
                i += 2
            else:
                constant += total * num
                i += 1
        elif NAME_RE.match(tok):
            model.note(tok)
            terms[tok] = terms.get(tok, 0.0) + total
            i += 1
        else:
            raise ValueError(f"unrecognized token {tok!r} in {text!r}")
        sign = 1.0
    return terms, constant


def split_sense(text):
    for pat, sense in (("<=", "<="), (">=", ">="), ("=<", "<="), ("=>", ">=")):
        idx = text.find(pat)
        if idx >= 0:
            return text[:idx], sense, text[idx + len(pat):]
    idx = text.find("=")
    if idx >= 0:
        return text[:idx], "=", text[idx + 1:]
    return None


def parse_lp(path):
    model = LpModel()
    section = None
    pending = ""
    with open(path) as fh:
        for raw in fh:
            line = raw.split("\\")[0].strip()
            if not line:
                continue
            word = line.lower()
            if word in SECTION_WORDS:
                kind, sgn = SECTION_WORDS[word]
                if kind == "objective":
                    model.maximize = sgn > 0
                section = kind
                continue
            if section == "objective":
                body = line.split(":", 1)[1] if ":" in line else line
                terms, const = parse_terms(body, model)
                for k, v in terms.items():
                    model.obj[k] = model.obj.get(k, 0.0) + v
                model.obj_offset += const
            elif section == "rows":
                pending += " " + line
                parts = split_sense(pending)
                if parts is None:
                    continue
                lhs, sense, rhs_text = parts
                if ":" in lhs:
                    name, body = lhs.split(":", 1)
                    name = name.strip()
                else:
                    name, body = f"row{len(model.rows)}", lhs
                terms, const = parse_terms(body, model)
                rhs = parse_number(rhs_text) - const
                model.rows.append((name, terms, sense, rhs))
                pending = ""
            elif section == "bounds":
                toks = line.split()
                if len(toks) == 2 and toks[1].lower() == "free":
                    model.note(toks[0])
                    model.bounds[toks[0]] = [float("-inf"), float("inf")]
                elif len(toks) == 5 and toks[1] in ("<=", "<") and toks[3] in ("<=", "<"):
                    model.note(toks[2])
                    model.bounds[toks[2]] = [parse_number(toks[0]), parse_number(toks[4])]
                elif len(toks) == 3 and toks[1] in (">=", ">"):
                    model.note(toks[0])
                    model.bounds[toks[0]] = [parse_number(toks[2]), float("inf")]
                elif len(toks) == 3 and toks[1] in ("<=", "<"):
                    model.note(toks[0])
                    model.bounds[toks[0]] = [float("-inf"), parse_number(toks[2])]
                elif len(toks) == 3 and toks[1] == "=":
                    model.note(toks[0])
                    v = parse_number(toks[2])
                    model.bounds[toks[0]] = [v, v]
                else:
                    raise ValueError(f"unrecognized bounds line: {line!r}")
            elif section == "binary":
                for name in line.split():
                    model.note(name)
                    model.binary.add(name)
            elif section == "general":
                for name in line.split():
                    model.note(name)
                    model.general.add(name)
            elif section == "end":
                pass
            else:
                raise ValueError(f"content outside any section: {line!r}")
    if pending.strip():
        raise ValueError(f"unterminated row: {pending!r}")
    return model


STATUS_WORDS = {
    0: "Optimal",
    1: "Iteration or time limit reached",
    2: "Infeasible",
    3: "Unbounded",
    4: "Numerical difficulties",
}


def solve(model, mip_gap, time_limit):
    names = model.order
    idx = {n: i for i, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for name, coef in model.obj.items():
        c[idx[name]] = coef
    sign = -1.0 if model.maximize else 1.0
    c_solver = sign * c

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for i, name in enumerate(names):
        if name in model.binary:
            lo[i], hi[i] = 0.0, 1.0
        if name in model.bounds:
            lo[i], hi[i] = model.bounds[name]
    integrality = np.zeros(n)
    for name in model.binary | model.general:
        integrality[idx[name]] = 1

    constraints = []
    if model.rows:
        data, ri, ci, lbs, ubs = [], [], [], [], []
        for k, (_, terms, sense, rhs) in enumerate(model.rows):
            for name, coef in terms.items():
                data.append(coef)
                ri.append(k)
                ci.append(idx[name])
            if sense == "<=":
                lbs.append(-np.inf)
                ubs.append(rhs)
            elif sense == ">=":
                lbs.append(rhs)
                ubs.append(np.inf)
            else:
                lbs.append(rhs)
                ubs.append(rhs)
        a = sparse.csr_matrix((data, (ri, ci)), shape=(len(model.rows), n))
        constraints = [LinearConstraint(a, lbs, ubs)]

    options = {"presolve": True}
    if mip_gap is not None:
        options["mip_rel_gap"] = mip_gap
    if time_limit is not None:
        options["time_limit"] = time_limit
    res = milp(
        c=c_solver,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lo, hi),
        options=options,
    )
    return names, c, res


def write_solution(path, model, names, c, res):
    lines = ["Model status", STATUS_WORDS.get(res.status, "Unknown"), ""]
    if res.x is not None:
        obj = float(c @ res.x) + model.obj_offset
        lines += ["# Primal solution values", "Feasible", f"Objective {obj:.17g}"]
        lines.append(f"# Columns {len(names)}")
        for name, v in zip(names, res.x):
            lines.append(f"{name} {float(v):.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("model")
    ap.add_argument("--solution_file", required=True)
    ap.add_argument("--mip-gap", type=float, default=1e-9)
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args()

    model = parse_lp(args.model)
    names, c, res = solve(model, args.mip_gap, args.time_limit)
    write_solution(args.solution_file, model, names, c, res)
    return 0


if __name__ == "__main__":
    sys.exit(main())
