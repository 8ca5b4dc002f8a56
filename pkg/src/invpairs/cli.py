"""Command line entry points, problem-file I/O and the benchmark harness.

Problem files are UTF-8 JSON with explicit [re, im] pairs::

    {
      "name": "ss_2x2",
      "n": 2,
      "degree": 2,
      "coeffs": [ [[[1,0],[0,0]],[[0,0],[0,0]]], ... ]   # A_0..A_ell, row-major
    }

Exit codes: 0 success, 1 usage error (bad flags or malformed files),
2 numerical failure, 3 verification mismatch.  JSON output is byte-identical
for identical argv, seed and fixtures; wall-clock times therefore appear
only in CSV and human-readable output, never in JSON.
"""

import importlib.resources
import json
import math
import sys

import click
import numpy as np

from . import problems
from .conditioning import pair_backward_error, pair_condition_number
from .contour import (
    Contour,
    EigenvalueOnContourError,
    block_moments,
    count_eigenvalues_inside,
    default_probe_vectors,
    scalar_moments,
)
from .hankel import (
    HankelRankError,
    build_hankel,
    companion_from_pencil,
    extract_block_invariant_pair,
    extract_invariant_pair,
    numerical_rank,
    pencil_eigenvalues,
)
from ._numeric import cluster_eigenvalues
from .matpoly import (
    MatrixPolynomial,
    SingularLeadingCoefficientError,
    companion_linearization,
    eval_pair,
)
from .refine import refine_pair
from .solvents import (
    enumerate_solvents,
    solvent_from_pair,
    triangular_solvent_solve,
    verify_solvent,
)

__all__ = [
    "ProblemFormatError",
    "VerificationMismatch",
    "parse_problem",
    "serialize_problem",
    "run_command",
    "main",
]


class ProblemFormatError(ValueError):
    """A problem or probe file does not match the documented format."""


class VerificationMismatch(RuntimeError):
    """A golden-corpus check failed beyond its stated tolerance."""


# failures of the numerics (as opposed to failures to parse the request);
# ProblemFormatError and VerificationMismatch are handled before these
_NUMERICAL_ERRORS = (
    SingularLeadingCoefficientError,
    HankelRankError,
    EigenvalueOnContourError,
    np.linalg.LinAlgError,
    RuntimeError,
    ValueError,
)


# ---------------------------------------------------------------------------
# problem files


def _pair_to_complex(value, where):
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(x, (int, float)) and math.isfinite(x) for x in value)
    ):
        raise ProblemFormatError(f"{where}: expected a finite [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def _parse_matrix(rows, n, where):
    if not isinstance(rows, list) or len(rows) != n:
        raise ProblemFormatError(f"{where}: expected {n} rows")
    out = np.empty((n, n), dtype=complex)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ProblemFormatError(f"{where}, row {r}: expected {n} entries")
        for c, entry in enumerate(row):
            out[r, c] = _pair_to_complex(entry, f"{where}, row {r}, column {c}")
    return out


def parse_problem(path):
    """Load a MatrixPolynomial from a JSON problem file.

    Malformed files raise ProblemFormatError naming the offending
    coefficient, row and column.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{path}: top level must be an object")
    for key in ("n", "degree", "coeffs"):
        if key not in doc:
            raise ProblemFormatError(f"{path}: missing field '{key}'")
    n, degree = doc["n"], doc["degree"]
    if not isinstance(n, int) or n < 1 or not isinstance(degree, int) or degree < 1:
        raise ProblemFormatError(f"{path}: n and degree must be positive integers")
    coeffs = doc["coeffs"]
    if not isinstance(coeffs, list) or len(coeffs) != degree + 1:
        raise ProblemFormatError(
            f"{path}: expected {degree + 1} coefficient matrices A_0..A_{degree}, "
            f"got {len(coeffs) if isinstance(coeffs, list) else type(coeffs).__name__}"
        )
    mats = [_parse_matrix(mat, n, f"{path}: coefficient {j}") for j, mat in enumerate(coeffs)]
    try:
        return MatrixPolynomial(mats)
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc


def _complex_pairs(matrix):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix, dtype=complex)]


def serialize_problem(P, name=None, description=None):
    """JSON text for a problem file; parse_problem round-trips it bit for bit."""
    doc = {}
    if name is not None:
        doc["name"] = name
    if description is not None:
        doc["description"] = description
    doc.update({
        "n": P.n,
        "degree": P.degree,
        "coeffs": [_complex_pairs(A) for A in P.coeffs],
    })
    return json.dumps(doc, indent=2) + "\n"


def _load_probes(path, n):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    out = {}
    for key in ("u", "v"):
        if key in doc:
            vec = doc[key]
            if not isinstance(vec, list) or len(vec) != n:
                raise ProblemFormatError(f"{path}: '{key}' must hold {n} [re, im] pairs")
            out[key] = np.array([_pair_to_complex(e, f"{path}: {key}[{i}]") for i, e in enumerate(vec)])
    for key in ("U", "V"):
        if key in doc:
            rows = doc[key]
            if not isinstance(rows, list) or len(rows) != n:
                raise ProblemFormatError(f"{path}: '{key}' must hold {n} rows")
            mat = []
            for r, row in enumerate(rows):
                mat.append([_pair_to_complex(e, f"{path}: {key}[{r}][{c}]") for c, e in enumerate(row)])
            out[key] = np.array(mat)
    return out


# ---------------------------------------------------------------------------
# output formatting


def _fmt_complex(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _json_value(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _complex_pairs(obj) if obj.ndim == 2 else [[float(z.real), float(z.imag)] for z in obj]
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _json_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_value(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _emit(data, csv_rows, fmt, out):
    """Write either the JSON document or the CSV rows (header first)."""
    if fmt == "json":
        text = json.dumps(_json_value(data), indent=2) + "\n"
    else:
        text = "\n".join(",".join(str(c) for c in row) for row in csv_rows) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


class _ComplexParam(click.ParamType):
    """Accepts '0.75' or 're,im' like '1,-0.5'."""

    name = "complex"

    def convert(self, value, param, ctx):
        if isinstance(value, complex):
            return value
        parts = str(value).split(",")
        try:
            if len(parts) == 1:
                return complex(float(parts[0]), 0.0)
            if len(parts) == 2:
                return complex(float(parts[0]), float(parts[1]))
        except ValueError:
            pass
        self.fail(f"{value!r} is not a complex number (use re or re,im)", param, ctx)


COMPLEX = _ComplexParam()


def _contour_options(fn):
    fn = click.option("--center", type=COMPLEX, default="0,0", show_default=True,
                      help="Contour center as re or re,im.")(fn)
    fn = click.option("--radius", type=float, default=1.0, show_default=True,
                      help="Contour radius.")(fn)
    fn = click.option("--nodes", type=int, default=64, show_default=True,
                      help="Quadrature node count N.")(fn)
    return fn


def _output_options(fn):
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Write output to a file instead of stdout.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                      show_default=True, help="Output format.")(fn)
    return fn


def _scalar_probes(P, probe_file, seed):
    if probe_file:
        probes = _load_probes(probe_file, P.n)
        if "u" in probes and "v" in probes:
            return probes["u"], probes["v"]
        raise ProblemFormatError(f"{probe_file}: scalar probes need fields 'u' and 'v'")
    return default_probe_vectors(P.n, seed)


def _block_probes(P, xi, probe_file, seed):
    if probe_file:
        probes = _load_probes(probe_file, P.n)
        if "U" in probes and "V" in probes:
            return probes["U"], probes["V"]
        raise ProblemFormatError(f"{probe_file}: block probes need fields 'U' and 'V'")
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((P.n, xi)) + 1j * rng.standard_normal((P.n, xi))
    V = rng.standard_normal((P.n, xi)) + 1j * rng.standard_normal((P.n, xi))
    return U, V


# ---------------------------------------------------------------------------
# commands


@click.group()
def cli():
    """Invariant pairs and solvents of matrix polynomials via contour moments."""


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@_output_options
def count(problem, center, radius, nodes, out, fmt):
    """Count the eigenvalues enclosed by the contour."""
    P = parse_problem(problem)
    result = count_eigenvalues_inside(P, Contour(center, radius, nodes))
    data = {"count": result.count, "quality": result.quality}
    rows = [["count", "quality"], [result.count, repr(float(result.quality))]]
    _emit(data, rows, fmt, out)


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@click.option("--count", "nmoments", type=int, default=8, show_default=True, help="Moments to compute.")
@click.option("--probe-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@_output_options
def moments(problem, center, radius, nodes, nmoments, probe_file, seed, out, fmt):
    """Scalar moments mu_0..mu_{K-1} of u^H P(z)^{-1} v."""
    P = parse_problem(problem)
    u, v = _scalar_probes(P, probe_file, seed)
    moms = scalar_moments(P, Contour(center, radius, nodes), u, v, count=nmoments, seed=seed)
    data = {"moments": list(moms.mu)}
    rows = [["k", "mu"]] + [[k, _fmt_complex(m)] for k, m in enumerate(moms.mu)]
    _emit(data, rows, fmt, out)


def _pair_output(P, pair, fmt, out):
    res = float(np.linalg.norm(eval_pair(P, pair), "fro") / np.linalg.norm(pair.X, "fro"))
    data = {"X": pair.X, "S": pair.S, "relative_residual": res}
    rows = [["matrix", "row", "entries"]]
    for name, mat in (("X", pair.X), ("S", pair.S)):
        for r in range(mat.shape[0]):
            rows.append([name, r] + [_fmt_complex(z) for z in mat[r]])
    rows.append(["relative_residual", "", repr(res)])
    _emit(data, rows, fmt, out)


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@click.option("--m", "size", type=int, default=None, help="Pair size (default: eigenvalue count).")
@click.option("--probe-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@_output_options
def pair(problem, center, radius, nodes, size, probe_file, seed, out, fmt):
    """Extract an invariant pair from scalar moments."""
    P = parse_problem(problem)
    u, v = _scalar_probes(P, probe_file, seed)
    result = extract_invariant_pair(P, Contour(center, radius, nodes), u, v, m=size, seed=seed)
    _pair_output(P, result, fmt, out)


@cli.command("block-pair")
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@click.option("--m", "size", type=int, default=None, help="Pair size (default: eigenvalue count).")
@click.option("--xi", type=int, default=2, show_default=True, help="Probe block width.")
@click.option("--probe-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@_output_options
def block_pair(problem, center, radius, nodes, size, xi, probe_file, seed, out, fmt):
    """Extract an invariant pair from block moments."""
    P = parse_problem(problem)
    U, V = _block_probes(P, xi, probe_file, seed)
    result = extract_block_invariant_pair(P, Contour(center, radius, nodes), U, V, m=size, seed=seed)
    _pair_output(P, result, fmt, out)


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@click.option("--m", "size", type=int, default=None)
@click.option("--probe-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--perturb", type=float, default=0.0, show_default=True,
              help="Seeded relative noise injected before refining.")
@click.option("--tol", type=float, default=1e-12, show_default=True)
@click.option("--maxit", type=int, default=500, show_default=True)
@click.option("--no-line-search", is_flag=True, default=False, help="Plain Newton steps (t = 1).")
@_output_options
def refine(problem, center, radius, nodes, size, probe_file, seed, perturb, tol, maxit,
           no_line_search, out, fmt):
    """Extract a pair, optionally perturb it, and refine it by Newton."""
    P = parse_problem(problem)
    u, v = _scalar_probes(P, probe_file, seed)
    start = extract_invariant_pair(P, Contour(center, radius, nodes), u, v, m=size, seed=seed)
    X, S = np.array(start.X), np.array(start.S)
    if perturb:
        rng = np.random.default_rng(seed)
        X += perturb * np.linalg.norm(X) * _unit_noise(rng, X.shape)
        S += perturb * np.linalg.norm(S) * _unit_noise(rng, S.shape)
    refined, report = refine_pair(P, X, S, tol=tol, maxit=maxit, line_search=not no_line_search)
    data = {
        "iterations": report.iterations,
        "converged": report.converged,
        "residual_history": list(report.residual_history),
        "step_lengths": list(report.step_lengths),
        "final_residual": report.residual_history[-1],
    }
    rows = [["iteration", "relative_residual", "step_length"]]
    for i, res in enumerate(report.residual_history):
        step = repr(float(report.step_lengths[i - 1])) if i else ""
        rows.append([i, repr(float(res)), step])
    _emit(data, rows, fmt, out)


def _unit_noise(rng, shape):
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return noise / np.linalg.norm(noise)


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@click.option("--m", "size", type=int, default=None)
@click.option("--probe-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@_output_options
def cond(problem, center, radius, nodes, size, probe_file, seed, out, fmt):
    """Condition number of the extracted invariant pair."""
    P = parse_problem(problem)
    u, v = _scalar_probes(P, probe_file, seed)
    result = extract_invariant_pair(P, Contour(center, radius, nodes), u, v, m=size, seed=seed)
    kappa = pair_condition_number(P, result.X, result.S)
    _emit({"kappa": kappa}, [["kappa"], [repr(kappa)]], fmt, out)


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@click.option("--m", "size", type=int, default=None)
@click.option("--probe-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@_output_options
def berr(problem, center, radius, nodes, size, probe_file, seed, out, fmt):
    """Backward error (lower bound, eta, upper bound) of the extracted pair."""
    P = parse_problem(problem)
    u, v = _scalar_probes(P, probe_file, seed)
    result = extract_invariant_pair(P, Contour(center, radius, nodes), u, v, m=size, seed=seed)
    rep = pair_backward_error(P, result.X, result.S)
    data = {"lower": rep.lower, "eta": rep.eta, "upper": rep.upper}
    rows = [["lower", "eta", "upper"],
            [repr(rep.lower), "" if rep.eta is None else repr(rep.eta), repr(rep.upper)]]
    _emit(data, rows, fmt, out)


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_contour_options
@click.option("--probe-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@_output_options
def solvent(problem, center, radius, nodes, probe_file, seed, tol, out, fmt):
    """Solvent from an n-by-n invariant pair enclosed by the contour."""
    P = parse_problem(problem)
    u, v = _scalar_probes(P, probe_file, seed)
    result = extract_invariant_pair(P, Contour(center, radius, nodes), u, v, m=P.n, seed=seed)
    sol = solvent_from_pair(P, result)
    check = verify_solvent(P, sol.S, tol=tol)
    data = {
        "S": sol.S,
        "residual": sol.residual,
        "relative_residual": check.residual,
        "eigenpair_residuals": list(check.eigenpair_residuals),
        "certified": check.certified,
    }
    rows = [["row", "entries"]]
    for r in range(sol.S.shape[0]):
        rows.append([r] + [_fmt_complex(z) for z in sol.S[r]])
    rows.append(["residual", repr(sol.residual)])
    rows.append(["certified", check.certified])
    _emit(data, rows, fmt, out)


@cli.command("enumerate")
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_output_options
def enumerate_cmd(problem, out, fmt):
    """All solvents from n-subsets of the companion-linearization eigenpairs."""
    P = parse_problem(problem)
    comp = companion_linearization(P)
    vals, vecs = np.linalg.eig(comp)
    order = np.lexsort((vals.imag, vals.real))
    eigpairs = [(vals[i], vecs[: P.n, i]) for i in order]
    solvents, rejected = enumerate_solvents(P, eigpairs)
    data = {
        "eigenvalues": [vals[i] for i in order],
        "solvents": [{"S": s.S, "residual": s.residual} for s in solvents],
        "rejected_subsets": [list(r) for r in rejected],
    }
    rows = [["solvent", "row", "entries"]]
    for i, s in enumerate(solvents):
        for r in range(s.S.shape[0]):
            rows.append([i, r] + [_fmt_complex(z) for z in s.S[r]])
    for r in rejected:
        rows.append(["rejected", "", " ".join(str(i) for i in r)])
    _emit(data, rows, fmt, out)


@cli.command()
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@_output_options
def triangular(problem, out, fmt):
    """Solvent families of an upper triangular matrix polynomial."""
    P = parse_problem(problem)
    families = triangular_solvent_solve(P)
    data = {"families": []}
    rows = [["branch", "kind", "diagonal", "matrix", "row", "entries"]]
    for b, fam in enumerate(families):
        entry = {"kind": fam.kind, "diagonal": list(fam.diagonal)}
        if fam.base is not None:
            entry["base"] = fam.base
            entry["directions"] = list(fam.directions)
        data["families"].append(entry)
        diag_txt = " ".join(_fmt_complex(d) for d in fam.diagonal)
        if fam.base is None:
            rows.append([b, fam.kind, diag_txt, "", "", ""])
            continue
        for r in range(fam.base.shape[0]):
            rows.append([b, fam.kind, diag_txt, "base", r] + [_fmt_complex(z) for z in fam.base[r]])
        for d, D in enumerate(fam.directions):
            for r in range(D.shape[0]):
                rows.append([b, fam.kind, diag_txt, f"direction{d}", r] + [_fmt_complex(z) for z in D[r]])
    _emit(data, rows, fmt, out)


# ---------------------------------------------------------------------------
# benchmark harness


def _data_path(*parts):
    return importlib.resources.files("invpairs").joinpath("data", *parts)


def _bench_corpus(seed):
    """Perturbed golden pairs: (name, polynomial, X0, S0) rows, fixed order."""
    rng = np.random.default_rng(seed)
    rows = []

    def perturbed(name, P, X, S, scale):
        X = np.array(X, dtype=complex)
        S = np.array(S, dtype=complex)
        X += scale * np.linalg.norm(X) * _unit_noise(rng, X.shape)
        S += scale * np.linalg.norm(S) * _unit_noise(rng, S.shape)
        rows.append((name, P, X, S))

    g = problems.GOLDEN_PROBES
    P4 = problems.diag_4x4()
    spec4 = g["diag_4x4"]
    pair4 = extract_invariant_pair(P4, Contour(spec4["center"], spec4["radius"]),
                                   spec4["u"], spec4["v"], m=spec4["m"])
    perturbed("diag_4x4_eps1e-3", P4, pair4.X, pair4.S, 1e-3)
    perturbed("diag_4x4_eps5e-2", P4, pair4.X, pair4.S, 5e-2)

    P2 = problems.ss_2x2()
    spec2 = g["ss_2x2"]
    pair2 = extract_invariant_pair(P2, Contour(spec2["center"], spec2["radius"]),
                                   spec2["u"], spec2["v"], m=spec2["m"])
    perturbed("ss_2x2_eps1e-3", P2, pair2.X, pair2.S, 1e-3)
    perturbed("ss_2x2_eps1e-1", P2, pair2.X, pair2.S, 1e-1)

    P3 = problems.multi_3x3()
    spec3 = g["multi_3x3"]
    pair3 = extract_block_invariant_pair(P3, Contour(spec3["center"], spec3["radius"]),
                                         np.array(spec3["U"]), np.array(spec3["V"]),
                                         m=spec3["m_block"])
    perturbed("multi_3x3_block_eps1e-4", P3, pair3.X, pair3.S, 1e-4)

    Pq = problems.quad_solvents_2x2()
    Xq = np.eye(2, dtype=complex)
    Sq = np.diag([1.0 + 0j, 2.0 + 0j])
    perturbed("quad_2x2_eps1e-2", Pq, Xq, Sq, 1e-2)
    perturbed("quad_2x2_eps2e-1", Pq, Xq, Sq, 2e-1)

    Pr = problems.residue_diag_2x2()
    pairr = extract_invariant_pair(Pr, Contour(2.0, 2.5), m=3, seed=seed)
    perturbed("residue_diag_2x2_eps1e-3", Pr, pairr.X, pairr.S, 1e-3)
    return rows


def _run_bench(seed, tol, maxit):
    records = []
    for name, P, X0, S0 in _bench_corpus(seed):
        _, plain = refine_pair(P, X0, S0, tol=tol, maxit=maxit, line_search=False)
        _, ls = refine_pair(P, X0, S0, tol=tol, maxit=maxit, line_search=True)
        records.append({
            "problem": name,
            "n": X0.shape[0],
            "k": X0.shape[1],
            "newton_iterations": plain.iterations,
            "newton_converged": plain.converged,
            "newton_final_residual": plain.residual_history[-1],
            "newton_time": plain.wall_time,
            "line_search_iterations": ls.iterations,
            "line_search_converged": ls.converged,
            "line_search_final_residual": ls.residual_history[-1],
            "line_search_time": ls.wall_time,
        })
    return records


@cli.command()
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--tol", type=float, default=1e-12, show_default=True)
@click.option("--maxit", type=int, default=500, show_default=True)
@click.option("--verify", is_flag=True, default=False,
              help="Check every bundled golden fixture against its expected output.")
@_output_options
def bench(seed, tol, maxit, verify, out, fmt):
    """Newton vs line-search comparison over the bundled perturbed corpus.

    With --verify, runs the golden-example checks instead and fails (exit 3)
    on any mismatch beyond the stated tolerances.
    """
    if verify:
        failures, lines = run_golden_checks()
        rows = [["check", "status"]] + [[desc, status] for desc, status in lines]
        data = {"checks": [{"name": d, "status": s} for d, s in lines]}
        _emit(data, rows, fmt, out)
        if failures:
            raise VerificationMismatch(f"{failures} golden check(s) failed")
        return
    records = _run_bench(seed, tol, maxit)
    header = ["problem", "n", "k", "newton_iterations", "newton_converged", "newton_time",
              "line_search_iterations", "line_search_converged", "line_search_time"]
    rows = [header]
    for rec in records:
        rows.append([rec["problem"], rec["n"], rec["k"],
                     rec["newton_iterations"], rec["newton_converged"],
                     f"{rec['newton_time']:.4f}",
                     rec["line_search_iterations"], rec["line_search_converged"],
                     f"{rec['line_search_time']:.4f}"])
    # wall times stay out of the JSON document so that identical inputs give
    # byte-identical output

    json_records = [{k: v for k, v in rec.items() if not k.endswith("_time")} for rec in records]
    _emit({"records": json_records}, rows, fmt, out)


# ---------------------------------------------------------------------------
# golden verification


def _check_allclose(actual, expected, atol, desc):
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    if actual.shape != expected.shape:
        return desc, f"FAIL shape {actual.shape} != {expected.shape}"
    err = float(np.abs(actual - expected).max()) if actual.size else 0.0
    return desc, "ok" if err <= atol else f"FAIL max error {err:.3e} > {atol:g}"

def _expected_matrix(entry):
    return np.array([[complex(re, im) for re, im in row] for row in entry])


def run_golden_checks():
    """Run all data/expected checks; returns (failure count, [(name, status)])."""
    lines = []
    expected_dir = _data_path("expected")
    for resource in sorted(p.name for p in expected_dir.iterdir() if p.name.endswith(".json")):
        doc = json.loads(expected_dir.joinpath(resource).read_text(encoding="utf-8"))
        P = problems.PROBLEMS[doc["fixture"]]()
        for check in doc["checks"]:
            lines.append(_run_single_check(P, doc["fixture"], check))
    failures = sum(1 for _, status in lines if status != "ok")
    return failures, lines


def _run_single_check(P, fixture, check):
    kind = check["kind"]
    desc = f"{fixture}:{check.get('name', kind)}"
    atol = float(check.get("atol", 1e-8))
    contour = None
    if "center" in check:
        contour = Contour(complex(*check["center"]), check["radius"], check.get("nodes", 64))
    if kind == "moments":
        moms = scalar_moments(P, contour, np.array([complex(re, im) for re, im in check["u"]]),
                              np.array([complex(re, im) for re, im in check["v"]]),
                              count=len(check["expected"]))
        return _check_allclose(moms.mu, [complex(re, im) for re, im in check["expected"]], atol, desc)
    if kind == "count":
        result = count_eigenvalues_inside(P, contour)
        ok = result.count == check["expected"] and result.quality <= atol
        return desc, "ok" if ok else f"FAIL count {result.count} quality {result.quality:.2e}"
    if kind == "companion_last_column":
        u = np.array([complex(re, im) for re, im in check["u"]])
        v = np.array([complex(re, im) for re, im in check["v"]])
        m = check["m"]
        moms = scalar_moments(P, contour, u, v, count=2 * m)
        C = companion_from_pencil(build_hankel(moms, m))
        return _check_allclose(C[:, -1], [complex(re, im) for re, im in check["expected"]], atol, desc)
    if kind == "pencil_clusters":
        u = np.array([complex(re, im) for re, im in check["u"]])
        v = np.array([complex(re, im) for re, im in check["v"]])
        m = check["m"]
        moms = scalar_moments(P, contour, u, v, count=2 * m)
        clusters = pencil_eigenvalues(build_hankel(moms, m))
        expected = [(complex(re, im), mult) for (re, im), mult in check["expected"]]
        if len(clusters) != len(expected):
            return desc, f"FAIL {len(clusters)} clusters, expected {len(expected)}"
        for (val, mult), (eval_, emult) in zip(clusters, expected):
            if mult != emult or abs(val - eval_) > atol:
                return desc, f"FAIL cluster ({val:.6g},{mult}) vs ({eval_:.6g},{emult})"
        return desc, "ok"
    if kind == "pair":
        u = np.array([complex(re, im) for re, im in check["u"]])
        v = np.array([complex(re, im) for re, im in check["v"]])
        result = extract_invariant_pair(P, contour, u, v, m=check["m"])
        dX, sX = _check_allclose(result.X, _expected_matrix(check["X"]), atol, desc + ":X")
        dS, sS = _check_allclose(result.S, _expected_matrix(check["S"]), atol, desc + ":S")
        if sX != "ok":
            return dX, sX
        if sS != "ok":
            return dS, sS
        res = float(np.linalg.norm(eval_pair(P, result), "fro") / np.linalg.norm(result.X, "fro"))
        return desc, "ok" if res <= atol else f"FAIL residual {res:.3e}"
    if kind == "hankel_rank":
        u = np.array([complex(re, im) for re, im in check["u"]])
        v = np.array([complex(re, im) for re, im in check["v"]])
        m = check["m"]
        moms = scalar_moments(P, contour, u, v, count=2 * m)
        rank = numerical_rank(build_hankel(moms, m).H0)
        return desc, "ok" if rank == check["expected"] else f"FAIL rank {rank}"
    if kind == "block_moments":
        U = _expected_matrix(check["U"])
        V = _expected_matrix(check["V"])
        bmoms = block_moments(P, contour, U, V, count=len(check["expected"]))
        for k, exp in enumerate(check["expected"]):
            d, s = _check_allclose(bmoms.moments[k], _expected_matrix(exp), atol, f"{desc}:M{k}")
            if s != "ok":
                return d, s
        return desc, "ok"
    if kind == "block_pair":
        U = _expected_matrix(check["U"])
        V = _expected_matrix(check["V"])
        result = extract_block_invariant_pair(P, contour, U, V, m=check["m"])
        if "Y" in check:
            d, s = _check_allclose(result.X, _expected_matrix(check["Y"]), atol, desc + ":Y")
            if s != "ok":
                return d, s
        if "T" in check:
            d, s = _check_allclose(result.S, _expected_matrix(check["T"]), atol, desc + ":T")
            if s != "ok":
                return d, s
        res = float(np.linalg.norm(eval_pair(P, result), "fro"))
        if res > atol:
            return desc, f"FAIL residual {res:.3e}"
        vals = np.linalg.eigvals(result.S)
        got = cluster_eigenvalues(vals, scale=max(1.0, float(np.linalg.norm(result.S, "fro"))))
        expected = [(complex(re, im), mult) for (re, im), mult in check["eig_clusters"]]
        cluster_atol = float(check.get("cluster_atol", 1e-6))
        if len(got) != len(expected) or any(
            mult != emult or abs(val - eval_) > cluster_atol
            for (val, mult), (eval_, emult) in zip(got, expected)
        ):
            return desc, f"FAIL eigenvalue clusters {got}"
        return desc, "ok"
    if kind == "solvent_set":
        comp = companion_linearization(P)
        vals, vecs = np.linalg.eig(comp)
        order = np.lexsort((vals.imag, vals.real))
        eigpairs = [(vals[i], vecs[: P.n, i]) for i in order]
        sols, rejected = enumerate_solvents(P, eigpairs)
        expected = [_expected_matrix(s) for s in check["expected"]]
        if len(sols) != len(expected):
            return desc, f"FAIL {len(sols)} solvents, expected {len(expected)}"
        used = set()
        for exp in expected:
            match = None
            for i, s in enumerate(sols):
                if i not in used and np.abs(s.S - exp).max() <= atol:
                    match = i
                    break
            if match is None:
                return desc, "FAIL a reference solvent was not produced"
            used.add(match)
        got_rejected = [list(r) for r in rejected]
        if got_rejected != check["rejected"]:
            return desc, f"FAIL rejected subsets {got_rejected}"
        return desc, "ok"
    if kind == "triangular_branches":
        families = triangular_solvent_solve(P)
        expected = check["expected"]
        if len(families) != len(expected):
            return desc, f"FAIL {len(families)} branches, expected {len(expected)}"
        for fam, exp in zip(families, expected):
            if fam.kind != exp["kind"]:
                return desc, f"FAIL branch kind {fam.kind} != {exp['kind']}"
            if np.abs(np.array(fam.diagonal) - np.array([complex(re, im) for re, im in exp["diagonal"]])).max() > atol:
                return desc, "FAIL branch diagonal"
            if fam.kind != "none":
                d, s = _check_allclose(fam.base, _expected_matrix(exp["base"]), atol, desc)
                if s != "ok":
                    return d, s
                if len(fam.directions) != len(exp.get("directions", [])):
                    return desc, f"FAIL {len(fam.directions)} directions"
                for D, expD in zip(fam.directions, exp.get("directions", [])):
                    d, s = _check_allclose(D, _expected_matrix(expD), atol, desc)
                    if s != "ok":
                        return d, s
        return desc, "ok"
    return desc, f"FAIL unknown check kind {kind!r}"


# ---------------------------------------------------------------------------
# entry point


def run_command(argv):
    """Run the CLI on an argv list; returns the process exit code."""
    try:
        cli.main(args=list(argv), standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except ProblemFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except VerificationMismatch as exc:
        click.echo(f"verification failed: {exc}", err=True)
        return 3
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2


def main():
    sys.exit(run_command(sys.argv[1:]))
