"""Command-line front end: ``twowell <command> <action> [options]``.

Results go to stdout as JSON unless ``--out`` names a file.  Exit status is
0 on success, 2 for invalid input and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as tio
from .energy import dirichlet, two_well
from .envelope import GridEnvelope, build_biconjugate
from .errors import ConfigError, DomainError, NumericError, TwoWellError
from .field import DeformationField, identity_field, perturbed_field
from .laminate import (
    affine_competitor_energy,
    build_laminate_field,
    field_energy,
    field_gradient_stats,
)
from .matcore import det2, det3, from_list, rotation, to_list
from .minimizer import (
    MinimizeProblem,
    affine_certificate,
    minimize,
    null_lagrangian_residual,
)
from .wellsgeo import (
    TwoWellParams,
    check_tree,
    hull_coordinates,
    laminate_decompose,
    membership,
    rank_one_angles,
    sample_zmin,
    so3_rank_one_scan,
    tree_to_dict,
    zmin_sweep,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _floats(text: str, n: int | None = None, name: str = "value") -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{name} must be a comma-separated list of numbers", name) from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"{name} needs {n} entries, got {len(vals)}", name)
    return vals


def _matrix(text: str, name: str = "matrix") -> np.ndarray:
    return from_list(_floats(text, 4, name))


def _params(args) -> TwoWellParams:
    try:
        return TwoWellParams(args.lam)
    except DomainError as exc:
        raise ConfigError(str(exc), "lambda") from None


def _positive(value, name: str, integer: bool = False):
    if value is None or value <= 0:
        raise ConfigError(f"{name} must be positive", name)
    return int(value) if integer else float(value)


def _emit(args, payload) -> None:
    tio.write_text(tio.dumps(payload), args.out, sys.stdout)


# --- wells / hull ----------------------------------------------------------------


def cmd_wells_connect(args):
    params = _params(args)
    q1 = _matrix(args.q1, "q1") if args.q1 else params.wells[0]
    q2 = _matrix(args.q2, "q2") if args.q2 else params.wells[1]
    try:
        conn = rank_one_angles(q1, q2)
    except DomainError as exc:
        raise ConfigError(str(exc), "q1") from None
    residuals = [abs(float(det2(rotation(t) @ q1 - q2))) for t in conn.angles]
    _emit(
        args,
        {"angles": list(conn.angles), "degenerate": conn.degenerate, "residuals": residuals},
    )


def _membership_payload(m, params):
    mem = membership(m, params)
    hc = hull_coordinates(m, params)
    return {
        "matrix": to_list(m),
        "in_K": mem.in_K,
        "in_Zmin": mem.in_Zmin,
        "in_Kc": mem.in_Kc,
        "x": hc.x.tolist(),
        "y": hc.y.tolist(),
        "det": float(det2(m)),
    }


def cmd_hull_test(args):
    params = _params(args)
    _emit(args, _membership_payload(_matrix(args.matrix), params))


def cmd_hull_sample(args):
    params = _params(args)
    m = sample_zmin(args.alpha, args.gamma, args.t, params)
    _emit(args, _membership_payload(m, params))


def cmd_hull_sweep(args):
    params = _params(args)
    n_a = _positive(args.n_alpha, "n_alpha", True)
    n_g = _positive(args.n_gamma, "n_gamma", True)
    n_t = _positive(args.n_t, "n_t", True)
    alphas = np.linspace(-np.pi, np.pi, n_a, endpoint=False)
    gammas = np.linspace(-np.pi, np.pi, n_g, endpoint=False)
    ts = np.linspace(0.0, 1.0, n_t)
    text = tio.zmin_csv(zmin_sweep(alphas, gammas, ts, params))
    tio.write_text(text, args.out, sys.stdout)


# --- envelope --------------------------------------------------------------------


def cmd_envelope_build(args):
    params = _params(args)
    if not args.file:
        raise ConfigError("envelope build needs --file for the binary output", "file")
    env = build_biconjugate(two_well(params), box=args.box, resolution=args.resolution)
    env.save(args.file)
    _emit(
        args,
        {
            "file": str(args.file),
            "box": env.box,
            "resolution": env.resolution,
            "value_at_I": float(env(np.eye(2))),
            "value_at_H": float(env(params.H)),
            "value_at_mid": float(env(params.midpoint)),
            "min_line_second_difference": env.line_second_differences(),
        },
    )


def _load_envelope(path) -> GridEnvelope:
    try:
        return GridEnvelope.load(path)
    except OSError as exc:
        raise ConfigError(f"cannot read envelope file: {exc}", "file") from None


def cmd_envelope_query(args):
    env = _load_envelope(args.file)
    m = _matrix(args.matrix)
    _emit(args, {"matrix": to_list(m), "value": float(env(m))})


def cmd_envelope_slice(args):
    env = _load_envelope(args.file)
    axes = tuple(int(v) for v in _floats(args.axes, 2, "axes"))
    fixed = _matrix(args.fixed, "fixed") if args.fixed else None
    names = tuple(f"m{1 + a // 2}{1 + a % 2}" for a in axes)
    text = tio.slice_csv(env.slice_2d(axes, fixed), names)
    tio.write_text(text, args.out, sys.stdout)


# --- laminate --------------------------------------------------------------------


def _laminate_from(matrix, freq, cutoff, layer, params, grid=None):
    r = params.midpoint if matrix is None else matrix
    freq = _positive(freq, "freq", True)
    cutoff = 1.0 / freq if cutoff is None else float(cutoff)
    if not 0.0 < cutoff < 0.5:
        raise ConfigError("cutoff must lie in (0, 1/2)", "cutoff")
    try:
        tree = laminate_decompose(r, params)
    except DomainError as exc:
        raise ConfigError(str(exc), "matrix") from None
    if grid is not None:
        grid = [_positive(v, "grid", True) for v in grid]
        if len(grid) != 2:
            raise ConfigError("grid needs two sizes", "grid")
    fld = build_laminate_field(tree, freq, cutoff, grid=grid, layer=layer)
    return tree, fld


def cmd_laminate_build(args):
    params = _params(args)
    matrix = _matrix(args.matrix) if args.matrix else None
    tree, fld = _laminate_from(matrix, args.freq, args.cutoff, args.layer, params)
    model = two_well(params)
    payload = {
        "tree": tree_to_dict(tree),
        "tree_check": check_tree(tree, params),
        "grid": [fld.nx, fld.ny],
        "diagonal": fld.diagonal,
        "energy": field_energy(fld, model),
        "affine_energy": affine_competitor_energy(tree.matrix, model),
        "stats": field_gradient_stats(fld, params).as_dict(),
    }
    if args.field:
        tio.write_text(tio.dumps(fld.to_dict()), args.field)
    if args.svg:
        tio.write_text(tio.field_svg(fld, params), args.svg)
    _emit(args, payload)


# --- minimize / certify -------------------------------------------------------------


def _load_field(path) -> DeformationField:
    try:
        return DeformationField.from_dict(tio.read_json(path))
    except (OSError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot read field file: {exc}", "field") from None


def _initial_field(init: dict, params: TwoWellParams) -> DeformationField:
    kind = init.get("kind", "perturbed_identity")
    if kind == "perturbed_identity":
        nx = _positive(init.get("nx", 16), "init.nx", True)
        ny = _positive(init.get("ny", nx), "init.ny", True)
        amp = float(init.get("amplitude", 0.05))
        if amp < 0:
            raise ConfigError("init.amplitude must be non-negative", "init.amplitude")
        return perturbed_field(identity_field(nx, ny), amp, int(init.get("seed", 0)))
    if kind == "laminate":
        matrix = from_list(init["matrix"]) if "matrix" in init else None
        _, fld = _laminate_from(
            matrix,
            init.get("freq", 32),
            init.get("cutoff"),
            init.get("layer", "flow"),
            params,
            init.get("grid"),
        )
        return fld
    if kind == "field":
        return _load_field(init["path"])
    raise ConfigError(f"unknown init kind {kind!r}", "init.kind")


def problem_from_config(cfg: dict) -> MinimizeProblem:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object", "config")
    try:
        params = TwoWellParams(cfg.get("lambda", 0.5))
    except DomainError as exc:
        raise ConfigError(str(exc), "lambda") from None
    name = cfg.get("model", "dirichlet")
    if name == "dirichlet":
        model = dirichlet()
    elif name == "two_well":
        model = two_well(params)
    else:
        raise ConfigError(f"unknown model {name!r}", "model")
    fld = _initial_field(cfg.get("init", {}), params)
    return MinimizeProblem(
        fld,
        model,
        beta0=float(cfg.get("beta0", 10.0)),
        factor=float(cfg.get("factor", 10.0)),
        stages=int(cfg.get("stages", 3)),
        max_iter=int(cfg.get("max_iter", 2000)),
        tol=float(cfg.get("tol", 1e-10)),
    )


def cmd_minimize(args):
    try:
        cfg = tio.read_json(args.config)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config: {exc}", "config") from None
    if isinstance(cfg, dict):
        cfg.setdefault("lambda", args.lam)
    problem = problem_from_config(cfg)
    out, report = minimize(problem)
    params = TwoWellParams(cfg["lambda"])
    payload = report.as_dict()
    payload["max_vertex_deviation_from_affine"] = float(
        np.abs(out.deformed - out.affine_boundary()).max()
    )
    payload["certificate"] = affine_certificate(out).as_dict()
    outputs = cfg.get("outputs", {})
    if args.trace or outputs.get("trace"):
        tio.write_text(tio.trace_csv(report.trace), args.trace or outputs["trace"])
    if args.svg or outputs.get("svg"):
        tio.write_text(tio.field_svg(out, params), args.svg or outputs["svg"])
    if args.field or outputs.get("field"):
        tio.write_text(tio.dumps(out.to_dict()), args.field or outputs["field"])
    _emit(args, payload)


def cmd_certify(args):
    fld = _load_field(args.field)
    cert = affine_certificate(fld, args.coset_tol, args.affine_tol)
    payload = cert.as_dict()
    payload["null_lagrangian_residual"] = null_lagrangian_residual(fld)
    _emit(args, payload)


def cmd_so3scan(args):
    diag = _floats(args.diag, 3, "diag")
    q = np.diag(diag)
    if abs(det3(q) - 1.0) > 1e-8:
        raise ConfigError("diag entries must multiply to 1", "diag")
    res = so3_rank_one_scan(q, n_samples=_positive(args.samples, "samples", True))
    _emit(
        args,
        {
            "diag": diag,
            "min_residual": res.min_residual,
            "sample_min": res.sample_min,
            "n_samples": res.n_samples,
            "rotation": [float(v) for v in res.rotation.ravel()],
        },
    )


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=0.5, help="well parameter")
    common.add_argument("--out", help="write the result here instead of stdout")

    p = _Parser(prog="twowell", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    wells = sub.add_parser("wells", help="rank-one geometry of the wells")
    wsub = wells.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = wsub.add_parser("connect", parents=[common], help="rank-one angles between cosets")
    c.add_argument("--q1", help="first well, row-major a,b,c,d (default I)")
    c.add_argument("--q2", help="second well, row-major a,b,c,d (default H)")
    c.set_defaults(func=cmd_wells_connect)

    hull = sub.add_parser("hull", help="convex hull and Z_min")
    hsub = hull.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = hsub.add_parser("test", parents=[common], help="membership and hull coordinates")
    c.add_argument("--matrix", required=True)
    c.set_defaults(func=cmd_hull_test)
    c = hsub.add_parser("sample", parents=[common], help="one point of Z_min")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--gamma", type=float, required=True)
    c.add_argument("--t", type=float, required=True)
    c.set_defaults(func=cmd_hull_sample)
    c = hsub.add_parser("sweep", parents=[common], help="CSV sweep of Z_min")
    c.add_argument("--n-alpha", type=int, default=8)
    c.add_argument("--n-gamma", type=int, default=8)
    c.add_argument("--n-t", type=int, default=5)
    c.set_defaults(func=cmd_hull_sweep)

    env = sub.add_parser("envelope", help="discrete convex envelope of the two-well energy")
    esub = env.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = esub.add_parser("build", parents=[common], help="build and save the envelope")
    c.add_argument("--file", required=True, help="binary output path")
    c.add_argument("--box", type=float, default=3.0)
    c.add_argument("--resolution", type=int, default=33)
    c.set_defaults(func=cmd_envelope_build)
    c = esub.add_parser("query", parents=[common], help="evaluate a saved envelope")
    c.add_argument("--file", required=True)
    c.add_argument("--matrix", required=True)
    c.set_defaults(func=cmd_envelope_query)
    c = esub.add_parser("slice", parents=[common], help="CSV of a 2-D slice")
    c.add_argument("--file", required=True)
    c.add_argument("--axes", default="0,3", help="two entry indices in 0..3")
    c.add_argument("--fixed", help="matrix fixing the other entries (default 0)")
    c.set_defaults(func=cmd_envelope_slice)

    lam = sub.add_parser("laminate", help="laminate fields with affine boundary data")
    lsub = lam.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = lsub.add_parser("build", parents=[common], help="build a laminate field")
    tgt = c.add_mutually_exclusive_group()
    tgt.add_argument("--target", choices=["mid"], default="mid")
    tgt.add_argument("--matrix", help="boundary gradient, row-major a,b,c,d")
    c.add_argument("--freq", type=int, default=16)
    c.add_argument("--cutoff", type=float, help="blend width (default 1/freq)")
    c.add_argument("--layer", choices=["blend", "flow"], default="blend")
    c.add_argument("--field", help="write the field JSON here")
    c.add_argument("--svg", help="write an SVG picture here")
    c.set_defaults(func=cmd_laminate_build)

    c = sub.add_parser("minimize", parents=[common], help="penalised energy minimisation")
    c.add_argument("--config", required=True, help="JSON run configuration")
    c.add_argument("--trace", help="CSV energy trace path")
    c.add_argument("--svg", help="SVG of the final field")
    c.add_argument("--field", help="JSON of the final field")
    c.set_defaults(func=cmd_minimize)

    c = sub.add_parser("certify", parents=[common], help="affineness certificate of a field")
    c.add_argument("--field", required=True)
    c.add_argument("--coset-tol", type=float, default=1e-6)
    c.add_argument("--affine-tol", type=float, default=1e-6)
    c.set_defaults(func=cmd_certify)

    c = sub.add_parser("so3scan", parents=[common], help="rank-one scan of SO(3) against Q")
    c.add_argument("--diag", required=True, help="diagonal of Q, l1,l2,l3")
    c.add_argument("--samples", type=int, default=100_000)
    c.set_defaults(func=cmd_so3scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, DomainError) as exc:
        field = getattr(exc, "field", None)
        sys.stderr.write(tio.dumps({"error": str(exc), "field": field}))
        return EXIT_INVALID
    except NumericError as exc:
        sys.stderr.write(tio.dumps({"error": str(exc)}))
        return EXIT_NUMERIC
    except TwoWellError as exc:  # pragma: no cover - all subclasses handled above
        sys.stderr.write(tio.dumps({"error": str(exc)}))
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
