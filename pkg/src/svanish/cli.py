"""``svanish`` command line.

Exit codes: 0 success, 2 bad input (schema, missing file, bad option), 3 numeric
failure or a failed verification criterion.
"""
import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, cloakmap, farfield, io, verify
from .designer import DesignProblem, design
from .errors import SchemaError, SvanishError
from .lowfreq import lowfreq_coefficients
from .multilayer import POLARIZATIONS, reduced_coefficients

CONFIG_SCHEMA = "svanish-config/1"
SUBCOMMANDS = ("wcoef", "lowfreq", "design", "farfield", "xsection", "cloak-map", "verify")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


@dataclass
class RunConfig:
    """Every option of every subcommand, with its default."""

    subcommand: str
    structure: str | None = None
    problem: str | None = None
    out: str | None = None
    format: str = "csv"
    order: int = 2
    nmax: int | None = None
    tmin: float = 1e-3
    tmax: float = 1.0
    tcount: int = 31
    omega: float = 1.0
    khat: tuple = (0.0, 0.0, 1.0)
    pol: tuple = (1.0, 0.0, 0.0)
    ntheta: int = 19
    nphi: int = 36
    rho: float = 0.1
    rmin: float = 1.0
    rmax: float = 2.5
    rcount: int = 31
    ndirs: int = 8
    bounds: tuple = (0.1, 10.0)
    max_iters: int = 200
    tol: float = 1e-10
    restarts: int = 0
    seed: int | None = None
    time_limit: float | None = None

    def to_dict(self):
        doc = {"schema": CONFIG_SCHEMA}
        doc.update({k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()})
        return doc

    @classmethod
    def from_dict(cls, doc):
        io.check_schema(doc, CONFIG_SCHEMA)
        names = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(doc) - set(names) - {"schema"}
        if unknown:
            raise SchemaError(f"unknown config field {sorted(unknown)[0]!r}", field=sorted(unknown)[0])
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items() if k != "schema"}
        if kw.get("subcommand") not in SUBCOMMANDS:
            raise SchemaError(f"subcommand must be one of {SUBCOMMANDS}", field="subcommand")
        return cls(**kw)


def default_structure():
    """Starting point of Example 1: six layers between radii 2 and 1."""
    return DesignProblem.example1()._frame


def _structure(cfg):
    return io.load_structure(cfg.structure) if cfg.structure else default_structure()


def _sidecar(cfg, doc):
    if cfg.out in (None, "-"):
        return
    doc = {"schema": "svanish-sidecar/1", **doc, "config": cfg.to_dict()}
    io.write_json(Path(cfg.out).with_suffix(".meta.json"), doc)


def _table(cfg, header, rows, meta):
    if cfg.format == "json":
        io.write_json(cfg.out, {**meta, "columns": list(header), "rows": [[float(v) for v in r] for r in rows]})
    else:
        io.write_csv(cfg.out, header, rows)
        _sidecar(cfg, meta)


def _incidence(cfg):
    khat = np.array(cfg.khat, dtype=float)
    khat /= np.linalg.norm(khat)
    c = np.array(cfg.pol, dtype=float)
    return c, khat


def run_wcoef(cfg):
    s = _structure(cfg)
    ts = np.logspace(np.log10(cfg.tmin), np.log10(cfg.tmax), cfg.tcount)
    nmax = cfg.nmax or cfg.order
    cols, header = [], ["t"]
    for n in range(1, nmax + 1):
        for pol in POLARIZATIONS:
            cols.append(np.abs(reduced_coefficients(s, n, pol, ts)))
            header.append(f"abs_W{n}_{pol.value}")
    rows = np.column_stack([ts] + cols)
    _table(cfg, header, rows, {"kind": "wcoef", "structure_hash": io.structure_hash(s)})


def run_lowfreq(cfg):
    s = _structure(cfg)
    table = lowfreq_coefficients(s, cfg.order)
    reference = lowfreq_coefficients(s.vacuum(), cfg.order)
    io.write_json(cfg.out, table.to_dict())
    # keep stdout parseable when the JSON goes there
    print(table.format(reference), file=sys.stderr if cfg.out in (None, "-") else sys.stdout)


def _problem(cfg):
    if cfg.problem:
        base = DesignProblem.from_dict(io.read_json(cfg.problem))
    elif cfg.structure:
        s = io.load_structure(cfg.structure)
        base = DesignProblem(s.radii, s.mu, s.eps, background=(s.background_mu, s.background_eps))
    else:
        base = DesignProblem.example1()
    return dataclasses.replace(
        base,
        order=cfg.order,
        bounds=tuple(cfg.bounds),
        max_iters=cfg.max_iters,
        residual_tol=cfg.tol,
        restarts=cfg.restarts,
        seed=cfg.seed,
    )


def run_design(cfg):
    result = design(_problem(cfg), time_limit=cfg.time_limit)
    io.write_json(cfg.out, result.to_dict())
    status = "converged" if result.converged else f"not converged ({result.reason})"
    print(f"{status}: |b| = {result.residual_norm:.3e} after {result.iterations} iterations", file=sys.stderr)
    # the result is still written so the best point can be inspected
    return EXIT_OK if result.converged else EXIT_NUMERIC


def run_farfield(cfg):
    s = _structure(cfg)
    c, khat = _incidence(cfg)
    T, P, A, n_max = farfield.far_field_grid(s, cfg.omega, c, khat, cfg.ntheta, cfg.nphi, cfg.nmax)
    header = ["theta", "phi"] + [f"re_A{i}" for i in (1, 2, 3)] + [f"im_A{i}" for i in (1, 2, 3)]
    rows = np.column_stack([T, P, A.real, A.imag])
    meta = {
        "kind": "farfield",
        "omega": cfg.omega,
        "c": c.tolist(),
        "khat": khat.tolist(),
        "n_max": n_max,
        "structure_hash": io.structure_hash(s),
    }
    _table(cfg, header, rows, meta)


def run_xsection(cfg):
    s = _structure(cfg)
    c, khat = _incidence(cfg)
    if cfg.tcount > 1:
        omegas = np.logspace(np.log10(cfg.tmin), np.log10(cfg.tmax), cfg.tcount)
    else:
        omegas = np.array([cfg.omega])
    bare = s.vacuum()
    rows = []
    for w in omegas:
        d = farfield.cross_section_details(s, w, c, khat, cfg.nmax)
        ref = farfield.cross_section_details(bare, w, c, khat, cfg.nmax)
        rows.append([w, d.quadrature, d.modal, ref.modal, d.modal / ref.modal, d.n_max])
    header = ["omega", "sigma_quadrature", "sigma_modal", "sigma_bare_pec", "ratio", "n_max"]
    meta = {"kind": "xsection", "c": c.tolist(), "khat": khat.tolist(), "structure_hash": io.structure_hash(s)}
    _table(cfg, header, rows, meta)


def run_cloak_map(cfg):
    s = _structure(cfg)
    radii = np.linspace(cfg.rmin, cfg.rmax, cfg.rcount)
    radii = radii[radii > 1.0] if cfg.rmin <= 1.0 else radii
    samples = cloakmap.tensor_grid(s, cfg.rho, radii, cfg.ndirs, cfg.seed or 0)
    meta = {"kind": "cloak-map", "rho": cfg.rho, "structure_hash": io.structure_hash(s)}
    _table(cfg, cloakmap.TENSOR_COLUMNS, cloakmap.tensor_rows(samples), meta)


def run_verify(cfg):
    results = verify.run_all()
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {failed}" if failed else ""))
    return EXIT_NUMERIC if failed else EXIT_OK


HANDLERS = {
    "wcoef": run_wcoef,
    "lowfreq": run_lowfreq,
    "design": run_design,
    "farfield": run_farfield,
    "xsection": run_xsection,
    "cloak-map": run_cloak_map,
    "verify": run_verify,
}


def run(cfg):
    """Execute one configured subcommand and return its exit status."""
    try:
        return HANDLERS[cfg.subcommand](cfg) or EXIT_OK
    except SchemaError as exc:
        where = f" (field {exc.field})" if getattr(exc, "field", None) else ""
        print(f"svanish: invalid input{where}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"svanish: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SvanishError, ValueError, ArithmeticError) as exc:
        print(f"svanish: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def build_parser():
    d = RunConfig("verify")
    p = argparse.ArgumentParser(prog="svanish", description="Layered PEC-core spheres with vanishing low-frequency scattering.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--structure", help="structure JSON (default: Example-1 starting structure)")
        sp.add_argument("--out", default=d.out, help="output path, '-' for stdout (default)")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default=d.format)
        sp.add_argument("--config", help="RunConfig JSON; command-line flags are ignored when given")

    def tgrid(sp, what):
        sp.add_argument("--tmin", type=float, default=d.tmin, help=f"smallest {what} of the log grid")
        sp.add_argument("--tmax", type=float, default=d.tmax, help=f"largest {what} of the log grid")
        sp.add_argument("--tcount", type=int, default=d.tcount, help="number of grid points")

    def incidence(sp):
        sp.add_argument("--khat", type=float, nargs=3, default=d.khat, metavar=("X", "Y", "Z"))
        sp.add_argument("--pol", type=float, nargs=3, default=d.pol, metavar=("X", "Y", "Z"), help="polarization c")
        sp.add_argument("--nmax", type=int, default=None, help="multipole cutoff (default: tail estimate)")

    sp = sub.add_parser("wcoef", help="|W_n(t)| over a log-spaced t grid")
    common(sp)
    tgrid(sp, "t")
    sp.add_argument("--order", type=int, default=d.order, help="orders n = 1..order when --nmax is absent")
    sp.add_argument("--nmax", type=int, default=None)

    sp = sub.add_parser("lowfreq", help="low-frequency coefficients W_{n,l}")
    common(sp, fmt=False)
    sp.add_argument("--order", type=int, default=d.order)

    sp = sub.add_parser("design", help="search layer parameters for an S-vanishing structure")
    common(sp, fmt=False)
    sp.add_argument("--problem", help="design problem JSON (default: Example 1)")
    sp.add_argument("--order", type=int, default=d.order)
    sp.add_argument("--bounds", type=float, nargs=2, default=d.bounds, metavar=("LO", "HI"))
    sp.add_argument("--max-iters", type=int, default=d.max_iters)
    sp.add_argument("--tol", type=float, default=d.tol, help="scaled residual target")
    sp.add_argument("--restarts", type=int, default=d.restarts, help="extra random starts")
    sp.add_argument("--seed", type=int, default=d.seed, help="seed for the random starts")
    sp.add_argument("--time-limit", type=float, default=d.time_limit, help="seconds")

    sp = sub.add_parser("farfield", help="scattering amplitude on a theta-phi grid")
    common(sp)
    incidence(sp)
    sp.add_argument("--omega", type=float, default=d.omega)
    sp.add_argument("--ntheta", type=int, default=d.ntheta)
    sp.add_argument("--nphi", type=int, default=d.nphi)

    sp = sub.add_parser("xsection", help="scattering cross section, single omega or a sweep")
    common(sp)
    incidence(sp)
    sp.add_argument("--omega", type=float, default=d.omega)
    sp.add_argument("--tmin", type=float, default=d.tmin, help="smallest omega of a sweep")
    sp.add_argument("--tmax", type=float, default=d.tmax, help="largest omega of a sweep")
    sp.add_argument("--tcount", type=int, default=1, help="sweep points (1: use --omega)")

    sp = sub.add_parser("cloak-map", help="pushed-forward cloak tensors on a radial grid")
    common(sp)
    sp.add_argument("--rho", type=float, default=d.rho)
    sp.add_argument("--rmin", type=float, default=d.rmin)
    sp.add_argument("--rmax", type=float, default=d.rmax)
    sp.add_argument("--rcount", type=int, default=d.rcount)
    sp.add_argument("--ndirs", type=int, default=d.ndirs)
    sp.add_argument("--seed", type=int, default=None)

    sub.add_parser("verify", help="run the acceptance checks")
    return p


def config_from_args(ns):
    if getattr(ns, "config", None):
        return RunConfig.from_dict(io.read_json(ns.config))
    names = {f.name for f in dataclasses.fields(RunConfig)}
    kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in vars(ns).items() if k in names}
    return RunConfig(**kw)


def main(argv=None):
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except (SchemaError, FileNotFoundError, TypeError) as exc:
        print(f"svanish: invalid config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
