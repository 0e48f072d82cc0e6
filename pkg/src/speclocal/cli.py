"""Command-line front end.

Every command prints JSON that embeds the fully resolved configuration, so
rerunning a record's ``config`` reproduces it.  Exit codes: 0 on success,
2 when a localizer gap closes, 1 for configuration and IO errors.
"""
import argparse
import csv
import itertools
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .degree import degree_closed_form, degree_preimage
from .errors import ConfigError, GapClosed, SpecLocalError
from .fuzzy import (FuzzyTorus, clock_shift, det_path_winding, gap_bound_invertible,
                    gap_bound_unitary, g_hat_operator, g_operator, reduce_graded)
from .inertia import signature
from .lattice import taper_matrix_elements
from .localizer import (check_theorem_conditions, localizer_invariant, periodic_localizer,
                        resolve_eta)
from .models import MODELS, RNG_NAME, RNG_VERSION, build_model, bulk_model, model_to_json
from .symmetry import z2_index

Z2_CASES = {"d1_diii": ("diii", 1), "d2_aii": ("aii", 2), "d3_aii": ("aii", 3)}


def parse_complex(text) -> complex:
    """Parse ``0.9``, ``0.9i``, ``1+2j`` or ``-i`` into a complex number."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("i", "j")
    if s in ("j", "+j", "-j"):
        s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _list_of(kind):
    def parse(text):
        if isinstance(text, list):
            return [kind(v) for v in text]
        try:
            return [kind(v) for v in str(text).split(",") if v != ""]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


def _eta_value(text):
    return text if text == "auto" else float(text)


def _jsonable(value):
    if isinstance(value, complex):
        return value.real if value.imag == 0 else {"re": value.real, "im": value.imag}
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    cfg["version"] = __version__
    cfg["rng"] = {"name": RNG_NAME, "version": RNG_VERSION}
    return _jsonable(cfg)


def write_atomic(path: str, rows, header) -> None:
    """Write CSV rows to a temporary file and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _model_kwargs(args, seed):
    return dict(d=args.d, m=args.m, lam=args.lam, seed=seed, coupling=args.coupling,
                boundary=args.boundary, model_file=args.model_file)


def _conditions(args, h, eta):
    if args.lam > 0:
        return None
    try:
        bulk = bulk_model(args.model, args.d, args.m, args.coupling, args.model_file)
    except SpecLocalError:
        return None
    if bulk is None:
        return None
    gap = bulk.gap()
    if gap <= 0:
        return None
    report = check_theorem_conditions(bulk.d, bulk.norm(), gap, bulk.commutator_norm(), eta,
                                      h.rho, bulk.range)
    return report.to_dict()


def localizer_point(args, rho, eta, s, seed) -> dict:
    """One localizer evaluation; returns a JSON-ready record."""
    start = time.perf_counter()
    h = build_model(args.model, rho, **_model_kwargs(args, seed))
    if s > 0:
        h = taper_matrix_elements(h, s)
    eta_value = resolve_eta(eta, h)
    result = localizer_invariant(periodic_localizer(h, eta_value), method=args.method)
    return {
        "rho": rho, "eta": eta_value, "s": s, "seed": seed,
        "half_sig": result.half_signature, "gap": result.gap, "dim": result.dim,
        "condition_report": _conditions(args, h, eta_value),
        "timing": time.perf_counter() - start,
    }


def cmd_localizer(args):
    records = [localizer_point(args, rho, args.eta, args.s, seed)
               for rho in args.rho for seed in args.seed]
    return {"config": resolved_config(args), "records": records}


def cmd_spectrum(args):
    h = build_model(args.model, args.rho[0], **_model_kwargs(args, args.seed[0]))
    if args.s > 0:
        h = taper_matrix_elements(h, args.s)
    eta = resolve_eta(args.eta, h)
    ham = np.linalg.eigvalsh(h.dense())
    loc = np.linalg.eigvalsh(periodic_localizer(h, eta))
    if args.out_hamiltonian:
        write_atomic(args.out_hamiltonian, enumerate(ham.tolist()), ("index", "value"))
    if args.out_localizer:
        write_atomic(args.out_localizer, enumerate(loc.tolist()), ("index", "value"))
    return {
        "config": resolved_config(args),
        "hamiltonian": {"count": int(ham.size), "near_zero": int(np.sum(np.abs(ham) < args.window))},
        "localizer": {"count": int(loc.size),
                      "near_plus_two": int(np.sum(np.abs(loc - 2) < 0.2)),
                      "near_minus_two": int(np.sum(np.abs(loc + 2) < 0.2)),
                      "half_sig": int(np.sum(np.sign(loc))) // 2},
    }


def _sweep_task(payload):
    args, index, point = payload
    rho, eta, s, seed = point
    try:
        record = localizer_point(args, rho, eta, s, seed)
    except SpecLocalError as exc:
        record = {"rho": rho, "eta": eta, "s": s, "seed": seed,
                  "error": type(exc).__name__, "message": str(exc)}
    record["index"] = index
    return record


def _threads() -> int:
    raw = os.environ.get("SPECLOCAL_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"SPECLOCAL_THREADS must be an integer, got {raw!r}") from exc
    return max(value, 1)


def cmd_sweep(args):
    points = list(itertools.product(args.rho, args.eta_list, args.s_list, args.seed))
    payloads = [(args, i, p) for i, p in enumerate(points)]
    threads = _threads()
    config = resolved_config(args)
    config["threads"] = threads
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = pool.map(_sweep_task, payloads)
                for record in results:
                    record["config"] = config
                    print(json.dumps(_jsonable(record)), file=out, flush=True)
        else:
            for payload in payloads:
                record = _sweep_task(payload)
                record["config"] = config
                print(json.dumps(_jsonable(record)), file=out, flush=True)
    finally:
        if out is not sys.stdout:
            out.close()
    return None


def cmd_z2(args):
    name, d = Z2_CASES[args.case]
    records = []
    for rho in args.rho:
        for seed in args.seed:
            h = build_model(name, rho, d=d, m=args.m, lam=args.lam, seed=seed,
                            coupling=args.coupling)
            eta = resolve_eta(args.eta, h)
            res = z2_index(h, eta)
            records.append({"rho": rho, "seed": seed, "eta": eta, "index": res.index,
                            "pf_L": res.hamiltonian_sign, "pf_D": res.reference_sign})
    return {"config": resolved_config(args), "records": records}


def _load_matrices(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        ops, graded = data.get("ops"), data.get("graded")
    else:
        ops, graded = data, None

    def to_matrix(entry):
        arr = np.asarray(entry, dtype=float)
        return arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 3 else arr.astype(complex)

    if not ops:
        raise ConfigError("matrix file holds no torus elements")
    return [to_matrix(a) for a in ops], (None if graded is None else to_matrix(graded))


def cmd_fuzzy(args):
    if args.clock_shift is not None:
        ops, graded = list(clock_shift(args.clock_shift)), None
    elif args.matrices:
        ops, graded = _load_matrices(args.matrices)
    else:
        raise ConfigError("fuzzy needs --clock-shift N or --matrices FILE")
    torus = FuzzyTorus(ops, graded)
    out = {"config": resolved_config(args), "width": torus.width, "bounds": {}, "sig": {}}
    try:
        out["bounds"]["unitary"] = gap_bound_unitary(torus)
    except SpecLocalError:
        out["bounds"]["unitary"] = None
    try:
        out["bounds"]["invertible"] = gap_bound_invertible(torus)
    except SpecLocalError:
        out["bounds"]["invertible"] = None
    for index in itertools.chain.from_iterable(
            itertools.combinations(range(1, torus.d + 1), k) for k in range(1, torus.d + 1)):
        key = ",".join(map(str, index))
        entry = {"sig": signature(g_operator(torus, index))}
        if graded is not None:
            entry["sig_hat"] = signature(g_hat_operator(torus, index))
        out["sig"][key] = entry
    if graded is not None:
        reduced = reduce_graded(torus)
        out["reduced_width"] = reduced.width
    if torus.d == 2:
        out["half_sig"] = out["sig"]["1,2"]["sig"] // 2
        try:
            out["winding"] = det_path_winding(*torus.ops)
        except SpecLocalError as exc:
            out["winding"] = None
            out["winding_error"] = type(exc).__name__
    return out


def cmd_degree(args):
    m = float(np.real(args.m))
    out = {"config": resolved_config(args), "deg_preimage": degree_preimage(args.d, m)}
    if args.d % 2 == 0:
        out["deg"] = degree_closed_form(args.d, m)
    else:
        out["deg"] = out["deg_preimage"]
    return out


def cmd_model(args):
    bulk = bulk_model(args.model, args.d, args.m, args.coupling, args.model_file)
    if bulk is None:
        raise ConfigError(f"model {args.model!r} has no translation-invariant form")
    data = model_to_json(bulk)
    if args.out:
        directory = os.path.dirname(os.path.abspath(args.out))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(data, fh)
        os.replace(tmp, args.out)
    return {"config": resolved_config(args), "model": data}


def _model_options(p, with_s=True):
    p.add_argument("--model", choices=MODELS, default="ssh")
    p.add_argument("--model-file", dest="model_file", default=None, help="JSON hopping file")
    p.add_argument("--d", type=int, default=2, help="dimension for dirac/aii models")
    p.add_argument("--m", type=parse_complex, default=complex(1.0), help="mass, e.g. 0.9i")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="disorder strength")
    p.add_argument("--coupling", type=float, default=0.2)
    p.add_argument("--boundary", choices=("periodic", "dirichlet"), default="periodic")
    p.add_argument("--rho", type=_list_of(int), default=[8], help="comma separated")
    p.add_argument("--seed", type=_list_of(int), default=[0], help="comma separated")
    if with_s:
        p.add_argument("--s", type=float, default=0.0, help="taper fraction")
    p.add_argument("--method", choices=("eigh", "ldl"), default="eigh")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="speclocal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("localizer", help="half-signature of the periodic localizer")
    _model_options(p)
    p.add_argument("--eta", type=_eta_value, default="auto")
    p.set_defaults(func=cmd_localizer)

    p = sub.add_parser("spectrum", help="eigenvalues of H and of the localizer as CSV")
    _model_options(p)
    p.add_argument("--eta", type=_eta_value, default="auto")
    p.add_argument("--window", type=float, default=1e-8, help="|E| threshold for the H kernel count")
    p.add_argument("--out-hamiltonian", dest="out_hamiltonian", default=None)
    p.add_argument("--out-localizer", dest="out_localizer", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="Cartesian sweep over rho, eta, s and seeds (JSON lines)")
    _model_options(p, with_s=False)
    p.add_argument("--eta", dest="eta_list", type=_list_of(_eta_value), default=["auto"])
    p.add_argument("--s-list", dest="s_list", type=_list_of(float), default=[0.0])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("z2", help="Z2 index from Pfaffian or determinant signs")
    p.add_argument("--case", choices=sorted(Z2_CASES), required=True)
    p.add_argument("--m", type=parse_complex, default=complex(0.5))
    p.add_argument("--rho", type=_list_of(int), default=[8])
    p.add_argument("--eta", type=_eta_value, default="auto")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--seed", type=_list_of(int), default=[0])
    p.add_argument("--coupling", type=float, default=0.2)
    p.set_defaults(func=cmd_z2)

    p = sub.add_parser("fuzzy", help="width, gap bounds and signatures of a fuzzy torus")
    p.add_argument("--clock-shift", dest="clock_shift", type=int, default=None)
    p.add_argument("--matrices", default=None, help="JSON list of matrices or {ops, graded}")
    p.set_defaults(func=cmd_fuzzy)

    p = sub.add_parser("degree", help="mapping degree of the torus-to-sphere map")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--m", type=parse_complex, default=complex(1.0))
    p.set_defaults(func=cmd_degree)

    p = sub.add_parser("model", help="write a model's hoppings as JSON")
    _model_options(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_model)

    for action in sub.choices.values():
        action.add_argument("--config", default=None, help="JSON file of option defaults")
    return parser


def parse_args(argv=None):
    """Parse flags; values from ``--config`` act as defaults that flags override."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        converted = {}
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if dest == "lambda":
                dest = "lam"
            if dest not in known:
                raise ConfigError(f"unknown config key {key!r}")
            action = known[dest]
            converted[dest] = action.type(value) if action.type and value is not None else value
        sub.set_defaults(**converted)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        result = args.func(args)
    except GapClosed as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "gap": exc.gap}),
              file=sys.stderr)
        return 2
    except (SpecLocalError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    if result is not None:
        print(json.dumps(_jsonable(result), indent=2))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
