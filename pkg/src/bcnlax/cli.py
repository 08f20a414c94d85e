"""Command line entry point: verification suites, integration, equilibria and spin-chain spectra."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import battery as bt
from . import dynamics as dy
from .elliptic import EllipticContext
from .errors import (BcnLaxError, ConfigError, DomainError, SeriesTruncationError, SingularJacobianError,
                     StepRejectionError)
from .lax_scalar import ModelParams, PhaseState, check_state, random_state
from .reports import CheckRow, Report

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SUITES = ("elliptic", "operators", "matrices", "lax-scalar", "lax-rvalued")
COMMANDS = ("verify", "integrate", "equilibrium", "spin-chain", "all")


# ---------------------------------------------------------------------------
# parsing


def parse_complex(text) -> complex:
    """Parse ``a+bi`` style input (``i`` or ``j``); plain numbers and ``[re, im]`` pairs are accepted too."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ConfigError(f"complex pair must have two entries: {text!r}")
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("I", "i").replace("i", "j")
    if not s:
        raise ConfigError("empty complex number")
    if s.endswith("j") and s[:-1] in ("", "+", "-"):
        s = s[:-1] + "1j"
    s = s.replace("+j", "+1j").replace("-j", "-1j")
    try:
        return complex(s)
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def parse_complex_list(text, length=None) -> tuple:
    """Comma separated ``a+bi`` values, or a JSON list of numbers, strings or ``[re, im]`` pairs."""
    items = text if isinstance(text, (list, tuple)) else [v for v in str(text).split(",") if v.strip()]
    vals = tuple(parse_complex(v) for v in items)
    if length is not None and len(vals) != length:
        raise ConfigError(f"expected {length} values, got {len(vals)}")
    return vals


def _pair(c) -> list:
    return [float(np.real(c)), float(np.imag(c))]


@dataclass
class RunConfig:
    """Validated settings of one run."""

    command: str
    suite: str | None = None
    tau: complex = 1j
    g: complex = complex(bt.DEFAULT_G)
    nu: tuple = tuple(complex(v) for v in bt.DEFAULT_NU)
    n: int = 2
    seed: int = 0
    samples: int | None = None
    tol: float | None = None
    T: float = 1.0
    h: float = 1e-3
    q: tuple | None = None
    p: tuple | None = None
    z: complex = 0.21 + 0.37j
    stride: int = 10
    kind: str = "auto"
    zeta: tuple | None = None
    quick: bool = False
    output: str | None = None
    report: str | None = None

    def echo(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, complex):
                v = _pair(v)
            elif isinstance(v, tuple):
                v = [_pair(c) if isinstance(c, complex) else c for c in v]
            out[k] = v
        return out

    def context(self) -> EllipticContext:
        return EllipticContext(self.tau)

    def params(self) -> ModelParams:
        return ModelParams(self.n, self.g, self.nu, self.context())


_COMPLEX_KEYS = {"tau", "g", "z"}
_LIST_KEYS = {"nu": 4, "q": None, "p": None, "zeta": None}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings; command-line flags take precedence")
    common.add_argument("--tau", help="modulus as a+bi (default 0+1i)")
    common.add_argument("--g", help="pair coupling as a+bi")
    common.add_argument("--nu", help="four boundary couplings, comma separated")
    common.add_argument("--n", type=int, help="number of particles / sites")
    common.add_argument("--seed", type=int, help="64-bit unsigned seed")
    common.add_argument("--samples", type=int, help="sample count for the suites")
    common.add_argument("--tol", type=float, help="override the relative tolerance")
    common.add_argument("--z", help="spectral parameter as a+bi")
    common.add_argument("-o", "--output", help="output file (default: stdout)")

    parser = argparse.ArgumentParser(prog="bcnlax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run one identity suite")
    v.add_argument("suite", choices=SUITES)
    i = sub.add_parser("integrate", parents=[common], help="integrate the classical model, write CSV")
    i.add_argument("--T", type=float, help="final time")
    i.add_argument("--h", type=float, help="RK4 step")
    i.add_argument("--q", help="initial positions, comma separated a+bi")
    i.add_argument("--p", help="initial momenta, comma separated a+bi")
    i.add_argument("--stride", type=int, help="write every stride-th state")
    i.add_argument("--report", help="also write a JSON drift report here")
    e = sub.add_parser("equilibrium", parents=[common], help="solve for an equilibrium configuration")
    e.add_argument("--kind", choices=("auto", "bc", "atype"),
                   help="force map; auto picks the A-type map when all nu vanish")
    s = sub.add_parser("spin-chain", parents=[common], help="frozen spin-chain Hamiltonian and spectrum")
    s.add_argument("--kind", choices=("auto", "bc", "atype"))
    s.add_argument("--zeta", help="equilibrium positions; searched for when omitted")
    a = sub.add_parser("all", parents=[common], help="full acceptance battery")
    a.add_argument("--quick", action="store_true", default=None, help="reduced sample counts")
    return parser


def load_config(argv) -> RunConfig:
    """Merge built-in defaults, an optional JSON config file and command-line flags."""
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
    for k, v in vars(args).items():
        if k != "config" and v is not None:
            values[k] = v
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = RunConfig(command=values.pop("command"))
    for k, v in values.items():
        try:
            if k in _COMPLEX_KEYS:
                v = parse_complex(v)
            elif k in _LIST_KEYS:
                v = parse_complex_list(v, _LIST_KEYS[k])
            elif k in ("n", "seed", "samples", "stride"):
                v = int(v)
            elif k in ("tol", "T", "h"):
                v = float(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {k}: {v!r} ({exc})") from exc
        setattr(cfg, k, v)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.command == "verify" and cfg.suite not in SUITES:
        raise ConfigError(f"verify needs one of {', '.join(SUITES)}")
    if not cfg.tau.imag > 0:
        raise ConfigError("tau must have positive imaginary part")
    if cfg.n < 1:
        raise ConfigError("n must be at least 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    if cfg.samples is not None and cfg.samples < 1:
        raise ConfigError("samples must be positive")
    if cfg.tol is not None and not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    if not cfg.h > 0 or cfg.T < 0:
        raise ConfigError("need h > 0 and T >= 0")
    if cfg.stride < 1:
        raise ConfigError("stride must be positive")
    for key in ("q", "p", "zeta"):
        val = getattr(cfg, key)
        if val is not None and len(val) != cfg.n:
            raise ConfigError(f"{key} must have n={cfg.n} entries")
    if cfg.command == "spin-chain" and cfg.n > 8:
        raise ConfigError("spin chains are limited to n <= 8 sites")
    try:
        cfg.params()
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bcnlax-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(path, text: str, stream=None) -> None:
    if path:
        write_atomic(path, text)
    else:
        (stream or sys.stdout).write(text)


def report_document(cfg: RunConfig, reports, seconds: float, payload=None) -> dict:
    rows = [r.to_dict() for rep in reports for r in rep.rows]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command if cfg.suite is None else f"{cfg.command} {cfg.suite}",
        "config": cfg.echo(),
        "rows": rows,
        "all_passed": all(r.passed for rep in reports for r in rep.executed),
        "timing": {"seconds": round(seconds, 6)},
    }
    if payload:
        doc.update(payload)
    return doc


def _finite(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(doc) -> str:
    return json.dumps(_finite(doc), indent=2, allow_nan=False) + "\n"


def _tol(cfg, default):
    return cfg.tol if cfg.tol is not None else default


def _samples(cfg, default):
    return cfg.samples if cfg.samples is not None else default


# ---------------------------------------------------------------------------
# commands


def run_verify(cfg: RunConfig):
    ctx = cfg.context()
    s = cfg.suite
    if s == "elliptic":
        rep = bt.verify_elliptic(ctx, cfg.nu, cfg.seed, _samples(cfg, 100), _tol(cfg, 1e-9))
    elif s == "operators":
        rep = bt.verify_operators(ctx, cfg.nu, max(cfg.n, 2), cfg.seed, _samples(cfg, 16), _tol(cfg, 1e-8))
    elif s == "matrices":
        rep = bt.verify_matrices(ctx, cfg.nu, cfg.seed, _samples(cfg, 50), _tol(cfg, 1e-9))
    elif s == "lax-scalar":
        rep = bt.verify_lax_scalar(cfg.params(), cfg.seed, _samples(cfg, 20), 3, _tol(cfg, 1e-8))
    else:
        if cfg.n < 2:
            raise ConfigError("lax-rvalued needs n >= 2")
        rep = bt.verify_lax_rvalued(cfg.params(), cfg.seed, _samples(cfg, 10), 3, _tol(cfg, 1e-8))
    return [rep], None


def _initial_state(cfg: RunConfig, params: ModelParams) -> PhaseState:
    if cfg.q is None:
        st = random_state(params, np.random.default_rng(cfg.seed), p_scale=0.3)
        q = st.q
        p = st.p if cfg.p is None else np.array(cfg.p)
    else:
        q = np.array(cfg.q)
        p = np.zeros(cfg.n) if cfg.p is None else np.array(cfg.p)
    return PhaseState(q, p)


def run_integrate(cfg: RunConfig):
    params = cfg.params()
    st = _initial_state(cfg, params)
    check_state(params, st.q)
    traj = dy.integrate(params, st, cfg.T, cfg.h)
    emit(cfg.output, dy.trajectory_csv(params, traj, cfg.z, cfg.stride))
    mon = dy.monitor(params, traj, cfg.z, (2, 4), cfg.stride)
    rep = Report("conservation")
    for key in ("H", "trL2", "trL4"):
        v = mon[key]
        rep.add(CheckRow(f"drift-{key}", float(np.max(np.abs(v - v[0]))), float(abs(v[0])), _tol(cfg, 1e-6)))
    return [rep], {"initial_state": {"q": [_pair(c) for c in st.q], "p": [_pair(c) for c in st.p]}}


def _kind(cfg: RunConfig) -> str:
    if cfg.kind != "auto":
        return cfg.kind
    return "atype" if all(v == 0 for v in cfg.nu) else "bc"


def _solve(cfg: RunConfig, params: ModelParams, kind: str):
    opts = dy.EquilibriumOptions(kind=kind, tol=_tol(cfg, 1e-10), seed=cfg.seed)
    res = dy.find_equilibrium(params, opts=opts)
    if kind == "atype" and res.converged:
        # fix the translation freedom so that the last position is 1
        res.zeta = res.zeta - res.zeta[-1] + 1.0
    return res


def run_equilibrium(cfg: RunConfig):
    params = cfg.params()
    kind = _kind(cfg)
    res = _solve(cfg, params, kind)
    rep = Report(f"equilibrium ({kind})")
    rep.add(CheckRow(f"{kind}-force", res.force_residual, 0.0, _tol(cfg, 1e-10), note=f"converged={res.converged}"))
    return [rep], {"equilibrium": res.to_dict()}


def _regime_flag(cfg: RunConfig) -> str:
    real = abs(cfg.tau.real) < 1e-15 and abs(cfg.g.imag) < 1e-15 and all(abs(v.imag) < 1e-15 for v in cfg.nu)
    return "real" if real else "complex"


def run_spin_chain(cfg: RunConfig):
    params = cfg.params()
    kind = _kind(cfg)
    rep = Report(f"spin chain ({kind})")
    payload = {"regime": _regime_flag(cfg)}
    if cfg.zeta is None:
        res = _solve(cfg, params, kind)
        zeta = res.zeta
        rep.add(CheckRow(f"{kind}-force", res.force_residual, 0.0, _tol(cfg, 1e-10),
                         note=f"converged={res.converged}"))
        payload["equilibrium"] = res.to_dict()
        if not res.converged:
            return [rep], payload
    else:
        zeta = np.array(cfg.zeta)
    H = dy.spin_chain_hamiltonian(params, zeta, kind)
    rep.add(dy.quantum_lax_residual(params, zeta, cfg.z, kind, tol=1e-7))
    ev = dy.spectrum(H)
    payload.update({
        "zeta": [_pair(c) for c in zeta],
        "hamiltonian": [[_pair(c) for c in row] for row in H.data],
        "spectrum": [_pair(c) for c in ev],
    })
    return [rep], payload


def run_all(cfg: RunConfig):
    """The acceptance battery at the stated sample counts (``--quick`` reduces them)."""
    return [crit() for crit in acceptance_battery(cfg.seed, bool(cfg.quick))], None


def acceptance_battery(seed: int = 0, quick: bool = False):
    """Thunks producing one report per acceptance criterion."""
    nus = [(0.7 - 0.3j, 0.2 + 0.5j, -0.4 + 0.1j, 1.1 - 0.2j), (-0.5 + 0.8j, 0.9 - 0.1j, 0.3 + 0.3j, -0.2 - 0.6j)]
    taus = [1j, 0.3 + 0.8j]
    k = 4 if quick else 1

    def named(title, reports):
        out = Report(title)
        for r in reports:
            out.extend(r)
        return out

    def c1():
        return named("1 elliptic", [bt.verify_elliptic(EllipticContext(t), nu, seed, 100 // k)
                                    for t in taus for nu in nus])

    def c2():
        return named("2 operators", [bt.verify_operators(EllipticContext(t), nus[0], 3, seed, 16) for t in taus])

    def c3():
        return named("3 matrices", [bt.verify_matrices(EllipticContext(t), nu, seed, 50)
                                    for t in taus for nu in nus])

    def c4():
        return named("4 scalar Lax", [bt.verify_lax_scalar(ModelParams(n, bt.DEFAULT_G, bt.DEFAULT_NU,
                                                                       EllipticContext(1j)), seed, 20 // k)
                                      for n in (1, 2, 3)])

    def c5():
        out = []
        for t in taus:
            P2 = ModelParams(2, bt.DEFAULT_G, nus[0], EllipticContext(t))
            out.append(bt.verify_lax_rvalued(P2, seed, 20 // k, 3, operator=(t == taus[0])))
        P3 = ModelParams(3, bt.DEFAULT_G, nus[0], EllipticContext(taus[1]))
        out.append(bt.verify_lax_rvalued(P3, seed, 20 // k, 3, operator=False))
        return named("5 R-matrix valued Lax", out)

    def c6():
        P, st, z = conservation_setup()
        return bt.conservation_report(P, st, z)

    def c7():
        P = ModelParams(3, 1.0, (0, 0, 0, 0), EllipticContext(1j))
        rep = Report("7 equilibrium and freezing")
        rep.add(bt.atype_equally_spaced(P))
        eq, _ = bt.equilibrium_report(equilibrium_setup(), 0.23 + 0.11j, seed)
        rep.extend(eq)
        return rep

    def c8():
        return named("8 oracles", [bt.oracle_report(EllipticContext(t), nus[0], seed) for t in taus])

    return [c1, c2, c3, c4, c5, c6, c7, c8]


def conservation_setup():
    """The generic n=2 parameter set and initial state used for the conservation criterion."""
    ctx = EllipticContext(0.3 + 0.8j)
    P = ModelParams(2, 0.4 + 0.1j, (0.3 + 0.1j, 0.2, 0.25 - 0.1j, 0.15), ctx)
    st = PhaseState([0.2 + 0.25 * ctx.tau, 0.35 + 0.7 * ctx.tau], [0.2 + 0.1j, -0.1])
    return P, st, 0.23 + 0.11j


def equilibrium_setup() -> ModelParams:
    """``n = 2`` with generic real couplings on ``tau = 0.9i``."""
    return ModelParams(2, 0.7, (0.3, 0.5, 0.2, 0.4), EllipticContext(0.9j))


HANDLERS = {
    "verify": run_verify,
    "integrate": run_integrate,
    "equilibrium": run_equilibrium,
    "spin-chain": run_spin_chain,
    "all": run_all,
}


def _diagnostic(kind: str, exc: BaseException, **extra) -> None:
    doc = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    doc.update(extra)
    sys.stderr.write(json.dumps(doc) + "\n")


def run(argv=None) -> int:
    """Run one command and return the exit status."""
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        _diagnostic("config", exc)
        return EXIT_CONFIG
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        reports, payload = HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        _diagnostic("config", exc)
        return EXIT_CONFIG
    except StepRejectionError as exc:
        traj = exc.trajectory
        _diagnostic("numerical", exc, steps_completed=len(traj) - 1 if traj is not None else 0)
        return EXIT_NUMERIC
    except SingularJacobianError as exc:
        _diagnostic("numerical", exc, condition=exc.condition)
        return EXIT_NUMERIC
    except (DomainError, SeriesTruncationError, np.linalg.LinAlgError) as exc:
        _diagnostic("numerical", exc)
        return EXIT_NUMERIC
    except BcnLaxError as exc:
        _diagnostic("numerical", exc)
        return EXIT_NUMERIC
    seconds = time.perf_counter() - t0
    doc = report_document(cfg, reports, seconds, payload)
    text = dumps(doc)
    if cfg.command == "integrate":
        if cfg.report:
            write_atomic(cfg.report, text)
    else:
        emit(cfg.output, text)
    return EXIT_OK if doc["all_passed"] else EXIT_FAIL


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
