"""Command-line entry point: ``tlcat <command> [options]``.

Every command except ``emit-category`` writes a JSON report (or a text
rendering of it) and exits 0 iff all checks pass.  Failures exit 1; errors
(bad input, violated hypotheses) exit 2 with a structured error record.
"""

from __future__ import annotations

import argparse
import cmath
import json
import os
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .category_zoo import CategorySpec, QParameter, build
from .fileformat import dumps_system, fingerprint, load_system
from .monoidal_system import (
    DEFAULT_TOLERANCE, TLCatError, check_inverses, check_pentagon, check_unit_constraints, validate_fusion,
)
from .path_basis import make_basis
from .tl_builder import (
    ChainSpec, build_family, periodic_constraint_check, simplicity, verify_c_homogeneity, verify_projection_relations, verify_tl,
)

COMMANDS = ("validate", "emit-category", "basis", "verify-tl", "schur-weyl", "report")
REPORT_SCHEMA = "tlcat-report"
REPORT_SCHEMA_VERSION = 1
TOLERANCE_ENV = "TLCAT_TOLERANCE"
KIND_ALIASES = {"su2": "su2_generic", "su2_generic": "su2_generic", "su2_level": "su2_level_k",
                "su2_level_k": "su2_level_k", "fibonacci": "fibonacci", "fib": "fibonacci", "ising": "ising"}
# strand / channel used when none is given
DEFAULT_CHAIN = {"su2_generic": (1, 0), "su2_level_k": (1, 0), "fibonacci": ("tau", "1"), "ising": ("sigma", "1")}


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    kind: str | None = None
    q: complex | None = None
    max_label: int | None = None
    level: int | None = None
    L: int | None = None
    strands: list | None = None
    targets: list | None = None
    start: list | None = None
    end: list | None = None
    c0: object = "auto"
    periodic: bool = False
    tolerance: float = DEFAULT_TOLERANCE
    format: str = "json"
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise TLCatError(f"unknown command {self.command!r}")
        if self.input is not None and self.kind is not None:
            raise TLCatError("--input and --kind are mutually exclusive")
        if self.kind is not None:
            if self.kind not in KIND_ALIASES:
                raise TLCatError(f"unknown kind {self.kind!r}; choose from {sorted(KIND_ALIASES)}")
            self.kind = KIND_ALIASES[self.kind]

    def echo(self) -> dict:
        out = {}
        for key in ("command", "input", "kind", "q", "max_label", "level", "L", "strands", "targets",
                    "start", "end", "c0", "periodic", "tolerance"):
            val = getattr(self, key)
            out[key] = _jsonable(val)
        return out


class Report:
    def __init__(self, config: RunConfig):
        self.config = config
        self.checks = []
        self.details = {}
        self.warnings = []
        self.system = None
        self.t0 = time.perf_counter()

    def check(self, name, residual, threshold, strict=False):
        """Record a check; ``strict`` means ``residual <= threshold`` passes."""
        residual = float(residual)
        passed = residual <= threshold if strict else residual < threshold
        self.checks.append({"name": name, "residual": residual, "threshold": threshold, "passed": bool(passed)})

    def flag(self, name, ok):
        self.checks.append({"name": name, "residual": 0.0 if ok else 1.0, "threshold": 0.0, "passed": bool(ok)})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "schema_version": REPORT_SCHEMA_VERSION,
            "version": __version__,
            "command": self.config.command,
            "config": self.config.echo(),
            "system": self.system,
            "checks": self.checks,
            "passed": self.passed,
            "warnings": self.warnings,
            "details": _jsonable(self.details),
            "timing": {"wall_seconds": time.perf_counter() - self.t0},
        }


def _jsonable(x):
    if isinstance(x, complex):
        return x.real if x.imag == 0 else [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and x != x:
        return None
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def error_record(config_or_command, err: BaseException) -> dict:
    command = config_or_command.command if isinstance(config_or_command, RunConfig) else config_or_command
    return {
        "schema": REPORT_SCHEMA,
        "schema_version": REPORT_SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "passed": False,
        "error": {"type": type(err).__name__, "message": str(err)},
    }


# -- system and chain selection ---------------------------------------------

def load_or_build(config: RunConfig):
    if config.input is not None:
        return load_system(config.input)
    if config.kind is None:
        raise TLCatError("select a system with --input FILE or --kind KIND")
    kind = config.kind
    q = QParameter(config.q) if config.q is not None and kind == "su2_generic" else None
    if kind == "su2_generic":
        max_label = config.max_label if config.max_label is not None else max(6, config.L or 0)
        return build(CategorySpec(kind, q or QParameter(1.0), max_label=max_label))
    if kind == "su2_level_k":
        if config.level is None:
            raise TLCatError("su2_level_k needs --level")
        return build(CategorySpec(kind, QParameter.level(config.level), level=config.level))
    return build(CategorySpec(kind))


def _kind_of(sys) -> str | None:
    return sys.meta.get("kind") if isinstance(sys.meta, dict) else None


def _chain_labels(config: RunConfig, sys):
    kind = _kind_of(sys)
    if config.L is None:
        raise TLCatError("--L is required")
    if config.L < 1:
        raise TLCatError("--L must be >= 1")
    n_targets = config.L if config.periodic else config.L - 1
    defaults = DEFAULT_CHAIN.get(kind)
    strands = config.strands
    if strands is None:
        if defaults is None:
            raise TLCatError("give --strand/--strands for a system loaded from a file")
        strands = [defaults[0]]
    targets = config.targets
    if targets is None:
        if defaults is None:
            raise TLCatError("give --target/--targets for a system loaded from a file")
        targets = [defaults[1]]
    if len(strands) == 1:
        strands = strands * config.L
    if len(targets) == 1:
        targets = targets * n_targets
    if len(strands) != config.L:
        raise TLCatError(f"expected {config.L} strands, got {len(strands)}")
    if len(targets) != n_targets:
        raise TLCatError(f"expected {n_targets} targets, got {len(targets)}")
    strands = [sys.label(_coerce(x, sys)) for x in strands]
    targets = [sys.label(_coerce(x, sys)) for x in targets]
    start = config.start
    if start is None and kind == "su2_generic" and not config.periodic:
        start = [sys.unit]
    if start is not None:
        start = [sys.label(_coerce(x, sys)) for x in start]
    return strands, targets, start


def _coerce(x, sys):
    """CLI labels arrive as strings; map ``"1"`` to ``1`` for integer-labelled systems."""
    if isinstance(x, str) and x not in sys.ids:
        try:
            return int(x)
        except ValueError:
            return x
    return x


def _warn_partial(sys, report: Report):
    if sys.window is not None:
        report.warnings.append(
            f"{sys.name} is a truncated generic su2 system: a partial monoidal system, "
            "validated only on F-blocks whose intermediate labels stay within max_label")


def _sys_info(sys) -> dict:
    return {"name": sys.name, "fingerprint": fingerprint(sys), "labels": [str(x) for x in sys.ids],
            "unit": str(sys.unit), "partial": sys.window is not None}


# -- commands -----------------------------------------------------------------

def _validate_checks(sys, report: Report, tol):
    fusion = validate_fusion(sys.rules, list(sys.labels), sys.unit, sys.window)
    unit = check_unit_constraints(sys)
    inv = check_inverses(sys)
    pent = check_pentagon(sys, tol)
    for name, rep in (("fusion_rules", fusion), ("unit_constraints", unit)):
        report.checks.append({"name": name, "residual": rep.max_deviation(), "threshold": tol,
                              "passed": rep.ok, "violations": len(rep.violations)})
    report.check("block_inverses", inv, tol)
    report.check("pentagon", pent.max_residual, tol)
    report.details["validation"] = {
        "fusion_violations": [_violation(v) for v in fusion.violations[:20]],
        "unit_violations": [_violation(v) for v in unit.violations[:20]],
        "pentagon": {"max_residual": pent.max_residual, "equations": pent.equations,
                     "nontrivial": pent.nontrivial, "worst": pent.worst},
    }
    return pent


def _violation(v) -> dict:
    return {"kind": v.kind, "where": [str(x) for x in v.where], "detail": v.detail, "deviation": v.deviation}


def cmd_validate(config, report):
    sys_ = load_or_build(config)
    report.system = _sys_info(sys_)
    _warn_partial(sys_, report)
    _validate_checks(sys_, report, config.tolerance)


def cmd_basis(config, report):
    sys_ = load_or_build(config)
    report.system = _sys_info(sys_)
    _warn_partial(sys_, report)
    if config.L is None:
        raise TLCatError("--L is required")
    strands = config.strands
    if strands is None:
        defaults = DEFAULT_CHAIN.get(_kind_of(sys_))
        if defaults is None:
            raise TLCatError("give --strand/--strands for a system loaded from a file")
        strands = [defaults[0]]
    if len(strands) == 1:
        strands = strands * config.L
    if len(strands) != config.L:
        raise TLCatError(f"expected {config.L} strands, got {len(strands)}")
    start = None if config.start is None else [_coerce(x, sys_) for x in config.start]
    end = None if config.end is None else [_coerce(x, sys_) for x in config.end]
    basis = make_basis(sys_, [_coerce(x, sys_) for x in strands], start=start, end=end, closed=config.periodic)
    report.flag("nonempty_basis", len(basis) > 0)
    report.details["basis"] = {"size": len(basis), "states": [list(s) for s in basis.states]}


def _tl_checks(sys_, config, report, precheck=True):
    tol = config.tolerance
    if precheck:
        pent = check_pentagon(sys_, tol)
        report.check("pentagon_precheck", pent.max_residual, tol)
        report.details["pentagon"] = {"max_residual": pent.max_residual, "worst": pent.worst}
    strands, targets, start = _chain_labels(config, sys_)
    chain = ChainSpec(sys_, tuple(strands), tuple(targets), start=tuple(start) if start else None,
                      periodic=config.periodic, c0=config.c0)
    report.details["simplicity"] = {str(i): simplicity(chain, i) for i in range(1, chain.n_constants + 1)}
    family = build_family(chain, tolerance=tol)
    rep = verify_tl(family, tol)
    for name in ("loop", "commute", "cubic_right", "cubic_left"):
        if not rep.applicable[name]:
            continue
        if name == "loop" and config.periodic:
            # on a ring d_j may alternate between c0 and 1/(c c0)
            report.check("loop_per_generator", rep.extra["individual_loops"], tol)
            continue
        report.check(name, rep.residuals[name], tol)
    if chain.n_constants and not config.periodic:
        th = verify_projection_relations(family, tol)
        report.check("projection_cubic_right", th.right, tol)
        report.check("projection_cubic_left", th.left, tol)
        report.check("c_matrix_vs_formula", th.c_mismatch, tol)
        report.check("projection_idempotent", th.idempotency, tol)
        report.flag("sector_preserving", th.sector_preserving)
    if chain.n_constants and chain.is_homogeneous():
        hom = verify_c_homogeneity(chain, tol)
        report.check("c_homogeneity", hom.max_deviation, tol)
    report.details["tl"] = {
        "basis_size": rep.basis_size, "c0": family.c0, "delta": rep.delta, "c": family.constants,
        "d": family.loops, "residuals": rep.residuals,
        "not_applicable": [k for k, v in rep.applicable.items() if not v],
    }
    return chain


def cmd_verify_tl(config, report):
    sys_ = load_or_build(config)
    report.system = _sys_info(sys_)
    _warn_partial(sys_, report)
    _tl_checks(sys_, config, report)


def cmd_schur_weyl(config, report):
    from .schur_weyl import SchurWeylSetup, jones_wenzl, jones_wenzl_oracle, verify_pos_vs_fsymbol

    if config.L is None:
        raise TLCatError("--L is required")
    q = complex(config.q if config.q is not None else 1.3)
    tol = config.tolerance
    sw = verify_pos_vs_fsymbol(config.L, q, tolerance=max(tol, 1e-9))
    report.system = {"name": f"su2_generic(q={q}, max_label={max(config.L, 2)})", "fingerprint": None}
    for name, (res, thr) in sw.checks.items():
        report.check(name, res, thr, strict=thr == 0)
    setup = SchurWeylSetup(config.L, q, tol)
    jw = {}
    worst_prop = worst_oracle = 0.0
    for m in range(3, config.L + 2):
        E = jones_wenzl(m, config.L, q, setup=setup, tolerance=1.0)
        prop = (E @ E - E).norm_max()
        for i in range(1, m - 1):
            prop = max(prop, (E @ setup.generators[i]).norm_max(), (setup.generators[i] @ E).norm_max())
        orc = (E - jones_wenzl_oracle(m, setup)).norm_max()
        jw[m] = {"properties": prop, "oracle": orc}
        worst_prop, worst_oracle = max(worst_prop, prop), max(worst_oracle, orc)
    report.check("jones_wenzl_properties", worst_prop, tol)
    report.check("jones_wenzl_oracle", worst_oracle, max(tol, 1e-9))
    if sw.complex_q:
        report.warnings.append("complex q: square-root branches are principal")
    report.details["schur_weyl"] = {
        "L": config.L, "q": q, "delta": sw.delta, "per_generator": sw.per_generator,
        "pos_elements": sw.pos_elements, "f_identity": sw.f_identity, "jones_wenzl": jw,
        "transpose": "plain transpose of the rank-one structure",
    }


def cmd_report(config, report):
    sys_ = load_or_build(config)
    report.system = _sys_info(sys_)
    _warn_partial(sys_, report)
    _validate_checks(sys_, report, config.tolerance)
    if config.L is not None:
        chain = _tl_checks(sys_, config, report, precheck=False)
        if config.periodic and chain.is_homogeneous() and chain.n_constants:
            pr = periodic_constraint_check(chain, config.tolerance)
            report.flag("periodic_constraint", pr.ok)
            report.details["periodic"] = {"L": pr.L, "c": pr.c, "trials": pr.trials}


HANDLERS = {"validate": cmd_validate, "basis": cmd_basis, "verify-tl": cmd_verify_tl,
            "schur-weyl": cmd_schur_weyl, "report": cmd_report}


def run(config: RunConfig):
    """Execute ``config``; returns ``(exit_status, report_dict)``.

    ``emit-category`` returns the serialized system under ``"document"``.
    """
    try:
        if config.command == "emit-category":
            if config.input is not None:
                raise TLCatError("emit-category builds a system from --kind, not --input")
            sys_ = load_or_build(config)
            return 0, {"command": config.command, "passed": True, "document": dumps_system(sys_)}
        report = Report(config)
        HANDLERS[config.command](config, report)
        out = report.as_dict()
        return (0 if report.passed else 1), out
    except (TLCatError, OSError, ValueError) as err:
        return 2, error_record(config, err)
    except Exception as err:  # still a record, never a traceback
        rec = error_record(config, err)
        rec["error"]["internal"] = True
        return 2, rec


# -- argument parsing ---------------------------------------------------------

def _parse_c0(text):
    if text in ("auto", "-auto"):
        return text
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"c0 must be 'auto', '-auto' or a number, got {text!r}") from None


def _parse_labels(text):
    return [x for x in text.replace(",", " ").split() if x]


def _default_tolerance():
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None:
        return DEFAULT_TOLERANCE
    try:
        return float(raw)
    except ValueError:
        raise TLCatError(f"{TOLERANCE_ENV}={raw!r} is not a number") from None


class _Parser(argparse.ArgumentParser):
    """Parse errors become exceptions so they can be reported as records."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class UsageError(TLCatError):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--input", "-i", help="monoidal system file (JSON)")
    src.add_argument("--kind", help="built-in category: su2, su2_level, fibonacci, ising")
    common.add_argument("--q", type=complex, help="q for su2 (modulus when --q-phase is given)")
    common.add_argument("--q-phase", type=float, help="q = |q| exp(i * phase)")
    common.add_argument("--max-label", type=int, help="largest su2 label (twice the spin)")
    common.add_argument("--level", type=int, help="level k for su2_level")
    common.add_argument("--L", "-L", type=int, dest="L", help="number of strands")
    common.add_argument("--strand", help="label on every strand")
    common.add_argument("--target", help="fusion channel for every projection")
    common.add_argument("--strands", type=_parse_labels, help="comma separated strand labels")
    common.add_argument("--targets", type=_parse_labels, help="comma separated channel labels")
    common.add_argument("--start", type=_parse_labels, help="allowed mu_0 labels")
    common.add_argument("--end", type=_parse_labels, help="allowed mu_L labels")
    common.add_argument("--c0", type=_parse_c0, default="auto", help="'auto' (1/sqrt c), '-auto' or a number")
    common.add_argument("--periodic", action="store_true", help="periodic chain / closed paths")
    common.add_argument("--tolerance", type=float, default=None, help=f"default from ${TOLERANCE_ENV} or 1e-10")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")

    parser = _Parser(prog="tlcat", description="Temperley-Lieb representations from F-symbols.")
    parser.add_argument("--version", action="version", version=f"tlcat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("validate", "check fusion rules, unit constraints, inverses and the pentagon"),
                       ("emit-category", "write a built-in category in the file format"),
                       ("basis", "enumerate the fusion-path basis"),
                       ("verify-tl", "build and verify the Temperley-Lieb generators"),
                       ("schur-weyl", "compare su2 generators with the pairs-of-sequences action"),
                       ("report", "validation plus TL verification in one report")):
        p = sub.add_parser(name, parents=[common], help=text)
        if name in ("validate", "report"):
            p.add_argument("file", nargs="?", help="same as --input")
    return parser


def config_from_args(ns) -> RunConfig:
    inp = ns.input
    if getattr(ns, "file", None):
        if inp is not None or ns.kind is not None:
            raise TLCatError("give the system either positionally or with --input/--kind")
        inp = ns.file
    q = ns.q
    if ns.q_phase is not None:
        q = (abs(q) if q is not None else 1.0) * cmath.exp(1j * ns.q_phase)
    strands = ns.strands or ([ns.strand] if ns.strand else None)
    targets = ns.targets or ([ns.target] if ns.target else None)
    if ns.strands and ns.strand or ns.targets and ns.target:
        raise TLCatError("use either --strand or --strands (and --target or --targets)")
    tol = ns.tolerance if ns.tolerance is not None else _default_tolerance()
    return RunConfig(ns.command, input=inp, kind=ns.kind, q=q, max_label=ns.max_label, level=ns.level, L=ns.L,
                     strands=strands, targets=targets, start=ns.start, end=ns.end, c0=ns.c0,
                     periodic=ns.periodic, tolerance=tol, format=ns.format, output=ns.output)


def render_text(out: dict) -> str:
    if "error" in out:
        return f"ERROR [{out['command']}] {out['error']['type']}: {out['error']['message']}\n"
    lines = [f"tlcat {out['version']} {out['command']}"]
    if out.get("system"):
        lines.append(f"system: {out['system']['name']}  fingerprint: {out['system'].get('fingerprint')}")
    for w in out.get("warnings", []):
        lines.append(f"warning: {w}")
    for c in out["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        lines.append(f"{mark}  {c['name']:<28} residual={c['residual']:.3e}  threshold={c['threshold']:.1e}")
    basis = out.get("details", {}).get("basis")
    if basis:
        lines.append(f"basis size: {basis['size']}")
        lines.extend("|" + ",".join(str(x) for x in s) + ">" for s in basis["states"])
    lines.append("overall: " + ("PASS" if out["passed"] else "FAIL"))
    return "\n".join(lines) + "\n"


def emit(out: dict, config: RunConfig | None):
    fmt = config.format if config else "json"
    if "document" in out:
        text = out["document"]
    elif fmt == "text":
        text = render_text(out)
    else:
        text = json.dumps(out, indent=2, ensure_ascii=False) + "\n"
    path = config.output if config else None
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except UsageError as err:
        sys.stderr.write(parser.format_usage())
        emit(error_record(None, err), None)
        return 2
    try:
        config = config_from_args(ns)
    except TLCatError as err:
        emit(error_record(ns.command, err), None)
        return 2
    status, out = run(config)
    try:
        emit(out, config)
    except OSError as err:
        emit(error_record(config, err), None)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
