"""Study driver: config parsing, convergence/stability/penalty studies, CSV output.

Configs are plain ``key = value`` text with ``#`` comments.  Time steps may
be given as fraction literals (``dt = 1/2048``) to avoid decimal rounding.
A run writes one CSV row per (scheme, k, n, dt) with the six error norms,
and prints a human-readable rate table to standard output.
"""

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .assembly import assemble_system
from .errors import convergence_rate, error_norms
from .linalg import SolverError
from .manufactured import ManufacturedCase
from .material import PronyMaterial
from .mesh import build_structured_mesh
from .space import DGSpace
from .stepper import Scheme, run

CSV_HEADER = "scheme,k,n,h,dt,err_u_L2,err_u_H1,err_u_energy,err_w_L2,err_w_H1,err_w_energy"

_STUDIES = ("single", "hconv", "tconv", "penalty", "stability")
_SCHEMES = ("displacement", "velocity", "both")


class ConfigError(ValueError):
    pass


@dataclass
class StudyConfig:
    study: str = "single"
    scheme: str = "both"
    k: int = 1
    ns: list[int] = field(default_factory=lambda: [4])
    dts: list[float | None] = field(default_factory=lambda: [0.25])
    T: float = 1.0
    alpha0: float = 10.0
    beta0: float = 1.0
    rho: float = 1.0
    phi0: float = 0.5
    phis: tuple[float, ...] = (0.1, 0.4)
    taus: tuple[float, ...] = (0.5, 1.5)
    out: str | None = None

    def validate(self):
        if self.study not in _STUDIES:
            raise ConfigError(f"unknown study '{self.study}'")
        if self.scheme not in _SCHEMES:
            raise ConfigError(f"unknown scheme '{self.scheme}'")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.alpha0 <= 0:
            raise ConfigError("alpha0 must be positive")
        if self.beta0 < 1:
            raise ConfigError("beta0 must be >= 1")
        if any(n < 1 for n in self.ns):
            raise ConfigError("mesh subdivisions must be >= 1")
        for dt in self.dts:
            if dt is not None:
                if dt <= 0:
                    raise ConfigError("dt must be positive")
                n_steps = self.T / dt
                if abs(round(n_steps) - n_steps) > 1e-9:
                    raise ConfigError(f"T={self.T} is not an integral multiple of dt={dt}")
        try:
            self.material()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def material(self) -> PronyMaterial:
        return PronyMaterial(self.rho, self.phi0, self.phis, self.taus)

    def schemes(self) -> list[Scheme]:
        if self.scheme == "both":
            return [Scheme.DISPLACEMENT, Scheme.VELOCITY]
        return [Scheme(self.scheme)]


def _parse_number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _parse_dt(text: str):
    if text.strip().lower() == "h":
        return None  # resolved per mesh as 1/n
    return _parse_number(text)


def parse_config(text: str) -> StudyConfig:
    """Parse ``key = value`` lines into a validated StudyConfig."""
    cfg = StudyConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key == "study":
                cfg.study = value
            elif key == "scheme":
                cfg.scheme = value
            elif key == "k":
                cfg.k = int(value)
            elif key == "n":
                cfg.ns = [int(value)]
            elif key == "ns":
                cfg.ns = [int(v) for v in value.split(",")]
            elif key == "dt":
                cfg.dts = [_parse_dt(value)]
            elif key == "dts":
                cfg.dts = [_parse_dt(v) for v in value.split(",")]
            elif key == "T":
                cfg.T = _parse_number(value)
            elif key == "alpha0":
                cfg.alpha0 = _parse_number(value)
            elif key == "beta0":
                cfg.beta0 = _parse_number(value)
            elif key == "rho":
                cfg.rho = _parse_number(value)
            elif key == "phi0":
                cfg.phi0 = _parse_number(value)
            elif key == "phis":
                cfg.phis = tuple(_parse_number(v) for v in value.split(","))
            elif key == "taus":
                cfg.taus = tuple(_parse_number(v) for v in value.split(","))
            elif key == "out":
                cfg.out = value
            else:
                raise ConfigError(f"line {lineno}: unknown key '{key}'")
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for '{key}': {value}") from exc
    cfg.validate()
    return cfg


def _run_one(cfg: StudyConfig, scheme: Scheme, n: int, dt: float, cache: dict):
    """Solve one configuration and return its ErrorReport."""
    key = (cfg.k, n)
    if key not in cache:
        mesh = build_structured_mesh(n)
        space = DGSpace.build(mesh, cfg.k)
        system = assemble_system(space, cfg.material(), cfg.alpha0, cfg.beta0)
        cache[key] = (space, system)
    space, system = cache[key]
    case = ManufacturedCase(cfg.material())
    state = run(
        scheme,
        space,
        system,
        case.material,
        cfg.T,
        dt,
        u0=case.displacement_at(0.0),
        grad_u0=case.grad_displacement_at(0.0),
        w0=case.velocity_at(0.0),
        body_force=case.body_force_at,
        traction=case.traction_at,
    )
    return error_norms(state, case, space, system, dt=dt)


def _csv_row(report, scheme: Scheme, k: int, n: int) -> str:
    vals = ",".join(f"{v:.6e}" for v in report.as_row())
    return f"{scheme.value},{k},{n},{report.h:.6e},{report.dt:.6e},{vals}"


_NORM_NAMES = ("u_L2", "u_H1", "u_energy", "w_L2", "w_H1", "w_energy")


def _rate_table(rows_by_scheme: dict, scales: list[float], out) -> None:
    for scheme, reports in rows_by_scheme.items():
        if len(reports) < 2:
            continue
        print(f"convergence rates ({scheme.value} form):", file=out)
        header = "  ".join(f"{name:>9}" for name in _NORM_NAMES)
        print(f"  {'pair':>13}  {header}", file=out)
        errs = np.array([r.as_row() for r in reports])
        for i in range(1, len(reports)):
            rates = [
                convergence_rate(errs[i - 1 : i + 1, j], scales[i - 1 : i + 1])[0]
                for j in range(6)
            ]
            label = f"{scales[i - 1]:.4g}->{scales[i]:.4g}"
            print(f"  {label:>13}  " + "  ".join(f"{r:9.2f}" for r in rates), file=out)


def run_study(cfg: StudyConfig, out=None) -> list[str]:
    """Execute a study; returns the CSV rows (also written to cfg.out if set)."""
    if out is None:
        out = sys.stdout
    cache: dict = {}
    csv_rows = [CSV_HEADER]

    if cfg.study == "stability":
        _run_stability(cfg, out, cache)
        return csv_rows

    if cfg.study in ("single", "hconv", "penalty"):
        runs = [(n, (1.0 / n) if dt is None else dt) for n in cfg.ns for dt in cfg.dts[:1]]
        scales = [np.sqrt(2.0) / n for n in cfg.ns]
    else:  # tconv
        n = cfg.ns[0]
        runs = [(n, (1.0 / n) if dt is None else dt) for dt in cfg.dts]
        scales = [dt for _, dt in runs]

    rows_by_scheme: dict = {}
    for scheme in cfg.schemes():
        reports = []
        for n, dt in runs:
            report = _run_one(cfg, scheme, n, dt, cache)
            reports.append(report)
            csv_rows.append(_csv_row(report, scheme, cfg.k, n))
        rows_by_scheme[scheme] = reports

    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write("\n".join(csv_rows) + "\n")
    if len(runs) > 1:
        _rate_table(rows_by_scheme, scales, out)
    else:
        print("\n".join(csv_rows), file=out)
    return csv_rows


def _run_stability(cfg: StudyConfig, out, cache: dict) -> None:
    """Max-over-steps energy for T=5 and T=10 with homogeneous loads."""
    from .stepper import Scheme

    n = cfg.ns[0]
    dt = cfg.dts[0] if cfg.dts[0] is not None else 1.0 / n
    key = (cfg.k, n)
    if key not in cache:
        mesh = build_structured_mesh(n)
        space = DGSpace.build(mesh, cfg.k)
        system = assemble_system(space, cfg.material(), cfg.alpha0, cfg.beta0)
        cache[key] = (space, system)
    space, system = cache[key]
    case = ManufacturedCase(cfg.material())
    energy_matrix = system.A_vol + system.J

    for scheme in cfg.schemes():
        maxima = {}
        for horizon in (5.0, 10.0):
            peak = 0.0

            def track(state):
                nonlocal peak
                e = state.W @ (system.M @ state.W) + state.U @ (energy_matrix @ state.U)
                peak = max(peak, float(e))

            run(
                scheme,
                space,
                system,
                case.material,
                horizon,
                dt,
                u0=case.displacement_at(0.0),
                grad_u0=case.grad_displacement_at(0.0),
                w0=case.velocity_at(0.0),
                diagnostics=track,
            )
            maxima[horizon] = peak
        ratio = maxima[10.0] / maxima[5.0]
        print(
            f"stability ({scheme.value} form): max energy T=5: {maxima[5.0]:.6e}  "
            f"T=10: {maxima[10.0]:.6e}  ratio: {ratio:.6f}",
            file=out,
        )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="viscodg",
        description="SIPG viscoelasticity solver: convergence and stability studies",
    )
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--study", choices=_STUDIES)
    parser.add_argument("--scheme", choices=_SCHEMES)
    parser.add_argument("--k", type=int)
    parser.add_argument("--n", help="mesh subdivisions, comma separated")
    parser.add_argument("--dt", help="time step ('1/2048', '0.25' or 'h'), comma separated")
    parser.add_argument("--T", type=float)
    parser.add_argument("--alpha0", type=float)
    parser.add_argument("--beta0", type=float)
    parser.add_argument("--out", help="CSV output path")
    args = parser.parse_args(argv)

    try:
        if args.config:
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
        else:
            cfg = StudyConfig()
        if args.study:
            cfg.study = args.study
        if args.scheme:
            cfg.scheme = args.scheme
        if args.k is not None:
            cfg.k = args.k
        if args.n:
            cfg.ns = [int(v) for v in args.n.split(",")]
        if args.dt:
            cfg.dts = [_parse_dt(v) for v in args.dt.split(",")]
        if args.T is not None:
            cfg.T = args.T
        if args.alpha0 is not None:
            cfg.alpha0 = args.alpha0
        if args.beta0 is not None:
            cfg.beta0 = args.beta0
        if args.out:
            cfg.out = args.out
        cfg.validate()
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        run_study(cfg)
    except SolverError as exc:
        print(
            f"solver failure (alpha0={cfg.alpha0}, k={cfg.k}, ns={cfg.ns}): {exc}",
            file=sys.stderr,
        )
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
