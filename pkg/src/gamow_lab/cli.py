"""gamow-lab command line: survival, norm, fit, fermi, relativistic.

Exit codes: 0 success, 2 invalid input/config, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import dynamics, fitting, relativistic, spectral
from .config import ConfigError, load_config, parse_assignment
from .errors import GamowLabError, PreconditionError, SeriesDomainError
from .units import HBAR, PRESETS, preset

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

COMMON_KEYS = {"line.preset", "line.e_r", "line.gamma", "support", "tol", "seed", "format"}
TIME_KEYS = {"time.min", "time.max", "time.count", "time.spacing", "time.unit"}
PSI_KEYS = {"psi.pole", "psi.order", "psi.normalize"}
COMMAND_KEYS = {
    "survival": TIME_KEYS | PSI_KEYS | {"survival.quantity"},
    "norm": {"norm.order"},
    "fit": {"fit.noise", "fit.n_initial", "fit.bins", "fit.t_max", "fit.energy_halfwidth",
            "fit.energy_count", "fit.lineshape_file", "fit.counts_file", "fit.agreement",
            "fit.tau", "fit.poisson"},
    "fermi": TIME_KEYS | PSI_KEYS | {"fermi.r", "fermi.c"},
    "relativistic": {"rel.j", "rel.j3", "rel.mass", "rel.width", "rel.velocity",
                     "rel.transforms"},
}


class Invalid(ValueError):
    pass


# ---------------------------------------------------------------------------
# validated scenario pieces

def _num(cfg, key, default=None, positive=False, nonneg=False, integer=False):
    v = cfg.get(key, default)
    if v is None:
        raise Invalid(f"{key} is required")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise Invalid(f"{key} must be a number, got {v!r}")
    if integer and int(v) != v:
        raise Invalid(f"{key} must be an integer")
    if not math.isfinite(v):
        raise Invalid(f"{key} must be finite")
    if positive and not v > 0:
        raise Invalid(f"{key} must be positive")
    if nonneg and v < 0:
        raise Invalid(f"{key} must be non-negative")
    return int(v) if integer else float(v)


def _line(cfg):
    name = cfg.get("line.preset")
    if name is not None:
        if name not in PRESETS:
            raise Invalid(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
        if "line.e_r" in cfg or "line.gamma" in cfg:
            raise Invalid("give either line.preset or line.e_r/line.gamma, not both")
        return preset(name).line(), preset(name)
    return spectral.ResonanceLine(_num(cfg, "line.e_r", positive=True),
                                  _num(cfg, "line.gamma", positive=True)), None


def _support(cfg):
    try:
        return spectral.SpectralSupport.parse(cfg.get("support", "full"))
    except (ValueError, KeyError):
        raise Invalid(f"support must be half or full, got {cfg.get('support')!r}") from None


TIME_UNITS = ("tau", "natural", "s", "ns")


@dataclass(frozen=True)
class TimeGrid:
    values: np.ndarray      # in the requested unit
    unit: str

    def internal(self, line) -> np.ndarray:
        scale = {"tau": line.tau, "natural": 1.0, "s": 1.0 / HBAR, "ns": 1e-9 / HBAR}[self.unit]
        return self.values * scale


def _time_grid(cfg, default=(0.0, 5.0, 51)):
    lo = _num(cfg, "time.min", default[0])
    hi = _num(cfg, "time.max", default[1])
    n = _num(cfg, "time.count", default[2], integer=True)
    spacing = cfg.get("time.spacing", "linear")
    unit = cfg.get("time.unit", "tau")
    if unit not in TIME_UNITS:
        raise Invalid(f"time.unit must be one of {TIME_UNITS}")
    if n < 1 or (n > 1 and not hi > lo):
        raise Invalid("time grid needs count >= 1 and max > min")
    if spacing == "linear":
        vals = np.linspace(lo, hi, n)
    elif spacing == "log":
        if lo <= 0:
            raise Invalid("log spacing needs time.min > 0")
        vals = np.geomspace(lo, hi, n)
    else:
        raise Invalid("time.spacing must be linear or log")
    return TimeGrid(vals, unit)


def _psi(cfg, line):
    pole = complex(cfg.get("psi.pole", complex(line.e_r, line.e_r)))
    order = _num(cfg, "psi.order", 2, integer=True)
    if not pole.imag > 0:
        raise Invalid("psi.pole must lie in the upper half-plane")
    if order < 2:
        raise Invalid("psi.order must be at least 2")
    psi = spectral.RationalHardyFunction.power(pole, order).rational
    if cfg.get("psi.normalize", True):
        psi = psi * (1.0 / complex(psi(line.z_r)))
    return psi


def _tol(cfg):
    return _num(cfg, "tol", 1e-10, positive=True)


# ---------------------------------------------------------------------------
# output

@dataclass
class Table:
    command: str
    meta: list
    columns: list
    rows: list


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v) + 0.0:.15g}"
    return str(v)


def render(table: Table, fmt: str) -> str:
    if fmt == "json-doc":
        meta = {}
        for k, v in table.meta:
            meta.setdefault(k, []).append(float(v) if isinstance(v, np.floating) else v)
        meta = {k: v[0] if len(v) == 1 else v for k, v in meta.items()}
        doc = {"command": table.command, "meta": meta, "columns": table.columns,
               "rows": [[float(v) if isinstance(v, np.floating) else v for v in r]
                        for r in table.rows]}
        return json.dumps(doc, indent=2) + "\n"
    out = io.StringIO()
    out.write(f"# gamow-lab {table.command}\n")
    for k, v in table.meta:
        out.write(f"# {k}: {_fmt(v)}\n")
    out.write(",".join(table.columns) + "\n")
    for r in table.rows:
        out.write(",".join(_fmt(v) for v in r) + "\n")
    return out.getvalue()


def _line_meta(line, pre):
    meta = [("E_R", line.e_r), ("Gamma", line.gamma), ("tau_natural", line.tau)]
    if pre is not None:
        meta.insert(0, ("preset", pre.name))
    return meta


# ---------------------------------------------------------------------------
# commands

def cmd_survival(cfg):
    line, pre = _line(cfg)
    support = _support(cfg)
    grid = _time_grid(cfg)
    tol = _tol(cfg)
    quantity = cfg.get("survival.quantity", "amplitude")
    if quantity not in ("amplitude", "density"):
        raise Invalid("survival.quantity must be amplitude or density")
    psi = _psi(cfg, line)
    rows = []
    for tu, t in zip(grid.values, grid.internal(line)):
        if quantity == "amplitude":
            r = dynamics.gamow_amplitude_result(line, psi, t, support, tol)
        else:
            r = dynamics.survival_amplitude(line, support, t, tol)
        a = complex(r.value)
        rows.append([tu, a.real, a.imag, abs(a) ** 2, r.abs_error_estimate])
    meta = _line_meta(line, pre) + [("support", support.value), ("quantity", quantity),
                                    ("time_unit", grid.unit), ("tol", tol)]
    return Table("survival", meta, ["t", "re_A", "im_A", "abs_A2", "error"], rows)


def cmd_norm(cfg):
    line, pre = _line(cfg)
    order = _num(cfg, "norm.order", 4, integer=True)
    if order < 0:
        raise Invalid("norm.order must be a non-negative integer")
    closed = spectral.norm_truncated_closed_form(line)
    rows = [["closed_form", "half", closed, 0.0]]
    for k in range(order + 1):
        s = spectral.norm_truncated_series(line, k)
        rows.append([f"series_order_{k}", "half", s, s - closed])
    rows.append(["full_line", "full", spectral.norm_full_line(line), 0.0])
    meta = _line_meta(line, pre) + [("x=Gamma/2E_R", line.gamma / (2 * line.e_r))]
    return Table("norm", meta, ["row", "support", "norm2", "minus_closed_form"], rows)


def _fit_inputs(cfg, line, pre):
    seed = _num(cfg, "seed", 0, integer=True)
    noise = _num(cfg, "fit.noise", 0.0, nonneg=True)
    poisson = bool(cfg.get("fit.poisson", noise > 0))
    n_initial = _num(cfg, "fit.n_initial", 1e6 if poisson else 1e12, positive=True)
    bins = _num(cfg, "fit.bins", 20, integer=True)
    t_max = _num(cfg, "fit.t_max", 5.0, positive=True)
    halfwidth = _num(cfg, "fit.energy_halfwidth", 10.0, positive=True)
    e_count = _num(cfg, "fit.energy_count", 401, integer=True)
    if bins < 3 or e_count < 5:
        raise Invalid("need fit.bins >= 3 and fit.energy_count >= 5")
    tau = cfg.get("fit.tau", pre.tau if pre is not None and pre.tau else None)
    tau = HBAR / line.gamma if tau is None else _num(cfg, "fit.tau", tau, positive=True)
    if "fit.lineshape_file" in cfg:
        sample = fitting.load_lineshape(cfg["fit.lineshape_file"])
    else:
        e = np.linspace(line.e_r - halfwidth * line.gamma, line.e_r + halfwidth * line.gamma,
                        e_count)
        peak = 4.0 / line.gamma ** 2
        sample = fitting.generate_lineshape(line, e, 1.0, noise * peak, seed)
    if "fit.counts_file" in cfg:
        counts = fitting.load_counts(cfg["fit.counts_file"])
    else:
        rate_line = spectral.ResonanceLine(line.e_r, HBAR / tau)
        edges = np.linspace(0.0, t_max * tau, bins + 1)
        counts = fitting.generate_decay_counts(rate_line, edges, int(n_initial), seed + 1,
                                               poisson, hbar=HBAR)
    return sample, counts, seed, noise, tau


def cmd_fit(cfg):
    line, pre = _line(cfg)
    agreement = _num(cfg, "fit.agreement", 0.10, positive=True)
    sample, counts, seed, noise, tau_in = _fit_inputs(cfg, line, pre)
    shape = fitting.fit_lineshape(sample)
    rate = fitting.fit_decay_rate(counts, hbar=HBAR)
    rep = fitting.compare_width_lifetime(shape.gamma, rate.gamma_r, shape.gamma_err,
                                         rate.gamma_r_err)
    tau_width = HBAR / shape.gamma
    u = rep.uncertainties
    rows = [
        ["E_R_fit_eV", shape.e_r, shape.e_r_err],
        ["Gamma_fit_eV", shape.gamma, u["gamma_fit"]],
        ["tau_from_Gamma_ns", tau_width * 1e9, tau_width * shape.gamma_err / shape.gamma * 1e9],
        ["Gamma_R_fit_eV", rep.gamma_r_fit, u["gamma_r_fit"]],
        ["tau_fit_ns", rep.tau_fit * 1e9, u["tau_fit"] * 1e9],
        ["ratio_Gamma_over_Gamma_R", rep.ratio, u["ratio"]],
    ]
    verdict = "PASS" if rep.agrees(agreement) else "FAIL"
    meta = _line_meta(line, pre) + [("hbar_eV_s", HBAR), ("seed", seed), ("noise", noise),
                                    ("tau_generating_s", tau_in), ("agreement_window", agreement),
                                    ("width_lifetime_agreement", verdict)]
    return Table("fit", meta, ["quantity", "value", "std_error"], rows)


def cmd_fermi(cfg):
    line, pre = _line(cfg)
    grid = _time_grid(cfg, default=(-2.0, 5.0, 29))
    tol = _tol(cfg)
    r = _num(cfg, "fermi.r", 0.0)
    c = _num(cfg, "fermi.c", 1.0)
    if r < 0:
        raise Invalid("fermi.r must be non-negative")
    if not c > 0:
        raise Invalid("fermi.c must be positive")
    psi = _psi(cfg, line)
    # r and c are read in the time unit of the grid (c = 1 means r is a light-travel time)
    scale = float(TimeGrid(np.array([1.0]), grid.unit).internal(line)[0])
    rows = []
    for tu, t in zip(grid.values, grid.internal(line)):
        row = [tu]
        for support in (spectral.SpectralSupport.FULL_LINE, spectral.SpectralSupport.HALF_LINE):
            res = dynamics.gamow_amplitude_result(line, psi, t - r / c * scale, support, tol)
            row += [abs(complex(res.value)) ** 2, res.abs_error_estimate]
        rows.append(row)
    meta = _line_meta(line, pre) + [("r", r), ("c", c), ("retardation", r / c),
                                    ("time_unit", grid.unit), ("tol", tol)]
    return Table("fermi", meta, ["t", "P_full", "error_full", "P_half", "error_half"], rows)


def _transform(item, i):
    if not isinstance(item, dict):
        raise Invalid(f"rel.transforms[{i}] must be a dict")
    unknown = set(item) - {"boost", "rotation", "x"}
    if unknown:
        raise Invalid(f"rel.transforms[{i}]: unknown keys {sorted(unknown)}")
    try:
        lam = relativistic.LorentzTransform.identity()
        if "rotation" in item:
            *axis, angle = item["rotation"]
            if len(axis) != 3:
                raise Invalid(f"rel.transforms[{i}].rotation must be [ax, ay, az, angle]")
            lam = relativistic.rotation(axis, float(angle)) @ lam
        if "boost" in item:
            v = [float(c) for c in item["boost"]]
            if len(v) != 3:
                raise Invalid(f"rel.transforms[{i}].boost must be a 3-velocity")
            lam = relativistic.boost(v) @ lam
        x = [float(c) for c in item.get("x", [0.0, 0.0, 0.0, 0.0])]
        if len(x) != 4:
            raise Invalid(f"rel.transforms[{i}].x must be [t, x, y, z]")
    except (TypeError, ValueError) as exc:
        raise Invalid(f"rel.transforms[{i}]: {exc}") from None
    return lam, relativistic.FourVector(x[0], tuple(x[1:]))


def cmd_relativistic(cfg):
    if "line.preset" in cfg or "line.e_r" in cfg:
        line, pre = _line(cfg)
        mass_default, width_default = line.e_r, line.gamma
    else:
        pre, mass_default, width_default = None, 1.0, 0.1
    mass = _num(cfg, "rel.mass", mass_default, positive=True)
    width = _num(cfg, "rel.width", width_default, nonneg=True)
    j = _num(cfg, "rel.j", 0.5, nonneg=True)
    j3 = _num(cfg, "rel.j3", j)
    v = cfg.get("rel.velocity", [0.0, 0.0, 0.0])
    transforms = cfg.get("rel.transforms", [{"x": [1.0 / width if width else 1.0, 0, 0, 0]}])
    if not isinstance(transforms, (list, tuple)) or not transforms:
        raise Invalid("rel.transforms must be a non-empty list of dicts")
    try:
        label = relativistic.GamowLabel.from_mass_width(j, mass, width,
                                                        relativistic.four_velocity(v), j3)
    except (TypeError, ValueError) as exc:
        raise Invalid(f"invalid Gamow label: {exc}") from None
    parsed = [_transform(s, i) for i, s in enumerate(transforms)]
    rows = []
    for i, (lam, x) in enumerate(parsed):
        out = relativistic.transform_gamow(label, lam, x)
        base = [i, x.t, *x.x]
        if isinstance(out, relativistic.CausalityRejection):
            rows.append(base + ["REJECTED: outside forward cone", "", "", "", "", ""])
            continue
        comps = ";".join(f"{c.real:.12g}{c.imag:+.12g}j" for c in out.components)
        newp = ";".join(f"{c:.12g}" for c in out.new_p_hat)
        rows.append(base + ["ACCEPTED", out.phase.real, out.phase.imag, abs(out.phase) ** 2,
                            comps, newp])
    meta = [("j", j), ("j3", j3), ("mass", mass), ("width", width),
            ("p_hat", ";".join(f"{c:.12g}" for c in label.p_hat))]
    if pre is not None:
        meta.insert(0, ("preset", pre.name))
    return Table("relativistic", meta,
                 ["index", "t", "x", "y", "z", "status", "re_phase", "im_phase", "abs_phase2",
                  "components", "new_p_hat"], rows)


COMMANDS = {"survival": cmd_survival, "norm": cmd_norm, "fit": cmd_fit, "fermi": cmd_fermi,
            "relativistic": cmd_relativistic}

CONVENTIONS = [
    "units: hbar = c = 1 internally; hbar = 6.582119569e-16 eV s for reporting",
    "time evolution exp(-i H t); resonance pole z_R = E_R - i Gamma/2",
    "theta(0) = 1: the t = 0 point belongs to the decaying branch",
    "psi default: 1/(w - E_R(1+i))^2 scaled so psi(z_R) = 1",
]


def explain(cfg) -> list:
    lines = list(CONVENTIONS)
    name = cfg.get("line.preset")
    if name in PRESETS:
        p = PRESETS[name]
        lines.append(f"preset {p.name}: {p.note}")
    return lines


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="gamow-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat key = value scenario file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config value (repeatable)")
    ap.add_argument("--format", choices=["csv", "json-doc"])
    ap.add_argument("--tol", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--explain", action="store_true",
                    help="add conventions and preset sources to the output header")
    return ap


def resolve_config(args) -> dict:
    cfg = load_config(args.config) if args.config else {}
    for item in args.set:
        k, v = parse_assignment(item)
        cfg[k] = v
    if args.format is not None:
        cfg["format"] = args.format
    if args.tol is not None:
        cfg["tol"] = args.tol
    if args.seed is not None:
        cfg["seed"] = args.seed
    unknown = set(cfg) - COMMON_KEYS - COMMAND_KEYS[args.command]
    if unknown:
        raise Invalid(f"unknown keys for {args.command}: {', '.join(sorted(unknown))}")
    if cfg.get("format", "csv") not in ("csv", "json-doc"):
        raise Invalid("format must be csv or json-doc")
    return cfg


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        table = COMMANDS[args.command](cfg)
    except (Invalid, ConfigError, PreconditionError, SeriesDomainError, KeyError) as exc:
        print(f"gamow-lab: invalid input: {exc}", file=stderr)
        return EXIT_INVALID
    except (GamowLabError, ArithmeticError) as exc:
        print(f"gamow-lab: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    if args.explain:
        table.meta += [("explain", s) for s in explain(cfg)]
    stdout.write(render(table, cfg.get("format", "csv")))
    return EXIT_OK


def main(argv=None):
    try:
        code = run(argv)
    except SystemExit as exc:      # argparse usage errors
        code = EXIT_INVALID if exc.code else EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
