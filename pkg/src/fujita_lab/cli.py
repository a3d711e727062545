"""Command-line front end.

Every command takes its settings from ``--config FILE`` (plain ``key = value``
lines, ``#`` comments) and/or from command-line flags of the same names;
flags win.  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Key:
    type: type
    default: object = None
    help: str = ""
    choices: tuple | None = None


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    return [float(x) for x in str(s).replace(",", " ").split()]


COMMON = {
    "N": Key(int, None, "space dimension"),
    "p": Key(float, None, "exponent"),
}

SCHEMAS = {
    "exponents": {
        "N": Key(int, None, "space dimension"),
        "N_to": Key(int, None, "last dimension of a range"),
        "out": Key(str, None, "CSV path"),
    },
    "steady": {
        **COMMON,
        "frame": Key(str, "selfsimilar", choices=("selfsimilar", "physical")),
        "alpha_min": Key(float, None, "smallest center value (default: just above kappa)"),
        "alpha_max": Key(float, None, "largest center value (default: 10 kappa)"),
        "steps": Key(int, 64),
        "rmax": Key(float, None),
        "find_k": Key(int, None, "also bisect for a member of A_k"),
        "bracket": Key(_floats, None, "alpha bracket for find_k, two numbers"),
        "out": Key(str, "atlas.csv"),
    },
    "energy-ratio": {
        "N": Key(int, None),
        "p_min": Key(float, None),
        "p_max": Key(float, None),
        "steps": Key(int, 50),
        "out": Key(str, "energy_ratio.csv"),
        "svg": Key(str, None, "figure path (default: CSV path with .svg; empty disables)"),
    },
    "spectrum": {
        **COMMON,
        "jmax": Key(int, 5),
        "alpha": Key(float, 1.0),
        "s_min": Key(float, -8.0),
        "s_max": Key(float, -4.0),
        "s_steps": Key(int, 17),
        "grid_points": Key(int, 4000),
        "out": Key(str, "spectrum.csv"),
        "rate_out": Key(str, None),
    },
    "evolve": {
        **COMMON,
        "frame": Key(str, "selfsimilar", choices=("selfsimilar", "physical")),
        "R": Key(float, 20.0),
        "n": Key(int, 2000),
        "bc": Key(str, "pinned", choices=("pinned", "neumann")),
        "initial": Key(str, "bump", choices=("constant", "flat_exact", "bump", "gaussian", "phi",
                                             "steady_mix", "random")),
        "amplitude": Key(float, 1.0),
        "width": Key(float, 1.0),
        "t0": Key(float, 0.0),
        "until": Key(float, 5.0),
        "n_out": Key(int, 50),
        "rtol": Key(float, 1e-8),
        "atol": Key(float, 1e-11),
        "k": Key(int, 2),
        "bracket": Key(_floats, None),
        "mix": Key(float, 0.05),
        "seed": Key(int, 0),
        "snapshots": Key(_floats, None, "times at which profiles are written"),
        "snapshot_prefix": Key(str, None),
        "out": Key(str, "run.csv"),
        "svg": Key(str, None),
    },
    "blowup": {
        **COMMON,
        "R": Key(float, 20.0),
        "n": Key(int, 2000),
        "bc": Key(str, "pinned", choices=("pinned", "neumann")),
        "initial": Key(str, "phi", choices=("constant", "phi", "bump", "gaussian")),
        "amplitude": Key(float, 1.5),
        "width": Key(float, 1.0),
        "until": Key(float, 10.0),
        "n_out": Key(int, 50),
        "rtol": Key(float, 1e-8),
        "atol": Key(float, 1e-11),
        "blowup_level": Key(float, 1e8),
        "out": Key(str, "blowup.csv"),
        "svg": Key(str, None, "figure path (default: CSV path with .svg; empty disables)"),
    },
}


def parse_config_text(text: str, schema: dict, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in schema:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _convert(schema[key], key, val)
    return out


def _convert(spec: Key, key, val):
    try:
        v = spec.type(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc
    if spec.choices and v not in spec.choices:
        raise ConfigError(f"{key} must be one of {', '.join(spec.choices)}")
    return v


def resolve(command: str, args: argparse.Namespace) -> dict:
    schema = SCHEMAS[command]
    cfg = {k: s.default for k, s in schema.items()}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg.update(parse_config_text(path.read_text(), schema, str(path)))
    for k, spec in schema.items():
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = _convert(spec, k, v)
    return cfg


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing required setting(s): {', '.join(missing)}")


def _params(cfg):
    from .params import make_params

    _need(cfg, "N", "p")
    return make_params(cfg["N"], cfg["p"])


def _positive(cfg, *keys):
    for k in keys:
        if cfg.get(k) is not None and not cfg[k] > 0:
            raise ConfigError(f"{k} must be positive")


# ---------------------------------------------------------------- commands

def cmd_exponents(cfg, out=None):
    out = out or sys.stdout
    from .io import atomic_csv, fmt
    from .params import exponent_table

    _need(cfg, "N")
    last = cfg["N_to"] if cfg["N_to"] is not None else cfg["N"]
    if last < cfg["N"]:
        raise ConfigError("N_to must be at least N")
    cols = ("N", "pS", "pStar", "pJL", "pL", "pH")
    rows = []
    for N in range(cfg["N"], last + 1):
        tab = exponent_table(N)
        rows.append([N] + [tab[c] for c in cols[1:]])
    print("  ".join(f"{c:>20}" for c in cols), file=out)
    for r in rows:
        print("  ".join(f"{fmt(x):>20}" for x in r), file=out)
    if cfg["out"]:
        atomic_csv(cfg["out"], cols, rows)


def cmd_steady(cfg, out=None):
    out = out or sys.stdout
    from . import energy, steady
    from .odecore import Frame

    P = _params(cfg)
    _positive(cfg, "alpha_min", "alpha_max", "steps", "rmax")
    frame = Frame(cfg["frame"])
    lo = cfg["alpha_min"] if cfg["alpha_min"] is not None else P.kappa * (1 + 9 / cfg["steps"])
    hi = cfg["alpha_max"] if cfg["alpha_max"] is not None else 10 * P.kappa
    if not hi >= lo:
        raise ConfigError("alpha_max must be at least alpha_min")
    alphas = np.linspace(lo, hi, cfg["steps"])
    states = steady.atlas_sweep(P, alphas, frame, cfg["rmax"])
    if cfg["find_k"] is not None:
        if not cfg["bracket"] or len(cfg["bracket"]) != 2:
            raise ConfigError("find_k needs bracket = lo hi")
        res = steady.find_Ak(P, cfg["find_k"], cfg["bracket"])
        if isinstance(res, steady.NotFound):
            print(f"find_k={cfg['find_k']}: not found ({res.reason}); bracket {res.bracket}", file=out)
        else:
            states.append(res)
    energies = []
    for st in states:
        if st.kind is steady.Kind.bounded_positive and frame is Frame.selfsimilar:
            energies.append(energy.steady_state_energy(st, P))
        else:
            energies.append(None)
    steady.write_atlas_csv(cfg["out"], states, energies)
    kinds = {}
    for st in states:
        kinds[st.kind.value] = kinds.get(st.kind.value, 0) + 1
    print(f"{len(states)} shots: " + ", ".join(f"{k}={v}" for k, v in sorted(kinds.items())), file=out)


def cmd_energy_ratio(cfg, out=None):
    out = out or sys.stdout
    from . import energy
    from .io import atomic_csv
    from .params import make_params

    _need(cfg, "N", "p_min", "p_max")
    if cfg["steps"] < 2:
        raise ConfigError("steps must be at least 2")
    N = cfg["N"]
    P0 = make_params(N, cfg["p_max"])
    if not cfg["p_min"] > P0.pS or not cfg["p_max"] > cfg["p_min"]:
        raise ConfigError(f"need pS = {P0.pS} < p_min < p_max")
    rows = []
    for p in np.linspace(cfg["p_min"], cfg["p_max"], cfg["steps"]):
        P = make_params(N, float(p))
        fg = energy.energy_ratio_F(P)
        fq = energy.energy_ratio_quadrature(P)
        rows.append((N, float(p), P.xi, fg, fq, abs(fq - fg) / fg))
    atomic_csv(cfg["out"], ("N", "p", "xi", "F_gamma", "F_quadrature", "abs_rel_diff"), rows)
    if cfg["svg"] != "":
        from .plotting import line_figure

        line_figure(_svg_path(cfg), [r[1] for r in rows], {"F(p)": [r[3] for r in rows]}, "p", "F",
                    f"energy ratio, N={N}")
    print(f"{len(rows)} rows, F from {rows[0][3]:.8g} to {rows[-1][3]:.8g}", file=out)


def cmd_spectrum(cfg, out=None):
    out = out or sys.stdout
    from . import spectrum
    from .io import atomic_csv

    P = _params(cfg)
    _positive(cfg, "alpha", "grid_points")
    fr = spectrum.build_frame(P, cfg["jmax"])
    disc = spectrum.discretize_A(fr, n=cfg["grid_points"], count=min(3, cfg["jmax"] + 1))
    rows = []
    for j in range(cfg["jmax"] + 1):
        rows.append((j, fr.mus[j], disc[j] if j < disc.size else None, fr.c_hat[j], len(fr[j].zeros())))
    atomic_csv(cfg["out"], ("j", "mu", "mu_discrete", "c_hat", "zeros"), rows)
    if cfg["rate_out"]:
        s = np.linspace(cfg["s_min"], cfg["s_max"], cfg["s_steps"])
        study = spectrum.rate_study(fr, cfg["alpha"], s)
        spectrum.write_rate_csv(cfg["rate_out"], fr, study)
        print(f"slope of log xi0: {study.slope:.8g} (mu0 = {fr.mus[0]:.8g})", file=out)
    print("mu: " + ", ".join(f"{m:.8g}" for m in fr.mus[:3]), file=out)


def _initial(cfg, P, frame):
    from . import steady

    kind, A, w = cfg["initial"], cfg["amplitude"], cfg["width"]
    m = P.m
    if kind == "constant":
        return lambda r: np.full_like(r, A)
    if kind == "flat_exact":
        if frame != "selfsimilar":
            raise ConfigError("flat_exact is a selfsimilar-frame solution")
        return lambda r: np.full_like(r, P.kappa * (1 + math.exp(cfg["t0"])) ** (-1 / (P.p - 1)))
    if kind == "bump":
        return lambda r: A * (1 + (r / w) ** 2) ** (-m / 2)
    if kind == "gaussian":
        return lambda r: A * np.exp(-r * r / (4 * w * w))
    if kind == "phi":
        return lambda r: A * steady.phi_alpha(P, 1.0, r)
    if kind == "random":
        rng = np.random.default_rng(cfg["seed"])
        amp, wid, eps, om = rng.uniform(0.2, 1.2), rng.uniform(0.5, 3), rng.uniform(0, 0.5), rng.uniform(0.5, 3)
        return lambda r: amp * (1 + (r / wid) ** 2) ** (-m / 2) * (1 + eps * np.cos(om * r))
    if kind == "steady_mix":
        if not cfg["bracket"] or len(cfg["bracket"]) != 2:
            raise ConfigError("steady_mix needs bracket = lo hi")
        wa = steady.find_Ak(P, cfg["k"], cfg["bracket"])
        if isinstance(wa, steady.NotFound):
            raise RuntimeError(f"no member of A_{cfg['k']} found: {wa.reason}")
        mix = cfg["mix"]
        return lambda r: wa.value(r) + mix * (P.kappa - wa.value(r))
    raise ConfigError(f"unknown initial data {kind!r}")


def _svg_path(cfg):
    """Explicit ``svg`` setting, else the CSV path with an .svg suffix; ``svg =`` (empty) disables it."""
    return cfg["svg"] or os.path.splitext(cfg["out"])[0] + ".svg"


def _snapshot_paths(prefix, times):
    return [f"{prefix}_{i:03d}.csv" for i in range(len(times))]


def cmd_evolve(cfg, out=None):
    out = out or sys.stdout
    from . import dynamics

    P = _params(cfg)
    _positive(cfg, "R", "n", "until", "n_out", "rtol", "atol")
    if cfg["until"] <= cfg["t0"]:
        raise ConfigError("until must exceed t0")
    st = dynamics.make_state(P, cfg["frame"], _initial(cfg, P, cfg["frame"]), R=cfg["R"], n=cfg["n"],
                             time=cfg["t0"], bc=cfg["bc"])
    outs = np.linspace(cfg["t0"], cfg["until"], cfg["n_out"] + 1)[1:]
    snaps = cfg["snapshots"] or []
    for t in snaps:
        if not cfg["t0"] <= t <= cfg["until"]:
            raise ConfigError(f"snapshot time {t} outside [t0, until]")
    outs = np.unique(np.concatenate([outs, [t for t in snaps if t > cfg["t0"]]]))
    res = dynamics.evolve(st, cfg["until"], rtol=cfg["rtol"], atol=cfg["atol"], output_times=outs)
    dynamics.write_series_csv(cfg["out"], res)
    if snaps:
        prefix = cfg["snapshot_prefix"] or os.path.splitext(cfg["out"])[0] + "_profile"
        for path, t in zip(_snapshot_paths(prefix, snaps), snaps):
            prof = dynamics.snapshot_profile(res, t)
            dynamics.write_snapshot_csv(path, prof.rho, prof.values)
    if cfg["svg"]:
        dynamics.write_series_svg(cfg["svg"], res, f"{cfg['frame']} run, N={P.N}, p={P.p:g}")
    print(f"status={res.status} time={res.time:.10g} rows={len(res.history)}", file=out)


def cmd_blowup(cfg, out=None):
    out = out or sys.stdout
    from . import dynamics
    from .io import atomic_csv

    P = _params(cfg)
    _positive(cfg, "R", "n", "until", "n_out", "rtol", "atol", "blowup_level")
    st = dynamics.make_state(P, "physical", _initial(cfg, P, "physical"), R=cfg["R"], n=cfg["n"], bc=cfg["bc"])
    res = dynamics.evolve(st, cfg["until"], rtol=cfg["rtol"], atol=cfg["atol"], n_out=cfg["n_out"],
                          blowup_level=cfg["blowup_level"])
    rep = dynamics.classify_blowup(res)
    dynamics.write_series_csv(cfg["out"], res, rate=rep.rate)
    summary = os.path.splitext(cfg["out"])[0] + "_summary.csv"
    atomic_csv(summary, ("key", "value"), [
        ("type", rep.type.value), ("T_est", rep.T_est),
        ("window_variation", rep.window_variation), ("samples", len(rep.times)),
    ])
    if cfg["svg"] != "":
        from .plotting import line_figure

        ok = np.isfinite(rep.rate)
        line_figure(_svg_path(cfg), rep.times[ok], {"rate": rep.rate[ok]}, "t", "(T-t)^{1/(p-1)} sup u",
                    f"blowup rate, type {rep.type.value}")
    T = "n/a" if rep.T_est is None else f"{rep.T_est:.12g}"
    print(f"type={rep.type.value} T_est={T} samples={len(rep.times)}", file=out)


COMMANDS = {
    "exponents": cmd_exponents,
    "steady": cmd_steady,
    "energy-ratio": cmd_energy_ratio,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "blowup": cmd_blowup,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fujita-lab", description="Numerical laboratory for the supercritical Fujita equation.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value settings file")
        for key, spec in schema.items():
            flag = "--" + key.replace("_", "-")
            kw = {"dest": key, "default": None, "help": spec.help or None}
            if spec.type is _floats:
                kw["nargs"] = "+"
                kw["type"] = float
            sp.add_argument(flag, **kw)
    return ap


def main(argv=None) -> int:
    from .dynamics import InsufficientWindow
    from .energy import EnergyDivergenceError
    from .odecore import StiffFailure
    from .params import AbsentConstantError, ParameterDomainError
    from .steady import IllConditionedFit, InconclusiveClassification, InvalidBracket

    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        COMMANDS[args.command](cfg)
    except (ConfigError, ParameterDomainError, AbsentConstantError, InvalidBracket) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StiffFailure, EnergyDivergenceError, IllConditionedFit, InconclusiveClassification,
            InsufficientWindow, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
