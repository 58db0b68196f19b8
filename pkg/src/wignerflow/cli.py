"""Command-line frontend: batch computation, data export, verification.

Subcommands
-----------
fields    export W, J_x, J_p, |J|^2 and the flow direction angle at one time
current   export the tunnelling current through the barrier top over time
topology  export per-frame stagnation points, track segments and events
verify    run the full invariant suite; nonzero exit on any failure

All outputs are deterministic: fixed iteration order, no timestamps, and
every file embeds the tool version and a hash of the exact configuration.
Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical non-convergence.
"""

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

import numpy as np

from . import __version__
from .config import PhysicsConfig
from .errors import ConfigError, GridInsufficientError, NotConvergedError, WignerFlowError
from .flow import flow_field, probability_current_x
from .potential import CatichaPotential, find_extrema
from .states import EigenstatePair
from .topology import iso_contours, locate_stagnation_points, track
from .wigner import PhaseSpaceGrid, WignerBasisFields

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class RunConfig:
    """Flat, file-round-trippable run configuration.

    Times (t0, t1, dt) are in units of the tunnelling period T, so the
    window stays meaningful when physics parameters change.  The defaults
    reproduce the reference parameter set (hbar=1, m=1/2, alpha=0.5,
    delta_e=0.5) on the default grid.
    """

    hbar: float = 1.0
    mass: float = 0.5
    alpha: float = 0.5
    delta_e: float = 0.5
    e0: float = 0.0
    x_min: float = -4.0
    x_max: float = 3.5
    p_min: float = -12.0
    p_max: float = 12.0
    nx: int = 512
    np: int = 1536
    y_half_width: float = 4.5
    ny: int = 2048
    l_max: int = 18
    eps_rel: float = 1e-8
    t0: float = 0.0
    t1: float = 1.1
    dt: float = 0.002
    track_p_lo: float = -2.6
    track_p_hi: float = 2.6
    iso_level: float = 3e-5
    out_dir: str = "out"
    format: str = "csv"

    def physics(self) -> PhysicsConfig:
        return PhysicsConfig(hbar=self.hbar, mass=self.mass, alpha=self.alpha,
                             delta_e=self.delta_e, e0=self.e0)

    def grid(self) -> PhaseSpaceGrid:
        return PhaseSpaceGrid(
            x_min=self.x_min, x_max=self.x_max, p_min=self.p_min,
            p_max=self.p_max, nx=self.nx, np=self.np,
            y_half_width=self.y_half_width, ny=self.ny,
        )

    def to_text(self):
        lines = ["# wignerflow run configuration (times in units of T)"]
        for f in dc_fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        values = {}
        types = {f.name: f.type for f in dc_fields(cls)}
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {ln}: unknown key {key!r}")
            try:
                if types[key] == "int" or types[key] is int:
                    values[key] = int(val)
                elif types[key] == "float" or types[key] is float:
                    values[key] = float(val)
                else:
                    values[key] = val.strip("'\"")
            except ValueError as exc:
                raise ConfigError(f"line {ln}: bad value for {key}: {exc}")
        try:
            return cls(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc))

    @classmethod
    def load(cls, path):
        return cls.from_text(Path(path).read_text())

    def save(self, path):
        Path(path).write_text(self.to_text())

    def sha256(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def parse_time(value, period):
    """Accept absolute floats and the forms 'T', 'T/4', '0.25T'."""
    s = str(value).strip()
    try:
        return float(s)
    except ValueError:
        pass
    su = s.upper().replace(" ", "")
    try:
        if su == "T":
            return period
        if su.startswith("T/"):
            return period / float(su[2:])
        if su.endswith("T"):
            return float(su[:-1]) * period
    except ValueError:
        pass
    raise ConfigError(f"cannot parse time {value!r}; use a float, 'T/4' or '0.25T'")


# ---------------------------------------------------------------------------
# export helpers


def _stamp(rc):
    return f"wignerflow {__version__} config={rc.sha256()}"


def _write_matrix_csv(path, field_xp, x, p, rc):
    """Matrix with p varying down rows and x across columns."""
    mat = field_xp.T
    with open(path, "w") as fh:
        fh.write(f"# {_stamp(rc)}\n")
        fh.write("p\\x," + ",".join(f"{v:.17g}" for v in x) + "\n")
        for row, pv in zip(mat, p):
            fh.write(f"{pv:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def _write_matrix_json(path, name, field_xp, x, p, rc):
    payload = {
        "version": __version__,
        "config_sha256": rc.sha256(),
        "name": name,
        "x": [float(v) for v in x],
        "p": [float(v) for v in p],
        "rows": "fixed p",
        "values": [[float(v) for v in row] for row in field_xp.T],
    }
    Path(path).write_text(json.dumps(payload))


def _write_json(path, payload, rc):
    payload = {"version": __version__, "config_sha256": rc.sha256(), **payload}
    Path(path).write_text(json.dumps(payload, indent=1))


def _build(rc, l_max=None):
    cfg = rc.physics()
    pair = EigenstatePair(cfg)
    grid = rc.grid()
    l_max = rc.l_max if l_max is None else l_max
    basis = WignerBasisFields.from_pair(grid, pair, l_max=l_max)
    potential = CatichaPotential(cfg, max_order=max(25, 2 * l_max + 1))
    return cfg, pair, basis, potential


# ---------------------------------------------------------------------------
# subcommands


def cmd_fields(rc, time_spec, out_dir):
    cfg, pair, basis, potential = _build(rc)
    t = parse_time(time_spec, cfg.period)
    fl = flow_field(basis, potential, t, l_max=rc.l_max, eps_rel=rc.eps_rel)
    j2 = fl.jx**2 + fl.jp**2
    direction = np.arctan2(fl.jp, fl.jx)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    named = [
        ("w", fl.w), ("j_x", fl.jx), ("j_p", fl.jp),
        ("j_squared", j2), ("direction", direction),
    ]
    for name, field in named:
        if rc.format == "json":
            _write_matrix_json(out / f"{name}.json", name, field, fl.x, fl.p, rc)
        else:
            _write_matrix_csv(out / f"{name}.csv", field, fl.x, fl.p, rc)
    meta = {
        "t": t,
        "t_over_period": t / cfg.period,
        "grid": {"x_min": rc.x_min, "x_max": rc.x_max, "p_min": rc.p_min,
                 "p_max": rc.p_max, "nx": rc.nx, "np": rc.np,
                 "y_half_width": rc.y_half_width, "ny": rc.ny},
        "normalization": float(fl.w.sum()) * basis.grid.dx * basis.grid.dp,
        "basis_norm_defect": basis.norm_defect,
        "converged": fl.converged,
        "truncation_defect": fl.truncation_defect,
        "l_max": rc.l_max,
        "eps_rel": rc.eps_rel,
        "terms_used_max": int(fl.terms_used.max()),
        "sign_conventions": {
            "density_kernel": "conj(Psi)(x+y) * Psi(x-y), transform exp(+2ipy/hbar)",
            "norm0": "positive",
            "norm1": "positive",
            "direction": "atan2(J_p, J_x), radians",
        },
    }
    _write_json(out / "fields.json", meta, rc)
    if not fl.converged:
        print(f"warning: flow series not converged (defect {fl.truncation_defect:.2e})",
              file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote {len(named)} field matrices + fields.json to {out}")
    return EXIT_OK


def cmd_current(rc, out_dir, n_samples=None):
    from scipy.optimize import curve_fit

    cfg, pair, basis, potential = _build(rc)
    T = cfg.period
    saddle = [x for x, k in find_extrema(-1.0, 0.5, cfg) if k == "max"][0]
    t0, t1 = rc.t0 * T, rc.t1 * T
    n = n_samples or max(64, int(round((rc.t1 - rc.t0) / rc.dt)) + 1)
    ts = np.linspace(t0, t1, n)
    cur = np.array([probability_current_x(basis, t, saddle) for t in ts])

    def model(t, amp, period, phase):
        return amp * np.sin(2 * np.pi * t / period + phase)

    popt, _ = curve_fit(model, ts, cur, p0=(np.abs(cur).max(), T, 0.0))
    amp, period_fit, phase = (float(v) for v in popt)
    if amp < 0:
        amp, phase = -amp, phase + math.pi
    phase = math.remainder(phase, 2 * math.pi)
    fit = amp * np.sin(2 * np.pi * ts / period_fit + phase)
    resid = float(np.abs(cur - fit).max() / amp)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "current.csv", "w") as fh:
        fh.write(f"# {_stamp(rc)}\n")
        fh.write("t,j_x,fit,amplitude,period,phase\n")
        for t, c, f in zip(ts, cur, fit):
            fh.write(f"{t:.17g},{c:.17g},{f:.17g},{amp:.17g},{period_fit:.17g},{phase:.17g}\n")
    _write_json(out / "current.json", {
        "x_saddle": saddle,
        "amplitude": amp,
        "period_fit": period_fit,
        "period_expected": T,
        "period_relative_error": abs(period_fit - T) / T,
        "phase": phase,
        "max_residual_over_amplitude": resid,
        "n_samples": int(n),
    }, rc)
    print(f"current at X_S={saddle:.4f}: A={amp:.6f}, T={period_fit:.6f}, "
          f"phase={phase:+.4f}, residual={resid:.2e}")
    return EXIT_OK


def cmd_topology(rc, out_dir, iso_level=None):
    cfg, pair, basis, potential = _build(rc)
    T = cfg.period
    ext = find_extrema(-4.0, 3.0, cfg)
    x_l = [x for x, k in ext if k == "min"][0]
    x_r = [x for x, k in ext if k == "min"][-1]
    region = (x_l, x_r, rc.track_p_lo, rc.track_p_hi)
    res = track(basis, potential, rc.t0 * T, rc.t1 * T, rc.dt * T,
                region=region, l_max=rc.l_max, eps_rel=rc.eps_rel)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "region": list(region),
        "period": T,
        "times": [float(t) for t in res.times],
        "frames": [
            {"t": float(t), "points": [q.to_dict() for q in pts]}
            for t, pts in zip(res.times, res.frames)
        ],
        "segments": [[q.to_dict() for q in seg] for seg in res.segments],
        "events": [e.to_dict() for e in res.events],
        "charge_violations": [
            e.to_dict() for e in res.events
            if e.kind in ("merge", "split") and not e.conserves_charge()
        ],
    }
    _write_json(out / "topology.json", payload, rc)
    written = ["topology.json"]
    if iso_level is not None:
        contours = []
        for t in res.times[:: max(1, len(res.times) // 64)]:
            fl = flow_field(basis, potential, t, l_max=rc.l_max, region=region)
            lines = iso_contours(fl.jx**2 + fl.jp**2, fl.x, fl.p, iso_level)
            contours.append({
                "t": float(t),
                "polylines": [[[float(a), float(b)] for a, b in ln] for ln in lines],
            })
        _write_json(out / "iso_contours.json", {"level": iso_level,
                                                "frames": contours}, rc)
        written.append("iso_contours.json")
    n_events = len(res.events)
    n_viol = len(payload["charge_violations"])
    print(f"tracked {len(res.segments)} segments, {n_events} events "
          f"({n_viol} charge violations) -> {', '.join(written)}")
    return EXIT_VERIFICATION if n_viol else EXIT_OK


def cmd_verify(rc, out_dir):
    from .verify import VerifyContext, run_suite

    ctx = VerifyContext(cfg=rc.physics(), nx=rc.nx, npts=rc.np, ny=rc.ny,
                        l_max=max(rc.l_max, 14), eps_rel=rc.eps_rel)
    results = run_suite(ctx)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify.json", {
        "all_passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }, rc)
    for r in results:
        print(r.line())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_VERIFICATION


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="wignerflow",
        description="Wigner flow of a tunnelling double well: fields, currents, topology.",
    )
    ap.add_argument("--config", metavar="PATH", help="run configuration file")
    ap.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    sub = ap.add_subparsers(dest="command", required=True)

    p_fields = sub.add_parser("fields", help="export field snapshots at one time")
    p_fields.add_argument("--time", default="T/4",
                          help="snapshot time: float, 'T/4' or '0.25T' (default T/4)")
    p_fields.add_argument("--format", choices=("csv", "json"),
                          help="matrix format (overrides config)")

    sub.add_parser("current", help="export the tunnelling current time series")

    p_top = sub.add_parser("topology", help="track stagnation points and events")
    p_top.add_argument("--iso", metavar="LEVEL", nargs="?", type=float,
                       const=-1.0, default=None,
                       help="also export |J|^2 iso-contours (default level 3e-5)")

    sub.add_parser("verify", help="run the verification suite")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        rc = RunConfig.load(args.config) if args.config else RunConfig()
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or rc.out_dir
    try:
        if args.command == "fields":
            if getattr(args, "format", None):
                rc.format = args.format
            return cmd_fields(rc, args.time, out_dir)
        if args.command == "current":
            return cmd_current(rc, out_dir)
        if args.command == "topology":
            iso = args.iso
            if iso is not None and iso < 0:
                iso = rc.iso_level
            return cmd_topology(rc, out_dir, iso_level=iso)
        if args.command == "verify":
            return cmd_verify(rc, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridInsufficientError, NotConvergedError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except WignerFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
