"""Command-line front end: scans, tables, certificates, diagnostics, validation.

Subcommands: simulate, bifurcate, windows, spectrum, pattern, validate,
lyapunov, rotation.  Options may come from a flat key=value config file
(--config); explicit flags win over the file, which wins over built-in
defaults.  The only environment override is BTOB_OUT_DIR, which redirects
relative output paths.  Every output file begins with comment lines that
reconstruct the exact effective configuration, and all floats are printed
with 17 significant digits so files round-trip losslessly.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import analysis, oracles, spectral, windows
from .map_core import DomainError, ProjectiveDirection, Restitution
from .svgplot import SvgPlot

F = "{:.17g}".format  # lossless float64 formatting


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _merge_config(args: argparse.Namespace, defaults: dict) -> dict:
    """flags > config file > built-in defaults; returns the effective mapping."""
    eff = dict(defaults)
    if getattr(args, "config", None):
        file_cfg = _read_config_file(args.config)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, raw in file_cfg.items():
            d = defaults[key]
            if isinstance(d, bool):
                eff[key] = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(d, int):
                eff[key] = int(raw)
            elif isinstance(d, float):
                eff[key] = float(raw)
            else:
                eff[key] = raw
    for key in defaults:
        v = getattr(args, key, None)
        if v is not None:
            eff[key] = v
    return eff


def _out_path(name: Optional[str]) -> Optional[str]:
    if name is None:
        return None
    base = os.environ.get("BTOB_OUT_DIR")
    if base and not os.path.isabs(name):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, name)
    return name


def _echo_lines(sub: str, eff: dict) -> list[str]:
    lines = [f"# btob {sub}"]
    for key in sorted(eff):
        lines.append(f"# {key}={eff[key]}")
    return lines


def _write_csv(path: str, echo: list[str], header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in echo:
            fh.write(line + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def read_csv(path: str) -> tuple[list[str], list[str], list[list[str]]]:
    """Read back a tool-written CSV: (comment lines, column names, raw rows)."""
    comments: list[str] = []
    rows: list[list[str]] = []
    header: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line)
            elif not header:
                header = line.split(",")
            elif line:
                rows.append(line.split(","))
    return comments, header, rows


def _sample_directions(seed: int, count: int) -> list[ProjectiveDirection]:
    """Random canonical directions with x > 0, z < 0 (valid initial data)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a, b, c = rng.standard_normal(3)
        x, y, z = abs(a), b, -abs(c)
        if x < 1e-9 or -z < 1e-9:
            continue
        out.append(ProjectiveDirection.from_vector(x, y, z))
    return out


def _parse_init(text: str) -> ProjectiveDirection:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise ValueError("--init needs three comma-separated components")
    return ProjectiveDirection.from_vector(*parts)


def _grid_from_option(grid: str) -> list[ProjectiveDirection]:
    if grid == "default":
        return analysis.default_grid()
    inits = []
    with open(grid, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                inits.append(_parse_init(line))
    if not inits:
        raise ValueError(f"grid file {grid} contains no initial data")
    return inits


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

_SIMULATE_DEFAULTS = dict(
    r=0.2, iters=5000, tail=2000, seed=7, init="", out="orbit.csv", svg="", max_period=256
)


def cmd_simulate(args) -> int:
    eff = _merge_config(args, _SIMULATE_DEFAULTS)
    rest = Restitution(eff["r"])
    u0 = _parse_init(eff["init"]) if eff["init"] else _sample_directions(eff["seed"], 1)[0]
    tails = analysis.orbit_tail(u0, rest, eff["iters"], eff["tail"])
    max_period = min(eff["max_period"], eff["tail"] // 3)
    found = analysis.detect_period(tails.branches[0].tolist(), max_period)
    echo = _echo_lines("simulate", eff) + [f"# init_vector={u0.vector}"]
    if found:
        echo.append(f"# detected_period={found[0]} word={found[1]}")
        print(f"detected period {found[0]}, canonical word {found[1]}")
    else:
        echo.append("# detected_period=none")
        print(f"no period <= {max_period} detected")
    rows = (
        [
            str(tails.first_iter + t),
            F(tails.theta[0, t]),
            F(tails.phi[0, t]),
            F(tails.w1[0, t]),
            F(tails.w2[0, t]),
            str(int(tails.branches[0, t])),
        ]
        for t in range(eff["tail"])
    )
    _write_csv(_out_path(eff["out"]), echo, "iter,theta,phi,w1,w2,branch", rows)
    if eff["svg"]:
        w1 = tails.w1[0]
        lim = min(30.0, max(2.0, float(np.nanmax(np.abs(w1))) * 1.05))
        plot = SvgPlot(
            (-lim, lim), (-1.05, 1.05), title=f"orbit tail, r={eff['r']}", x_label="w1", y_label="w2"
        )
        plot.add_points(w1, tails.w2[0], radius=1.6)
        plot.write(_out_path(eff["svg"]))
    return 0


_BIFURCATE_DEFAULTS = dict(
    r_min=0.0717,
    r_max=0.1717,
    nr=200,
    iters=5000,
    tail=100,
    obs="theta",
    grid="default",
    log_theta=False,
    overlay="",
    overlay_nmax=130,
    threads=0,
    out="bifurcation.csv",
    svg="",
)


def cmd_bifurcate(args) -> int:
    eff = _merge_config(args, _BIFURCATE_DEFAULTS)
    inits = _grid_from_option(eff["grid"])
    cfg = analysis.ScanConfig(
        r_min=eff["r_min"],
        r_max=eff["r_max"],
        n_r=eff["nr"],
        init_grid=tuple(inits),
        n_iter=eff["iters"],
        tail=eff["tail"],
        observable=eff["obs"],
    )
    threads = eff["threads"] or (os.cpu_count() or 1)
    echo = _echo_lines("bifurcate", eff)
    rows = (
        [
            F(rec.r),
            str(rec.init_index),
            str(rec.iter_index),
            F(rec.theta),
            F(rec.phi),
            F(rec.w1),
            F(rec.w2),
            str(rec.branch),
        ]
        for rec in analysis.bifurcation_scan(cfg, threads=threads)
    )
    _write_csv(
        _out_path(eff["out"]), echo, "r,init,iter,theta,phi,w1,w2,branch", rows
    )
    if eff["svg"]:
        _bifurcation_svg(eff, cfg, threads)
    return 0


def _bifurcation_svg(eff: dict, cfg: analysis.ScanConfig, threads: int) -> None:
    tails = analysis.scan_tails(cfg, threads)
    n_init = len(cfg.init_grid)
    rs = np.repeat(cfg.r_values, n_init)[:, None] * np.ones((1, cfg.tail))
    if eff["obs"] == "phi":
        ys, label, y_range, log_y = tails.phi, "phi", (0.0, math.pi), False
    elif eff["obs"] == "strip":
        ys, label, y_range, log_y = tails.w2, "w2", (-1.05, 1.05), False
    elif eff["log_theta"]:
        ys, label, y_range, log_y = tails.theta, "theta (log)", (1e-8, math.pi / 2), True
    else:
        ys, label, y_range, log_y = tails.theta, "theta", (0.0, math.pi / 2), False
    plot = SvgPlot(
        (cfg.r_min, cfg.r_max),
        y_range,
        title=f"bifurcation scan, {cfg.n_r} r-values x {n_init} orbits",
        x_label="r",
        y_label=label,
        log_y=log_y,
    )
    plot.add_points(rs.ravel(), ys.ravel(), radius=0.45, opacity=0.5)
    overlays = [s for s in eff["overlay"].split(",") if s]
    if "windows" in overlays:
        for n in range(1, eff["overlay_nmax"] + 1):
            up = windows.upper_bound(n)
            low = windows.lower_bound(n)
            if float(low) > cfg.r_max and n > 2:
                continue
            if up != "not defined" and float(up) < cfg.r_min:
                break
            plot.add_vline(float(low), "#1f77ff", f"n={n}")
            if up != "not defined":
                plot.add_vline(float(up), "#d62728")
    if "stripes" in overlays:
        for r_val in sorted(_stripe_values(cfg.r_min, cfg.r_max, 120)):
            plot.add_vline(r_val, "#1f77ff")
    plot.write(_out_path(eff["svg"]))


def _stripe_values(r_min: float, r_max: float, m_max: int) -> list[float]:
    vals = []
    for m in range(2, m_max + 1):
        for l in range(1, m):
            if math.gcd(l, m) != 1 or not 0.25 <= l / m <= 0.75:
                continue
            r_val = analysis.thin_stripe_r(l, m)
            if r_min <= r_val <= r_max:
                vals.append(r_val)
    return vals


_WINDOWS_DEFAULTS = dict(nmax=10, digits=12, out="windows.csv")


def cmd_windows(args) -> int:
    eff = _merge_config(args, _WINDOWS_DEFAULTS)
    budget = windows.PrecisionBudget(max(64, eff["digits"] + 20), eff["digits"])
    rows = windows.window_table(eff["nmax"], budget)
    echo = _echo_lines("windows", eff) + [f"# working_digits={budget.working}"]
    _write_csv(
        _out_path(eff["out"]),
        echo,
        "n,lower,upper",
        ([str(w.n), w.lower, w.upper] for w in rows),
    )
    for w in rows[: min(5, len(rows))]:
        print(f"n={w.n}: [{w.lower}, {w.upper}]")
    return 0


_SPECTRUM_DEFAULTS = dict(r_min=0.01, r_max=0.99, nr=99, out="spectrum.csv")


def cmd_spectrum(args) -> int:
    eff = _merge_config(args, _SPECTRUM_DEFAULTS)
    echo = _echo_lines("spectrum", eff)
    systems = {"P1": spectral.eigen_P1, "P2": spectral.eigen_P2, "P3": spectral.eigen_P3}

    def rows():
        for r in np.linspace(eff["r_min"], eff["r_max"], eff["nr"]):
            rest = Restitution(float(r))
            for name, fn in systems.items():
                eig = fn(rest)
                dom = "" if eig.dominant_index is None else str(eig.dominant_index)
                for i in range(3):
                    lam = eig.eigenvalues[i]
                    vec = eig.eigenvectors[i]
                    yield [
                        F(float(r)),
                        name,
                        str(i),
                        F(lam.real),
                        F(lam.imag),
                        *[F(complex(c).real) for c in vec],
                        *[F(complex(c).imag) for c in vec],
                        dom,
                    ]

    header = "r,matrix,index,lam_re,lam_im,vx_re,vy_re,vz_re,vx_im,vy_im,vz_im,dominant"
    _write_csv(_out_path(eff["out"]), echo, header, rows())
    return 0


_PATTERN_DEFAULTS = dict(
    word="132312", r=0.0, r_min=0.0, r_max=0.0, nr=0, tol=1e-12, out=""
)


def cmd_pattern(args) -> int:
    eff = _merge_config(args, _PATTERN_DEFAULTS)
    word = eff["word"]
    if eff["r"]:
        cert = spectral.certify_pattern(word, Restitution(eff["r"]))
        _print_certificate(cert)
        return 0
    if not (eff["r_min"] and eff["r_max"]):
        print("pattern: need --r or both --r-min and --r-max", file=sys.stderr)
        return 2
    lo, hi = eff["r_min"], eff["r_max"]
    nr = eff["nr"] or 21
    rows = []
    for r in np.linspace(lo, hi, nr):
        cert = spectral.certify_pattern(word, Restitution(float(r)))
        rows.append(cert)
        _print_certificate(cert)
    boundary = _stability_boundary(word, lo, hi, eff["tol"])
    if boundary is not None:
        print(f"stability boundary near r = {boundary:.12f}")
    else:
        print("no stability flip inside the range")
    if eff["out"]:
        echo = _echo_lines("pattern", eff)
        _write_csv(
            _out_path(eff["out"]),
            echo,
            "r,exists,stable,multiplier_re,multiplier_im",
            (
                [
                    F(c.r),
                    str(int(c.exists)),
                    "undecided" if c.stable is None else str(int(c.stable)),
                    F(c.multiplier.real) if c.multiplier else "",
                    F(c.multiplier.imag) if c.multiplier else "",
                ]
                for c in rows
            ),
        )
    return 0


def _print_certificate(cert) -> None:
    status = "undecided-stability" if cert.stable is None else (
        "stable" if cert.stable else "not stable"
    )
    if cert.exists:
        print(
            f"r={cert.r:.6f}: word {cert.word.letters} exists ({status}); "
            f"|multiplier|={abs(cert.multiplier):.6g}"
        )
    else:
        where = f" (fails {cert.failed_inequality[1]} at step {cert.failed_inequality[0]})" \
            if cert.failed_inequality else ""
        print(f"r={cert.r:.6f}: word {cert.word.letters} not realized{where}")


def _stability_boundary(word: str, lo: float, hi: float, tol: float) -> Optional[float]:
    def stable_at(r: float) -> bool:
        return spectral.certify_pattern(word, Restitution(r)).stable is True

    s_lo, s_hi = stable_at(lo), stable_at(hi)
    if s_lo == s_hi:
        return None
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if stable_at(mid) == s_hi:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


_VALIDATE_DEFAULTS = dict(
    r_list="0.1,0.2,0.3", inits=100, symbols=200, seed=13, trig=True, out=""
)


def cmd_validate(args) -> int:
    eff = _merge_config(args, _VALIDATE_DEFAULTS)
    r_values = [float(v) for v in eff["r_list"].split(",") if v]
    all_ok = True
    reports = []
    for r in r_values:
        inits = _sample_directions(eff["seed"], eff["inits"])
        report = oracles.triple_engine_validate(
            Restitution(r), inits, eff["symbols"], include_trig=eff["trig"]
        )
        reports.append(report)
        n_trig = sum(1 for c in report.comparisons if c.trig_included)
        print(
            f"r={r}: {len(inits)} inits x {eff['symbols']} symbols, "
            f"trig engine kept on {n_trig}/{len(inits)}"
        )
        for name, secs in report.engine_seconds.items():
            print(f"  {name:9s} {secs:8.3f}s")
        if report.mismatches:
            all_ok = False
            print("  first divergences (init, position):")
            for idx, pos in report.mismatches:
                print(f"    init {idx:3d} at symbol {pos}")
        else:
            print("  all engines agree")
    if eff["out"]:
        echo = _echo_lines("validate", eff)
        rows = []
        for r, rep in zip(r_values, reports):
            for comp in rep.comparisons:
                rows.append(
                    [
                        F(r),
                        str(comp.init_index),
                        "" if comp.first_divergence is None else str(comp.first_divergence),
                        str(int(comp.trig_included)),
                    ]
                )
        _write_csv(
            _out_path(eff["out"]), echo, "r,init,first_divergence,trig_included", rows
        )
    return 0 if all_ok else 1


_LYAPUNOV_DEFAULTS = dict(r=0.2, n=100000, inits=1, seed=3, init="", out="")


def cmd_lyapunov(args) -> int:
    eff = _merge_config(args, _LYAPUNOV_DEFAULTS)
    rest = Restitution(eff["r"])
    if eff["init"]:
        starts = [_parse_init(eff["init"])]
    else:
        starts = _sample_directions(eff["seed"], eff["inits"])
    rows = []
    for i, u0 in enumerate(starts):
        est = analysis.lyapunov_max(u0, rest, eff["n"])
        print(f"init {i}: lambda_max = {est.lambda_max:.6e} over {est.n_steps} steps")
        rows.append([F(eff["r"]), str(i), str(est.n_steps), F(est.lambda_max)])
    if eff["out"]:
        _write_csv(
            _out_path(eff["out"]),
            _echo_lines("lyapunov", eff),
            "r,init,n,lambda_max",
            rows,
        )
    return 0


_ROTATION_DEFAULTS = dict(r=0.0, n=3000, init="", out="")


def cmd_rotation(args) -> int:
    eff = _merge_config(args, _ROTATION_DEFAULTS)
    r = eff["r"] or analysis.thin_stripe_r(1, 3)
    rest = Restitution(r)
    if eff["init"]:
        u0 = _parse_init(eff["init"])
    else:
        u0 = ProjectiveDirection.from_vector(1.0, 0.02, -0.97)
    est = analysis.rotation_number(u0, rest, eff["n"])
    note = "" if est.exit_step is None else f" (left branch-2 region at step {est.exit_step})"
    print(f"rotation number rho = {est.rho:.6f} over {est.window} steps{note}")
    if eff["out"]:
        _write_csv(
            _out_path(eff["out"]),
            _echo_lines("rotation", eff),
            "r,n,rho,exit_step",
            [[F(r), str(est.window), F(est.rho), "" if est.exit_step is None else str(est.exit_step)]],
        )
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btob",
        description="Simulation laboratory for the b-to-b collision map of four inelastic particles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="single orbit tail, CSV and optional strip portrait")
    _add_common(p)
    p.add_argument("--r", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--tail", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", help="x,y,z initial direction")
    p.add_argument("--svg", help="write a strip-coordinate portrait")
    p.add_argument("--max-period", dest="max_period", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bifurcate", help="bifurcation scan over an r range")
    _add_common(p)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--nr", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--tail", type=int)
    p.add_argument("--obs", choices=("theta", "phi", "strip"))
    p.add_argument("--grid", help="'default' or a file of x,y,z lines")
    p.add_argument("--log-theta", dest="log_theta", action="store_const", const=True)
    p.add_argument("--overlay", help="comma list of: windows, stripes")
    p.add_argument("--overlay-nmax", dest="overlay_nmax", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--svg", help="write a scatter SVG")
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("windows", help="stability-window bounds table")
    _add_common(p)
    p.add_argument("--nmax", type=int)
    p.add_argument("--digits", type=int)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("spectrum", help="eigen-systems of the branch matrices over r")
    _add_common(p)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--nr", type=int)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("pattern", help="periodic-word certificates and stability boundary")
    _add_common(p)
    p.add_argument("word", nargs="?", help="branch word over {1,2,3}")
    p.add_argument("--r", type=float)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--nr", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("validate", help="cross-check all engines symbol by symbol")
    _add_common(p)
    p.add_argument("--r-list", dest="r_list", help="comma-separated restitution values")
    p.add_argument("--inits", type=int)
    p.add_argument("--symbols", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-trig", dest="trig", action="store_const", const=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lyapunov", help="finite-time Lyapunov exponents")
    _add_common(p)
    p.add_argument("--r", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--inits", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", help="x,y,z initial direction")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("rotation", help="rotation number on a branch-2 invariant curve")
    _add_common(p)
    p.add_argument("--r", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--init", help="x,y,z initial direction")
    p.set_defaults(func=cmd_rotation)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ValueError, OSError, windows.RootCountError) as exc:
        print(f"btob {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
