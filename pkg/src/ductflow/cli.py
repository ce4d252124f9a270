"""``ductflow`` command line: validate, run, trace, report.

Exit codes: 0 ok, 1 a hypothesis or claim failed, 2 usage or configuration
error, 3 the solver aborted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import characteristics as chars
from . import diagnostics as diag
from .config import RunConfig, load_config, resolve
from .errors import ConfigError, DomainError, PreconditionError, SolverAbort
from .pipeline import run_claims, sweep_claims, validate_member
from .diagnostics import NormSeries
from .solver import FieldSnapshot, run_simulation, snapshot_name, snapshot_time

log = logging.getLogger("ductflow")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3

PLOT_SCRIPT = "plot_norms.gp"
TRACE_REFINE = 10
PANELS = (("sup_rho", 2, "sup |rho|"), ("sup_v", 3, "sup |v|"),
          ("sup_rho_x", 4, "sup |rho_x|"), ("sup_v_x", 5, "sup |v_x|"))


def nu_dirname(nu: float) -> str:
    return f"nu_{nu:g}"


def _float_list(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ductflow",
                                description="Supersonic near-vacuum duct flow toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def config_flags(sp):
        sp.add_argument("--config", type=Path, help="INI run configuration")
        sp.add_argument("--preset", choices=("experiment1", "experiment2"))
        sp.add_argument("--nu", type=_float_list, help="comma separated nu values")
        sp.add_argument("--dx", type=float)
        sp.add_argument("--cfl", type=float, help="dt/dx ratio")
        sp.add_argument("--t-final", type=float, dest="t_final")

    sv = sub.add_parser("validate", help="check the global-existence hypotheses")
    config_flags(sv)
    sv.add_argument("--kv", action="store_true", help="machine-readable key=value output")

    sr = sub.add_parser("run", help="validate, simulate the nu sweep and check claims")
    config_flags(sr)
    sr.add_argument("--out", type=Path)
    sr.add_argument("--force", action="store_true", help="run even if validation fails")

    st = sub.add_parser("trace", help="trace a characteristic through a run directory")
    st.add_argument("run_dir", type=Path)
    st.add_argument("--x0", type=float, required=True)
    st.add_argument("--t0", type=float, default=0.0)
    st.add_argument("--family", choices=chars.FAMILIES, default="1")
    st.add_argument("--tol", type=float, default=1e-6)

    sp = sub.add_parser("report", help="summarise a run directory")
    sp.add_argument("run_dir", type=Path)
    return p


def config_from_args(args) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
        if args.preset is not None:
            raise ConfigError("give either --config or --preset, not both")
    elif args.preset is not None:
        cfg = RunConfig.for_preset(args.preset)
    else:
        raise ConfigError("one of --config or --preset is required")
    changes = {}
    if args.nu is not None:
        changes["nu_sweep"] = args.nu
    if args.dx is not None:
        changes.update(dx=args.dx, n_cells=None)
    if args.cfl is not None:
        changes["cfl_ratio"] = args.cfl
    if args.t_final is not None:
        changes["t_final"] = args.t_final
    if getattr(args, "out", None) is not None:
        changes["out"] = str(args.out)
    return cfg.replace(**changes) if changes else cfg


def cmd_validate(args) -> int:
    cfg = config_from_args(args)
    status = EXIT_OK
    for nu in cfg.sweep:
        rep = validate_member(cfg, nu)
        print(f"# nu = {nu:g}")
        print(rep.to_kv() if args.kv else rep.to_text())
        if not rep.passed:
            status = EXIT_FAIL
    return status


def write_plot_script(out: Path, nus) -> Path:
    lines = [
        "# gnuplot script: four monitored norms against t, one curve per nu",
        "set datafile separator ','",
        "set terminal pngcairo size 1200,900",
        "set output 'norms.png'",
        "set multiplot layout 2,2",
        "set xlabel 't'",
    ]
    for _, col, title in PANELS:
        lines.append(f"set title '{title}'")
        curves = [f"'{nu_dirname(nu)}/diagnostics.csv' every ::1 using 1:{col} "
                  f"with lines title 'nu={nu:g}'" for nu in nus]
        lines.append("plot " + ", \\\n     ".join(curves))
    lines.append("unset multiplot")
    path = out / PLOT_SCRIPT
    path.write_text("\n".join(lines) + "\n")
    return path


def cmd_run(args) -> int:
    cfg = config_from_args(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg.write(out / "config.ini")
    status = EXIT_OK
    sup_xi, final_v = {}, {}
    for nu in cfg.sweep:
        rep = validate_member(cfg, nu)
        if not rep.passed:
            print(f"nu={nu:g}: validation failed: {', '.join(rep.failed_ids)}")
            if not args.force:
                return EXIT_FAIL
            print("continuing because of --force")
        member = cfg.replace(nu=nu, nu_sweep=())
        # claims trace characteristics through memory-held snapshots at a
        # finer stride than the one written to disk
        refine = TRACE_REFINE if member.snapshot_stride % TRACE_REFINE == 0 else 1
        scfg, initial, boundary = resolve(
            member.replace(snapshot_stride=member.snapshot_stride // refine), nu)
        mdir = out / nu_dirname(nu)
        mdir.mkdir(exist_ok=True)
        member.write(mdir / "run.ini")
        try:
            rec = run_simulation(scfg, initial, boundary)
        except SolverAbort as exc:
            last = exc.last_snapshot
            when = f"{last.t:g}" if last is not None else "none"
            print(f"nu={nu:g}: solver aborted: {exc}; last valid time {when}")
            if last is not None:
                (mdir / "snapshots").mkdir(exist_ok=True)
                last.write_csv(mdir / "snapshots" / snapshot_name(last.t))
            return EXIT_ABORT
        rec.write(mdir, every=refine)
        claims = run_claims(rec, initial, boundary, cfg)
        diag.write_claims(mdir / "claims.csv", claims)
        failed = [c.claim_id for c in claims if c.status == "fail"]
        print(f"nu={nu:g}: {rec.steps} steps, "
              f"{len(list((mdir / 'snapshots').glob('snap_t*.csv')))} snapshots written, "
              f"{'all claims hold' if not failed else 'FAILED ' + ', '.join(failed)}")
        if failed:
            status = EXIT_FAIL
        sup_xi[nu] = float(np.max(rec.series.sup_xi))
        final_v[nu] = np.asarray(rec.final.v)
    sweep = sweep_claims(sup_xi, final_v)
    diag.write_claims(out / "claims.csv", sweep)
    for c in sweep:
        print(f"sweep {c.claim_id}: {c.status} {c.note}")
    write_plot_script(out, cfg.sweep)
    return status


def _member_dir(path: Path) -> Path:
    if (path / "run.ini").is_file():
        return path
    subs = sorted(p for p in path.glob("nu_*") if (p / "run.ini").is_file())
    if len(subs) == 1:
        return subs[0]
    raise ConfigError(f"{path} is not a single-nu run directory")


def load_snapshots(mdir: Path, gas):
    files = sorted((mdir / "snapshots").glob("snap_t*.csv"), key=snapshot_time)
    if not files:
        raise ConfigError(f"no snapshots in {mdir}")
    return [FieldSnapshot.read_csv(f, gas) for f in files]


def cmd_trace(args) -> int:
    mdir = _member_dir(args.run_dir)
    member = load_config(mdir / "run.ini")
    scfg, _, _ = resolve(member, member.sweep[0])
    snaps = load_snapshots(mdir, scfg.gas)
    fld = chars.SpaceTimeField(snaps, scfg.gas)
    tr = chars.trace(fld, (args.x0, args.t0), args.family)
    (mdir / "traces").mkdir(exist_ok=True)
    path = tr.write_csv(mdir / "traces")
    print(f"wrote {path}")
    print(f"exit: {tr.exit_reason} at t={tr.exit_time:.6g}, {tr.t.size} samples")
    if tr.t.size < 2:
        print("trace too short for a monotonicity check")
        return EXIT_OK
    rep = chars.monotonicity_report(tr, args.tol)
    print(f"S nondecreasing: {rep.s_increasing}\nR nonincreasing: {rep.r_decreasing}\n"
          f"xi nonincreasing: {rep.xi_decreasing}\nworst violation: {rep.worst:.3e}"
          + (f" ({rep.worst_kind} at t={rep.worst_t:.4g})" if rep.worst_kind else ""))
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_report(args) -> int:
    root = args.run_dir
    if (root / "run.ini").is_file():
        members = [root]
    else:
        members = sorted(p for p in root.glob("nu_*") if (p / "run.ini").is_file())
    if not members:
        raise ConfigError(f"{root} holds no run output")
    status = EXIT_OK
    for mdir in members:
        series = NormSeries.read_csv(mdir / "diagnostics.csv")
        claims = diag.read_claims(mdir / "claims.csv")
        n_snap = len(list((mdir / "snapshots").glob("snap_t*.csv")))
        a = series.as_arrays()
        print(f"== {mdir.name}: t in [{a['t'][0]:g}, {a['t'][-1]:g}], {n_snap} snapshots")
        for name in ("sup_rho", "sup_v", "sup_rho_x", "sup_v_x", "sup_xi"):
            print(f"  {name:10s} start {a[name][0]:.6g}  end {a[name][-1]:.6g}  "
                  f"max {np.max(a[name]):.6g}")
        for cid, st, margin, x, t in claims:
            print(f"  {cid:24s} {st:5s} margin {float(margin): .3e}")
            if st == "fail":
                status = EXIT_FAIL
    sweep = root / "claims.csv"
    if sweep.is_file() and members[0] != root:
        for cid, st, margin, _, _ in diag.read_claims(sweep):
            print(f"sweep {cid:18s} {st:5s} margin {float(margin): .3e}")
            if st == "fail":
                status = EXIT_FAIL
    return status


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "trace": cmd_trace, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
