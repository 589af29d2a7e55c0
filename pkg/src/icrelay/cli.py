"""Command-line front end: one process, one command, machine-readable output.

Every output embeds a manifest (command, seed, tolerances, version) so any
result can be reproduced byte-identically by rerunning with the recorded
values.  Exit codes: 0 success, 1 property or verification failure,
2 usage or file errors.
"""

import argparse
import json
import os
import secrets
import sys
import tempfile

from . import __version__
from .channel import (AntennaConfig, derive_seed, read_channel,
                      sample_channel, write_channel)
from .converse import rank_bound_check
from .errors import (DegenerateChannelError, IcRelayError,
                     UnstableConfigurationError)
from .linalg import TolerancePolicy
from .region import (allocate_antennas, frac_str, ic_dof_region,
                     linear_dof_region, linear_sum_dof, outer_bounds,
                     region_to_jsonable)
from .scheme import (build_plan, closed_form_streams, read_plan, verify_plan,
                     write_plan)
from .simulate import SnrSweep, slope_estimate

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_USAGE = 2


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None):
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _figure_path(out: str) -> str:
    stem, _ = os.path.splitext(out)
    return stem + ".png"


def _manifest(args, command: str) -> dict:
    doc = {
        "command": command,
        "version": __version__,
        "seed": args.seed,
        "tolerances": {"rank_rel_tol": args.tol_rank,
                       "residual_rel_tol": args.tol_res},
        "format": getattr(args, "format", "json"),
    }
    for field in ("m", "n", "l"):
        if hasattr(args, field) and getattr(args, field) is not None:
            doc[field] = getattr(args, field)
    return doc


def _tolerance(args) -> TolerancePolicy:
    return TolerancePolicy(rank_rel_tol=args.tol_rank, residual_rel_tol=args.tol_res)


def _json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _csv_text(manifest: dict, header: list, rows: list) -> str:
    lines = ["# manifest " + json.dumps(manifest)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def _parse_range(text: str) -> range:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    v = int(text)
    return range(v, v + 1)


def cmd_region(args) -> int:
    config = AntennaConfig(args.m, args.n, args.l)
    region = linear_dof_region(config)
    bounds = outer_bounds(config)
    manifest = _manifest(args, "region")
    if args.format == "csv":
        rows = [(frac_str(x), frac_str(y)) for (x, y) in region.vertices]
        text = _csv_text(manifest, ["d1", "d2"], rows)
    else:
        text = _json_text({
            "manifest": manifest,
            "sum_bound": frac_str(region.sum_bound()),
            "region": region_to_jsonable(region),
            "outer_bounds": {"cognitive": bounds.cognitive,
                             "genie": bounds.genie, "tight": bounds.tight},
        })
    _emit(text, args.out)
    if args.plot:
        from .figures import save_region_figure
        save_region_figure({"linear relay": region}, _figure_path(args.out),
                           title=f"(m={args.m}, n={args.n}, l={args.l})")
    return EXIT_OK


def cmd_scheme(args) -> int:
    config = AntennaConfig(args.m, args.n, args.l)
    tol = _tolerance(args)
    ch = sample_channel(config, args.seed)
    plan = build_plan(ch, corner=args.corner, tol=tol)
    report = verify_plan(ch, plan, tol)
    prefix = args.prefix or f"icrelay_m{args.m}n{args.n}l{args.l}s{args.seed}"
    channel_path = prefix + ".channel.json"
    plan_path = prefix + ".plan.json"
    _atomic_write(channel_path, write_channel(ch))
    _atomic_write(plan_path, write_plan(plan))
    extension = 2 if closed_form_streams(config).denominator != 1 else 1
    doc = {
        "manifest": _manifest(args, "scheme"),
        "corner": args.corner,
        "extension_used": extension,
        "report": report.to_jsonable(),
        "files": {"channel": channel_path, "plan": plan_path},
    }
    _emit(_json_text(doc), args.out)
    ok = (report.all_ok
          and report.max_neutralization_residual <= tol.residual_rel_tol)
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_verify(args) -> int:
    tol = _tolerance(args)
    with open(args.channel_file) as handle:
        ch = read_channel(handle.read())
    with open(args.plan_file) as handle:
        plan = read_plan(handle.read(), tol)
    report = verify_plan(ch, plan, tol)
    doc = {"manifest": _manifest(args, "verify"), "report": report.to_jsonable()}
    _emit(_json_text(doc), args.out)
    ok = (report.all_ok
          and report.max_neutralization_residual <= tol.residual_rel_tol)
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_converse(args) -> int:
    config = AntennaConfig(args.m, args.n, args.l)
    tol = _tolerance(args)
    ch = sample_channel(config, args.seed)
    report = rank_bound_check(ch, samples=args.samples, seed=args.seed, tol=tol)
    doc = {"manifest": _manifest(args, "converse")}
    doc.update(report.to_jsonable())
    _emit(_json_text(doc), args.out)
    return EXIT_OK if report.ok else EXIT_PROPERTY


def cmd_slope(args) -> int:
    config = AntennaConfig(args.m, args.n, args.l)
    tol = _tolerance(args)
    points = tuple(
        args.snr_start_db + i * (args.snr_stop_db - args.snr_start_db)
        / (args.snr_points - 1) for i in range(args.snr_points))
    sweep = SnrSweep(snr_points_db=points, trials=args.trials, seed=args.seed)
    estimate = slope_estimate(config, sweep, corner=args.corner, tol=tol)
    manifest = _manifest(args, "slope")
    if args.format == "csv":
        rows = [(db, trial, f"{r1:.6f}", f"{r2:.6f}", f"{r1 + r2:.6f}")
                for (db, trial, r1, r2) in estimate.rows]
        text = _csv_text(manifest, ["snr_db", "trial", "r1", "r2", "sum"], rows)
    else:
        doc = {"manifest": manifest, "snr_points_db": list(points)}
        doc.update(estimate.to_jsonable())
        text = _json_text(doc)
    _emit(text, args.out)
    if args.plot:
        from .figures import save_slope_figure
        save_slope_figure(estimate.rows, estimate.sum_dof, _figure_path(args.out),
                          title=f"(m={args.m}, n={args.n}, l={args.l})")
    return EXIT_OK


def cmd_ic_region(args) -> int:
    tol = _tolerance(args)
    with open(args.channel_file) as handle:
        ch = read_channel(handle.read())
    region = ic_dof_region(ch.h11, ch.h12, ch.h21, ch.h22, tol)
    doc = {"manifest": _manifest(args, "ic-region"),
           "region": region_to_jsonable(region),
           "max_sum": frac_str(region.max_sum())}
    _emit(_json_text(doc), args.out)
    if args.plot:
        from .figures import save_region_figure
        save_region_figure({"interference channel": region},
                           _figure_path(args.out))
    return EXIT_OK


def cmd_allocate(args) -> int:
    splits, value = allocate_antennas(args.m, args.relay)
    table = [(n, l, linear_sum_dof(args.m, n, l)) for n in range(args.relay + 1)
             for l in [args.relay - n]]
    manifest = _manifest(args, "allocate")
    if args.format == "csv":
        rows = [(n, l, frac_str(v), int((n, l) in splits)) for (n, l, v) in table]
        text = _csv_text(manifest, ["n", "l", "sum_dof", "best"], rows)
    else:
        text = _json_text({
            "manifest": manifest,
            "m": args.m,
            "relay_total": args.relay,
            "value": frac_str(value),
            "best_splits": [list(s) for s in splits],
            "table": [[n, l, frac_str(v)] for (n, l, v) in table],
        })
    _emit(text, args.out)
    if args.plot:
        from .figures import save_allocation_figure
        save_allocation_figure(args.m, args.relay, table, value,
                               _figure_path(args.out))
    return EXIT_OK


def cmd_sweep(args) -> int:
    tol = _tolerance(args)
    rows = []
    all_ok = True
    for m in _parse_range(args.m):
        for n in _parse_range(args.n):
            for l in _parse_range(args.l):
                config = AntennaConfig(m, n, l)
                bound = linear_sum_dof(m, n, l)
                ob = outer_bounds(config)
                ch = sample_channel(config, derive_seed(args.seed, "sweep", m, n, l))
                scheme_sum = None
                ok = False
                try:
                    plan = build_plan(ch, corner=1, tol=tol)
                    report = verify_plan(ch, plan, tol)
                    pair = report.achieved_pair
                    scheme_sum = pair[0] + pair[1]
                    ok = (report.all_ok and
                          report.max_neutralization_residual <= tol.residual_rel_tol)
                except IcRelayError:
                    ok = False
                all_ok = all_ok and ok and scheme_sum == bound
                rows.append({
                    "m": m, "n": n, "l": l,
                    "sum_bound": bound,
                    "cognitive": ob.cognitive,
                    "genie": ob.genie,
                    "tight": ob.tight,
                    "scheme_sum": scheme_sum,
                    "scheme_ok": ok,
                })
    manifest = _manifest(args, "sweep")
    if args.format == "json":
        payload = [dict(r, sum_bound=frac_str(r["sum_bound"]),
                        scheme_sum=None if r["scheme_sum"] is None
                        else frac_str(r["scheme_sum"])) for r in rows]
        text = _json_text({"manifest": manifest, "rows": payload})
    else:
        csv_rows = [(r["m"], r["n"], r["l"], frac_str(r["sum_bound"]),
                     r["cognitive"], r["genie"], int(r["tight"]),
                     "" if r["scheme_sum"] is None else frac_str(r["scheme_sum"]),
                     int(r["scheme_ok"])) for r in rows]
        text = _csv_text(manifest,
                         ["m", "n", "l", "sum_bound", "cognitive", "genie",
                          "tight", "scheme_sum", "scheme_ok"], csv_rows)
    _emit(text, args.out)
    if args.plot:
        from .figures import save_sweep_figure
        save_sweep_figure(rows, _figure_path(args.out))
    return EXIT_OK if all_ok else EXIT_PROPERTY


def _add_common(parser, config_flags=True):
    if config_flags:
        parser.add_argument("--m", type=int, required=True,
                            help="antennas per transmitter and receiver")
        parser.add_argument("--n", type=int, required=True,
                            help="relay receive antennas")
        parser.add_argument("--l", type=int, required=True,
                            help="relay transmit antennas")
    parser.add_argument("--seed", type=int, default=None,
                        help="base seed (auto-generated and recorded if absent)")
    parser.add_argument("--tol-rank", type=float, default=1e-8,
                        help="relative rank threshold")
    parser.add_argument("--tol-res", type=float, default=1e-9,
                        help="relative residual threshold")
    parser.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icrelay",
        description="Interference neutralization schemes, DoF regions and "
                    "rank certificates for the two-user MIMO interference "
                    "channel with an instantaneous relay.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="achievable DoF region and outer bounds")
    _add_common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot", action="store_true", help="render a figure next to --out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("scheme", help="build and verify a beamforming plan")
    _add_common(p)
    p.add_argument("--corner", type=int, choices=(1, 2), default=1)
    p.add_argument("--prefix", default=None,
                   help="prefix for the channel/plan files")
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("verify", help="verify a stored plan against a stored channel")
    p.add_argument("channel_file")
    p.add_argument("plan_file")
    _add_common(p, config_flags=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("converse", help="sample the cross-link rank lower bound")
    _add_common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_converse)

    p = sub.add_parser("slope", help="estimate DoF from rate slopes")
    _add_common(p)
    p.add_argument("--corner", type=int, choices=(1, 2), default=1)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--snr-start-db", type=float, default=40.0)
    p.add_argument("--snr-stop-db", type=float, default=80.0)
    p.add_argument("--snr-points", type=int, default=5)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_slope)

    p = sub.add_parser("ic-region", help="rank-based DoF region of a stored channel's direct links")
    p.add_argument("channel_file")
    _add_common(p, config_flags=False)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_ic_region)

    p = sub.add_parser("allocate", help="best half-duplex relay antenna split")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--relay", type=int, required=True,
                   help="total half-duplex antennas at the relay")
    _add_common(p, config_flags=False)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("sweep", help="grid comparison of bounds and scheme results")
    p.add_argument("--m", required=True, help="value or range a..b")
    p.add_argument("--n", required=True, help="value or range a..b")
    p.add_argument("--l", required=True, help="value or range a..b")
    _add_common(p, config_flags=False)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "seed", None) is None:
        args.seed = secrets.randbits(48)
    if getattr(args, "plot", False) and not args.out:
        sys.stderr.write("error: --plot requires --out to name the figure\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except (DegenerateChannelError, UnstableConfigurationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PROPERTY
    except (IcRelayError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
