"""Command-line front end.

``oamlink <design|propagate|isolation|ber|all> [--config PATH] [--out DIR]
[--seed N] [--no-lens] [--snr-grid a:b:step] [--coupling KIND]``

Exit codes: 0 success, 2 configuration error, 3 numerical-contract failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io, pipeline
from .errors import ConfigError, NumericalError
from .scenario import load_scenario, parse_snr_grid

log = logging.getLogger("oamlink")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

COMMANDS = ("design", "propagate", "isolation", "ber", "all")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oamlink", description="OAM convergent-link simulator")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="scenario INI file (defaults apply when omitted)")
    p.add_argument("--out", type=Path, help="output directory (overrides [run] output_dir)")
    p.add_argument("--seed", type=int, help="random seed for the BER simulation")
    p.add_argument("--no-lens", action="store_true", help="propagate without the phase screen")
    p.add_argument("--snr-grid", help='SNR points in dB, "a:b:step" or comma separated')
    p.add_argument("--coupling", choices=("simulated", "diagonal", "measured"),
                   help="channel used by the BER stage")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _run(args) -> int:
    overrides = {"seed": args.seed, "coupling": args.coupling}
    if args.out is not None:
        overrides["output_dir"] = str(args.out)
    if args.snr_grid is not None:
        try:
            overrides["snr_grid"] = parse_snr_grid(args.snr_grid)
        except ValueError as exc:
            raise ConfigError("link.snr_grid_db", str(exc)) from exc
    if args.config is not None and not args.config.is_file():
        raise ConfigError("--config", f"no such file: {args.config}")
    scn = load_scenario(args.config, **overrides)
    out = Path(scn.output_dir)
    sim = pipeline.Simulation(scn)
    lens = not args.no_lens
    artifacts = []
    meta = {"command": args.command}
    if args.command in ("design", "all"):
        d = pipeline.run_design(scn, out, sim)
        artifacts += d.artifacts
        meta["predicted_focal_length_m"] = d.focal_length
    if args.command in ("propagate", "all"):
        pr = pipeline.run_propagate(scn, out, lens, sim)
        artifacts += pr.artifacts
        meta["with_lens"] = lens
        meta["focus"] = {
            str(m): {"z_m": f.focus_z, "boundary_peak": f.at_boundary, "vortex_charge": f.vortex_charge}
            for m, f in pr.foci.items()
        }
    iso = None
    if args.command in ("isolation", "all") or (args.command == "ber" and scn.coupling == "simulated"):
        iso = pipeline.run_isolation(scn, out, sim)
        artifacts += iso.artifacts
        meta["horn_half_spacing_m"] = iso.probes.horn_a[0]
        meta["worst_isolation_db"] = iso.worst_isolation_db
    if args.command in ("ber", "all"):
        b = pipeline.run_ber(scn, out, sim, iso)
        artifacts += b.artifacts
        meta["coupling"] = scn.coupling
    io.atomic_write_text(out / "scenario.ini", scn.to_ini())
    artifacts.append(out / "scenario.ini")
    io.write_manifest(out, scn.hash(), scn.seed, artifacts, meta)
    log.info("wrote %d artifacts to %s", len(artifacts), out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
