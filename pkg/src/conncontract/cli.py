"""Command-line entry point.

Exit status: 0 on success, 1 on invalid input or configuration, 2 when a
contract menu fails verification.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__, io
from .baselines import (
    compare_mechanisms,
    energy_and_g_surfaces,
    sweep_epsilon,
    sweep_pc_surfaces,
)
from .config import RunConfig
from .contract import solve, verify_menu
from .curvefit import FitConvergenceError, fit_pc
from .forksim import estimate_pc
from .params import EconParams, reference_grid
from .profiles import build_types, sample_population
from .validation import ValidationError

OUT_ENV = "CONNCONTRACT_OUT"
EXIT_OK, EXIT_INVALID, EXIT_UNVERIFIED = 0, 1, 2


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or "out")


def _manifest(out: Path, command: str, cfg: RunConfig, outputs) -> None:
    io.write_json(
        out / f"{command}.manifest.json",
        {
            "command": command,
            "version": __version__,
            "seed": cfg["seed"],
            "config_hash": cfg.config_hash(),
            "outputs": sorted(Path(p).name for p in outputs),
        },
    )


def _fit_for(args, cfg: RunConfig):
    if not getattr(args, "fit", None):
        return cfg.fit
    fit = io.read_fit(args.fit)
    if not args.force and not io.same_context(fit.z, fit.p_l, cfg.network.z, cfg.network.p_l):
        raise ValidationError(
            "fit",
            f"fit context (z={fit.z}, p_l={fit.p_l}) does not match config "
            f"(z={cfg.network.z}, p_l={cfg.network.p_l}); pass --force to override",
        )
    return fit


def _types(cfg: RunConfig, fit, econ=None):
    econ = econ or cfg.econ
    kw = dict(net=cfg.network, channel=cfg.channel, fit=fit, econ=econ)
    if cfg["type_mode"] == "grid":
        return build_types(reference_grid(), mode="grid", **kw)
    population = sample_population(cfg["population_size"], cfg["seed"])
    return build_types(population, cfg["n_types"], mode="quantile", **kw)


def cmd_simulate_pc(args, cfg):
    out = _out_dir(args)
    samples = estimate_pc(
        cfg.network.z, cfg.network.p_l, cfg["trials"], cfg["seed"], n_buckets=cfg["buckets"]
    )
    path = io.write_samples(out / "pc_samples.csv", samples)
    _manifest(out, "simulate-pc", cfg, [path])
    print(f"wrote {len(samples)} samples to {path}")
    return EXIT_OK


def cmd_fit_pc(args, cfg):
    out = _out_dir(args)
    samples = io.read_samples(args.samples or out / "pc_samples.csv")
    if not args.force:
        for s in samples:
            if not io.same_context(s.z, s.p_l, cfg.network.z, cfg.network.p_l):
                raise ValidationError(
                    "samples",
                    f"sample context (z={s.z}, p_l={s.p_l}) does not match config; "
                    "pass --force to override",
                )
    report = fit_pc(samples)
    doc = {**report.to_dict(), "config_hash": cfg.config_hash()}
    path = io.write_json(out / "fit_report.json", doc)
    _manifest(out, "fit-pc", cfg, [path])
    print(
        f"beta=({report.params.beta1:.6g}, {report.params.beta2:.6g}, {report.params.beta3:.6g}) "
        f"adj_R2={report.adj_r_squared:.5f} rmse={report.rmse:.5g} -> {path}"
    )
    return EXIT_OK


def cmd_solve_contract(args, cfg):
    out = _out_dir(args)
    types = _types(cfg, _fit_for(args, cfg))
    menu = solve(types, cfg.econ, cfg.network.z)
    report = verify_menu(menu, types, cfg.econ)
    doc = {**io.menu_to_dict(menu), "config_hash": cfg.config_hash()}
    paths = [io.write_json(out / "menu.json", doc), io.write_menu_csv(out / "menu.csv", menu)]
    _manifest(out, "solve-contract", cfg, paths)
    print(f"{len(types)} types, blockchain utility {menu.blockchain_utility:.6g}; {report.summary()}")
    return EXIT_OK if report.passed else EXIT_UNVERIFIED


def cmd_verify(args, cfg):
    path = args.menu or _out_dir(args) / "menu.json"
    menu = io.menu_from_dict(io.read_json(path))
    econ = EconParams(theta=menu.theta, epsilon=menu.epsilon, gamma=cfg.econ.gamma)
    report = verify_menu(menu, menu.types, econ)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_UNVERIFIED


def cmd_compare(args, cfg):
    out = _out_dir(args)
    types = _types(cfg, _fit_for(args, cfg))
    results = compare_mechanisms(
        types, cfg.econ, cfg.network.z,
        quantile=cfg["fixed_pow_quantile"], flat_salary=cfg["fixed_pow_salary"],
    )
    path = io.write_csv(out / "compare.csv", io.MECHANISM_COLUMNS, results)
    _manifest(out, "compare", cfg, [path])
    for r in results:
        print(f"{r.mechanism:>24s}  {r.blockchain_utility:.6g}")
    return EXIT_OK


def cmd_sweep(args, cfg):
    out = _out_dir(args)
    fit = _fit_for(args, cfg)
    types = _types(cfg, fit)
    results = sweep_epsilon(
        types, cfg.econ, cfg.network.z, cfg["eps_min"], cfg["eps_max"], cfg["eps_step"],
        quantile=cfg["fixed_pow_quantile"], flat_salary=cfg["fixed_pow_salary"],
    )
    paths = [io.write_csv(out / "sweep_epsilon.csv", io.MECHANISM_COLUMNS, results)]
    surfaces = energy_and_g_surfaces(net=cfg.network, channel=cfg.channel, fit=fit)
    paths.append(io.write_csv(out / "surfaces_eg.csv", io.EG_SURFACE_COLUMNS, surfaces))
    if args.with_pc or cfg["sweep_pc"]:
        rows, _ = sweep_pc_surfaces(
            cfg["sweep_z"], cfg["sweep_p_l"], args.trials or cfg["sweep_trials"],
            cfg["seed"], cfg["buckets"],
        )
        paths.append(io.write_csv(out / "pc_surfaces.csv", io.PC_SURFACE_COLUMNS, rows))
    _manifest(out, "sweep", cfg, paths)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


COMMANDS = {
    "simulate-pc": cmd_simulate_pc,
    "fit-pc": cmd_fit_pc,
    "solve-contract": cmd_solve_contract,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", metavar="DIR", help=f"output directory (env {OUT_ENV}, default ./out)")
    common.add_argument("--trials", type=int, help="override trials per bucket")
    common.add_argument("--force", action="store_true", help="accept inputs from another (z, p_l)")

    parser = argparse.ArgumentParser(prog="conncontract", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate-pc", parents=[common], help="simulate fork races, write P_c samples")
    p = sub.add_parser("fit-pc", parents=[common], help="fit the logarithmic P_c curve")
    p.add_argument("--samples", metavar="PATH")
    p = sub.add_parser("solve-contract", parents=[common], help="design and verify the menu")
    p.add_argument("--fit", metavar="PATH", help="fit report JSON (default: shipped coefficients)")
    p = sub.add_parser("verify", parents=[common], help="re-check a menu file")
    p.add_argument("--menu", metavar="PATH")
    p = sub.add_parser("compare", parents=[common], help="compare the four mechanisms")
    p.add_argument("--fit", metavar="PATH")
    p = sub.add_parser("sweep", parents=[common], help="epsilon sweep and surface datasets")
    p.add_argument("--fit", metavar="PATH")
    p.add_argument("--with-pc", action="store_true", help="also simulate the (z, p_l) P_c grid")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {"seed": args.seed}
        if args.command == "simulate-pc":
            overrides["trials"] = args.trials
        cfg = RunConfig.load(args.config, **overrides) if args.config else RunConfig.from_dict(None, **overrides)
        return COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FileNotFoundError, FitConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
