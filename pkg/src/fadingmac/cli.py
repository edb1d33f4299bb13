"""Command-line front end.

Subcommands wire the library modules together from a single JSON config:

* ``prelog``       region CSVs (joint / TDMA / coherent TDMA / genie) plus a
  scheme-comparison report and a region figure;
* ``interp``       interpolation-MSE profiles per window size, CSV + figure;
* ``gmi``          GMI lower-bound curves over SNR with fitted pre-log
  slopes, CSV + JSON + figure;
* ``decode``       Monte Carlo message-error rates, JSON + figure;
* ``layout-dump``  the slot-by-slot frame as JSON, for debugging/fixtures.

SNRs are given in dB in the config and converted to linear internally.
Every output starts with a provenance line (tool version, config hash,
seed); given the same config and seed, reruns are byte-identical.
Exit codes: 0 success, 2 config error, 3 numerical-budget error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import SystemConfig
from .decoder import BudgetError, run_mc_experiment
from .estimator import analytic_error_stats, empirical_mse
from .gmi import (MonteCarloBudgetError, gmi1_lower_asymptotic,
                  gmi2_lower_asymptotic, gmi12_lower, prelog_slope,
                  theta_star)
from .region import (as_fraction, compare_schemes, coherent_tdma_sum,
                     genie_region, joint_region, region_corners, tdma_region)
from .scheme import (DivisibilityError, PeriodTooShort, build_joint_layout,
                     build_tdma_layout)
from .spectra import (NyquistViolation, PowerSpectralDensity, SpectrumError,
                      interp_error_nyquist, load_psd_grid, lstar)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3


class ConfigError(ValueError):
    pass


def _require(cfg: dict, dotted: str):
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"missing config key '{dotted}'")
        node = node[part]
    return node


def load_run_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    version = cfg.get("config_version", 1)
    if version != 1:
        raise ConfigError(f"unsupported config_version {version!r}")
    return cfg


def _psd_from(cfg: dict, base: Path) -> tuple[PowerSpectralDensity, Fraction]:
    psd_cfg = _require(cfg, "psd")
    shape = str(_require(cfg, "psd.shape")).lower()
    if shape == "brickwall":
        lam = as_fraction(_require(cfg, "psd.lambda_d"))
        return PowerSpectralDensity.brickwall(float(lam)), lam
    if shape in ("grid", "tabulated"):
        path = Path(str(_require(cfg, "psd.file")))
        if not path.is_absolute():
            path = base / path
        psd = load_psd_grid(path)
        return psd, as_fraction(psd_cfg.get("lambda_d", psd.lambda_d))
    raise ConfigError(f"unknown psd shape '{shape}'")


def _system(cfg: dict, psd: PowerSpectralDensity, snr: float,
            T: int | None = None) -> SystemConfig:
    return SystemConfig(
        n_t1=int(_require(cfg, "antennas.n_t1")),
        n_t2=int(_require(cfg, "antennas.n_t2")),
        n_r=int(_require(cfg, "antennas.n_r")),
        snr=snr,
        L=int(_require(cfg, "L")),
        T=int(T if T is not None else _require(cfg, "T")),
        psd=psd,
    )


def _snr_list(cfg: dict) -> list[float]:
    vals = _require(cfg, "snr_db")
    if not isinstance(vals, (list, tuple)) or not vals:
        raise ConfigError("'snr_db' must be a non-empty list of dB values")
    out = []
    for v in vals:
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"'snr_db' entry {v!r} is not a finite number")
        out.append(float(v))
    return out


def _provenance(cfg: dict, seed) -> str:
    digest = hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]
    return f"# fadingmac {__version__} config_sha256={digest} seed={seed}"


def _write_csv(path: Path, header: str, columns: list[str],
               rows: list[list]) -> None:
    lines = [header, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _write_json(path: Path, payload, cfg: dict, seed) -> None:
    doc = {"provenance": _provenance(cfg, seed).lstrip("# "),
           "data": payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str)
                    + "\n", encoding="utf-8")


def _seed_of(cfg: dict, args) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg.get("seed", 0))


def cmd_prelog(cfg: dict, args, out: Path) -> int:
    psd, lam = _psd_from(cfg, Path(args.config).parent)
    nt1, nt2, nr = (int(_require(cfg, "antennas.n_t1")),
                    int(_require(cfg, "antennas.n_t2")),
                    int(_require(cfg, "antennas.n_r")))
    l_star = lstar(float(lam))
    betas = [as_fraction(b) for b in cfg.get("beta", [0, "1/4", "1/2",
                                                      "3/4", 1])]
    seed = _seed_of(cfg, args)
    header = _provenance(cfg, seed)

    joint = joint_region(nt1, nt2, nr, l_star)
    tdma = tdma_region(nt1, nt2, nr, l_star, betas)
    genie = genie_region(nt1, nt2, nr)
    coh_corners = [(Fraction(0), Fraction(0)),
                   (Fraction(min(nr, nt1)), Fraction(0)),
                   (Fraction(0), Fraction(min(nr, nt2)))]
    named = {
        "joint": region_corners(joint),
        "tdma": region_corners(tdma),
        "coherent_tdma": coh_corners,
        "genie": region_corners(genie),
    }
    for name, corners in named.items():
        loop = corners + corners[:1]
        _write_csv(out / f"{name}_region.csv", header, ["x", "y"],
                   [[x, y] for x, y in loop])

    cmp_res = compare_schemes(nt1, nt2, nr, l_star)
    thr = cmp_res.thresholds
    report = {
        "config": {"n_t1": nt1, "n_t2": nt2, "n_r": nr,
                   "lambda_d": str(lam), "l_star": l_star},
        "joint_sum": str(cmp_res.joint_sum),
        "tdma_sum": str(cmp_res.tdma_sum),
        "coherent_tdma_sum": str(cmp_res.coherent_tdma_sum),
        "class": cmp_res.classification,
        "joint_region_empty": cmp_res.joint_empty,
        "thresholds": {
            "joint_superior_if_lstar_gt":
                str(thr.joint_superior_if_lstar_gt)
                if thr.joint_superior_if_lstar_gt is not None else "inf",
            "tdma_superior_if_lstar_lt":
                str(thr.tdma_superior_if_lstar_lt)
                if thr.tdma_superior_if_lstar_lt is not None else "inf",
        },
    }
    _write_json(out / "comparison.json", report, cfg, seed)
    if not args.no_figures:
        from .figures import plot_regions
        plot_regions(named, out / "regions.png",
                     title=f"({nt1},{nt2},{nr}), L*={l_star}")
    return EXIT_OK


def cmd_interp(cfg: dict, args, out: Path) -> int:
    psd, _ = _psd_from(cfg, Path(args.config).parent)
    snrs = _snr_list(cfg)
    t_values = _require(cfg, "T")
    if not isinstance(t_values, (list, tuple)):
        t_values = [t_values]
    trials = int(_require(cfg, "mc.mse_trials"))
    seed = _seed_of(cfg, args)
    header = _provenance(cfg, seed)

    rows = []
    for snr_db in snrs:
        snr = 10.0 ** (snr_db / 10.0)
        for T in t_values:
            sysc = _system(cfg, psd, snr, T=T)
            blocks = int(cfg.get("n", 4 * (sysc.L - sysc.nt_sum)))
            layout = build_joint_layout(sysc, blocks)
            if trials > 0:
                stats = empirical_mse(sysc, layout, trials, seed)
            else:
                stats = analytic_error_stats(sysc, layout)
            for s in stats.users():
                for t in stats.antennas(s):
                    emp = stats.empirical.get((s, t))
                    err = stats.stderr.get((s, t))
                    for i, phase in enumerate(stats.phases[s]):
                        row = {
                            "snr_db": snr_db, "T": int(T), "user": s,
                            "antenna": t, "phase_ell": int(phase),
                            "analytic_mse": float(stats.analytic[(s, t)][i]),
                            "empirical_mse":
                                float(emp[i]) if emp is not None else None,
                            "stderr":
                                float(err[i]) if err is not None else None,
                            "eps2_asymptotic": stats.asymptotic,
                            "eps2_T": stats.eps2_T,
                        }
                        rows.append(row)
    columns = ["snr_db", "T", "user", "antenna", "phase_ell", "analytic_mse",
               "empirical_mse", "stderr", "eps2_asymptotic", "eps2_T"]
    _write_csv(out / "mse_profiles.csv", header, columns,
               [[r[c] for c in columns] for r in rows])
    if not args.no_figures:
        from .figures import plot_mse_profiles
        plot_mse_profiles(rows, out / "mse_profiles.png")
    return EXIT_OK


def cmd_gmi(cfg: dict, args, out: Path) -> int:
    psd, _ = _psd_from(cfg, Path(args.config).parent)
    snrs = _snr_list(cfg)
    budget = int(_require(cfg, "mc.gmi_samples"))
    seed = _seed_of(cfg, args)
    header = _provenance(cfg, seed)

    def one(snr_db: float) -> dict:
        snr = 10.0 ** (snr_db / 10.0)
        sysc = _system(cfg, psd, snr)
        eps2 = interp_error_nyquist(psd, sysc.L, snr)
        layout = build_joint_layout(sysc, sysc.L - sysc.nt_sum)
        stats = analytic_error_stats(sysc, layout)
        b1 = gmi1_lower_asymptotic(sysc, eps2, budget, seed)
        b2 = gmi2_lower_asymptotic(sysc, eps2, budget, seed)
        b12 = gmi12_lower(sysc, eps2, budget, seed)
        return {
            "snr_db": snr_db, "snr": snr,
            "bound_user1": b1.value, "stderr_user1": b1.stderr,
            "bound_user2": b2.value, "stderr_user2": b2.stderr,
            "bound_sum": b12.value, "stderr_sum": b12.stderr,
            "secondary_user1": b1.secondary,
            "secondary_sum": b12.secondary,
            "theta_used": theta_star(sysc, stats.eps2_T),
            "eps2": eps2, "eps2_T": stats.eps2_T,
        }

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(one, snrs))
    else:
        rows = [one(s) for s in snrs]

    columns = ["snr_db", "bound_user1", "stderr_user1", "bound_user2",
               "stderr_user2", "bound_sum", "stderr_sum", "secondary_user1",
               "secondary_sum", "theta_used", "eps2", "eps2_T"]
    _write_csv(out / "gmi_curves.csv", header, columns,
               [[r[c] for c in columns] for r in rows])

    slopes = {}
    if len(rows) >= 2:
        for key in ("bound_user1", "bound_user2", "bound_sum"):
            slopes[key] = prelog_slope([(r["snr"], r[key]) for r in rows])
    _write_json(out / "gmi_slopes.json", slopes, cfg, seed)
    if not args.no_figures:
        from .figures import plot_gmi_curves
        plot_gmi_curves(rows, slopes, out / "gmi_curves.png")
    return EXIT_OK


def _scheme_of(cfg: dict):
    scheme = _require(cfg, "scheme")
    if isinstance(scheme, str):
        if scheme.lower() != "joint":
            raise ConfigError(f"unknown scheme '{scheme}'")
        return "joint"
    if isinstance(scheme, dict) and "tdma" in scheme:
        return ("tdma", float(scheme["tdma"]))
    raise ConfigError("'scheme' must be \"joint\" or {\"tdma\": beta}")


def cmd_decode(cfg: dict, args, out: Path) -> int:
    psd, _ = _psd_from(cfg, Path(args.config).parent)
    snrs = _snr_list(cfg)
    n = int(_require(cfg, "n"))
    rates = _require(cfg, "rates")
    if not isinstance(rates, (list, tuple)) or len(rates) != 2:
        raise ConfigError("'rates' must be a two-element list (nats/use)")
    trials = int(_require(cfg, "mc.decode_trials"))
    scheme = _scheme_of(cfg)
    seed = _seed_of(cfg, args)

    def one(snr_db: float) -> dict:
        snr = 10.0 ** (snr_db / 10.0)
        sysc = _system(cfg, psd, snr)
        return run_mc_experiment(sysc, (float(rates[0]), float(rates[1])),
                                 n, trials, scheme, seed)

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            reports = list(pool.map(one, snrs))
    else:
        reports = [one(s) for s in snrs]
    _write_json(out / "decode_report.json", reports, cfg, seed)
    if not args.no_figures:
        from .figures import plot_error_rates
        plot_error_rates(reports, out / "error_rates.png")
    return EXIT_OK


def cmd_layout_dump(cfg: dict, args, out: Path) -> int:
    psd, _ = _psd_from(cfg, Path(args.config).parent)
    sysc = _system(cfg, psd, snr=1.0)
    n = int(_require(cfg, "n"))
    scheme = _scheme_of(cfg)
    if scheme == "joint":
        layout = build_joint_layout(sysc, n)
    else:
        layout = build_tdma_layout(sysc, n, scheme[1])
    seed = _seed_of(cfg, args)
    payload = {
        "counts": {"data": layout.counts.data, "pilots": layout.counts.pilots,
                   "guard": layout.counts.guard, "total": layout.counts.total},
        "achieved_beta": layout.achieved_beta,
        "slots": layout.to_records(),
    }
    _write_json(out / "layout.json", payload, cfg, seed)
    return EXIT_OK


COMMANDS = {
    "prelog": cmd_prelog,
    "interp": cmd_interp,
    "gmi": cmd_gmi,
    "decode": cmd_decode,
    "layout-dump": cmd_layout_dump,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fadingmac",
        description="Two-user noncoherent MIMO fading MAC toolkit")
    parser.add_argument("--version", action="version",
                        version=f"fadingmac {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="worker threads (results are worker-independent)")
        p.add_argument("--no-figures", action="store_true",
                       help="skip matplotlib rendering, emit data only")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, SpectrumError, NyquistViolation, DivisibilityError,
            PeriodTooShort, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetError, MonteCarloBudgetError) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
