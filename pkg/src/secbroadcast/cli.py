"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration, 2 refused (enumeration
budget), 3 golden-trace mismatch.
"""

import argparse
from fractions import Fraction
from importlib import resources
import json
import math
from pathlib import Path
import sys

from .adversary import parse_behavior
from .analysis import leakage as lk
from .analysis import regions as rg
from .analysis.stats import concentration_check, empirical_rates, observation_probability, run_batch
from .channel import ChannelParams
from .config import config_from_mapping, load_config
from .errors import ConfigError, DomainError, EnumerationBudgetError
from .protocol.params import PARAM_NAMES, ProtocolParams, compute_params
from .protocol.session import SessionConfig, run_session
from .protocol.simplified import run_simplified_session
from .trace import first_difference, render_trace

SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_REFUSED, EXIT_MISMATCH = 0, 1, 2, 3


def _num(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=_num) + "\n"


def _out_dir(cfg):
    if cfg.out is None:
        return None
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(cfg, name, text):
    d = _out_dir(cfg)
    if d is not None:
        with open(d / name, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _session_config(cfg):
    params = compute_params(cfg.N1, cfg.N2, cfg.delta1, cfg.delta2)
    chan = ChannelParams(cfg.delta1, cfg.delta2, cfg.joint)
    try:
        return SessionConfig(params, chan, L=cfg.L, q=cfg.q, seed=cfg.seed,
                             bob=parse_behavior(cfg.bob), calvin=parse_behavior(cfg.calvin))
    except DomainError as e:
        raise ConfigError(str(e)) from None


# -- commands ------------------------------------------------------------------

def cmd_params(cfg):
    p = compute_params(cfg.N1, cfg.N2, cfg.delta1, cfg.delta2)
    lines = [f"N1={p.N1} N2={p.N2} delta1={p.delta1:g} delta2={p.delta2:g}",
             f"{'name':<5} {'value':>10} {'real':>22}"]
    for name in PARAM_NAMES:
        lines.append(f"{name:<5} {getattr(p, name) if name != 'n' else p.n:>10} "
                     f"{p.raw[name]:>22.12f}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    report = {"schema": SCHEMA, "command": "params", "params": p.as_dict(),
              "real": {k: p.raw[k] for k in PARAM_NAMES}}
    _write(cfg, "params.json", _dump(report))
    return EXIT_OK


def _region_specs(cfg):
    q = cfg.region_q or cfg.q
    kinds = ("secrecy", "nosecurity", "naive") if cfg.region == "all" else (cfg.region,)
    specs = []
    for kind in kinds:
        if kind == "common":
            specs.append(("common", rg.common_message_region(cfg.delta1, cfg.delta2, cfg.L, q,
                                                             cfg.Rc)))
        else:
            specs.append((kind, rg.REGIONS[kind](cfg.delta1, cfg.delta2, cfg.L, q)))
    return specs


def cmd_region(cfg):
    for kind, spec in _region_specs(cfg):
        pts = rg.region_boundary(spec)
        name = f"region_{kind}.csv"
        d = _out_dir(cfg)
        if d is None:
            sys.stdout.write(f"# {kind}\nR1,R2\n")
            for r1, r2 in pts:
                sys.stdout.write(f"{float(r1):.17g},{float(r2):.17g}\n")
        else:
            rg.write_boundary_csv(d / name, pts)
            sys.stdout.write(f"{kind}: max R1 = {float(spec.max_r1()):.12g}, "
                             f"max R2 = {float(spec.max_r2()):.12g} -> {d / name}\n")
    return EXIT_OK


def simulate_report(cfg):
    """The JSON-ready report of a seeded batch (also used by the tests)."""
    if cfg.seeds <= 0:
        raise ConfigError("simulate needs at least one seed (--seeds)")
    if cfg.mode == "concentration":
        r = concentration_check(cfg.N1, cfg.delta1, cfg.delta2, cfg.trials, cfg.seed)
        return {"schema": SCHEMA, "command": "simulate", "mode": cfg.mode, "N1": r.N1,
                "kB": r.kB, "trials": r.trials, "exceed": r.exceed, "p_hat": r.p_hat,
                "mean_m": r.mean_m, "p_observe": r.p_observe}
    if cfg.mode != "full":
        raise ConfigError(f"simulate runs mode 'full' or 'concentration', not {cfg.mode!r}")
    scfg = _session_config(cfg)
    batch = run_batch(scfg, cfg.seeds)
    rates = empirical_rates(batch)
    point = (rates.R1, rates.R2)
    secrecy = rg.secrecy_region(cfg.delta1, cfg.delta2, cfg.L, cfg.q)
    nosec = rg.nosecurity_region(cfg.delta1, cfg.delta2, cfg.L, cfg.q)
    p = scfg.params
    config = cfg.as_dict()
    config.pop("out")
    return {
        "schema": SCHEMA,
        "command": "simulate",
        "config": config,
        "params": p.as_dict(),
        "sessions": len(batch),
        "R1": rates.R1,
        "R2": rates.R2,
        "error_freq_bob": rates.err_bob,
        "error_freq_calvin": rates.err_calvin,
        "error_steps_bob": _counts(b.err_bob for b in batch),
        "error_steps_calvin": _counts(b.err_calvin for b in batch),
        "bob_decodes_when_no_error": all(b.bob_ok for b in batch if b.err_bob is None),
        "calvin_decodes_when_no_error": all(b.calvin_ok for b in batch if b.err_calvin is None),
        "mean_leakage_bound_to_calvin": sum(b.leak_to_calvin for b in batch) / len(batch),
        "mean_leakage_bound_to_bob": sum(b.leak_to_bob for b in batch) / len(batch),
        "mean_length": rates.mean_length,
        "observed_fraction_calvin": (sum(b.m_bc for b in batch) / (len(batch) * p.N1)
                                     if p.N1 else 0.0),
        "observation_probability": observation_probability(cfg.delta1, cfg.delta2),
        "in_secrecy_region": rg.region_contains(secrecy, point),
        "in_nosecurity_region": rg.region_contains(nosec, point),
        "secrecy_ray_fraction": rg.ray_fraction(secrecy, point),
    }


def _counts(flags):
    out = {}
    for f in flags:
        if f is not None:
            out[f] = out.get(f, 0) + 1
    return out


def cmd_simulate(cfg):
    report = simulate_report(cfg)
    text = _dump(report)
    _write(cfg, "report.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def default_fixture():
    return resources.files("secbroadcast") / "data" / "worked_example.yaml"


def trace_text(cfg):
    if cfg.mode == "simplified":
        if not cfg.states:
            raise ConfigError("the trace fixture has no states")
        tr = run_simplified_session(list(cfg.states), cfg.N1, cfg.N2,
                                    key_sizes=tuple(cfg.key_sizes), q=cfg.q, L=cfg.L,
                                    seed=cfg.seed)
        if not tr.complete:
            sys.stderr.write("warning: forced states ran out before the session completed\n")
    else:
        tr = run_session(_session_config(cfg), 0)
    return render_trace(tr)


def cmd_trace(cfg):
    text = trace_text(cfg)
    _write(cfg, "trace.csv", text)
    if cfg.out is None:
        sys.stdout.write(text)
    if cfg.golden is None:
        return EXIT_OK
    try:
        golden = Path(cfg.golden).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read golden trace {cfg.golden}: {e.strerror}") from None
    line = first_difference(golden, text)
    if line is None:
        sys.stdout.write(f"trace matches {Path(cfg.golden).name}\n")
        return EXIT_OK
    got = text.splitlines()
    want = golden.splitlines()
    sys.stdout.write(f"trace differs from {Path(cfg.golden).name} at line {line}\n"
                     f"  expected: {want[line - 1] if line <= len(want) else '<end>'}\n"
                     f"  got:      {got[line - 1] if line <= len(got) else '<end>'}\n")
    return EXIT_MISMATCH


def _tiny_params(cfg):
    if not cfg.tiny:
        return lk.tiny_params()
    base = lk.tiny_params().__dict__.copy()
    base.pop("raw", None)
    extra = set(cfg.tiny) - set(base)
    if extra:
        raise ConfigError(f"unknown tiny-instance keys: {', '.join(sorted(extra))}")
    base.update(cfg.tiny)
    try:
        return ProtocolParams(**base)
    except (DomainError, TypeError) as e:
        raise ConfigError(str(e)) from None


def leakage_report(cfg):
    if cfg.ensemble == "tiny":
        ens = lk.TinyProtocolEnsemble(_tiny_params(cfg))
        r = lk.analyze_tiny(ens, budget=cfg.budget)
        return {"schema": SCHEMA, "command": "leakage", "ensemble": "tiny", "size": r.size,
                "leakage": str(Fraction(r.leakage)) if isinstance(r.leakage, Fraction) else r.leakage,
                "leakage_bits": float(r.leakage),
                "protected_leakage": str(r.protected_leakage),
                "protected_mass": str(r.protected_mass),
                "counting_term": str(r.counting_term), "key_term": str(r.key_term),
                "bound": str(r.bound), "bound_bits": float(r.bound)}
    ens = lk.ENSEMBLES[cfg.ensemble](cfg.delta1, cfg.delta2)
    r = lk.exact_leakage(ens, budget=cfg.budget)
    return {"schema": SCHEMA, "command": "leakage", "ensemble": cfg.ensemble, "size": r.size,
            "leakage": str(Fraction(r.bits)) if r.exact else r.bits,
            "leakage_bits": float(r.bits)}


def cmd_leakage(cfg):
    rep = leakage_report(cfg)
    sys.stdout.write(f"{rep['ensemble']}: {rep['leakage']} bits ({rep['leakage_bits']:.12g})\n")
    if rep["ensemble"] == "tiny":
        sys.stdout.write(f"protected sub-ensemble: {rep['protected_leakage']} bits\n"
                         f"bound: {rep['bound']} bits\n")
    _write(cfg, "leakage.json", _dump(rep))
    return EXIT_OK


COMMANDS = {
    "params": cmd_params,
    "region": cmd_region,
    "simulate": cmd_simulate,
    "trace": cmd_trace,
    "leakage": cmd_leakage,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="secbroadcast",
                                 description="Secure broadcast over erasure channels: "
                                             "parameters, regions, simulation, traces, leakage.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="YAML configuration file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seeds", type=int, help="number of seeded sessions")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    return ap


def load(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.command == "trace":
        fixture = default_fixture()
        with resources.as_file(fixture) as path:
            cfg = load_config(path)
    else:
        cfg = config_from_mapping({})
    return cfg.with_overrides(out=args.out, seeds=args.seeds, seed=args.seed)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args)
        return COMMANDS[args.command](cfg)
    except EnumerationBudgetError as e:
        sys.stderr.write(f"refused: enumeration size {e.size} exceeds the budget {e.budget}\n")
        return EXIT_REFUSED
    except (ConfigError, DomainError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
