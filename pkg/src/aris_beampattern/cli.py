"""Command-line front end.

Scenario files are TOML with the sections ``[array]``, ``[channel]``,
``[regions]``, ``[waveform]``, ``[aris]``, ``[solver]`` and ``[output]``.
Every key is optional; missing keys take the defaults listed in
``SCHEMA``.  Unknown sections or keys are rejected with the offending key
and its line number.

Verbs::

    synthesize SCENARIO   joint waveform / ARIS design
    baseline   SCENARIO   same, with the ARIS removed
    sweep      SCENARIO --param {L2,varsigma,eta,delta} --values ... --seeds ...
    evaluate   SCENARIO --waveform waveform.csv --ris ris.csv

Exit codes: 0 converged / feasible, 2 not converged or constraint
violation, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .beampattern import beampattern_curve, region_energies, to_db
from .outer import OuterConfig, Problem, RunResult, Scenario, build_problem, run
from .projections import BM, CM, PAR, DualRootConfig, waveform_violation
from .ris import CccpConfig
from .scene import AngularRegion, ArrayGeometry, ChannelModel
from .waveform import CadmmConfig, power_violation

log = logging.getLogger("aris_beampattern")

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2
FEAS_TOL = 1e-6
FMT = "{:.12g}"

# section -> key -> default (None: derived at run time)
SCHEMA: dict[str, dict[str, object]] = {
    "array": {"L1": 10, "L2": 64, "N": 32, "d": 0.5, "d_tilde": 0.5, "theta_p": 10.0},
    "channel": {"PL0_dB": -30.0, "D0": 1.0, "D": 2.0, "alpha": 2.2, "K_R": 3.0,
                "sigma_v2_dBm": -80.0, "position": [-1.94, 0.5], "seed": None},
    "regions": {"mainlobe": [[-11.0, 11.0]], "sidelobe": None, "integral_step": 0.1,
                "randomize_center": False, "center_range": [-10.0, 10.0]},
    "waveform": {"constraint": "CM", "eps1": 1.0, "eta": 1.2, "E": None, "eps2": 1.0,
                 "delta": 0.1},
    "aris": {"mode": "aris", "varsigma": 5.0, "PA": 1.0},
    "solver": {"seed": 0, "iota3": 1e-3, "T_max": 50,
               "beta1": None, "iota1": None, "K_max": 500,
               "iota2": None, "J_max": 50, "rho": None, "inner_abs_tol": 1e-7,
               "inner_rel_tol": 1e-5, "inner_max_iter": 500, "adaptive_rho": False,
               "root_tol": 1e-10, "root_max_iter": 200},
    "output": {"grid_step": 0.1},
}

SWEEP_PARAMS = ("L2", "varsigma", "eta", "delta")


class ScenarioError(ValueError):
    """Malformed scenario file."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


# ---------------------------------------------------------------- parsing

def _key_line(text: str, section: str | None, key: str) -> int | None:
    """1-based line of ``key`` (or of ``[key]`` when ``section`` is None)."""
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        m = re.fullmatch(r"\[\s*([^\]]+?)\s*\]", line)
        if m:
            current = m.group(1)
            if section is None and current == key:
                return i
            continue
        if section is not None and current == section:
            if re.match(rf'["\']?{re.escape(key)}["\']?\s*=', line):
                return i
    return None


def _where(text, section, key) -> str:
    line = _key_line(text, section, key)
    return f" (line {line})" if line else ""


@dataclasses.dataclass
class ScenarioSpec:
    scenario: Scenario
    grid_step: float
    raw: dict


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse scenario TOML text into a :class:`Scenario` and output options."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"invalid TOML: {exc}") from exc
    for sec, body in doc.items():
        if sec not in SCHEMA:
            raise ScenarioError(f"unknown section [{sec}]{_where(text, None, sec)}")
        if not isinstance(body, dict):
            raise ScenarioError(f"'{sec}' must be a section{_where(text, None, sec)}")
        for key in body:
            if key not in SCHEMA[sec]:
                raise ScenarioError(
                    f"unknown key '{key}' in [{sec}]{_where(text, sec, key)}")
    cfg = {sec: {**defaults, **doc.get(sec, {})} for sec, defaults in SCHEMA.items()}

    def build(sec, key, fn):
        try:
            return fn(cfg[sec][key])
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"bad value for '{key}' in [{sec}]{_where(text, sec, key)}: "
                                f"{exc}") from exc

    def build_many(sec, factory, keys):
        # validation errors of a config type are attributed to its first explicit key
        try:
            return factory()
        except (TypeError, ValueError) as exc:
            given = [k for k in keys if k in doc.get(sec, {})] or keys[:1]
            raise ScenarioError(f"bad value for '{given[0]}' in [{sec}]"
                                f"{_where(text, sec, given[0])}: {exc}") from exc

    a = cfg["array"]
    geom = build_many("array", lambda: ArrayGeometry(
        L1=_int(a["L1"]), L2=_int(a["L2"]), N=_int(a["N"]), d=float(a["d"]),
        d_tilde=float(a["d_tilde"]), theta_p=float(a["theta_p"])), list(a))

    c = cfg["channel"]
    sigma_v2 = build("channel", "sigma_v2_dBm", lambda v: dbm_to_watt(float(v)))
    position = build("channel", "position", lambda p: (float(p[0]), float(p[1])))
    channel = build_many("channel", lambda: ChannelModel(
        PL0_dB=float(c["PL0_dB"]), D0=float(c["D0"]), D=float(c["D"]),
        alpha=float(c["alpha"]), K_R=float(c["K_R"]), sigma_v2=sigma_v2,
        position=position), list(c))
    channel_seed = build("channel", "seed", lambda s: None if s is None else _int(s))

    mainlobe = build("regions", "mainlobe", AngularRegion.of)
    sidelobe = build("regions", "sidelobe", lambda s: None if s is None else AngularRegion.of(s))
    center_range = build("regions", "center_range", lambda p: (float(p[0]), float(p[1])))

    w = cfg["waveform"]
    kind = str(w["constraint"]).upper()
    factories = {
        "CM": lambda: CM(eps1=float(w["eps1"])),
        "PAR": lambda: PAR(eta=float(w["eta"]), E=None if w["E"] is None else float(w["E"])),
        "BM": lambda: BM(eps2=float(w["eps2"]), delta=float(w["delta"])),
    }
    if kind not in factories:
        raise ScenarioError(f"bad value for 'constraint' in [waveform]"
                            f"{_where(text, 'waveform', 'constraint')}: "
                            f"expected CM, PAR or BM, got {w['constraint']!r}")
    constraint = build_many("waveform", factories[kind], list(w))

    ar = cfg["aris"]
    if ar["mode"] not in ("aris", "ris_free"):
        raise ScenarioError(f"bad value for 'mode' in [aris]{_where(text, 'aris', 'mode')}: "
                            f"expected 'aris' or 'ris_free'")

    s = cfg["solver"]
    root = build_many("solver", lambda: DualRootConfig(
        tol=float(s["root_tol"]), max_iter=_int(s["root_max_iter"])),
        ["root_tol", "root_max_iter"])
    outer = build_many("solver", lambda: OuterConfig(
        iota3=float(s["iota3"]), T_max=_int(s["T_max"]), mode=str(cfg["aris"]["mode"]),
        seed=_int(s["seed"])), ["iota3", "T_max", "seed"])
    cadmm = build_many("solver", lambda: CadmmConfig(
        beta1=_opt_float(s["beta1"]), iota1=_opt_float(s["iota1"]), K_max=_int(s["K_max"]),
        root=root), ["beta1", "iota1", "K_max"])
    cccp = build_many("solver", lambda: CccpConfig(
        iota2=_opt_float(s["iota2"]), J_max=_int(s["J_max"]), rho=_opt_float(s["rho"]),
        inner_abs_tol=float(s["inner_abs_tol"]), inner_rel_tol=float(s["inner_rel_tol"]),
        inner_max_iter=_int(s["inner_max_iter"]), adaptive_rho=_bool(s["adaptive_rho"]),
        root=root), ["iota2", "J_max", "rho"])

    varsigma = build("aris", "varsigma", _nonneg)
    PA = build("aris", "PA", _positive)
    integral_step = build("regions", "integral_step", _positive)
    grid_step = build("output", "grid_step", _positive)
    randomize = build("regions", "randomize_center", _bool)

    sc = Scenario(geometry=geom, channel=channel, mainlobe=mainlobe, sidelobe=sidelobe,
                  constraint=constraint, varsigma=varsigma, PA=PA,
                  integral_step=integral_step, randomize_center=randomize,
                  center_range=center_range, channel_seed=channel_seed, outer=outer,
                  cadmm=cadmm, cccp=cccp)
    return ScenarioSpec(scenario=sc, grid_step=grid_step, raw=cfg)


def load_scenario(path) -> ScenarioSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text)


def _int(v) -> int:
    if isinstance(v, bool) or not float(v).is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v)


def _bool(v) -> bool:
    if not isinstance(v, bool):
        raise ValueError(f"expected true or false, got {v!r}")
    return v


def _opt_float(v):
    return None if v is None else float(v)


def _positive(v) -> float:
    v = float(v)
    if not v > 0:
        raise ValueError(f"must be positive, got {v}")
    return v


def _nonneg(v) -> float:
    v = float(v)
    if not v >= 0:
        raise ValueError(f"must be non-negative, got {v}")
    return v


# ---------------------------------------------------------------- outputs

def _fmt(v) -> str:
    return FMT.format(float(v))


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


def complex_csv(z) -> str:
    return _csv(["index", "real", "imag"],
                ([i, _fmt(c.real), _fmt(c.imag)] for i, c in enumerate(np.asarray(z))))


def read_complex_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["index", "real", "imag"]:
        raise ScenarioError(f"{path}: expected header index,real,imag")
    body = [r for r in rows[1:] if r]
    out = np.empty(len(body), dtype=complex)
    for k, r in enumerate(body):
        if len(r) != 3 or int(r[0]) != k:
            raise ScenarioError(f"{path}: malformed row {k + 2}")
        out[k] = complex(float(r[1]), float(r[2]))
    return out


def trace_csv(result: RunResult) -> str:
    # wall time stays out so reruns are byte-identical; it goes to summary.txt
    rows = ([r.t, _fmt(r.gamma_db), _fmt(r.mu), _fmt(r.side_db), _fmt(r.main_db),
             r.cadmm_iters, r.cccp_iters] for r in result.trace)
    return _csv(["t", "ISMR_dB", "mu", "sidelobe_dB", "mainlobe_dB", "cadmm_iters",
                 "cccp_iters"], rows)


def beampattern_csv(x, v, pb: Problem, grid_step: float) -> str:
    theta, p_db = beampattern_curve(x, v, pb.G, pb.geometry, grid_step=grid_step)
    return _csv(["theta_deg", "P_dB"], ([_fmt(t), _fmt(p)] for t, p in zip(theta, p_db)))


def violations(x, v, pb: Problem) -> dict[str, float]:
    v = np.asarray(v)
    mod = float(np.max(np.abs(v))) if v.size else 0.0
    modulus = max(0.0, mod - pb.varsigma) / pb.varsigma if pb.varsigma > 0 else mod
    return {"waveform_violation": waveform_violation(x, pb.constraint),
            "aris_power_violation": power_violation(x, v, pb.G, pb.PA, pb.sigma_v2),
            "aris_modulus_violation": modulus}


def summary_lines(x, v, pb: Problem, extra: dict) -> str:
    e_side, e_main = region_energies(x, v, pb.G, pb.isets)
    side_db, main_db = to_db(e_side), to_db(e_main)
    items = {"ISMR_dB": side_db - main_db, "sidelobe_dB": side_db, "mainlobe_dB": main_db}
    items.update(extra)
    items.update(violations(x, v, pb))
    out = []
    for k, val in items.items():
        if isinstance(val, bool):
            val = str(val).lower()
        elif isinstance(val, float):
            val = _fmt(val)
        out.append(f"{k}={val}")
    return "\n".join(out) + "\n"


def _feasible(x, v, pb: Problem) -> bool:
    return all(val <= FEAS_TOL for val in violations(x, v, pb).values())


def write_run(result: RunResult, out: Path, grid_step: float, mode: str) -> str:
    pb = result.problem
    extra = {
        "mode": mode,
        "outer_iterations": len(result.trace) - 1,
        "converged": result.converged,
        "seed": result.seed,
        "time_update_x_s": result.timings["update_x"],
        "time_update_v_s": result.timings["update_v"],
        "time_total_s": result.timings["total"],
        "flags": "; ".join(result.flags) or "none",
    }
    summary = summary_lines(result.x, result.v, pb, extra)
    _write_atomic(out / "beampattern.csv", beampattern_csv(result.x, result.v, pb, grid_step))
    _write_atomic(out / "trace.csv", trace_csv(result))
    _write_atomic(out / "waveform.csv", complex_csv(result.x))
    _write_atomic(out / "ris.csv", complex_csv(result.v))
    _write_atomic(out / "summary.txt", summary)
    return summary


# ---------------------------------------------------------------- commands

def _apply_seed(spec: ScenarioSpec, seed: int | None) -> Scenario:
    sc = spec.scenario
    return sc if seed is None else sc.with_seed(seed)


def cmd_synthesize(scenario_path, seed=None, out_dir=".", grid_step=None, quiet=False,
                   mode: str | None = None) -> int:
    spec = load_scenario(scenario_path)
    sc = _apply_seed(spec, seed)
    if mode is not None:
        sc = dataclasses.replace(sc, outer=dataclasses.replace(sc.outer, mode=mode))
    result = run(sc)
    summary = write_run(result, Path(out_dir), grid_step or spec.grid_step, sc.outer.mode)
    if not quiet:
        sys.stdout.write(summary)
    ok = result.converged and _feasible(result.x, result.v, result.problem)
    return EXIT_OK if ok else EXIT_FLAGGED


def cmd_baseline(scenario_path, seed=None, out_dir=".", grid_step=None, quiet=False) -> int:
    return cmd_synthesize(scenario_path, seed, out_dir, grid_step, quiet, mode="ris_free")


def sweep_scenario(sc: Scenario, param: str, value: float) -> Scenario:
    if param == "L2":
        return dataclasses.replace(sc, geometry=dataclasses.replace(sc.geometry,
                                                                    L2=_int(value)))
    if param == "varsigma":
        return dataclasses.replace(sc, varsigma=_nonneg(value))
    if param == "eta":
        if not isinstance(sc.constraint, PAR):
            raise ScenarioError("sweeping eta needs constraint = \"PAR\"")
        return dataclasses.replace(sc, constraint=dataclasses.replace(sc.constraint,
                                                                      eta=float(value)))
    if param == "delta":
        if not isinstance(sc.constraint, BM):
            raise ScenarioError("sweeping delta needs constraint = \"BM\"")
        return dataclasses.replace(sc, constraint=dataclasses.replace(sc.constraint,
                                                                      delta=float(value)))
    raise ScenarioError(f"cannot sweep {param!r}; choose one of {', '.join(SWEEP_PARAMS)}")


def _sweep_job(args):
    sc, param, value, seed = args
    res = run(sweep_scenario(sc, param, value).with_seed(seed))
    return value, seed, res.ismr_db, res.converged


def cmd_sweep(scenario_path, param, values, seeds, out_dir=".", quiet=False, jobs=1) -> int:
    spec = load_scenario(scenario_path)
    sc = spec.scenario
    for val in values:
        sweep_scenario(sc, param, val)          # validate before launching work
    tasks = [(sc, param, val, seed) for val in values for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_job, tasks))
    else:
        results = [_sweep_job(t) for t in tasks]
    rows = [[_fmt(val), seed, _fmt(g)] for val, seed, g, _ in results]
    means = []
    for val in values:
        vals = [g for v_, _, g, _ in results if v_ == val]
        means.append([_fmt(val), "mean", _fmt(float(np.mean(vals)))])
    text = _csv(["param_value", "seed", "ISMR_dB"], rows + means)
    _write_atomic(Path(out_dir) / "sweep.csv", text)
    if not quiet:
        for row in means:
            sys.stdout.write(f"{param}={row[0]} mean_ISMR_dB={row[2]}\n")
    return EXIT_OK if all(conv for *_, conv in results) else EXIT_FLAGGED


def cmd_evaluate(waveform_csv, ris_csv, scenario_path, seed=None, quiet=False) -> int:
    spec = load_scenario(scenario_path)
    pb = build_problem(_apply_seed(spec, seed))
    x = read_complex_csv(waveform_csv)
    v = read_complex_csv(ris_csv)
    NL1, L2 = pb.geometry.N * pb.geometry.L1, pb.geometry.L2
    if x.size != NL1 or v.size != L2:
        raise ScenarioError(f"expected {NL1} waveform and {L2} ARIS entries, "
                            f"got {x.size} and {v.size}")
    summary = summary_lines(x, v, pb, {"seed": spec.scenario.outer.seed if seed is None
                                       else seed})
    if not quiet:
        sys.stdout.write(summary)
    return EXIT_OK if _feasible(x, v, pb) else EXIT_FLAGGED


# ---------------------------------------------------------------- argv

def _parse_values(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _parse_seeds(text: str) -> list[int]:
    """'5' -> 0..4, '0-4' -> 0..4, '1,3,7' -> [1, 3, 7]."""
    text = text.strip()
    if re.fullmatch(r"\d+", text):
        return list(range(int(text)))
    m = re.fullmatch(r"(\d+)-(\d+)", text)
    if m:
        return list(range(int(m.group(1)), int(m.group(2)) + 1))
    return [int(t) for t in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override [solver] seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--grid-step", type=float, default=None,
                        help="beampattern grid step in degrees")
    common.add_argument("--quiet", action="store_true", help="suppress the summary")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    p = argparse.ArgumentParser(prog="aris-beampattern",
                                description="ISMR-driven waveform and ARIS design")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, text in (("synthesize", "joint waveform / ARIS design"),
                       ("baseline", "waveform design without the ARIS")):
        sp = sub.add_parser(verb, parents=[common], help=text)
        sp.add_argument("scenario")
    sp = sub.add_parser("sweep", parents=[common], help="parameter sweep over seeds")
    sp.add_argument("scenario")
    sp.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sp.add_argument("--values", required=True, type=_parse_values,
                    help="comma separated parameter values")
    sp.add_argument("--seeds", default="5", type=_parse_seeds,
                    help="seed count, range 'a-b' or list 'a,b,c'")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    sp = sub.add_parser("evaluate", parents=[common], help="score stored solutions")
    sp.add_argument("scenario")
    sp.add_argument("--waveform", required=True)
    sp.add_argument("--ris", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.verb == "synthesize":
            return cmd_synthesize(args.scenario, args.seed, args.out, args.grid_step, args.quiet)
        if args.verb == "baseline":
            return cmd_baseline(args.scenario, args.seed, args.out, args.grid_step, args.quiet)
        if args.verb == "sweep":
            seeds = args.seeds if args.seed is None else [args.seed]
            return cmd_sweep(args.scenario, args.param, args.values, seeds, args.out,
                             args.quiet, args.jobs)
        return cmd_evaluate(args.waveform, args.ris, args.scenario, args.seed, args.quiet)
    except Exception as exc:  # noqa: BLE001 - every failure maps to exit code 1
        if args.verbose:
            log.exception("failed")
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
