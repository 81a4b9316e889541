"""Command-line front end.

Every artifact starts with a reproducibility header (command, group and all
parameters), is written atomically, and re-parses into the structures that
produced it.  Options may also come from a ``key=value`` config file; flags
on the command line win.  The cache directory can be overridden with the
``ISOPROFILE_CACHE`` environment variable.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .ball import build_ball, classify_growth
from .errors import NumericalError, ResourceBudgetError, UsageError
from .groups import as_group
from .isoperimetry import EIG_TOL, ProfileCurve, format_value, parse_p, profile_in_balls
from .randomwalk import (DecaySequence, fit_decay, profile_decay_diagnostic, return_probabilities,
                         root_exponent, standard_measure)

DEFAULTS = {
    "budget": 2 * 1024**3,
    "seed": 0,
    "out": "csv",
    "radius": 6,
    "rmax": 6,
    "method": "spectral",
    "p": "2",
    "n": 2,
    "trials": 100,
    "theta": "1/2",
    "nmax": 12,
    "model": "stretched",
}


# ---------------------------------------------------------------------------
# config and output
# ---------------------------------------------------------------------------


def read_config(path) -> dict:
    """``key=value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags > config file > built-in defaults into a flat config dict."""
    conf = read_config(args.config) if args.config else {}
    merged = {}
    for k, v in vars(args).items():
        if k in ("func", "config"):
            continue
        if v is None:
            v = conf.get(k, DEFAULTS.get(k))
        merged[k] = v
    if merged.get("cache_dir") is None:
        merged["cache_dir"] = os.environ.get("ISOPROFILE_CACHE")
    return merged


def header(cfg: dict) -> dict:
    h = {"tool": f"isoprofile {__version__}"}
    h.update({k: v for k, v in sorted(cfg.items()) if v is not None and k not in ("output", "cache_dir")})
    return h


def csv_header(cfg: dict) -> str:
    return "".join(f"# {k}={v}\n" for k, v in header(cfg).items())


def write_output(text: str, path) -> None:
    """Atomic write (temporary file + rename), or stdout when no path is given."""
    if not path or path == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (Fraction, float)):
        return format_value(o)
    if hasattr(o, "item"):
        return o.item()
    return str(o)


def _fmt(v) -> str:
    if v is None:
        return ""
    return v if isinstance(v, str) else format_value(v)


def _int(cfg, key) -> int:
    try:
        return int(cfg[key])
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be an integer, got {cfg[key]!r}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_ball(cfg) -> str:
    index = build_ball(cfg["group"], _int(cfg, "radius"), budget=_int(cfg, "budget"), cache_dir=cfg["cache_dir"])
    return dump_json({"config": header(cfg), "size": len(index), "growth": index.growth})


def cmd_growth(cfg) -> str:
    index = build_ball(cfg["group"], _int(cfg, "radius"), budget=_int(cfg, "budget"), cache_dir=cfg["cache_dir"])
    try:
        gc = classify_growth(index.growth)
        cls = {"kind": gc.kind, "degree": gc.degree, "rate": gc.rate}
    except UsageError:
        cls = {"kind": "undetermined", "degree": None, "rate": None}
    if cfg["out"] == "json":
        return dump_json({"config": header(cfg), "growth": index.growth, "class": cls})
    lines = [csv_header(cfg)]
    lines += [f"# class_{k}={_fmt(v)}\n" for k, v in cls.items()]
    lines.append("r,V\n")
    lines += [f"{r},{v}\n" for r, v in enumerate(index.growth)]
    return "".join(lines)


def cmd_profile(cfg) -> str:
    curve = profile_in_balls(cfg["group"], cfg["p"], _int(cfg, "rmax"), cfg["method"],
                             family=cfg.get("family"), budget=_int(cfg, "budget"))
    if cfg["method"] == "spectral":
        cfg = {**cfg, "eig_tol": EIG_TOL}
    if cfg["out"] == "json":
        return dump_json({"config": header(cfg), "curve": json.loads(curve.to_json())})
    return curve.to_csv({k: v for k, v in header(cfg).items() if k not in ("group", "p")})


def cmd_folner(cfg) -> str:
    from .folner import check, construct

    pair = construct(cfg["group"], cfg.get("family"), _int(cfg, "n"), cfg.get("side"))
    rep = check(cfg["group"], pair, mode=cfg.get("mode") or "auto")
    return dump_json({"config": header(cfg), "report": rep.to_dict()})


def cmd_transfer_psi(cfg) -> str:
    from .transfer import psi_trials

    p = _int(cfg, "p")
    rep = psi_trials(cfg["from_"], cfg["to"], p, _int(cfg, "trials"), radius=_int(cfg, "radius"),
                     seed=_int(cfg, "seed"))
    body = {"isometry_ok": rep.isometry_ok, "support_ok": rep.support_ok,
            "contraction_ok": rep.contraction_ok, "trials": rep.trials, "ok": rep.ok,
            "failures": [list(f) for f in rep.failures]}
    return dump_json({"config": header(cfg), "report": body})


def cmd_transfer_compression(cfg) -> str:
    from .transfer import compression

    curve = compression(cfg["sub"], cfg["amb"], _int(cfg, "rmax"), kind=cfg.get("kind"))
    meta = {**header(cfg), "g_radius": curve.g_radius, "lipschitz": curve.lipschitz, "truncated": curve.truncated}
    lines = ["".join(f"# {k}={v}\n" for k, v in meta.items()), "t,lower,upper,kind,witness\n"]
    lines += [f"{pt.t},{pt.lower},{pt.upper},{pt.kind},{pt.witness}\n" for pt in curve.points]
    return "".join(lines)


def cmd_walk(cfg) -> str:
    action = cfg.get("action") or "run"
    if action == "run":
        if not cfg.get("group"):
            raise UsageError("walk needs --group")
        mu = standard_measure(cfg["group"], Fraction(cfg["theta"]))
        seq = return_probabilities(mu, _int(cfg, "nmax"))
        meta = {k: v for k, v in header(cfg).items() if k not in ("group", "theta")}
        meta.update({"normalization_ok": seq.normalization_ok, "symmetry_ok": seq.symmetry_ok,
                     "truncated": seq.truncated})
        return seq.to_csv(meta)
    if action == "fit":
        seq = _load_sequence(cfg)
        model = {"poly": "polynomial"}.get(cfg["model"], cfg["model"])
        nmin = None if cfg.get("nmin") is None else _int(cfg, "nmin")
        nfit = None if cfg.get("nfit") is None else _int(cfg, "nfit")
        fit = fit_decay(seq, model, nmin, nfit)
        body = {"model": fit.model, "params": fit.params, "residual": fit.residual,
                "window": list(fit.window), "windows": [list(w) for w in fit.windows]}
        try:
            r = root_exponent(seq)
            body["root_exponent"] = {"limit": r.rho, "raw": r.raw, "n": r.n}
        except UsageError:
            pass
        return dump_json({"config": header(cfg), "fit": body})
    if action == "diagnostic":
        if not cfg.get("profile"):
            raise UsageError("walk diagnostic needs --profile")
        curve = load_profile(cfg["profile"])
        spec = cfg.get("group") or curve.group
        if cfg.get("input"):
            seq = _load_sequence(cfg)
            mu = standard_measure(spec, seq.theta)
        else:
            mu = standard_measure(spec, Fraction(cfg["theta"]))
            seq = return_probabilities(mu, _int(cfg, "nmax"))
        rep = profile_decay_diagnostic(spec, mu, curve, seq)
        return dump_json({"config": header(cfg), "diagnostic": vars(rep)})
    raise UsageError(f"unknown walk action {action!r}")


def _load_sequence(cfg) -> DecaySequence:
    if not cfg.get("input"):
        raise UsageError("this action needs --input <walk csv>")
    return DecaySequence.from_csv(Path(cfg["input"]).read_text())


def load_profile(path) -> ProfileCurve:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        return ProfileCurve.from_json(json.dumps(obj.get("curve", obj)))
    return ProfileCurve.from_csv(text)


# report ----------------------------------------------------------------------------


def _artifact_meta(path: Path):
    text = path.read_text()
    if path.suffix == ".json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            return None, None
        return obj.get("config", {}), obj
    meta = {}
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
    return meta, text


def report_bundle(group: str, directory) -> tuple[str, dict]:
    """Join the artifacts found in ``directory`` for ``group`` into one summary."""
    spec = str(as_group(group).spec)
    found: dict = {}
    for path in sorted(glob.glob(os.path.join(directory, "*"))):
        p = Path(path)
        if p.suffix not in (".csv", ".json"):
            continue
        meta, body = _artifact_meta(p)
        if not meta:
            continue
        g = meta.get("group") or meta.get("from_") or meta.get("amb")
        try:
            if g is None or str(as_group(g).spec) != spec:
                continue
        except UsageError:
            continue
        found.setdefault(meta.get("command", "?"), []).append((p, meta, body))
    summary: dict = {"group": spec, "missing": []}
    lines = [f"# Summary for {spec}", ""]
    for cmd in ("growth", "profile", "folner", "walk"):
        if cmd not in found:
            summary["missing"].append(cmd)
    for p, meta, body in found.get("growth", []):
        kind = meta.get("class_kind") or (body.get("class", {}).get("kind") if isinstance(body, dict) else None)
        deg = meta.get("class_degree") or ""
        summary.setdefault("growth", []).append({"file": p.name, "class": kind, "degree": deg})
        lines.append(f"- growth ({p.name}): {kind} {deg}".rstrip())
    for p, meta, body in found.get("profile", []):
        curve = load_profile(p)
        vals = ", ".join(f"{pt.argument}:{float(pt.value):.4g}" for pt in curve.points)
        summary.setdefault("profile", []).append({"file": p.name, "p": meta.get("p"), "form": curve.form,
                                                  "values": [format_value(pt.value) for pt in curve.points]})
        lines.append(f"- profile p={meta.get('p')} {meta.get('method', '')} ({p.name}): {vals}")
    for p, meta, body in found.get("folner", []):
        rep = body["report"]
        summary.setdefault("folner", []).append({"file": p.name, **rep})
        lines.append(f"- folner {rep['family']} n={rep['n']} ({p.name}): neighborhoodOk={rep['neighborhoodOk']}, "
                     f"measuredC={rep['measuredC']}, measuredK={rep['measuredK']}")
    for p, meta, body in found.get("walk", []):
        if isinstance(body, str):
            seq = DecaySequence.from_csv(body)
            entry = {"file": p.name, "n": seq.ns()[-1] if seq.entries else 0}
            for model in ("polynomial", "stretched"):
                try:
                    entry[model] = fit_decay(seq, model).params
                except UsageError:
                    pass
            try:
                entry["root_exponent"] = root_exponent(seq).rho
            except UsageError:
                pass
            summary.setdefault("walk", []).append(entry)
            lines.append(f"- walk ({p.name}): n<={entry['n']}, fits "
                         + ", ".join(f"{m}={entry[m]}" for m in ("polynomial", "stretched") if m in entry))
        elif "diagnostic" in body:
            d = body["diagnostic"]
            summary.setdefault("diagnostic", []).append({"file": p.name, **d})
            lines.append(f"- diagnostic ({p.name}): profile {d['profile_type']}, decay {d['decay_type']}, "
                         f"verdict {d['verdict']}")
        elif "fit" in body:
            summary.setdefault("fits", []).append({"file": p.name, **body["fit"]})
            lines.append(f"- fit ({p.name}): {body['fit']['model']} {body['fit']['params']}")
    if summary["missing"]:
        lines.append("")
        lines.append("Missing artifacts: " + ", ".join(summary["missing"]))
    return "\n".join(lines) + "\n", summary


def cmd_report(cfg) -> str:
    text, summary = report_bundle(cfg["group"], cfg["dir"])
    if cfg["out"] == "json":
        return dump_json({"config": header(cfg), "summary": summary})
    return text


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--budget", type=int, help="memory budget in bytes")
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="isoprofile", description="Isoperimetric profiles of finitely generated groups.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ball", parents=[common], help="enumerate and cache a ball")
    p.add_argument("--group")
    p.add_argument("--radius", type=int)
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("growth", parents=[common], help="growth series V(0..r)")
    p.add_argument("--group")
    p.add_argument("--radius", type=int)
    p.add_argument("--out", choices=("csv", "json"))
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("profile", parents=[common], help="isoperimetric profile inside balls")
    p.add_argument("--group")
    p.add_argument("--p")
    p.add_argument("--rmax", type=int)
    p.add_argument("--method", choices=("spectral", "inradius", "candidates", "folner"))
    p.add_argument("--family")
    p.add_argument("--out", choices=("csv", "json"))
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("folner", parents=[common], help="construct and check a controlled Følner pair")
    p.add_argument("--group")
    p.add_argument("--family")
    p.add_argument("--n", type=int)
    p.add_argument("--side", choices=("left", "right"))
    p.add_argument("--mode", choices=("auto", "exhaustive", "reduced"))
    p.add_argument("--report", choices=("json",))
    p.set_defaults(func=cmd_folner)

    p = sub.add_parser("transfer", help="quotient push-down and subgroup compression")
    tsub = p.add_subparsers(dest="action", required=True)
    t = tsub.add_parser("psi", parents=[common])
    t.add_argument("--from", dest="from_")
    t.add_argument("--to")
    t.add_argument("--p")
    t.add_argument("--trials", type=int)
    t.add_argument("--radius", type=int)
    t.set_defaults(func=cmd_transfer_psi)
    t = tsub.add_parser("compression", parents=[common])
    t.add_argument("--sub")
    t.add_argument("--amb")
    t.add_argument("--rmax", type=int)
    t.add_argument("--kind")
    t.add_argument("--out", choices=("csv",))
    t.set_defaults(func=cmd_transfer_compression)

    p = sub.add_parser("walk", parents=[common], help="return probabilities, decay fits, diagnostic")
    p.add_argument("action", nargs="?", choices=("run", "fit", "diagnostic"))
    p.add_argument("--group")
    p.add_argument("--theta")
    p.add_argument("--nmax", type=int)
    p.add_argument("--input", help="walk CSV produced by 'walk run'")
    p.add_argument("--model", choices=("poly", "polynomial", "stretched"))
    p.add_argument("--nmin", type=int, help="first n used by the fit")
    p.add_argument("--nfit", type=int, help="last n used by the fit")
    p.add_argument("--profile", help="p=2 profile CSV or JSON")
    p.add_argument("--out", choices=("csv", "json"))
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("report", parents=[common], help="summary of the artifacts in a directory")
    p.add_argument("--group")
    p.add_argument("--dir", default=".")
    p.add_argument("--out", choices=("md", "json"))
    p.set_defaults(func=cmd_report)
    return parser


_REQUIRED = {"ball": ["group"], "growth": ["group"], "profile": ["group"], "folner": ["group"],
             "report": ["group"]}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if cfg["command"] == "report" and cfg.get("out") == "csv":
            cfg["out"] = "md"
        if cfg["command"] == "transfer":
            need = ["from_", "to", "p"] if cfg["action"] == "psi" else ["sub", "amb"]
        else:
            need = _REQUIRED.get(cfg["command"], [])
        missing = [k for k in need if not cfg.get(k)]
        if missing:
            raise UsageError("missing required option(s): " + ", ".join("--" + k.rstrip("_") for k in missing))
        if "p" in cfg and cfg["p"] is not None and cfg["command"] == "profile":
            parse_p(cfg["p"])
        text = args.func(cfg)
        write_output(text, cfg.get("output"))
    except (UsageError, ResourceBudgetError, NumericalError) as err:
        print(f"error: {err}", file=sys.stderr)
        attained = getattr(err, "attained", None)
        if attained is not None:
            print(f"attained: {attained}", file=sys.stderr)
        return err.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
