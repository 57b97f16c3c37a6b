"""``dhl`` command line: render, zeros, crossings, poly, verify.

Options may also come from a TOML file (``--config``) using the same names
as the long flags; flags given on the command line win over the file, and
DHL_PRECISION_BITS wins over both for the working precision.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import acceptance, crossings, locus, partition, polyalg
from .numeric import (
    BracketError,
    ConvergenceError,
    DomainError,
    PrecisionError,
    ResourceError,
    parse_rational,
)
from .rgdyn import ClassifierOptions

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_RESOURCE, EXIT_IO = 0, 2, 3, 4, 5, 1

# built-in defaults per command, applied after the config file
DEFAULTS = {
    "render": {"plane": "q", "size": "800x800", "max_iter": 500, "aa": 1},
    "zeros": {"plane": "q", "m": 4},
    "crossings": {"kmax": 9, "format": "csv"},
    "poly": {"m": 4},
    "verify": {},
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dhl", description="Potts zeros and RG dynamics on diamond hierarchical lattices")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="TOML file with option values")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--precision-bits", type=int, dest="precision_bits")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out", "-o")

    r = sub.add_parser("render", help="region diagram of the q or v plane")
    common(r)
    r.add_argument("--plane", choices=["q", "v"])
    r.add_argument("--v0")
    r.add_argument("--q0")
    r.add_argument("--window", help="re_min,re_max,im_min,im_max")
    r.add_argument("--preset", choices=sorted(locus.PRESET_WINDOWS))
    r.add_argument("--size", help="WIDTHxHEIGHT")
    r.add_argument("--max-iter", type=int, dest="max_iter")
    r.add_argument("--aa", type=int, choices=[1, 2])
    r.add_argument("--ycoords", action="store_true", default=None)
    r.add_argument("--shade", action="store_true", default=None)
    r.add_argument("--raw", help="path for the DHLGRID1 file")

    z = sub.add_parser("zeros", help="roots of Z(D_m) in q or v")
    common(z)
    z.add_argument("--plane", choices=["q", "v"])
    z.add_argument("--m", type=int)
    z.add_argument("--v0")
    z.add_argument("--q0")
    z.add_argument("--reduced", action="store_true", default=None)

    c = sub.add_parser("crossings", help="real-axis crossings")
    common(c)
    c.add_argument("--v0")
    c.add_argument("--kmax", type=int)
    c.add_argument("--fm", action="store_true", default=None)
    c.add_argument("--format", choices=["csv", "json"])

    po = sub.add_parser("poly", help="exact polynomial dump")
    common(po)
    po.add_argument("--m", type=int)
    po.add_argument("--chromatic", action="store_true", default=None)
    po.add_argument("--tutte", action="store_true", default=None)
    po.add_argument("--reduced", action="store_true", default=None)
    po.add_argument("--verify-oracle", action="store_true", default=None, dest="verify_oracle")
    po.add_argument("--allow-large", action="store_true", default=None, dest="allow_large")

    v = sub.add_parser("verify", help="run the acceptance suite")
    common(v)
    v.add_argument("--only", action="append", choices=sorted(acceptance.GROUPS) + [str(k) for k in acceptance.CRITERIA])
    v.add_argument("--json", action="store_true", default=None)
    return p


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return {k.replace("-", "_"): v for k, v in data.items()}


_SIGNED_VALUE_FLAGS = ("--window", "--v0", "--q0")


def _join_value_flags(argv: list[str]) -> list[str]:
    # "--window -130,130,..." or "--v0 -4/5" would otherwise be read as unknown flags
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def resolve(argv=None) -> dict:
    """Merge flags, the config file, the environment and defaults."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _parser().parse_args(_join_value_flags(argv))
    cfg = dict(DEFAULTS[args.command])
    cfg.update(_load_config(args.config))
    cfg.update({k: v for k, v in vars(args).items() if v is not None})
    env = os.environ.get("DHL_PRECISION_BITS")
    if env:
        cfg["precision_bits"] = int(env)
    cfg.pop("config", None)
    return cfg


def _meta(cfg: dict) -> dict:
    out = {"version": __version__}
    out.update({k: v for k, v in sorted(cfg.items()) if v is not None})
    return out


def _write_text(cfg: dict, text: str) -> None:
    out = cfg.get("out")
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _number(text):
    """Exact rational when possible, otherwise a complex literal."""
    if text is None:
        return None
    try:
        return parse_rational(text)
    except DomainError:
        try:
            return complex(str(text).replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise UsageError(f"cannot parse number {text!r}") from exc


def _plane_param(cfg):
    plane = cfg.get("plane", "q")
    v0, q0 = cfg.get("v0"), cfg.get("q0")
    if v0 is not None and q0 is not None:
        raise UsageError("--v0 and --q0 are mutually exclusive")
    if plane == "q":
        if v0 is None:
            raise UsageError("the q plane needs --v0")
        return plane, _number(v0)
    if q0 is None:
        raise UsageError("the v plane needs --q0")
    return plane, _number(q0)


def _window(cfg, plane, param):
    if cfg.get("window"):
        vals = [float(x) for x in str(cfg["window"]).split(",")]
        if len(vals) != 4:
            raise UsageError("--window needs four comma-separated numbers")
        return vals
    key = cfg.get("preset")
    if key is None:
        tag = "y" if plane == "v" else "q"
        key = f"{tag}:{param}"
    if key not in locus.PRESET_WINDOWS:
        raise UsageError(f"no --window given and no preset for {key!r}")
    return list(locus.PRESET_WINDOWS[key])


def cmd_render(cfg) -> int:
    plane, param = _plane_param(cfg)
    try:
        w, h = (int(x) for x in str(cfg["size"]).lower().split("x"))
    except ValueError as exc:
        raise UsageError("--size must look like 800x800") from exc
    spec = locus.GridSpec(*_window(cfg, plane, param), w, h)
    opts = ClassifierOptions(max_iter=int(cfg["max_iter"]), prec=int(cfg.get("precision_bits") or 53))
    start = time.perf_counter()
    if plane == "q":
        grid = locus.render_q_plane(param, spec, opts, threads=cfg.get("threads"), aa=int(cfg["aa"]))
    else:
        coords = "y" if cfg.get("ycoords") else "v"
        grid = locus.render_v_plane(param, spec, opts, threads=cfg.get("threads"), aa=int(cfg["aa"]), coords=coords)
    wall = time.perf_counter() - start
    out = Path(cfg.get("out") or "render.ppm")
    locus.write_image(grid, out, shade=bool(cfg.get("shade")))
    raw = Path(cfg.get("raw") or out.with_suffix(".dhlgrid"))
    locus.write_raw(grid, raw)
    meta = _meta(cfg)
    meta["window"] = [spec.re_min, spec.re_max, spec.im_min, spec.im_max]
    meta["classifier"] = {k: getattr(opts, k) for k in opts.__dataclass_fields__}
    meta["counts"] = {k.name: int((grid.kind == k).sum()) for k in locus.Kind}
    sidecar = {"meta": meta, "image": str(out), "raw": str(raw), "wall_time_s": round(wall, 3)}
    out.with_suffix(out.suffix + ".json").write_text(json.dumps(sidecar, indent=2, default=str), encoding="utf-8")
    print(f"wrote {out} and {raw} ({w}x{h}, {wall:.1f}s)", file=sys.stderr)
    return EXIT_OK


def cmd_zeros(cfg) -> int:
    plane, param = _plane_param(cfg)
    if not isinstance(param, Fraction):
        raise DomainError("zeros need a real rational parameter")
    z = partition.dhl_partition(int(cfg["m"]))
    p = polyalg.specialize_v(z, param) if plane == "q" else polyalg.specialize_q(z, param)
    if cfg.get("reduced"):
        p = partition.reduced(p)
    rs = polyalg.find_roots(p, cfg.get("precision_bits"))
    worst = max((float(r) for r in rs.residuals), default=0.0)
    meta = _meta(cfg)
    meta.update({"degree": p.degree, "roots": len(rs), "precision_bits_used": rs.precision_bits, "max_residual": f"{worst:.3e}"})
    _write_text(cfg, rs.to_csv(comments=meta))
    print(f"{len(rs)} roots, max residual {worst:.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_crossings(cfg) -> int:
    if cfg.get("v0") is None:
        raise UsageError("crossings need --v0")
    v0 = _number(cfg["v0"])
    prec = max(int(cfg.get("precision_bits") or crossings.MIN_PREC), crossings.MIN_PREC)
    meta = _meta(cfg)
    if cfg.get("fm"):
        qm, qp = crossings.q_pm_fm(v0, prec)
        obj = {"v0": str(v0), "q_minus": crossings._fmt(qm), "q_plus": crossings._fmt(qp), "meta": meta}
        if cfg["format"] == "json":
            _write_text(cfg, json.dumps(obj, indent=2, default=str) + "\n")
        else:
            head = "".join(f"# {k}: {v}\n" for k, v in meta.items())
            _write_text(cfg, head + f"q_minus,q_plus\n{obj['q_minus']},{obj['q_plus']}\n")
        return EXIT_OK
    try:
        recs = crossings.crossing_sequence(v0, int(cfg["kmax"]), prec)
    except BracketError as exc:
        text = crossings.sequence_csv(exc.partial or [], comments=meta)
        _write_text(cfg, text)
        raise
    if cfg["format"] == "json":
        _write_text(cfg, crossings.summary_json(v0, recs, meta) + "\n")
    else:
        _write_text(cfg, crossings.sequence_csv(recs, comments=meta))
    return EXIT_OK


def cmd_poly(cfg) -> int:
    m = int(cfg["m"])
    if cfg.get("verify_oracle"):
        edges, n = partition.dhl_edges(m)
        ok = partition.brute_force_partition(edges, n) == partition.dhl_partition(m)
        print("oracle match" if ok else "oracle MISMATCH")
        return EXIT_OK if ok else EXIT_CONVERGENCE
    z = partition.dhl_partition(m, allow_large=bool(cfg.get("allow_large")))
    if cfg.get("tutte"):
        p = partition.tutte_from_potts(z, partition.graph_stats(m).n, 1)
    elif cfg.get("chromatic"):
        p = partition.chromatic(m)
    else:
        p = z
    if cfg.get("reduced") and not cfg.get("tutte"):
        p = partition.reduced(p)
    obj = p.to_json_obj()
    obj["meta"] = _meta(cfg)
    _write_text(cfg, json.dumps(obj, separators=(",", ":"), default=str) + "\n")
    return EXIT_OK


def cmd_verify(cfg) -> int:
    numbers: list[int] = []
    for item in cfg.get("only") or ["all"]:
        for n in acceptance.GROUPS.get(item, [int(item)] if str(item).isdigit() else []):
            if n not in numbers:
                numbers.append(n)
    results = acceptance.run_all(numbers, echo=not cfg.get("json"))
    if cfg.get("json"):
        print(json.dumps([r.__dict__ for r in results], indent=2))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CONVERGENCE


COMMANDS = {
    "render": cmd_render,
    "zeros": cmd_zeros,
    "crossings": cmd_crossings,
    "poly": cmd_poly,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    try:
        cfg = resolve(argv)
        return COMMANDS[cfg["command"]](cfg)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, BracketError, PrecisionError) as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
