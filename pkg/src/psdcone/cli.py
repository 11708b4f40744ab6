"""Command line entry point: embed, factorize, realize, verify, diagnose, demo."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .clifford import NotConeGuaranteed, embed_config, embedding_dimension
from .configurations import GramMatrix, VectorConfig, gram, hexagon, pentagon
from .errors import PsdConeError
from .exterior import annihilation, creation
from .orthant import NonnegFactorization, factorize_nonneg, hexagon_orthant_diagnostics
from .realization import (Realization, pentagon_psd_diagnostics, realize, realize_ladder,
                          verify_realization)
from .search import SUCCESS_RESIDUAL

EXIT_OK, EXIT_ERROR, EXIT_NOT_REACHED = 0, 1, 2


@dataclass
class RunConfig:
    subcommand: str
    output: Optional[str] = None
    input: Optional[str] = None
    gram: Optional[str] = None
    realization: Optional[str] = None
    factorization: Optional[str] = None
    which: Optional[str] = None
    seed: int = 0
    restarts: int = 20
    max_iters: Optional[int] = None
    inner_dim: Optional[int] = None
    dim: Optional[int] = None
    ladder: Optional[int] = None
    rank: Optional[int] = None
    tol_psd: float = 1e-9
    tol_gram: float = SUCCESS_RESIDUAL
    trace_path: Optional[str] = None
    trace_convention: str = "normalized"
    dump_operators: bool = False

    def __post_init__(self):
        for name in ("tol_psd", "tol_gram"):
            if not getattr(self, name) > 0:
                raise ValueError(f"--{name.replace('_', '-')} must be > 0")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("--seed must be a 64-bit unsigned integer")
        if self.trace_convention not in ("normalized", "raw"):
            raise ValueError("--trace-convention must be 'normalized' or 'raw'")


# -- I/O ---------------------------------------------------------------------

def _read_json(path: str, field: str) -> dict:
    if path is None:
        raise ValueError(f"missing required option --{field}")
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"--{field} {path}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ValueError(f"--{field} {path}: expected a JSON object")
    return obj


def write_json_atomic(path: str, obj) -> None:
    """Write via a temporary file in the target directory and rename."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=1, allow_nan=False)
            fh.write("\n")
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_gram(path: str) -> GramMatrix:
    """Gram JSON, or a vectors/demo JSON whose Gram is computed or embedded."""
    obj = _read_json(path, "gram")
    if "entries" in obj:
        return GramMatrix.from_json(obj)
    if "gram" in obj:
        return GramMatrix.from_json(obj["gram"])
    if "vectors" in obj:
        return gram(VectorConfig.from_json(obj))
    raise ValueError(f"--gram {path}: need field 'entries' (or 'vectors')")


def _raw_scale(d: int, convention: str, outgoing: bool) -> float:
    # raw convention: Tr(A_j A_k) = G_jk, i.e. A_raw = A_normalized / sqrt(d)
    if convention == "normalized":
        return 1.0
    return 1.0 / math.sqrt(d) if outgoing else math.sqrt(d)


def load_realization(path: str, convention: str) -> Realization:
    obj = _read_json(path, "realization")
    d = int(obj.get("d", 0)) or Realization.from_json(obj).d
    return Realization.from_json(obj, scale=_raw_scale(d, convention, outgoing=False))


def realization_json(real: Realization, convention: str) -> dict:
    out = real.to_json(scale=_raw_scale(real.d, convention, outgoing=True))
    out["trace_convention"] = convention
    return out


def _complex_matrix_json(m: np.ndarray) -> dict:
    return {"dim": m.shape[0],
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m]}


# -- subcommands -------------------------------------------------------------

def _embed(cfg: RunConfig):
    config = VectorConfig.from_json(_read_json(cfg.input, "input"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConeGuaranteed)
        real = embed_config(config.vectors)
    out = realization_json(real, cfg.trace_convention)
    out["cone_guaranteed"] = real.cone_guaranteed
    out["gram"] = GramMatrix(real.target).to_json()
    if cfg.dump_operators:
        n = config.m
        k = (n - 1 + (n % 2 == 0)) // 2
        ops = {"k": k, "creation": [], "annihilation": []}
        for i in range(k):
            e = np.zeros(k)
            e[i] = 1.0
            ops["creation"].append(_complex_matrix_json(creation(k, e)))
            ops["annihilation"].append(_complex_matrix_json(annihilation(k, e)))
        out["operators"] = ops
    flag = "cone" if real.cone_guaranteed else "NotConeGuaranteed"
    summary = (f"embed n={config.n} dim={config.m} d={embedding_dimension(config.m)} "
               f"gram_residual={real.gram_residual:.3e} {flag} PASS")
    return out, summary, EXIT_OK


def _outcome(residual: float) -> tuple[str, int]:
    if residual < SUCCESS_RESIDUAL:
        return "PASS", EXIT_OK
    return f"FAIL (no realization found; best residual = {residual:.6g})", EXIT_NOT_REACHED


def _factorize(cfg: RunConfig):
    g = load_gram(cfg.gram)
    kwargs = {} if cfg.max_iters is None else {"max_iters": cfg.max_iters}
    fact, report = factorize_nonneg(g, cfg.inner_dim, cfg.restarts, seed=cfg.seed, **kwargs)
    if cfg.trace_path:
        report.write_trace_csv(cfg.trace_path)
    out = fact.to_json()
    out["report"] = report.to_json()
    word, code = _outcome(fact.residual)
    return out, f"factorize n={fact.n} m={fact.m} residual={fact.residual:.3e} {word}", code


def _realize(cfg: RunConfig):
    g = load_gram(cfg.gram)
    kwargs = {} if cfg.max_iters is None else {"max_iters": cfg.max_iters}
    if cfg.ladder is not None:
        if cfg.dim is not None:
            raise ValueError("--dim and --ladder are mutually exclusive")
        real, report = realize_ladder(g, cfg.ladder, cfg.restarts, cfg.seed, **kwargs)
    else:
        d = cfg.dim if cfg.dim is not None else g.n
        real, report = realize(g, d, cfg.rank, cfg.restarts, seed=cfg.seed, **kwargs)
    if cfg.trace_path:
        report.write_trace_csv(cfg.trace_path)
    out = realization_json(real, cfg.trace_convention)
    out["report"] = report.to_json()
    word, code = _outcome(report.best_residual)
    return out, f"realize n={real.n} d={real.d} residual={report.best_residual:.3e} {word}", code


def _verify(cfg: RunConfig):
    g = load_gram(cfg.gram)
    real = load_realization(cfg.realization, cfg.trace_convention)
    rep = verify_realization(g, real, cfg.tol_psd, cfg.tol_gram)
    word = "PASS" if rep.passed else "FAIL"
    summary = (f"verify n={real.n} d={real.d} min_eig={min(rep.min_eigenvalues):.3e} "
               f"gram_residual={rep.gram_residual:.3e} {word}")
    return rep.to_json(), summary, EXIT_OK if rep.passed else EXIT_NOT_REACHED


def _diagnose(cfg: RunConfig):
    if cfg.which == "pentagon":
        real = load_realization(cfg.realization, cfg.trace_convention)
        rep = pentagon_psd_diagnostics(real)
    else:
        obj = _read_json(cfg.factorization, "factorization")
        rep = hexagon_orthant_diagnostics(NonnegFactorization.from_json(obj).b.T)
    summary = (f"diagnose {cfg.which} max_defect={rep.max_defect:.3e} "
               f"violated={rep.violated_link}")
    return rep.to_json(), summary, EXIT_OK


def _demo(cfg: RunConfig):
    config = pentagon() if cfg.which == "pentagon" else hexagon()
    out = config.to_json()
    out["gram"] = gram(config).to_json()
    return out, f"demo {cfg.which} n={config.n} dim={config.m} PASS", EXIT_OK


COMMANDS = {"embed": _embed, "factorize": _factorize, "realize": _realize,
            "verify": _verify, "diagnose": _diagnose, "demo": _demo}


def run(cfg: RunConfig) -> int:
    """Execute one subcommand; returns the process exit code."""
    try:
        out, summary, code = COMMANDS[cfg.subcommand](cfg)
        if cfg.output:
            write_json_atomic(cfg.output, out)
    except (PsdConeError, ValueError, KeyError, OSError) as exc:
        print(f"error: {cfg.subcommand}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(summary)
    return code


# -- argument parsing --------------------------------------------------------

def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="psdcone",
        description="Realize vector configurations by PSD matrices under (1/d)Tr.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, seeded=False):
        sp.add_argument("--output", help="write the full JSON report here")
        sp.add_argument("--trace-convention", choices=["normalized", "raw"], default="normalized",
                        help="raw: matrices satisfy Tr(A_j A_k) = G_jk instead of (1/d)Tr")
        if seeded:
            sp.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
            sp.add_argument("--restarts", type=_positive_int, default=20)
            sp.add_argument("--max-iters", type=_positive_int, default=None)
            sp.add_argument("--trace", dest="trace_path", help="per-iteration residual CSV")

    sp = sub.add_parser("embed", help="Clifford embedding of a vectors JSON file")
    sp.add_argument("--input", required=True, help='vectors JSON {"n": n, "vectors": [...]}')
    sp.add_argument("--dump-operators", action="store_true",
                    help="include creation/annihilation matrices of the basis vectors")
    common(sp)

    sp = sub.add_parser("factorize", help="search for G = B^T B with B >= 0")
    sp.add_argument("--gram", required=True)
    sp.add_argument("--inner-dim", type=_positive_int, default=None,
                    help="rows m of B (default n(n+1)/2)")
    common(sp, seeded=True)

    sp = sub.add_parser("realize", help="search for PSD matrices realizing G")
    sp.add_argument("--gram", required=True)
    sp.add_argument("--dim", type=_positive_int, default=None)
    sp.add_argument("--ladder", type=_positive_int, default=None, metavar="D_MAX",
                    help="try d = 1, 2, 4, ... up to D_MAX")
    sp.add_argument("--rank", type=_positive_int, default=None, help="factor rank (default d)")
    common(sp, seeded=True)

    sp = sub.add_parser("verify", help="check a realization against a Gram matrix")
    sp.add_argument("--gram", required=True)
    sp.add_argument("--realization", required=True)
    sp.add_argument("--tol-psd", type=_positive_float, default=1e-9)
    sp.add_argument("--tol-gram", type=_positive_float, default=SUCCESS_RESIDUAL)
    common(sp)

    sp = sub.add_parser("diagnose", help="impossibility diagnostics for a candidate")
    sp.add_argument("which", choices=["pentagon", "hexagon"])
    sp.add_argument("--realization", help="pentagon: realization JSON")
    sp.add_argument("--factorization", help="hexagon: factorization JSON from 'factorize'")
    common(sp)

    sp = sub.add_parser("demo", help="write a named configuration and its Gram")
    sp.add_argument("which", choices=["pentagon", "hexagon"])
    common(sp)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in fields})


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.subcommand == "diagnose":
        needed = "realization" if cfg.which == "pentagon" else "factorization"
        if getattr(cfg, needed) is None:
            print(f"error: diagnose {cfg.which} needs --{needed}", file=sys.stderr)
            return EXIT_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
