"""Command-line front end: hash vector files, estimate pairwise angles,
validate structures, compute the structural chromatic number, run experiments.

All commands are batch-style and deterministic for a given seed and config;
stdout carries data, stderr carries diagnostics. Exit codes:

    0  success
    1  `validate`: a structure constraint failed
    2  malformed input (vector/hash/config files, bad indices, missing flags)
    3  invalid pipeline configuration
    4  `chroma --mode exact` above the vertex cap
    5  `experiment`: a configured statistical check failed
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    DimensionMismatch,
    GraphTooLargeForExact,
    InvalidStructure,
    PsiHashError,
    RowCountExceedsDimension,
)
from .experiments import (
    ExperimentConfig,
    emit_report,
    evaluate_checks,
    run_bias_experiment,
    run_concentration_experiment,
)
from .graphs import p_chromatic_number
from .pipeline import PipelineConfig, Quantizer, build_pipeline, estimate_angle
from .structured import family_structure, structure_from_dict, validate
from .vecio import FormatError, read_hashes, read_vectors, write_hashes

EXIT_OK = 0
EXIT_CONSTRAINT = 1
EXIT_BAD_INPUT = 2
EXIT_BAD_PIPELINE = 3
EXIT_GRAPH_CAP = 4
EXIT_CHECK_FAILED = 5


def _echo(payload: dict, stream=None) -> None:
    (stream or sys.stdout).write(
        json.dumps(payload, sort_keys=True, separators=(",", ": ")) + "\n"
    )


def _fail(code: int, message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    return code


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _merged(args, keys) -> dict:
    """Effective config: file values (if --config given) overridden by flags."""
    merged = {}
    if getattr(args, "config", None):
        doc = _load_json(args.config)
        if not isinstance(doc, dict):
            raise FormatError(f"{args.config}: config must be a JSON object")
        merged.update({k: v for k, v in doc.items() if k in keys})
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _require(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise FormatError(f"missing required option(s): {', '.join('--' + k for k in missing)}")


def _structure_from_flags(cfg: dict):
    if cfg.get("structure"):
        return structure_from_dict(_load_json(cfg["structure"]))
    _require(cfg, "family", "k", "n")
    return family_structure(cfg["family"], int(cfg["k"]), int(cfg["n"]))


def cmd_hash(args) -> int:
    keys = ("variant", "family", "k", "n", "seed", "quantizer", "structure", "input", "out")
    try:
        cfg = _merged(args, keys)
        _require(cfg, "variant", "family", "k", "n", "seed", "input", "out")
        vectors = read_vectors(cfg["input"], expect_n=int(cfg["n"]))
    except FormatError as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))

    try:
        quantizer = Quantizer.from_spec(cfg.get("quantizer") or "sign")
        if not quantizer.binary:
            raise ValueError("hash files store sign bits; use a binary quantizer")
        subsets = (
            structure_from_dict(_load_json(cfg["structure"])) if cfg.get("structure") else None
        )
        pipe = build_pipeline(
            PipelineConfig(
                variant=cfg["variant"],
                family=cfg["family"],
                k=int(cfg["k"]),
                n=int(cfg["n"]),
                seed=int(cfg["seed"]),
                quantizer=quantizer,
                subsets=subsets,
            )
        )
        hashes = pipe.hash_batch(vectors)
    except (PsiHashError, ValueError) as exc:
        return _fail(EXIT_BAD_PIPELINE, str(exc))

    write_hashes(cfg["out"], hashes)
    _echo(
        {
            "count": len(hashes),
            "k": pipe.k,
            "n": pipe.n_input,
            "variant": pipe.variant,
            "seed": pipe.seed,
            "out": cfg["out"],
            "config": {k: cfg.get(k) for k in keys if cfg.get(k) is not None},
        }
    )
    return EXIT_OK


def _parse_pairs(spec: str, count: int) -> list[tuple[int, int]]:
    pairs = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise FormatError(f"bad pair {chunk!r}, expected i,j")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"bad pair {chunk!r}, indices must be integers") from None
        for idx in (i, j):
            if not 0 <= idx < count:
                raise FormatError(f"index {idx} outside [0, {count - 1}]")
        pairs.append((i, j))
    if not pairs:
        raise FormatError("no pairs given")
    return pairs


def cmd_estimate(args) -> int:
    try:
        hashes = read_hashes(args.hashes)
        if args.all_pairs:
            pairs = [(i, j) for i in range(len(hashes)) for j in range(i + 1, len(hashes))]
        else:
            if not args.pairs:
                raise FormatError("need --pairs or --all-pairs")
            pairs = _parse_pairs(args.pairs, len(hashes))
    except FormatError as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))

    lines = ["i,j,normalized_estimate,radians_estimate"]
    for i, j in pairs:
        est = estimate_angle(hashes[i], hashes[j])
        lines.append(f"{i},{j},{est.value!r},{est.radians!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _echo({"hashes": args.hashes, "pairs": len(pairs), "k": hashes[0].k}, stream=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        structure = structure_from_dict(_load_json(args.structure))
    except (FormatError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_BAD_INPUT, f"cannot parse structure: {exc}")
    report = validate(structure)
    _echo(report.to_dict())
    return EXIT_OK if report.passed else EXIT_CONSTRAINT


def cmd_chroma(args) -> int:
    keys = ("family", "k", "n", "structure", "mode", "exact_cap")
    try:
        cfg = _merged(args, keys)
        structure = _structure_from_flags(cfg)
    except (FormatError, ValueError, KeyError, TypeError, RowCountExceedsDimension) as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    mode = cfg.get("mode") or "exact"
    cap = int(cfg.get("exact_cap") or 24)
    try:
        result = p_chromatic_number(structure, mode=mode, exact_cap=cap)
    except GraphTooLargeForExact as exc:
        return _fail(EXIT_GRAPH_CAP, str(exc))
    except ValueError as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    doc = result.to_dict()
    doc["config"] = {k: cfg.get(k) for k in keys if cfg.get(k) is not None}
    _echo(doc)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        doc = _load_json(args.config)
        if not isinstance(doc, dict):
            raise FormatError(f"{args.config}: config must be a JSON object")
        kind = doc.get("kind", "bias")
        if kind not in ("bias", "concentration"):
            raise FormatError(f"unknown experiment kind {kind!r}")
        subsets = (
            structure_from_dict(doc["subsets"]) if isinstance(doc.get("subsets"), dict) else None
        )
        cfg = ExperimentConfig(
            variant=doc["variant"],
            family=doc["family"],
            k=int(doc["k"]),
            n=int(doc["n"]),
            angles=tuple(doc["angles"]),
            trials=int(doc["trials"]),
            base_seed=int(doc["base_seed"]),
            quantizer=doc.get("quantizer", "sign"),
            epsilon_grid=tuple(doc.get("epsilon_grid", (0.05, 0.1, 0.2))),
            c_grid=tuple(doc.get("c_grid", (1.0, 2.0, 4.0))),
            subsets=subsets,
            out_path=args.out or doc.get("out"),
        )
        checks = doc.get("checks", [])
    except (FormatError, PsiHashError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_BAD_INPUT, f"bad experiment config: {exc}")

    try:
        run = run_bias_experiment if kind == "bias" else run_concentration_experiment
        report = run(cfg)
    except (PsiHashError, ValueError) as exc:
        return _fail(EXIT_BAD_PIPELINE, str(exc))

    base = cfg.out_path or "report"
    out_csv, out_json = f"{base}.csv", f"{base}.json"
    emit_report(report, "csv", out_csv)
    emit_report(report, "json", out_json)
    try:
        outcomes = evaluate_checks(report, checks)
    except ValueError as exc:
        return _fail(EXIT_BAD_INPUT, f"bad check: {exc}")
    _echo(
        {
            "kind": kind,
            "out_csv": out_csv,
            "out_json": out_json,
            "checks": [
                {"name": o.name, "passed": o.passed, "detail": o.detail} for o in outcomes
            ],
            "config": cfg.to_dict(),
        }
    )
    if any(not o.passed for o in outcomes):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psihash",
        description="Structured binary embeddings for angular-distance hashing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_hash = sub.add_parser("hash", help="hash a vector file into a packed hash file")
    p_hash.add_argument("--input", help="CSV or raw-f64 vector file")
    p_hash.add_argument("--out", help="output hash file")
    p_hash.add_argument("--variant", choices=("extended", "short"))
    p_hash.add_argument("--family", choices=("toeplitz", "circulant", "general"))
    p_hash.add_argument("--k", type=int, help="hash size in bits")
    p_hash.add_argument("--n", type=int, help="input dimensionality")
    p_hash.add_argument("--seed", type=int, help="seed for all pipeline randomness")
    p_hash.add_argument("--quantizer", help="sign | tanh:BETA | threshold:CUTOFF")
    p_hash.add_argument("--structure", help="subset-structure JSON (general family)")
    p_hash.add_argument("--config", help="JSON config file; flags override it")
    p_hash.set_defaults(func=cmd_hash)

    p_est = sub.add_parser("estimate", help="pairwise angle estimates from a hash file")
    p_est.add_argument("--hashes", required=True, help="packed hash file")
    p_est.add_argument("--pairs", help="semicolon-separated 0-based pairs, e.g. '0,1;0,2'")
    p_est.add_argument("--all-pairs", action="store_true", help="every unordered pair")
    p_est.add_argument("--out", help="write CSV here instead of stdout")
    p_est.set_defaults(func=cmd_estimate)

    p_val = sub.add_parser("validate", help="check a subset-structure JSON document")
    p_val.add_argument("--structure", required=True, help="structure JSON file")
    p_val.set_defaults(func=cmd_validate)

    p_chr = sub.add_parser("chroma", help="chromatic number of the row-dependency graphs")
    p_chr.add_argument("--family", choices=("toeplitz", "circulant"))
    p_chr.add_argument("--k", type=int)
    p_chr.add_argument("--n", type=int)
    p_chr.add_argument("--structure", help="explicit structure JSON file")
    p_chr.add_argument("--mode", choices=("exact", "greedy"))
    p_chr.add_argument("--exact-cap", dest="exact_cap", type=int)
    p_chr.add_argument("--config", help="JSON config file; flags override it")
    p_chr.set_defaults(func=cmd_chroma)

    p_exp = sub.add_parser("experiment", help="run a Monte-Carlo experiment config")
    p_exp.add_argument("--config", required=True, help="experiment config JSON")
    p_exp.add_argument("--out", help="report base path (writes .csv and .json)")
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidStructure as exc:
        return _fail(EXIT_BAD_PIPELINE, str(exc))
    except DimensionMismatch as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))
    except OSError as exc:
        return _fail(EXIT_BAD_INPUT, str(exc))


if __name__ == "__main__":
    sys.exit(main())
