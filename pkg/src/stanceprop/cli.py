"""Batch command line: ingest datasets, dump features, classify, run the
evaluation protocol, and launch the annotation service.

Exit codes: 0 success, 1 usage/config error, 2 data error.  Options mirror
the experiment configuration one to one and may also be given in a
``key = value`` config file; flags win over the file, the file wins over
defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiment as exp
from .data import (
    IngestSummary,
    filter_rumours,
    inherit_retweet_predictions,
    load_jsonl,
    load_pheme_with_summary,
    write_jsonl,
)
from .errors import DataError, ParameterError, SeedingError, StancePropError
from .features import BrownClusterMap, Lexicons
from .pipeline import PipelineSettings, RumourClassifier

log = logging.getLogger("stanceprop")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_ALGORITHM_ALIASES = {
    "lp": "label_propagation",
    "ls": "label_spreading",
    "label_propagation": "label_propagation",
    "label_spreading": "label_spreading",
}


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in str(raw).split(",") if x.strip())


def _csv_ints(raw: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(raw).split(",") if x.strip())


def _algorithm(raw: str) -> str:
    key = str(raw).strip().lower()
    if key not in _ALGORITHM_ALIASES:
        raise ParameterError(f"unknown algorithm {raw!r} (use lp or ls)")
    return _ALGORITHM_ALIASES[key]


def _bool(raw: str) -> bool:
    key = str(raw).strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"expected a boolean, got {raw!r}")


def _read_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values: dict[str, str] = {}
    p = Path(path)
    if not p.is_file():
        raise ParameterError(f"config file not found: {path}")
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


# (attribute, converter, default) for everything the config file may set
_CONFIG_SCHEMA = {
    "n_values": (_csv_ints, exp.DEFAULT_N_VALUES),
    "sigma_grid": (_csv_floats, exp.DEFAULT_SIGMA_GRID),
    "k_grid": (_csv_ints, exp.DEFAULT_K_GRID),
    "feature_space": (str, "brown"),
    "kernel": (str, "rbf"),
    "algorithm": (_algorithm, "label_spreading"),
    "alpha": (float, 1.0),
    "sigma_mode": (str, "grid"),
    "sigma": (float, 0.85),
    "k": (int, 10),
    "min_rumour_size": (int, 50),
    "tol": (float, 1e-3),
    "max_iter": (int, 1000),
    "workers": (int, 1),
    "stemmed_variant": (_bool, False),
}


def _resolve(args: argparse.Namespace, file_values: dict[str, str]) -> dict:
    """flags > config file > defaults."""
    resolved = {}
    for key, (convert, default) in _CONFIG_SCHEMA.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_values:
            resolved[key] = convert(file_values[key])
        else:
            resolved[key] = default
    return resolved


def _load_resources(args) -> tuple[BrownClusterMap, Lexicons]:
    if getattr(args, "clusters", None):
        cluster_map = BrownClusterMap.load(args.clusters)
    else:
        cluster_map = BrownClusterMap.bundled_demo()
    lexicon_dir = getattr(args, "lexicon_dir", None)
    if lexicon_dir:
        d = Path(lexicon_dir)
        lexicons = Lexicons.load(
            d / "tentative_words.txt", d / "swear_words.txt",
            d / "negation_words.txt", d / "sentiment_lexicon.txt",
        )
    else:
        lexicons = Lexicons.bundled()
    return cluster_map, lexicons


def _add_settings_flags(p: argparse.ArgumentParser, grids: bool):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--feature-space", dest="feature_space",
                   choices=("brown", "ling", "ngrams", "brown_ling"))
    p.add_argument("--kernel", choices=("rbf", "knn"))
    p.add_argument("--algorithm", type=_algorithm, help="lp or ls")
    p.add_argument("--alpha", type=float)
    p.add_argument("--sigma", type=float, help="fixed Gaussian width")
    p.add_argument("--k", type=int, help="fixed neighbour count for knn")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--stemmed-variant", dest="stemmed_variant", action="store_const",
                   const=True, help="stem tokens and drop stop-words (scores lower)")
    p.add_argument("--clusters", help="Brown cluster file (default: bundled demo)")
    p.add_argument("--lexicon-dir", dest="lexicon_dir",
                   help="directory with the four lexicon files (default: bundled)")
    if grids:
        p.add_argument("--sigma-mode", dest="sigma_mode", choices=("fixed", "grid", "heuristic"))
        p.add_argument("--n-values", dest="n_values", type=_csv_ints)
        p.add_argument("--sigma-grid", dest="sigma_grid", type=_csv_floats)
        p.add_argument("--k-grid", dest="k_grid", type=_csv_ints)
        p.add_argument("--min-rumour-size", dest="min_rumour_size", type=int)
        p.add_argument("--workers", type=int, help="rumour-level worker pool size")
    else:
        p.add_argument("--sigma-mode", dest="sigma_mode", choices=("fixed", "heuristic"))


def build_parser() -> _Parser:
    parser = _Parser(prog="stanceprop", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="convert a dataset to canonical JSONL")
    src = p_ingest.add_mutually_exclusive_group(required=True)
    src.add_argument("--pheme", help="root of a PHEME-layout directory tree")
    src.add_argument("--jsonl", help="already-canonical JSONL to validate and normalize")
    p_ingest.add_argument("--out", required=True, help="output directory")

    p_exp = sub.add_parser("experiment", help="run the annotate-first-N protocol")
    p_exp.add_argument("--data", required=True, help="canonical rumours JSONL")
    p_exp.add_argument("--out", required=True, help="output directory")
    _add_settings_flags(p_exp, grids=True)

    p_cls = sub.add_parser("classify", help="propagate a seed file over rumours")
    p_cls.add_argument("--data", required=True, help="canonical rumours JSONL")
    p_cls.add_argument("--seeds", required=True,
                       help="JSONL of {rumour_id, message_id, stance}")
    p_cls.add_argument("--out", required=True, help="output directory")
    _add_settings_flags(p_cls, grids=False)

    p_feat = sub.add_parser("features", help="dump feature matrices for debugging")
    p_feat.add_argument("--data", required=True)
    p_feat.add_argument("--out", required=True, help="output directory")
    p_feat.add_argument("--format", choices=("npz", "json"), default="npz")
    _add_settings_flags(p_feat, grids=False)

    p_srv = sub.add_parser("serve", help="start the annotation HTTP service")
    p_srv.add_argument("--data", default=os.environ.get("STANCEPROP_DATA"),
                       help="canonical rumours JSONL (or env STANCEPROP_DATA)")
    p_srv.add_argument("--host", default=os.environ.get("STANCEPROP_HOST", "127.0.0.1"))
    p_srv.add_argument("--port", type=int,
                       default=int(os.environ.get("STANCEPROP_PORT", "8100")))
    p_srv.add_argument("--log-dir", dest="log_dir",
                       default=os.environ.get("STANCEPROP_LOG_DIR"),
                       help="annotation log directory (or env STANCEPROP_LOG_DIR)")
    _add_settings_flags(p_srv, grids=False)

    return parser


def _settings_from(resolved: dict, sigma_mode_default: str = "fixed") -> PipelineSettings:
    mode = resolved.get("sigma_mode") or sigma_mode_default
    return PipelineSettings(
        feature_space=resolved["feature_space"],
        kernel=resolved["kernel"],
        sigma=resolved["sigma"],
        k=resolved["k"],
        sigma_mode="fixed" if mode == "grid" else mode,
        algorithm=resolved["algorithm"],
        alpha=resolved["alpha"],
        tol=resolved["tol"],
        max_iter=resolved["max_iter"],
        stemmed_variant=resolved["stemmed_variant"],
    )


def cmd_ingest(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.pheme:
        rumours, summary = load_pheme_with_summary(args.pheme)
    else:
        rumours = load_jsonl(args.jsonl)
        summary = IngestSummary(
            threads=0,
            tweets_total=sum(len(r.messages) for r in rumours),
            rumours=len(rumours),
            stories=len({r.story for r in rumours if r.story}),
            original_english=sum(r.original_english_count() for r in rumours),
        )
    out_jsonl = out_dir / "rumours.jsonl"
    count = write_jsonl(rumours, out_jsonl)
    with open(out_dir / "ingest_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {count} messages in {len(rumours)} rumours to {out_jsonl}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    file_values = _read_config_file(args.config)
    resolved = _resolve(args, file_values)
    k_grid = tuple(resolved["k_grid"])
    if args.k is not None and args.k_grid is None and "k_grid" not in file_values:
        k_grid = (args.k,)  # "--kernel knn --k 10" runs exactly that k
    cfg = exp.ExperimentConfig(
        n_values=tuple(resolved["n_values"]),
        sigma_grid=tuple(resolved["sigma_grid"]),
        k_grid=k_grid,
        feature_space=resolved["feature_space"],
        kernel=resolved["kernel"],
        algorithm=resolved["algorithm"],
        alpha=resolved["alpha"],
        sigma_mode=resolved["sigma_mode"],
        sigma_fixed=resolved["sigma"],
        min_rumour_size=resolved["min_rumour_size"],
        tol=resolved["tol"],
        max_iter=resolved["max_iter"],
        stemmed_variant=resolved["stemmed_variant"],
    )
    cluster_map, lexicons = _load_resources(args)
    rumours = filter_rumours(load_jsonl(args.data), cfg.min_rumour_size)
    if not rumours:
        print("no rumours pass the size filter", file=sys.stderr)
    report = exp.run_experiment(rumours, cfg, cluster_map, lexicons,
                                workers=resolved["workers"])
    paths = exp.write_report(report, args.out)
    optimal = report.optimal_param() if report.cells else None
    print(f"wrote {paths['json']} and {paths['csv']}; optimal param: {optimal}")
    return EXIT_OK


def _load_seed_file(path: str) -> dict[str, dict[str, int]]:
    seeds: dict[str, dict[str, int]] = {}
    p = Path(path)
    if not p.is_file():
        raise DataError(f"seed file not found: {path}")
    with open(p, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: malformed JSON ({e.msg})")
            try:
                seeds.setdefault(str(obj["rumour_id"]), {})[str(obj["message_id"])] = int(
                    obj["stance"]
                )
            except (KeyError, TypeError, ValueError):
                raise DataError(f"{path}:{lineno}: expected rumour_id, message_id, stance")
    return seeds


def cmd_classify(args) -> int:
    resolved = _resolve(args, _read_config_file(args.config))
    settings = _settings_from(resolved)
    cluster_map, lexicons = _load_resources(args)
    rumours = load_jsonl(args.data)
    if not rumours:
        raise DataError(f"no rumours found in {args.data}")
    seeds_by_rumour = _load_seed_file(args.seeds)
    if not any(seeds_by_rumour.values()):
        raise SeedingError("seed file contains no annotations")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    output: dict[str, dict] = {}
    for rumour in rumours:
        seeds = seeds_by_rumour.get(rumour.rumour_id)
        if not seeds:
            continue
        classifier = RumourClassifier(rumour, settings, cluster_map, lexicons)
        result = classifier.classify(seeds)
        per_message = result.by_message()
        predicted = {mid: rec["stance"] for mid, rec in per_message.items()}
        inherited = inherit_retweet_predictions(rumour, predicted)
        for mid, stance in inherited.items():
            if mid not in per_message:
                per_message[mid] = {"stance": stance, "inherited_from_retweet": True}
        if "single_class_seeds" in result.flags:
            log.warning("rumour %s: seeds cover a single class; every prediction "
                        "will be that class", rumour.rumour_id)
        output[rumour.rumour_id] = {
            "param_used": result.param_used,
            "iterations": result.iterations,
            "converged": result.converged,
            "flags": result.flags,
            "messages": per_message,
        }
    if not output:
        raise SeedingError("no seed annotation matched any rumour in the input")
    out_path = out_dir / "predictions.json"
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(output, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_features(args) -> int:
    resolved = _resolve(args, _read_config_file(args.config))
    settings = _settings_from(resolved)
    cluster_map, lexicons = _load_resources(args)
    rumours = load_jsonl(args.data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for rumour in rumours:
        classifier = RumourClassifier(rumour, settings, cluster_map, lexicons)
        fm = classifier.features
        dense = fm.values.toarray() if hasattr(fm.values, "toarray") else fm.values
        safe_id = rumour.rumour_id.replace("/", "_")
        if args.format == "npz":
            np.savez_compressed(
                out_dir / f"{safe_id}.npz",
                values=dense,
                message_ids=np.array([m.id for m in classifier.messages]),
                space=fm.space,
            )
        else:
            doc = {
                "rumour_id": rumour.rumour_id,
                "space": fm.space,
                "message_ids": [m.id for m in classifier.messages],
                "values": dense.tolist(),
            }
            if fm.vocabulary is not None:
                doc["vocabulary"] = [list(g) for g in fm.vocabulary]
            with open(out_dir / f"{safe_id}.json", "w", encoding="utf-8") as fh:
                json.dump(doc, fh, sort_keys=True)
                fh.write("\n")
    print(f"wrote {len(rumours)} feature dump(s) to {out_dir}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    if not args.data:
        raise ParameterError("serve needs --data or the STANCEPROP_DATA environment variable")
    resolved = _resolve(args, _read_config_file(args.config))
    settings = _settings_from(resolved)
    cluster_map, lexicons = _load_resources(args)
    rumours = load_jsonl(args.data)
    app = create_app(rumours, settings, cluster_map, lexicons, log_dir=args.log_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "experiment": cmd_experiment,
    "classify": cmd_classify,
    "features": cmd_features,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (DataError, SeedingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ParameterError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StancePropError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:  # missing/unreadable data or resource files
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
