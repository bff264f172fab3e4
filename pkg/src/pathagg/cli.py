"""Command-line interface.

Subcommands: gen (synthetic dataset files), train (learn a model from TSV
splits), predict (per-sequence predictions), eval (test-set MAE), and
experiment (sweep spec JSON -> results CSV).  Every stochastic command
requires an explicit seed.  Verbose training logs go to standard error; on
failure a machine-readable `error<TAB>type<TAB>message` line is printed to
standard error and the exit code is nonzero.
"""

import argparse
import json
import logging
import sys

from .dataio import load_dataset, load_model, save_model
from .datagen import SyntheticConfig, generate_dataset, save_synthetic
from .errors import InvalidConfigError, ParseError, PathAggError
from .evaluate import evaluate_mae, predict_batch
from .experiment import run_experiment, spec_from_dict, write_results_csv
from .model import Alphabet
from .structure import StructureSearchConfig, structure_search
from .training import TrainConfig

log = logging.getLogger("pathagg")


def _add_gen(sub):
    p = sub.add_parser("gen", help="generate a synthetic benchmark dataset")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--seq-len", type=int, default=200)
    p.add_argument("--alphabet", default="acgt")
    p.add_argument("--motif-len", type=int, default=10)
    p.add_argument("--effects", default="7,3",
                   help="comma-separated effect coefficients, one per planted motif")
    p.add_argument("--intercept", type=float, default=-2.0)
    p.add_argument("--noise-sigma", type=float, default=1.0)
    p.add_argument("--occurrences-lambda", type=float, default=1.0)
    p.add_argument("--decoys", type=int, default=0)
    p.add_argument("--mutation-rate", type=int, default=0)
    p.add_argument("--train-size", type=int, default=128)
    p.add_argument("--tune-size", type=int, default=128)
    p.add_argument("--test-size", type=int, default=256)


def _add_train(sub):
    p = sub.add_parser("train", help="train a model on TSV train/tune splits")
    p.add_argument("--data", required=True, help="training TSV")
    p.add_argument("--tune", required=True, help="tuning TSV")
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--learner", choices=("path-aggregate", "two-phase"),
                   default="path-aggregate")
    p.add_argument("--template", choices=("occurrence", "arrangement"),
                   default="occurrence")
    p.add_argument("--motif-width", type=int, default=15)
    p.add_argument("--max-motifs", type=int, default=2)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--intercept", choices=("on", "off"), default="on")
    p.add_argument("--init", choices=("sample", "random", "uniform"),
                   default="sample")
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--visit-cap", type=int, default=4)
    p.add_argument("--lattice-budget", type=int, default=4096)
    p.add_argument("--alphabet", default=None,
                   help="explicit alphabet (default: infer from data)")


def _add_predict(sub):
    p = sub.add_parser("predict", help="predict responses for sequences")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True,
                   help="TSV of sequences (response column optional)")
    p.add_argument("--out", default="-", help="output TSV (default stdout)")


def _add_eval(sub):
    p = sub.add_parser("eval", help="mean absolute error on a labeled TSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="run a sweep spec and write CSV")
    p.add_argument("--spec", required=True, help="experiment spec JSON")
    p.add_argument("--out", required=True, help="results CSV path")
    p.add_argument("--seed", type=int, default=None,
                   help="override the master seed in the spec")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pathagg",
        description="sequence-to-response HMM regression by visit-count aggregation",
    )
    parser.add_argument("--verbose", action="store_true",
                        help="per-iteration training logs on standard error")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_gen(sub)
    _add_train(sub)
    _add_predict(sub)
    _add_eval(sub)
    _add_experiment(sub)
    return parser


def _cmd_gen(args):
    effects = tuple(float(v) for v in args.effects.split(","))
    config = SyntheticConfig(
        seq_len=args.seq_len,
        alphabet=Alphabet(tuple(args.alphabet)),
        motif_len=args.motif_len,
        effect_coefficients=effects,
        intercept=args.intercept,
        noise_sigma=args.noise_sigma,
        occurrences_lambda=args.occurrences_lambda,
        decoy_motifs=args.decoys,
        mutation_rate=args.mutation_rate,
        train_size=args.train_size,
        tune_size=args.tune_size,
        test_size=args.test_size,
        seed=args.seed,
    )
    paths = save_synthetic(generate_dataset(config), args.out)
    for name, path in paths.items():
        print(f"{name}\t{path}")
    return 0


def _cmd_train(args):
    alphabet = Alphabet(tuple(args.alphabet)) if args.alphabet else None
    train = load_dataset(args.data, alphabet)
    tune = load_dataset(args.tune, alphabet)
    train_config = TrainConfig(
        max_iterations=args.max_iterations,
        tolerance=args.tolerance,
        restarts=args.restarts,
        init_spec=args.init,
        use_intercept=args.intercept == "on",
        lattice_budget=args.lattice_budget,
        visit_cap=args.visit_cap,
        seed=args.seed,
    )
    search = StructureSearchConfig(
        template=args.template,
        motif_width=args.motif_width,
        max_motifs=args.max_motifs,
        train=train_config,
        trainer=args.learner.replace("-", "_"),
    )
    model = structure_search(search, train, tune, alphabet=alphabet)
    save_model(model, args.out)
    print(f"model\t{args.out}")
    print(f"tune_mae\t{model.meta['tune_mae']!r}")
    return 0


def _load_sequences(path):
    """Sequences from a TSV that may or may not carry a response column."""
    seqs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if not fields[0]:
                raise ParseError("empty sequence field", line=lineno)
            seqs.append(fields[0])
    if not seqs:
        raise ParseError(f"no sequences in {path}")
    return seqs


def _cmd_predict(args):
    model = load_model(args.model)
    seqs = _load_sequences(args.data)
    preds = predict_batch(model, seqs)
    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8",
                                                  newline="\n")
    try:
        for seq, pred in zip(seqs, preds):
            out.write(f"{seq}\t{float(pred)!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_eval(args):
    model = load_model(args.model)
    data = load_dataset(args.data)
    mae = evaluate_mae(model, data)
    print(f"mae\t{mae!r}")
    return 0


def _cmd_experiment(args):
    with open(args.spec, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if args.seed is not None:
        doc["seed"] = args.seed
    if "seed" not in doc:
        raise InvalidConfigError(
            "experiment spec must carry a master seed (or pass --seed)"
        )
    spec = spec_from_dict(doc)
    rows = run_experiment(spec)
    write_results_csv(rows, args.out)
    print(f"results\t{args.out}")
    print(f"rows\t{len(rows)}")
    return 0


COMMANDS = {
    "gen": _cmd_gen,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "experiment": _cmd_experiment,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except PathAggError as e:
        print(f"error\t{type(e).__name__}\t{e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error\tOSError\t{e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
