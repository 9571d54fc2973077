"""Command-line interface: synthetic data, cleaning, training, classification, evaluation."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from protcascade.cascade import (
    CascadeConfig,
    FamilyMismatchError,
    TrainConfig,
    classify_cascade,
    evaluate,
    train_bundle,
)
from protcascade.features import physico_vector
from protcascade.seqio import (
    DEFAULT_MAX_LEN,
    DEFAULT_MIN_LEN,
    LabeledCorpus,
    clean_corpus,
    read_fasta,
    write_fasta,
)
from protcascade.synth import SynthSpec, gen_synth
from protcascade.warehouse import load_bundle, save_bundle

FASTA_SUFFIXES = (".fasta", ".fa", ".faa")


class CliError(Exception):
    pass


def read_family_dir(directory) -> LabeledCorpus:
    """One FASTA file per family; the file stem is the family label."""
    d = Path(directory)
    if not d.is_dir():
        raise CliError(f"{d} is not a directory")
    files = sorted(p for p in d.iterdir() if p.suffix.lower() in FASTA_SUFFIXES)
    if not files:
        raise CliError(f"no FASTA files in {d}")
    records = []
    for path in files:
        records.extend((seq, path.stem) for seq in read_fasta(path))
    return LabeledCorpus(records)


def _write_families(corpus: LabeledCorpus, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for fam in corpus.families:
        write_fasta(directory / f"{fam}.fasta", corpus.by_family(fam))


def cmd_gen_synth(args) -> None:
    spec = SynthSpec(
        families=args.families,
        per_family=args.per_family + args.holdout,
        len_min=args.len_min,
        len_max=args.len_max,
        motifs=args.motifs,
        motif_len=args.motif_len,
        seed=args.seed,
    )
    corpus, _ = gen_synth(spec)
    out = Path(args.out)
    if args.holdout:
        train, test = [], []
        counts: dict[str, int] = {}
        for seq, label in corpus.records:
            counts[label] = counts.get(label, 0) + 1
            (train if counts[label] <= args.per_family else test).append((seq, label))
        _write_families(LabeledCorpus(train), out / "train")
        _write_families(LabeledCorpus(test), out / "test")
    else:
        _write_families(corpus, out)


def cmd_clean(args) -> None:
    records = [(seq, "") for seq in read_fasta(args.input)]
    cleaned, report = clean_corpus(records, args.min_len, args.max_len)
    write_fasta(args.out, [seq for seq, _ in cleaned.records])
    sys.stderr.write(report.to_tsv())


def cmd_train(args) -> None:
    raw = read_family_dir(args.data)
    corpus, report = clean_corpus(raw.records, args.min_len, args.max_len)
    sys.stderr.write(report.to_tsv())
    cfg = TrainConfig(
        k=args.k,
        bins=args.bins,
        rho=args.rho,
        hidden=args.hidden,
        epochs=args.epochs,
        learning_rate=args.lr,
        C=args.C,
        seed=args.seed,
        top_k=args.top_k,
        slack=args.slack,
    )
    start = time.perf_counter()
    bundle = train_bundle(corpus, cfg)
    sys.stderr.write(f"train_seconds\t{time.perf_counter() - start:.3f}\n")
    save_bundle(bundle, args.out)


def _cascade_config(args) -> CascadeConfig:
    return CascadeConfig(
        theta_prefilter=args.theta, tau2=args.tau2, tau3=args.tau3, radius=args.radius
    )


def cmd_classify(args) -> None:
    bundle = load_bundle(args.bundle)
    if args.families is not None:
        wanted = [f for f in args.families.split(",") if f]
        if wanted != bundle.families:
            raise FamilyMismatchError(
                f"bundle has {len(bundle.families)} families {bundle.families}, "
                f"requested {len(wanted)} {wanted}"
            )
    cfg = _cascade_config(args)
    for seq in read_fasta(args.input):
        print(classify_cascade(bundle.kb, bundle, seq, cfg).to_line())


def cmd_eval(args) -> None:
    bundle = load_bundle(args.bundle)
    test = read_family_dir(args.data)
    unknown = sorted(set(test.families) - set(bundle.families))
    if unknown:
        raise FamilyMismatchError(f"test families {unknown} not in bundle {bundle.families}")
    start = time.perf_counter()
    metrics = evaluate(bundle.kb, bundle, test, _cascade_config(args))
    sys.stdout.write(metrics.to_tsv())
    sys.stdout.write(f"eval_seconds\t{time.perf_counter() - start:.3f}\n")


def cmd_features(args) -> None:
    for seq in read_fasta(args.input):
        seq.validate()
        values = "\t".join(format(v, ".10g") for v in physico_vector(seq))
        print(f"{seq.id}\t{values}")


def _add_gate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau2", type=float, default=0.9, help="phase-2 confidence gate (1 closes it)")
    p.add_argument("--tau3", type=float, default=0.9, help="phase-3 confidence gate (1 closes it)")
    p.add_argument("--theta", type=float, default=0.8, help="prefilter in-band fraction")
    p.add_argument("--radius", type=int, default=1, help="neighbourhood Hamming radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="protcascade", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="write a synthetic motif-implant corpus")
    p.add_argument("--families", type=int, default=5)
    p.add_argument("--per-family", type=int, default=100)
    p.add_argument("--holdout", type=int, default=0,
                   help="extra sequences per family written to OUT/test (training set to OUT/train)")
    p.add_argument("--len-min", type=int, default=60)
    p.add_argument("--len-max", type=int, default=120)
    p.add_argument("--motifs", type=int, default=3)
    p.add_argument("--motif-len", type=int, default=6)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("clean", help="drop noisy records from a FASTA file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-len", type=int, default=DEFAULT_MIN_LEN)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.set_defaults(func=cmd_clean)

    defaults = TrainConfig()
    p = sub.add_parser("train", help="train all phases and write a CPSC1 bundle")
    p.add_argument("--data", required=True, help="directory with one FASTA per family")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=defaults.k)
    p.add_argument("--bins", type=int, default=defaults.bins)
    p.add_argument("--rho", type=float, default=defaults.rho)
    p.add_argument("--hidden", type=int, default=defaults.hidden)
    p.add_argument("--epochs", type=int, default=defaults.epochs)
    p.add_argument("--lr", type=float, default=defaults.learning_rate)
    p.add_argument("--C", type=float, default=defaults.C)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--top-k", type=int, default=defaults.top_k)
    p.add_argument("--slack", type=float, default=defaults.slack)
    p.add_argument("--min-len", type=int, default=DEFAULT_MIN_LEN)
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="print one verdict line per input sequence")
    p.add_argument("--bundle", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--families", help="comma-separated family list the bundle must match")
    _add_gate_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="accuracy, per-family precision/recall, per-phase timing")
    p.add_argument("--bundle", required=True)
    p.add_argument("--data", required=True, help="directory with one FASTA per family")
    _add_gate_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("features", help="tab-separated 43-value physicochemical vectors")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_features)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - every module error becomes one diagnostic line
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        sys.stderr.write(f"protcascade {args.command}: error: {msg}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
