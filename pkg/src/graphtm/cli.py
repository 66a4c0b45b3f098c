"""Command line entry points: gen, train, eval, inspect, trace.

All output is key=value lines so scripts can scrape metrics. Errors exit
with stable codes: 1 invalid configuration, 2 unreadable or malformed
input, 3 model/corpus vocabulary mismatch, 4 corrupt model file.
"""

from __future__ import annotations

import csv
import functools
import os
import sys

import click

from . import datasets
from .engine import GraphTmModel, TrainConfig, evaluate, load_model, save_model
from .errors import (
    ConfigError,
    CorruptModelError,
    GraphTmError,
    InputError,
    SpaceMismatchError,
    SymbolExistsError,
    UnknownSymbolError,
)
from .graph import read_corpus, write_corpus
from .interpret import decode_clause, trace_to_nodes

EXIT_CODES = (
    (ConfigError, 1),
    (SymbolExistsError, 1),
    (SpaceMismatchError, 3),
    (CorruptModelError, 4),
    (InputError, 2),
    (UnknownSymbolError, 2),
    (OSError, 2),
)


def guarded(fn):
    """Convert package errors into the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except tuple(exc for exc, _ in EXIT_CODES) as err:
            for exc_type, code in EXIT_CODES:
                if isinstance(err, exc_type):
                    click.echo(f"error: {err}", err=True)
                    sys.exit(code)
            raise

    return wrapper


@click.group()
def main() -> None:
    """Graph classifier over hypervector-encoded inputs."""


def _dataset_options(fn):
    decorators = [
        click.option("--task", type=click.Choice(list(datasets.TASKS)), default="seq",
                     show_default=True, help="Which synthetic corpus to build."),
        click.option("--count", type=int, default=1000, show_default=True),
        click.option("--noise", type=float, default=0.0, show_default=True,
                     help="Label flip probability."),
        click.option("--n-values", type=int, default=10, show_default=True,
                     help="mv_xor: integers per node."),
        click.option("--length", type=int, default=5, show_default=True,
                     help="seq: chain length."),
        click.option("--classes", "num_classes", type=int, default=2, show_default=True,
                     help="seq: 2 (run of three or not) or 3 (run length 1/2/3+)."),
        click.option("--alphabet", type=str, default="ABCDE", show_default=True),
        click.option("--class-counts", type=str, default=None,
                     help="seq: comma-separated per-class sample counts."),
        click.option("--grid-size", type=int, default=8, show_default=True),
        click.option("--patch", type=int, default=2, show_default=True),
    ]
    for deco in reversed(decorators):
        fn = deco(fn)
    return fn


def _spec_from_flags(seed: int, **kw) -> datasets.DatasetSpec:
    counts = kw.pop("class_counts", None)
    if counts is not None:
        try:
            counts = tuple(int(part) for part in counts.split(","))
        except ValueError as err:
            raise ConfigError(f"bad --class-counts value: {err}") from None
    return datasets.DatasetSpec(seed=seed, class_counts=counts, **kw)


@main.command("gen")
@_dataset_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--train-out", type=click.Path(dir_okay=False), required=True)
@click.option("--test-out", type=click.Path(dir_okay=False), default=None)
@click.option("--test-count", type=int, default=0,
              help="Samples in the held-out split (noise-free).")
@guarded
def cmd_gen(seed, train_out, test_out, test_count, **kw) -> None:
    """Write synthetic train (and optional noiseless test) corpora."""
    spec = _spec_from_flags(seed, **kw)
    corpus = datasets.generate(spec)
    write_corpus(train_out, corpus)
    click.echo(f"train_out={train_out} records={len(corpus.records)}")
    if test_out is not None:
        if test_count <= 0:
            raise ConfigError("--test-out needs a positive --test-count")
        test_spec = _spec_from_flags(seed + 1, **kw)
        test_spec.count = test_count
        test_spec.noise = 0.0
        test_spec.class_counts = None
        test = datasets.generate(test_spec)
        write_corpus(test_out, test)
        click.echo(f"test_out={test_out} records={len(test.records)}")


def _load_pair(model, test_path):
    corpus = read_corpus(test_path)
    if corpus.vocab_hash() != model.space.vocab_hash():
        raise SpaceMismatchError(
            f"corpus vocabulary {corpus.vocab_hash()} does not match "
            f"model vocabulary {model.space.vocab_hash()}"
        )
    return corpus.bind_all(model.space)


@main.command("train")
@_dataset_options
@click.option("--train", "train_path", type=click.Path(dir_okay=False), default=None,
              help="Training corpus file; omit to generate from --task flags.")
@click.option("--test", "test_path", type=click.Path(dir_okay=False), default=None,
              help="Held-out corpus for per-epoch test accuracy.")
@click.option("--clauses", type=int, default=10, show_default=True)
@click.option("--depth", type=int, default=1, show_default=True)
@click.option("--T", "--threshold", "threshold", type=int, default=100,
              show_default=True, help="Vote clip bound.")
@click.option("--s", "--specificity", "specificity", type=float, default=2.0,
              show_default=True)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--hv-size", type=int, default=128, show_default=True)
@click.option("--msg-size", type=int, default=256, show_default=True)
@click.option("--bits-per-symbol", type=int, default=2, show_default=True)
@click.option("--bits-per-clause", type=int, default=2, show_default=True)
@click.option("--states", type=int, default=128, show_default=True,
              help="Automaton states per action.")
@click.option("--max-literals", type=int, default=None,
              help="Cap on included literals per clause.")
@click.option("--workers", type=int, default=0, show_default=True,
              help="Clause-partition threads; 0 = one per core.")
@click.option("--model-out", type=click.Path(dir_okay=False), default=None)
@click.option("--report-dir", type=click.Path(file_okay=False), default=None,
              help="Write metrics.csv and accuracy.png here.")
@guarded
def cmd_train(train_path, test_path, clauses, depth, threshold, specificity,
              epochs, seed, hv_size, msg_size, bits_per_symbol, bits_per_clause,
              states, max_literals, workers, model_out, report_dir, **kw) -> None:
    """Train a model on a corpus file or a generated task."""
    if train_path is not None:
        corpus = read_corpus(train_path)
    else:
        corpus = datasets.generate(_spec_from_flags(seed, **kw))

    config = TrainConfig(
        num_clauses=clauses,
        threshold=threshold,
        specificity=specificity,
        depth=depth,
        hv_size=hv_size,
        msg_size=msg_size,
        bits_per_symbol=bits_per_symbol,
        bits_per_clause=bits_per_clause,
        states_per_action=states,
        max_included_literals=max_literals,
        epochs=epochs,
        seed=seed,
    )
    config.validate()
    space = corpus.make_space(hv_size, bits_per_symbol, seed)
    labels = [rec.label for rec in corpus.records]
    if any(lab is None for lab in labels):
        raise InputError("training corpus has unlabeled records")
    num_classes = max(labels) + 1
    model = GraphTmModel(config, space, num_classes)

    graphs = corpus.bind_all(space)
    test_graphs = _load_pair(model, test_path) if test_path else None
    if workers <= 0:
        workers = os.cpu_count() or 1

    metrics = model.fit(
        graphs,
        epochs=epochs,
        test_graphs=test_graphs,
        workers=workers,
        log=lambda m: click.echo(_metric_line(m)),
    )
    if model_out is not None:
        save_model(model, model_out)
        click.echo(f"model_out={model_out}")
    if report_dir is not None:
        _write_report(report_dir, metrics)
        click.echo(f"report_dir={report_dir}")


def _metric_line(m) -> str:
    parts = [f"epoch={m.epoch}", f"train_acc={m.train_acc:.4f}"]
    if m.test_acc is not None:
        parts.append(f"test_acc={m.test_acc:.4f}")
    parts.append(f"elapsed_ms={m.elapsed_ms:.0f}")
    return " ".join(parts)


def _write_report(report_dir, metrics) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(report_dir, exist_ok=True)
    csv_path = os.path.join(report_dir, "metrics.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_acc", "test_acc", "elapsed_ms"])
        for m in metrics:
            writer.writerow([
                m.epoch,
                f"{m.train_acc:.6f}",
                "" if m.test_acc is None else f"{m.test_acc:.6f}",
                f"{m.elapsed_ms:.1f}",
            ])

    fig, ax = plt.subplots(figsize=(6, 4))
    epochs = [m.epoch for m in metrics]
    ax.plot(epochs, [m.train_acc for m in metrics], marker="o", label="train")
    if any(m.test_acc is not None for m in metrics):
        ax.plot(
            epochs,
            [m.test_acc for m in metrics],
            marker="s",
            label="test",
        )
    ax.set_xlabel("epoch")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(report_dir, "accuracy.png"), dpi=120)
    plt.close(fig)


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), required=True)
@click.option("--test", "test_path", type=click.Path(dir_okay=False), required=True)
@guarded
def cmd_eval(model_path, test_path) -> None:
    """Accuracy and confusion counts of a saved model on a corpus."""
    model = load_model(model_path)
    graphs = _load_pair(model, test_path)
    accuracy, confusion = evaluate(model, graphs)
    click.echo(f"accuracy={accuracy:.4f}")
    for true_cls in range(confusion.shape[0]):
        for pred_cls in range(confusion.shape[1]):
            count = int(confusion[true_cls, pred_cls])
            click.echo(f"confusion_{true_cls}_{pred_cls}={count}")


@main.command("inspect")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), required=True)
@guarded
def cmd_inspect(model_path) -> None:
    """Render every clause with its per-class weights."""
    model = load_model(model_path)
    for j in range(model.config.num_clauses):
        sc = decode_clause(model, j)
        body = sc.render()
        if body == "φ":
            body = "φ (matches everything)"
        weights = "[" + ",".join(str(w) for w in sc.weights) + "]"
        click.echo(f"C_{j} = {body}; {weights}")


@main.command("trace")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), required=True)
@click.option("--clause", type=int, required=True)
@guarded
def cmd_trace(model_path, clause) -> None:
    """Expand one clause's message literals down to node patterns."""
    model = load_model(model_path)
    if not 0 <= clause < model.config.num_clauses:
        raise ConfigError(
            f"clause {clause} out of range, model has {model.config.num_clauses}"
        )
    click.echo(trace_to_nodes(model, clause).render())


if __name__ == "__main__":
    main()
