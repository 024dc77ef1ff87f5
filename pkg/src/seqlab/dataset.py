"""Synthetic sequence-tagging tasks, CoNLL column I/O, embedding tables.

The generator stands in for licensed corpora: entity phrases are drawn
from a per-type lexicon and interleaved with filler tokens, and a
configurable fraction of tokens is replaced by "ambiguous" words that
occur in every role. Ambiguity caps the achievable score below 1 and
creates the seed-sensitive minima the lab exists to study. Everything
is a pure function of (spec, seed).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ParseError
from .rng import Rng
from .tagcodec import TagScheme, split_tag

SPAN_TASK = "span_task"
TOKEN_TASK = "token_task"

ENTITY_START_PROB = 0.35
MAX_PHRASE_LEN = 3
INFORMATIVE_RADIUS_FRACTION = 0.25  # cluster radius / mean inter-centroid distance


@dataclass(frozen=True)
class TaskSpec:
    task_kind: str = SPAN_TASK
    vocab_size: int = 2000
    label_types: tuple[str, ...] = ("PER", "LOC", "ORG", "MISC")
    entity_lexicon_size: int = 200
    avg_sentence_length: int = 9
    noise_rate: float = 0.15
    train_size: int = 800
    dev_size: int = 100
    test_size: int = 200
    seed: int = 13

    def validate(self) -> None:
        if self.task_kind not in (SPAN_TASK, TOKEN_TASK):
            raise InvalidInputError(f"unknown task kind {self.task_kind!r}")
        if not self.label_types:
            raise InvalidInputError("label_types must be nonempty")
        if not 0.0 <= self.noise_rate < 1.0:
            raise InvalidInputError("noise_rate must be in [0, 1)")
        if min(self.train_size, self.dev_size, self.test_size) < 1:
            raise InvalidInputError("all split sizes must be >= 1")
        if self.avg_sentence_length < 3:
            raise InvalidInputError("avg_sentence_length must be >= 3")
        if self.entity_lexicon_size < len(self.label_types):
            raise InvalidInputError("lexicon smaller than the number of label types")
        min_vocab = self.entity_lexicon_size + max(8, self.entity_lexicon_size // 4) + 8
        if self.vocab_size < min_vocab:
            raise InvalidInputError(f"vocab_size must be >= {min_vocab} for this lexicon")


def standard_span_task() -> TaskSpec:
    """The frozen task every headline number in the repo refers to."""
    return TaskSpec()


@dataclass
class Corpus:
    sentences: list[tuple[tuple[str, ...], tuple[str, ...]]]
    scheme: TagScheme
    label_types: tuple[str, ...]
    task_kind: str = SPAN_TASK

    def __post_init__(self) -> None:
        for i, (tokens, tags) in enumerate(self.sentences):
            if len(tokens) != len(tags):
                raise InvalidInputError(f"sentence {i}: {len(tokens)} tokens vs {len(tags)} tags")

    def __len__(self) -> int:
        return len(self.sentences)

    def tokens(self) -> list[tuple[str, ...]]:
        return [s[0] for s in self.sentences]

    def tags(self) -> list[tuple[str, ...]]:
        return [s[1] for s in self.sentences]


@dataclass
class TaskVocab:
    """Deterministic word roles for one task spec."""

    words: tuple[str, ...]
    entity_words: dict[str, tuple[str, ...]]  # type -> lexicon words
    ambiguous: tuple[str, ...]
    filler: tuple[str, ...]
    filler_classes: dict[str, str]


def task_vocabulary(spec: TaskSpec) -> TaskVocab:
    spec.validate()
    words = tuple(f"w{i:04d}" for i in range(spec.vocab_size))
    n_types = len(spec.label_types)
    lex = words[: spec.entity_lexicon_size]
    entity_words: dict[str, list[str]] = {t: [] for t in spec.label_types}
    for i, w in enumerate(lex):
        entity_words[spec.label_types[i * n_types // len(lex)]].append(w)
    n_amb = max(8, spec.entity_lexicon_size // 4)
    ambiguous = words[spec.entity_lexicon_size : spec.entity_lexicon_size + n_amb]
    filler = words[spec.entity_lexicon_size + n_amb :]
    filler_classes = {w: f"C{i % 4}" for i, w in enumerate(filler)}
    return TaskVocab(
        words=words,
        entity_words={t: tuple(ws) for t, ws in entity_words.items()},
        ambiguous=ambiguous,
        filler=filler,
        filler_classes=filler_classes,
    )


def _span_sentence(spec: TaskSpec, vocab: TaskVocab, rng: Rng) -> tuple[tuple, tuple]:
    lo = 3
    hi = max(lo, 2 * spec.avg_sentence_length - lo)
    length = lo + rng.randint(hi - lo + 1)
    tokens: list[str] = []
    tags: list[str] = []
    while len(tokens) < length:
        remaining = length - len(tokens)
        if rng.random() < ENTITY_START_PROB:
            label = spec.label_types[rng.randint(len(spec.label_types))]
            phrase_len = 1 + rng.randint(min(MAX_PHRASE_LEN, remaining))
            pool = vocab.entity_words[label]
            for k in range(phrase_len):
                if rng.random() < spec.noise_rate:
                    tokens.append(vocab.ambiguous[rng.randint(len(vocab.ambiguous))])
                else:
                    tokens.append(pool[rng.randint(len(pool))])
                tags.append(f"B-{label}" if k == 0 else f"I-{label}")
        else:
            if rng.random() < spec.noise_rate:
                tokens.append(vocab.ambiguous[rng.randint(len(vocab.ambiguous))])
            else:
                tokens.append(vocab.filler[rng.randint(len(vocab.filler))])
            tags.append("O")
    return tuple(tokens), tuple(tags)


def _token_sentence(spec: TaskSpec, vocab: TaskVocab, rng: Rng) -> tuple[tuple, tuple]:
    lo = 3
    hi = max(lo, 2 * spec.avg_sentence_length - lo)
    length = lo + rng.randint(hi - lo + 1)
    all_labels = tuple(spec.label_types) + ("C0", "C1", "C2", "C3")
    word_label: list[tuple[str, str]] = []
    for _ in range(length):
        if rng.random() < spec.noise_rate:
            w = vocab.ambiguous[rng.randint(len(vocab.ambiguous))]
            word_label.append((w, all_labels[rng.randint(len(all_labels))]))
        elif rng.random() < 0.5:
            t = spec.label_types[rng.randint(len(spec.label_types))]
            pool = vocab.entity_words[t]
            word_label.append((pool[rng.randint(len(pool))], t))
        else:
            w = vocab.filler[rng.randint(len(vocab.filler))]
            word_label.append((w, vocab.filler_classes[w]))
    tokens, tags = zip(*word_label)
    return tokens, tags


def generate(spec: TaskSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Produce disjoint train/dev/test corpora sharing one lexicon."""
    spec.validate()
    vocab = task_vocabulary(spec)
    rng = Rng(spec.seed)
    make = _span_sentence if spec.task_kind == SPAN_TASK else _token_sentence
    seen: set[tuple[str, ...]] = set()
    splits = []
    for size in (spec.train_size, spec.dev_size, spec.test_size):
        sentences = []
        while len(sentences) < size:
            tokens, tags = make(spec, vocab, rng)
            if tokens in seen:
                continue
            seen.add(tokens)
            sentences.append((tokens, tags))
        splits.append(
            Corpus(
                sentences=sentences,
                scheme=TagScheme.BIO,
                label_types=spec.label_types,
                task_kind=spec.task_kind,
            )
        )
    return splits[0], splits[1], splits[2]


# -- CoNLL column format ---------------------------------------------------

_VALID_PREFIXES = frozenset("BIES")


def read_conll(
    path: str,
    token_column: int = 0,
    tag_column: int = -1,
    validate_scheme: bool = True,
) -> Corpus:
    """Parse whitespace-separated columns; blank line ends a sentence.

    Lines starting with ``-DOCSTART-`` are skipped. The scheme is
    inferred: IOBES if any E-/S- prefix occurs, BIO otherwise.
    """
    sentences: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
    tokens: list[str] = []
    tags: list[str] = []
    label_types: set[str] = set()
    saw_iobes = False
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                if tokens:
                    sentences.append((tuple(tokens), tuple(tags)))
                    tokens, tags = [], []
                continue
            if line.startswith("-DOCSTART-"):
                continue
            parts = line.split()
            n_cols = len(parts)
            for col in (token_column, tag_column):
                if not -n_cols <= col < n_cols:
                    raise ParseError(
                        f"{path}:{lineno}: expected a column at index {col}, got {n_cols} columns"
                    )
            tag = parts[tag_column]
            if validate_scheme and tag != "O":
                parsed = split_tag(tag)
                if parsed is None or parsed[0] not in _VALID_PREFIXES:
                    raise ParseError(f"{path}:{lineno}: invalid tag prefix in {tag!r}")
                if parsed[0] in ("E", "S"):
                    saw_iobes = True
                label_types.add(parsed[1])
            elif not validate_scheme and tag != "O":
                label_types.add(tag)
            tokens.append(parts[token_column])
            tags.append(tag)
    if tokens:
        sentences.append((tuple(tokens), tuple(tags)))
    return Corpus(
        sentences=sentences,
        scheme=TagScheme.IOBES if saw_iobes else TagScheme.BIO,
        label_types=tuple(sorted(label_types)),
        task_kind=SPAN_TASK if validate_scheme else TOKEN_TASK,
    )


def write_conll(corpus: Corpus, path: str) -> None:
    """Canonical two-column output: token space tag, blank line between
    sentences, trailing newline."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for idx, (tokens, tags) in enumerate(corpus.sentences):
                if idx:
                    fh.write("\n")
                for tok, tag in zip(tokens, tags):
                    fh.write(f"{tok} {tag}\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# -- embedding tables -------------------------------------------------------

@dataclass
class EmbeddingTable:
    words: tuple[str, ...]
    vectors: np.ndarray  # [len(words), dim]

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def as_dict(self) -> dict[str, np.ndarray]:
        return {w: self.vectors[i] for i, w in enumerate(self.words)}


def make_embeddings(vocab: TaskVocab, dim: int, quality: str, seed: int) -> EmbeddingTable:
    """Synthetic word vectors.

    ``random`` draws every vector i.i.d. uniform; ``informative``
    clusters each label type's lexicon words around a shared centroid
    (radius = 0.25 of the mean inter-centroid distance) while filler
    and ambiguous words stay dispersed.
    """
    if dim < 1:
        raise InvalidInputError("embedding dim must be >= 1")
    if quality not in ("random", "informative"):
        raise InvalidInputError(f"unknown embedding quality {quality!r}")
    rng = Rng(seed)
    n = len(vocab.words)
    if quality == "random":
        return EmbeddingTable(vocab.words, rng.uniform_array((n, dim), -0.5, 0.5))

    vectors = rng.uniform_array((n, dim), -1.0, 1.0)
    index = {w: i for i, w in enumerate(vocab.words)}
    types = sorted(vocab.entity_words)
    centroids = rng.uniform_array((len(types), dim), -1.0, 1.0)
    if len(types) > 1:
        dists = [
            float(np.linalg.norm(centroids[i] - centroids[j]))
            for i in range(len(types))
            for j in range(i + 1, len(types))
        ]
        radius = INFORMATIVE_RADIUS_FRACTION * (sum(dists) / len(dists))
    else:
        radius = INFORMATIVE_RADIUS_FRACTION
    for t_idx, t in enumerate(types):
        for w in vocab.entity_words[t]:
            vectors[index[w]] = centroids[t_idx] + rng.uniform_array((dim,), -radius, radius)
    return EmbeddingTable(vocab.words, vectors)


def write_embeddings(table: EmbeddingTable, path: str) -> None:
    """Text format: first line "<count> <dim>", then one word per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.words)} {table.dim}\n")
        for i, w in enumerate(table.words):
            vals = " ".join(repr(float(v)) for v in table.vectors[i])
            fh.write(f"{w} {vals}\n")


def read_embeddings(path: str) -> EmbeddingTable:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError(f"{path}:1: expected '<count> <dim>' header")
        count, dim = int(header[0]), int(header[1])
        words: list[str] = []
        vectors = np.empty((count, dim))
        for i in range(count):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise ParseError(f"{path}:{i + 2}: expected word plus {dim} values")
            words.append(parts[0])
            vectors[i] = [float(v) for v in parts[1:]]
    return EmbeddingTable(tuple(words), vectors)


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
