"""Model assembly, the training loop, and per-run records.

A NetworkConfig fixes one point in the design space: embeddings,
character encoder, stack depth and widths, classifier head, dropout,
optimizer, gradient treatment, tagging scheme, batch size, and seed.
(config, seed, data) fully determines every recorded score; the seed
feeds weight init, epoch shuffling, and dropout masks and nothing else.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dataset import Corpus, EmbeddingTable, SPAN_TASK, TOKEN_TASK
from .errors import ConfigurationError, InvalidInputError
from .nn.charenc import CharCnnEncoder, CharLstmEncoder
from .nn.checkpoint import restore_params, save_params
from .nn.crf import crf_nll_batch, effective_transitions, viterbi
from .nn.embed import Embedding
from .nn.functional import softmax_nll_batch
from .nn.lstm import BiLstmStack
from .nn.params import Parameter, clip_gradients, glorot_init, normalize_gradients, zero_grads
from .optim import OPTIMIZER_KINDS, build_optimizer
from .rng import Rng
from .scorer import corpus_counts, corpus_prf, token_accuracy
from .tagcodec import TagScheme, convert_scheme

CHAR_REPS = ("none", "cnn", "lstm")
CLASSIFIERS = ("softmax", "crf")
DROPOUT_KINDS = ("none", "naive", "variational")
GRAD_TREATMENTS = ("none", "clip", "normalize")

PAD_WORD = "<pad>"
UNK_WORD = "<unk>"
PAD_CHAR = "<pad>"
UNK_CHAR = "<unk>"

EVAL_BATCH = 64


@dataclass(frozen=True)
class NetworkConfig:
    """One hyperparameter point.

    ``validate`` checks structural constraints; membership in the
    evaluated candidate sets (units in {25..125}, batches in {1..64},
    and so on) is the config-space sampler's contract, so deliberately
    tiny models remain expressible for smoke experiments.
    """

    embedding_source: str = "random"
    embedding_dim: int = 50
    char_rep: str = "none"
    layers: int = 1
    units_per_layer: tuple[int, ...] = (100,)
    classifier: str = "crf"
    dropout_kind: str = "variational"
    dropout_rate: float = 0.25
    optimizer: str = "nadam"
    learning_rate: float | None = None
    grad_treatment: str = "normalize"
    grad_threshold: float = 1.0
    scheme: str = "BIO"
    batch_size: int = 16
    max_epochs: int = 100
    patience: int = 10
    seed: int = 1

    def validate(self) -> None:
        if self.char_rep not in CHAR_REPS:
            raise ConfigurationError(f"char_rep must be one of {CHAR_REPS}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigurationError(f"classifier must be one of {CLASSIFIERS}")
        if self.dropout_kind not in DROPOUT_KINDS:
            raise ConfigurationError(f"dropout_kind must be one of {DROPOUT_KINDS}")
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ConfigurationError(f"optimizer must be one of {OPTIMIZER_KINDS}")
        if self.grad_treatment not in GRAD_TREATMENTS:
            raise ConfigurationError(f"grad_treatment must be one of {GRAD_TREATMENTS}")
        if self.scheme not in ("BIO", "IOBES"):
            raise ConfigurationError("scheme must be BIO or IOBES")
        if not 1 <= self.layers <= 3:
            raise ConfigurationError("layers must be 1-3")
        if len(self.units_per_layer) != self.layers:
            raise ConfigurationError("units_per_layer length must equal layers")
        if any(u < 1 for u in self.units_per_layer):
            raise ConfigurationError("unit counts must be positive")
        if self.embedding_dim < 1:
            raise ConfigurationError("embedding_dim must be >= 1")
        if self.dropout_kind == "none":
            if self.dropout_rate != 0.0:
                raise ConfigurationError("dropout_rate must be 0 when dropout is off")
        elif not 0.0 < self.dropout_rate < 1.0:
            raise ConfigurationError("dropout_rate must be in (0, 1)")
        if self.grad_treatment != "none" and self.grad_threshold <= 0:
            raise ConfigurationError("grad_threshold must be positive")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ConfigurationError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ConfigurationError("patience must be >= 1")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be positive")

    def canonical_dict(self) -> dict:
        """Every field except the seed, in fixed order (feeds the hash)."""
        d = asdict(self)
        d.pop("seed")
        d["units_per_layer"] = list(self.units_per_layer)
        return {k: d[k] for k in sorted(d)}

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["units_per_layer"] = list(self.units_per_layer)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        d = dict(d)
        d["units_per_layer"] = tuple(d["units_per_layer"])
        return cls(**d)

    def with_seed(self, seed: int) -> "NetworkConfig":
        return replace(self, seed=seed)


@dataclass
class RunRecord:
    config_hash: str
    seed: int
    dev_scores: list[float]
    test_scores: list[float]
    best_dev_epoch: int
    final_test_score: float
    epochs_to_best: int
    diverged: bool = False
    wall_time: float = 0.0  # in-memory only; excluded from persisted stores
    test_sentence_counts: list[tuple[int, int, int]] | None = None

    def persistable(self) -> dict:
        """Deterministic fields only (drops wall_time)."""
        out = {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "dev_scores": self.dev_scores,
            "test_scores": self.test_scores,
            "best_dev_epoch": self.best_dev_epoch,
            "final_test_score": self.final_test_score,
            "epochs_to_best": self.epochs_to_best,
            "diverged": self.diverged,
        }
        if self.test_sentence_counts is not None:
            out["test_sentence_counts"] = [list(c) for c in self.test_sentence_counts]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        counts = d.get("test_sentence_counts")
        return cls(
            config_hash=d["config_hash"],
            seed=d["seed"],
            dev_scores=list(d["dev_scores"]),
            test_scores=list(d["test_scores"]),
            best_dev_epoch=d["best_dev_epoch"],
            final_test_score=d["final_test_score"],
            epochs_to_best=d["epochs_to_best"],
            diverged=d.get("diverged", False),
            test_sentence_counts=[tuple(c) for c in counts] if counts is not None else None,
        )


@dataclass
class Vocabularies:
    word_to_id: dict[str, int]
    char_to_id: dict[str, int]
    tag_to_id: dict[str, int]
    id_to_tag: tuple[str, ...]
    scheme: TagScheme
    task_kind: str


def build_vocabularies(train: Corpus, scheme: TagScheme) -> Vocabularies:
    """Deterministic lookup tables from the training split."""
    if len(train) == 0:
        raise InvalidInputError("training corpus is empty")
    words = sorted({tok for tokens, _ in train.sentences for tok in tokens})
    chars = sorted({ch for tokens, _ in train.sentences for tok in tokens for ch in tok})
    word_to_id = {PAD_WORD: 0, UNK_WORD: 1}
    for w in words:
        word_to_id[w] = len(word_to_id)
    char_to_id = {PAD_CHAR: 0, UNK_CHAR: 1}
    for c in chars:
        char_to_id[c] = len(char_to_id)

    if train.task_kind == SPAN_TASK:
        tags = ["O"]
        prefixes = ("B", "I") if scheme is TagScheme.BIO else ("B", "I", "E", "S")
        for t in sorted(train.label_types):
            for p in prefixes:
                tags.append(f"{p}-{t}")
    else:
        tags = sorted({tag for _, ts in train.sentences for tag in ts})
    tag_to_id = {t: i for i, t in enumerate(tags)}
    return Vocabularies(
        word_to_id=word_to_id,
        char_to_id=char_to_id,
        tag_to_id=tag_to_id,
        id_to_tag=tuple(tags),
        scheme=scheme,
        task_kind=train.task_kind,
    )


class Model:
    """Word embeddings + optional char encoder + BiLSTM stack + head."""

    def __init__(
        self,
        config: NetworkConfig,
        vocabs: Vocabularies,
        rng: Rng,
        embeddings: EmbeddingTable | None = None,
    ):
        config.validate()
        self.config = config
        self.vocabs = vocabs
        self.n_labels = len(vocabs.id_to_tag)

        n_words = len(vocabs.word_to_id)
        table = np.empty((n_words, config.embedding_dim))
        lookup = embeddings.as_dict() if embeddings is not None else {}
        if embeddings is not None and embeddings.dim != config.embedding_dim:
            raise ConfigurationError(
                f"embedding table dim {embeddings.dim} != config dim {config.embedding_dim}"
            )
        for word, idx in vocabs.word_to_id.items():
            vec = lookup.get(word)
            if vec is None:
                vec = rng.uniform_array((config.embedding_dim,), -0.5, 0.5)
            table[idx] = vec
        self.word_emb = Embedding("word_emb", table)

        if config.char_rep == "cnn":
            self.char_enc = CharCnnEncoder("char_cnn", len(vocabs.char_to_id), 0, rng)
        elif config.char_rep == "lstm":
            self.char_enc = CharLstmEncoder("char_lstm", len(vocabs.char_to_id), rng)
        else:
            self.char_enc = None
        char_out = self.char_enc.output_dim if self.char_enc else 0

        self.stack = BiLstmStack("stack", config.embedding_dim + char_out, config.units_per_layer, rng)
        self.proj_w = Parameter("head.w", glorot_init((self.stack.output_dim, self.n_labels), rng))
        self.proj_b = Parameter("head.b", np.zeros(self.n_labels))
        if config.classifier == "crf":
            self.transitions = Parameter(
                "head.transitions", glorot_init((self.n_labels + 2, self.n_labels + 2), rng)
            )
        else:
            self.transitions = None

    def params(self) -> list[Parameter]:
        out = self.word_emb.params()
        if self.char_enc:
            out += self.char_enc.params()
        out += self.stack.params()
        out += [self.proj_w, self.proj_b]
        if self.transitions is not None:
            out.append(self.transitions)
        return out

    def parameter_count(self) -> int:
        return sum(p.value.size for p in self.params())

    # -- batching ----------------------------------------------------------

    def _encode_batch(self, sentences: list[tuple[str, ...]], tags: list[tuple[str, ...]] | None):
        b_sz = len(sentences)
        t_max = max(len(s) for s in sentences)
        word_ids = np.zeros((b_sz, t_max), dtype=np.int64)
        tmask = np.zeros((b_sz, t_max))
        gold = np.zeros((b_sz, t_max), dtype=np.int64)
        unk = self.vocabs.word_to_id[UNK_WORD]
        for i, sent in enumerate(sentences):
            if len(sent) == 0:
                raise InvalidInputError(f"sentence {i} is empty")
            for t, tok in enumerate(sent):
                word_ids[i, t] = self.vocabs.word_to_id.get(tok, unk)
            tmask[i, : len(sent)] = 1.0
            if tags is not None:
                for t, tag in enumerate(tags[i]):
                    gold[i, t] = self.vocabs.tag_to_id[tag]
        char_pack = None
        if self.char_enc is not None:
            b_idx, t_idx, words = [], [], []
            for i, sent in enumerate(sentences):
                for t, tok in enumerate(sent):
                    b_idx.append(i)
                    t_idx.append(t)
                    words.append(tok)
            c_max = max(len(w) for w in words)
            char_ids = np.zeros((len(words), c_max), dtype=np.int64)
            char_mask = np.zeros((len(words), c_max))
            unk_c = self.vocabs.char_to_id[UNK_CHAR]
            for wi, w in enumerate(words):
                for ci, ch in enumerate(w):
                    char_ids[wi, ci] = self.vocabs.char_to_id.get(ch, unk_c)
                char_mask[wi, : len(w)] = 1.0
            char_pack = (np.array(b_idx), np.array(t_idx), char_ids, char_mask)
        return word_ids, tmask, gold, char_pack

    def _input_features(self, word_ids, tmask, char_pack):
        x_word = self.word_emb.forward(word_ids)
        if self.char_enc is None:
            return x_word, None
        b_idx, t_idx, char_ids, char_mask = char_pack
        char_vecs, char_cache = self.char_enc.forward(char_ids, char_mask)
        x = np.zeros((x_word.shape[0], x_word.shape[1], x_word.shape[2] + self.char_enc.output_dim))
        x[:, :, : x_word.shape[2]] = x_word
        x[b_idx, t_idx, x_word.shape[2] :] = char_vecs
        return x, char_cache

    def forward_loss(self, sentences, tags, train: bool, dropout_rng: Rng | None) -> float:
        """One forward/backward pass; accumulates into parameter grads."""
        word_ids, tmask, gold, char_pack = self._encode_batch(sentences, tags)
        x, char_cache = self._input_features(word_ids, tmask, char_pack)
        h, stack_cache = self.stack.forward(
            x,
            tmask,
            train=train,
            dropout_kind=self.config.dropout_kind,
            dropout_rate=self.config.dropout_rate,
            rng=dropout_rng,
        )
        scores = h @ self.proj_w.value + self.proj_b.value
        if self.transitions is None:
            loss, d_scores = softmax_nll_batch(scores, gold, tmask)
        else:
            trans = effective_transitions(self.transitions.value)
            loss, d_scores, d_trans = crf_nll_batch(scores, trans, gold, tmask)
            self.transitions.grad += d_trans
        flat_h = h.reshape(-1, h.shape[2])
        flat_ds = d_scores.reshape(-1, self.n_labels)
        self.proj_w.grad += flat_h.T @ flat_ds
        self.proj_b.grad += flat_ds.sum(axis=0)
        d_h = d_scores @ self.proj_w.value.T
        d_x = self.stack.backward(d_h, stack_cache)
        emb_dim = self.config.embedding_dim
        self.word_emb.backward(word_ids, d_x[:, :, :emb_dim], tmask)
        if self.char_enc is not None:
            b_idx, t_idx = char_pack[0], char_pack[1]
            self.char_enc.backward(d_x[b_idx, t_idx, emb_dim:], char_cache)
        return loss

    def predict(self, sentences: list[tuple[str, ...]], batch_size: int = EVAL_BATCH) -> list[list[str]]:
        """Eval-mode tags for raw sentences (argmax or Viterbi)."""
        out: list[list[str]] = []
        for start in range(0, len(sentences), batch_size):
            chunk = list(sentences[start : start + batch_size])
            word_ids, tmask, _, char_pack = self._encode_batch(chunk, None)
            x, _ = self._input_features(word_ids, tmask, char_pack)
            h, _ = self.stack.forward(x, tmask, train=False)
            scores = h @ self.proj_w.value + self.proj_b.value
            if self.transitions is None:
                ids = scores.argmax(axis=2)
                for i, sent in enumerate(chunk):
                    out.append([self.vocabs.id_to_tag[j] for j in ids[i, : len(sent)]])
            else:
                trans = effective_transitions(self.transitions.value)
                for i, sent in enumerate(chunk):
                    path = viterbi(scores[i, : len(sent)], trans)
                    out.append([self.vocabs.id_to_tag[j] for j in path])
        return out

    def save_checkpoint(self, path: str) -> None:
        save_params(path, self.params())

    def load_checkpoint(self, path: str) -> None:
        from .nn.checkpoint import load_params

        restore_params(self.params(), load_params(path))


def build_model(
    config: NetworkConfig,
    vocabs: Vocabularies,
    rng: Rng,
    embeddings: EmbeddingTable | None = None,
) -> Model:
    return Model(config, vocabs, rng, embeddings)


@dataclass
class DataBundle:
    """A task's three splits plus any synthetic embedding tables."""

    train: Corpus
    dev: Corpus
    test: Corpus
    embeddings: dict[str, EmbeddingTable] = field(default_factory=dict)

    def converted(self, scheme: TagScheme) -> "DataBundle":
        if self.train.task_kind != SPAN_TASK or self.train.scheme is scheme:
            return self
        def conv(corpus: Corpus) -> Corpus:
            return Corpus(
                sentences=[
                    (tokens, tuple(convert_scheme(list(tags), corpus.scheme, scheme)))
                    for tokens, tags in corpus.sentences
                ],
                scheme=scheme,
                label_types=corpus.label_types,
                task_kind=corpus.task_kind,
            )
        return DataBundle(conv(self.train), conv(self.dev), conv(self.test), self.embeddings)


def evaluate(model: Model, corpus: Corpus) -> tuple[float, list]:
    """Full-corpus score: segment F1 for span tasks, else accuracy.

    Returns (score, per-sentence MatchCounts for span tasks else [])."""
    predictions = model.predict(corpus.tokens())
    gold = [list(t) for t in corpus.tags()]
    if corpus.task_kind == SPAN_TASK:
        counts = corpus_counts(gold, predictions, corpus.scheme)
        return corpus_prf(counts).f1, counts
    return token_accuracy(gold, predictions), []


def train(
    model: Model,
    train_set: Corpus,
    dev_set: Corpus,
    test_set: Corpus,
    config: NetworkConfig,
    run_rng: Rng,
    collect_test_counts: bool = False,
) -> RunRecord:
    """Dev-selected training: shuffle, batch, grad-treat, step, evaluate.

    Early-stops after ``patience`` epochs without a dev improvement; a
    non-finite loss aborts the run and flags it diverged.
    """
    if min(len(train_set), len(dev_set), len(test_set)) == 0:
        raise InvalidInputError("datasets must be nonempty")
    started = time.perf_counter()
    shuffle_rng = run_rng.child()
    dropout_rng = run_rng.child()
    params = model.params()
    optimizer = build_optimizer(config.optimizer, params, config.learning_rate)

    sentences = train_set.tokens()
    tags = train_set.tags()
    order = list(range(len(sentences)))

    dev_scores: list[float] = []
    test_scores: list[float] = []
    counts_per_epoch: list[list] = []
    best_epoch = -1
    best_dev = -1.0
    diverged = False

    for epoch in range(config.max_epochs):
        shuffle_rng.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            zero_grads(params)
            loss = model.forward_loss(
                [sentences[i] for i in batch_idx],
                [tags[i] for i in batch_idx],
                train=True,
                dropout_rng=dropout_rng,
            )
            if not np.isfinite(loss):
                diverged = True
                break
            if config.grad_treatment == "clip":
                clip_gradients(params, config.grad_threshold)
            elif config.grad_treatment == "normalize":
                normalize_gradients(params, config.grad_threshold)
            optimizer.step()
        if diverged:
            break
        dev_score, _ = evaluate(model, dev_set)
        test_score, test_counts = evaluate(model, test_set)
        if not (np.isfinite(dev_score) and np.isfinite(test_score)):
            diverged = True
            break
        dev_scores.append(dev_score)
        test_scores.append(test_score)
        counts_per_epoch.append(test_counts)
        if dev_score > best_dev:
            best_dev = dev_score
            best_epoch = epoch
        elif epoch - best_epoch >= config.patience:
            break

    final_test = test_scores[best_epoch] if best_epoch >= 0 else 0.0
    record = RunRecord(
        config_hash=config.config_hash(),
        seed=config.seed,
        dev_scores=dev_scores,
        test_scores=test_scores,
        best_dev_epoch=best_epoch,
        final_test_score=final_test,
        epochs_to_best=best_epoch + 1,
        diverged=diverged,
        wall_time=time.perf_counter() - started,
    )
    if collect_test_counts and best_epoch >= 0 and counts_per_epoch[best_epoch]:
        record.test_sentence_counts = [
            (c.tp, c.fp, c.fn) for c in counts_per_epoch[best_epoch]
        ]
    return record


def run_training(
    config: NetworkConfig, bundle: DataBundle, collect_test_counts: bool = False
) -> RunRecord:
    """Build everything from (config, bundle) and train once."""
    config.validate()
    scheme = TagScheme(config.scheme)
    data = bundle.converted(scheme)
    rng = Rng(config.seed)
    vocabs = build_vocabularies(data.train, scheme)
    table = bundle.embeddings.get(config.embedding_source)
    if table is None and config.embedding_source != "random":
        raise ConfigurationError(f"unknown embedding source {config.embedding_source!r}")
    model = build_model(config, vocabs, rng.child(), table)
    return train(
        model,
        data.train,
        data.dev,
        data.test,
        config,
        rng,
        collect_test_counts=collect_test_counts,
    )
