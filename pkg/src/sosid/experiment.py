"""Utterance-duration and phonetic-content identification protocols.

Both protocols start from the same per-speaker preparation: all of a
speaker's sentences are concatenated in a seeded random order (silence
handling, if any, happened upstream; nothing is stripped here).

Duration protocol: for each training duration, the first ``train`` seconds
of the concatenation build the reference model; the remainder is cut into
consecutive test blocks of each test duration, capped per speaker. Every
block is scored against every speaker for every requested measure.

Phonetic protocol: training reuses the duration protocol's material
verbatim (same shuffle, same leading seconds). Tests come from the
remaining material only: phone kernels are widened, frames matching a
phoneme or class selector are pooled per speaker, and the pool is cut into
fixed one-second tests.

Reported metrics per cell: the global percentage of correct decisions over
all tests, and the unweighted mean over speakers of each speaker's own
percentage.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AlignmentError, ConfigurationError, InsufficientDataError
from .frontend import (
    FrontendConfig,
    extract_features,
    load_features_csv,
    load_wav,
)
from .gaussian import GaussianModel, factorize
from .identify import SpeakerRegistry, decisions_from_scores, score_matrix
from .measures import MEASURE_KINDS, SC_CONVENTIONS, SC_DECOMPOSITION
from .phonetic import (
    CLASS_ORDER,
    DEFAULT_POST_FRAMES,
    DEFAULT_PRE_FRAMES,
    PhonemeClassTaxonomy,
    assemble_tests,
    default_taxonomy,
    expand_kernels,
    parse_alignment,
    select_frames,
)

FRAMES_PER_SECOND = 100  # 10 ms frame period

# Stream tag separating the sentence-shuffle RNG from data-generation RNGs
# that may share the same corpus seed.
_SHUFFLE_STREAM = 2


@dataclass(frozen=True)
class SentenceRef:
    """Paths of one sentence's data; features or audio, plus alignment."""

    features: str | None = None
    audio: str | None = None
    alignment: str | None = None

    def __post_init__(self):
        if (self.features is None) == (self.audio is None):
            raise ConfigurationError(
                "each sentence needs exactly one of 'features' or 'audio'"
            )


@dataclass(frozen=True)
class CorpusManifest:
    """Paths and seed describing an experiment corpus."""

    speakers: tuple
    seed: int

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")
        ids = [speaker_id for speaker_id, _ in self.speakers]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate speaker ids in manifest")


def load_manifest(path) -> CorpusManifest:
    """Read a manifest JSON file; relative paths stay relative here."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    speakers = []
    for entry in doc["speakers"]:
        sentences = tuple(
            SentenceRef(
                features=item.get("features"),
                audio=item.get("audio"),
                alignment=item.get("alignment"),
            )
            for item in entry["sentences"]
        )
        speakers.append((entry["id"], sentences))
    return CorpusManifest(speakers=tuple(speakers), seed=int(doc.get("seed", 0)))


@dataclass(frozen=True)
class LoadedSentence:
    """One sentence's feature matrix and optional alignment track."""

    frames: np.ndarray
    alignment: object = None


@dataclass(frozen=True)
class LoadedCorpus:
    """Fully loaded corpus: (speaker_id, sentences) pairs plus the seed."""

    speakers: tuple
    seed: int


def load_corpus(
    manifest,
    frontend_config: FrontendConfig | None = None,
    base_dir=None,
) -> LoadedCorpus:
    """Materialize a manifest: read feature CSVs or extract from WAVs."""
    if isinstance(manifest, (str, Path)):
        base_dir = Path(manifest).parent if base_dir is None else Path(base_dir)
        manifest = load_manifest(manifest)
    base = Path(base_dir) if base_dir is not None else Path(".")
    cfg = frontend_config if frontend_config is not None else FrontendConfig()
    speakers = []
    for speaker_id, refs in manifest.speakers:
        sentences = []
        for ref in refs:
            if ref.features is not None:
                frames = load_features_csv(base / ref.features).vectors
            else:
                frames = extract_features(load_wav(base / ref.audio), cfg).vectors
            alignment = (
                parse_alignment(base / ref.alignment) if ref.alignment else None
            )
            sentences.append(LoadedSentence(frames=frames, alignment=alignment))
        speakers.append((speaker_id, tuple(sentences)))
    return LoadedCorpus(speakers=tuple(speakers), seed=manifest.seed)


@dataclass(frozen=True)
class DurationProtocolConfig:
    """Grid of training and test durations, in seconds."""

    train_durations: tuple = (15.0, 10.0, 6.0, 3.0, 2.0)
    test_durations: tuple = (10.0, 6.0, 3.0, 2.0, 1.0)
    max_tests_per_speaker: int = 20
    measures: tuple = MEASURE_KINDS
    sc_convention: str = SC_DECOMPOSITION
    frames_per_second: int = FRAMES_PER_SECOND

    def __post_init__(self):
        if not self.train_durations or not self.test_durations:
            raise ConfigurationError("duration lists must be non-empty")
        if any(d <= 0 for d in self.train_durations + self.test_durations):
            raise ConfigurationError("durations must be positive")
        if self.max_tests_per_speaker < 1:
            raise ConfigurationError("max_tests_per_speaker must be >= 1")
        unknown = set(self.measures) - set(MEASURE_KINDS)
        if unknown:
            raise ConfigurationError(f"unknown measures: {sorted(unknown)}")
        if self.sc_convention not in SC_CONVENTIONS:
            raise ConfigurationError(f"unknown mu_sc convention {self.sc_convention!r}")
        if self.frames_per_second < 1:
            raise ConfigurationError("frames_per_second must be >= 1")

    def digest(self) -> str:
        payload = json.dumps(
            {
                "train": list(self.train_durations),
                "test": list(self.test_durations),
                "cap": self.max_tests_per_speaker,
                "measures": list(self.measures),
                "sc": self.sc_convention,
                "fps": self.frames_per_second,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class ReportCell:
    """Metrics of one experiment cell."""

    global_accuracy: float
    per_speaker_mean_accuracy: float
    n_tests: int
    low_count: bool = False


@dataclass
class ExperimentReport:
    """Ordered cells keyed by coordinate tuples, plus run metadata."""

    axes: tuple
    cells: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


def compute_metrics(results) -> tuple:
    """(global %, per-speaker-mean %) from (speaker_id, correct) pairs."""
    results = list(results)
    if not results:
        raise ValueError("cannot compute metrics of an empty result list")
    per_speaker: dict[str, list] = {}
    for speaker_id, correct in results:
        per_speaker.setdefault(speaker_id, []).append(bool(correct))
    global_accuracy = 100.0 * sum(c for _, c in results) / len(results)
    speaker_means = [100.0 * sum(v) / len(v) for v in per_speaker.values()]
    return global_accuracy, sum(speaker_means) / len(speaker_means)


def _speaker_streams(corpus: LoadedCorpus):
    """Seeded random concatenation of each speaker's sentences.

    Returns (speaker_id, concatenated frames, ordered (offset, sentence)
    pairs) triples; the same corpus seed always yields the same order, so
    the duration and phonetic protocols see identical training material.
    """
    streams = []
    for index, (speaker_id, sentences) in enumerate(corpus.speakers):
        rng = np.random.default_rng(
            np.random.SeedSequence([corpus.seed, _SHUFFLE_STREAM, index])
        )
        order = rng.permutation(len(sentences))
        placed = []
        offset = 0
        for sentence_index in order:
            sentence = sentences[sentence_index]
            placed.append((offset, sentence))
            offset += len(sentence.frames)
        concat = (
            np.concatenate([sentence.frames for _, sentence in placed])
            if placed
            else np.empty((0, 0))
        )
        streams.append((speaker_id, concat, placed))
    return streams


def _cell_from_results(results, min_tests: int | None = None) -> ReportCell:
    if not results:
        return ReportCell(0.0, 0.0, 0, low_count=min_tests is not None)
    global_acc, speaker_mean = compute_metrics(results)
    low = min_tests is not None and len(results) < min_tests
    return ReportCell(global_acc, speaker_mean, len(results), low_count=low)


def _ordered_measures(requested) -> tuple:
    return tuple(kind for kind in MEASURE_KINDS if kind in requested)


def run_duration_experiment(
    corpus, cfg: DurationProtocolConfig | None = None
) -> ExperimentReport:
    """Run the training-duration x test-duration grid over a corpus."""
    if not isinstance(corpus, LoadedCorpus):
        corpus = load_corpus(corpus)
    if cfg is None:
        cfg = DurationProtocolConfig()
    if len(corpus.speakers) < 2:
        raise InsufficientDataError("identification needs at least 2 speakers")

    fps = cfg.frames_per_second
    train_grid = sorted(set(cfg.train_durations), reverse=True)
    test_grid = sorted(set(cfg.test_durations), reverse=True)
    kinds = _ordered_measures(cfg.measures)
    streams = _speaker_streams(corpus)

    max_train_f = round(max(train_grid) * fps)
    min_test_f = round(min(test_grid) * fps)
    for speaker_id, concat, _ in streams:
        needed = max_train_f + min_test_f
        if len(concat) < needed:
            raise InsufficientDataError(
                f"speaker {speaker_id}: {len(concat)} frames < {needed} needed "
                f"for {max(train_grid):g} s training plus one {min(test_grid):g} s test"
            )

    report = ExperimentReport(
        axes=("train_s", "test_s", "measure"),
        metadata={
            "protocol": "duration",
            "seed": corpus.seed,
            "config": cfg.digest(),
        },
    )
    for train_s in train_grid:
        train_f = round(train_s * fps)
        registry = SpeakerRegistry()
        for speaker_id, concat, _ in streams:
            registry.register(speaker_id, GaussianModel.from_frames(concat[:train_f]))
        for test_s in test_grid:
            test_f = round(test_s * fps)
            owners = []
            tests = []
            for speaker_id, concat, _ in streams:
                n_blocks = min(
                    cfg.max_tests_per_speaker, (len(concat) - train_f) // test_f
                )
                for block in range(n_blocks):
                    lo = train_f + block * test_f
                    assert lo >= train_f  # tests never reach into training frames
                    tests.append(GaussianModel.from_frames(concat[lo : lo + test_f]))
                    owners.append(speaker_id)
            facts = [factorize(model) for model in tests]
            for kind in kinds:
                if not tests:
                    report.cells[(train_s, test_s, kind)] = _cell_from_results([])
                    continue
                values = score_matrix(registry, tests, facts, kind, cfg.sc_convention)
                decisions = decisions_from_scores(registry, values)
                results = [
                    (owner, decision == owner)
                    for owner, decision in zip(owners, decisions)
                ]
                report.cells[(train_s, test_s, kind)] = _cell_from_results(results)
    return report


def run_phonetic_experiment(
    corpus,
    taxonomy: PhonemeClassTaxonomy | None = None,
    selectors=None,
    kinds=MEASURE_KINDS,
    train_seconds: float = 15.0,
    test_len: int = 100,
    min_tests: int = 40,
    sc_convention: str = SC_DECOMPOSITION,
    pre_frames: int = DEFAULT_PRE_FRAMES,
    post_frames: int = DEFAULT_POST_FRAMES,
    frames_per_second: int = FRAMES_PER_SECOND,
) -> ExperimentReport:
    """Score phonetically biased one-second tests against unbiased training."""
    if not isinstance(corpus, LoadedCorpus):
        corpus = load_corpus(corpus)
    if taxonomy is None:
        taxonomy = default_taxonomy()
    if selectors is None:
        selectors = CLASS_ORDER
    if len(corpus.speakers) < 2:
        raise InsufficientDataError("identification needs at least 2 speakers")
    if sc_convention not in SC_CONVENTIONS:
        raise ValueError(f"unknown mu_sc convention {sc_convention!r}")
    for selector in selectors:
        taxonomy.members(selector)  # fail fast on unknown selectors
    kinds = _ordered_measures(kinds)

    train_f = round(train_seconds * frames_per_second)
    streams = _speaker_streams(corpus)
    registry = SpeakerRegistry()
    segments_by_speaker = {}
    concat_by_speaker = {}
    for speaker_id, concat, placed in streams:
        if len(concat) < train_f + test_len:
            raise InsufficientDataError(
                f"speaker {speaker_id}: {len(concat)} frames < {train_f + test_len} "
                f"needed for {train_seconds:g} s training plus one test"
            )
        registry.register(speaker_id, GaussianModel.from_frames(concat[:train_f]))
        concat_by_speaker[speaker_id] = concat
        segments = []
        for offset, sentence in placed:
            length = len(sentence.frames)
            if offset + length <= train_f:
                continue  # training-only material
            if sentence.alignment is None:
                raise AlignmentError(
                    f"speaker {speaker_id}: a sentence in the test region has no alignment"
                )
            for label, start, end in expand_kernels(
                sentence.alignment, pre_frames, post_frames, track_len=length
            ):
                # segments straddling the training boundary are clipped so no
                # training frame can reach a test
                abs_start = max(start + offset, train_f)
                abs_end = end + offset
                if abs_start <= abs_end:
                    assert abs_start >= train_f
                    segments.append((label, abs_start, abs_end))
        segments_by_speaker[speaker_id] = segments

    config_payload = {
        "train_seconds": train_seconds,
        "test_len": test_len,
        "selectors": list(selectors),
        "kinds": list(kinds),
        "min_tests": min_tests,
        "sc": sc_convention,
        "pre": pre_frames,
        "post": post_frames,
        "fps": frames_per_second,
        "taxonomy": {k: sorted(v) for k, v in taxonomy.classes.items()},
    }
    digest = hashlib.sha256(
        json.dumps(config_payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()[:12]
    report = ExperimentReport(
        axes=("selector", "measure"),
        metadata={"protocol": "phonetic", "seed": corpus.seed, "config": digest},
    )
    for selector in selectors:
        owners = []
        tests = []
        for speaker_id, _, _ in streams:
            pooled = select_frames(
                concat_by_speaker[speaker_id],
                segments_by_speaker[speaker_id],
                selector,
                taxonomy,
            )
            assembly = assemble_tests(pooled, test_len, speaker_id, selector)
            for block in assembly.tests:
                tests.append(GaussianModel.from_frames(block))
                owners.append(speaker_id)
        facts = [factorize(model) for model in tests]
        for kind in kinds:
            if not tests:
                report.cells[(selector, kind)] = _cell_from_results([], min_tests)
                continue
            values = score_matrix(registry, tests, facts, kind, sc_convention)
            decisions = decisions_from_scores(registry, values)
            results = [
                (owner, decision == owner)
                for owner, decision in zip(owners, decisions)
            ]
            report.cells[(selector, kind)] = _cell_from_results(results, min_tests)
    return report


def _format_axis_value(value) -> str:
    if isinstance(value, float):
        return format(value, "g")
    return str(value)


def emit_report(report: ExperimentReport, fmt: str = "csv") -> str:
    """Serialize a report deterministically as CSV or markdown."""
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "markdown":
        return _emit_markdown(report)
    raise ValueError(f"unknown report format {fmt!r}")


def _emit_csv(report: ExperimentReport) -> str:
    out = io.StringIO()
    for key, value in report.metadata.items():
        out.write(f"# {key}: {value}\n")
    header = list(report.axes) + [
        "global_accuracy",
        "per_speaker_mean_accuracy",
        "n_tests",
        "low_count",
    ]
    out.write(",".join(header) + "\n")
    for coords, cell in report.cells.items():
        row = [_format_axis_value(v) for v in coords]
        row.append(format(cell.global_accuracy, ".17g"))
        row.append(format(cell.per_speaker_mean_accuracy, ".17g"))
        row.append(str(cell.n_tests))
        row.append("1" if cell.low_count else "0")
        out.write(",".join(row) + "\n")
    return out.getvalue()


def _emit_markdown(report: ExperimentReport) -> str:
    out = io.StringIO()
    meta = ", ".join(f"{key}: {value}" for key, value in report.metadata.items())
    if meta:
        out.write(meta + "\n\n")
    header = list(report.axes) + ["global %", "per-speaker mean %", "tests"]
    out.write("| " + " | ".join(header) + " |\n")
    out.write("|" + "|".join(" --- " for _ in header) + "|\n")
    flagged = False
    for coords, cell in report.cells.items():
        row = [_format_axis_value(v) for v in coords]
        row.append(f"{cell.global_accuracy:.1f}")
        row.append(f"{cell.per_speaker_mean_accuracy:.1f}")
        tests = f"({cell.n_tests})"
        if cell.low_count:
            tests += " *"
            flagged = True
        row.append(tests)
        out.write("| " + " | ".join(row) + " |\n")
    if flagged:
        out.write("\n\\* cell has fewer tests than the configured minimum\n")
    return out.getvalue()
