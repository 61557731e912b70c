"""Seeded synthetic Gaussian speakers for desk-scale verification.

Real corpora for the identification protocols are rarely at hand, so this
module fabricates speakers directly in feature space: each speaker is a
24-dimensional Gaussian (random SPD covariance, mean on a sphere whose
radius is the separation parameter) plus optional per-phoneme mean offsets
that give phonetically labeled material a class structure. Because the
true parameters are known, measure values between estimated models can be
checked against their closed-form counterparts.

Frames are independent by default. ``frame_correlation`` blends in an
AR(1) memory within each sentence; every frame keeps the exact marginal
law above, but consecutive frames stop being independent, which is what
makes one-second tests genuinely hard the way real speech is (a 100-frame
test then carries far fewer than 100 independent observations).

Everything is deterministic in the configured seed; speakers, sentences
and labels each draw from independently derived random streams.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.signal

from .errors import ConfigurationError
from .experiment import LoadedCorpus, LoadedSentence
from .frontend import SpectralFrames, save_features_csv
from .gaussian import GaussianModel
from .measures import SC_DECOMPOSITION, evaluate
from .phonetic import AlignmentTrack, default_taxonomy, format_alignment

DEFAULT_LABELS = tuple(sorted(default_taxonomy().classes["All"]))

# Stream tags under the corpus seed: 0 speaker parameters, 1 sentence data.
# (The experiment harness reserves tag 2 for its sentence shuffle.)
_SPEAKER_STREAM = 0
_SENTENCE_STREAM = 1


@dataclass(frozen=True)
class TrueSpeaker:
    """Known generating parameters of one synthetic speaker."""

    speaker_id: str
    base_mean: np.ndarray
    base_cov: np.ndarray
    class_offsets: dict


@dataclass(frozen=True)
class SynthCorpusConfig:
    """Shape and difficulty of a synthetic corpus."""

    n_speakers: int = 20
    dim: int = 24
    separation: float = 1.0
    class_spread: float = 0.0
    frame_correlation: float = 0.0
    frames_per_speaker: int = 3000
    sentence_len_frames: int = 300
    seed: int = 0
    labels: tuple = DEFAULT_LABELS
    min_run_frames: int = 4
    max_run_frames: int = 12

    def __post_init__(self):
        if self.n_speakers < 1 or self.dim < 1:
            raise ConfigurationError("n_speakers and dim must be >= 1")
        if self.separation < 0 or self.class_spread < 0:
            raise ConfigurationError("separation and class_spread must be >= 0")
        if not 0.0 <= self.frame_correlation < 1.0:
            raise ConfigurationError("frame_correlation must be in [0, 1)")
        if self.frames_per_speaker < 1 or self.sentence_len_frames < 1:
            raise ConfigurationError("frame counts must be >= 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be >= 0")
        if not self.labels:
            raise ConfigurationError("labels must be non-empty")
        if not (1 <= self.min_run_frames <= self.max_run_frames):
            raise ConfigurationError("need 1 <= min_run_frames <= max_run_frames")


def sample_speakers(cfg: SynthCorpusConfig) -> list:
    """Draw the true parameters of every speaker, deterministically."""
    speakers = []
    for index in range(cfg.n_speakers):
        rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed, _SPEAKER_STREAM, index])
        )
        direction = rng.standard_normal(cfg.dim)
        norm = float(np.linalg.norm(direction))
        mean = cfg.separation * direction / norm
        square = rng.standard_normal((cfg.dim, cfg.dim)) / math.sqrt(cfg.dim)
        cov = square @ square.T + np.eye(cfg.dim)
        cov *= cfg.dim / np.trace(cov)  # unit average variance
        offsets = {
            label: cfg.class_spread * rng.standard_normal(cfg.dim) / math.sqrt(cfg.dim)
            for label in cfg.labels
        }
        speakers.append(
            TrueSpeaker(
                speaker_id=f"spk{index:03d}",
                base_mean=mean,
                base_cov=cov,
                class_offsets=offsets,
            )
        )
    return speakers


def generate_labeled_frames(
    speaker: TrueSpeaker,
    label_sequence,
    rng: np.random.Generator,
    sentence_id: str = "s000",
    correlation: float = 0.0,
):
    """Draw one frame per label and the alignment track of the label runs.

    A frame labeled l comes from Normal(base_mean + class_offsets[l],
    base_cov); kernels in the returned track tile the frame sequence
    exactly, one per maximal run of equal labels. With correlation r > 0
    the deviations follow e_t = r e_{t-1} + sqrt(1 - r^2) L z_t, which
    leaves each frame's marginal law untouched.
    """
    labels = list(label_sequence)
    unknown = sorted(set(labels) - set(speaker.class_offsets))
    if unknown:
        raise ValueError(f"labels not in speaker's offset map: {unknown}")
    if not 0.0 <= correlation < 1.0:
        raise ValueError(f"correlation must be in [0, 1), got {correlation}")
    dim = speaker.base_mean.size
    factor = np.linalg.cholesky(speaker.base_cov)
    noise = rng.standard_normal((len(labels), dim)) @ factor.T
    if correlation > 0.0 and len(labels) > 1:
        # y[0] = noise[0], y[t] = corr * y[t-1] + sqrt(1-corr^2) * noise[t]
        driven = noise * math.sqrt(1.0 - correlation**2)
        driven[0] = noise[0]
        noise = scipy.signal.lfilter([1.0], [1.0, -correlation], driven, axis=0)
    offsets = np.stack([speaker.class_offsets[label] for label in labels])
    frames = noise + speaker.base_mean + offsets

    entries = []
    start = 0
    for position in range(1, len(labels) + 1):
        if position == len(labels) or labels[position] != labels[start]:
            entries.append((labels[start], start, position - 1))
            start = position
    track = AlignmentTrack(sentence_id=sentence_id, entries=tuple(entries))
    return SpectralFrames(vectors=frames), track


def true_measure(
    a: TrueSpeaker,
    b: TrueSpeaker,
    kind: str,
    sc_convention: str = SC_DECOMPOSITION,
) -> float:
    """Measure between the true parameters of two speakers, equal weights."""
    model_a = GaussianModel(mean=a.base_mean, cov=a.base_cov, count=1)
    model_b = GaussianModel(mean=b.base_mean, cov=b.base_cov, count=1)
    return evaluate(kind, model_a, model_b, sc_convention=sc_convention)


def _sentence_labels(length: int, cfg: SynthCorpusConfig, rng: np.random.Generator):
    labels = []
    while len(labels) < length:
        label = cfg.labels[int(rng.integers(len(cfg.labels)))]
        run = int(rng.integers(cfg.min_run_frames, cfg.max_run_frames + 1))
        labels.extend([label] * run)
    return labels[:length]


def make_corpus(cfg: SynthCorpusConfig) -> LoadedCorpus:
    """Generate a corpus in memory, ready for the experiment harness."""
    speakers = sample_speakers(cfg)
    n_sentences = math.ceil(cfg.frames_per_speaker / cfg.sentence_len_frames)
    corpus_speakers = []
    for index, speaker in enumerate(speakers):
        sentences = []
        remaining = cfg.frames_per_speaker
        for sentence_index in range(n_sentences):
            length = min(cfg.sentence_len_frames, remaining)
            remaining -= length
            rng = np.random.default_rng(
                np.random.SeedSequence(
                    [cfg.seed, _SENTENCE_STREAM, index, sentence_index]
                )
            )
            labels = _sentence_labels(length, cfg, rng)
            frames, track = generate_labeled_frames(
                speaker,
                labels,
                rng,
                sentence_id=f"{speaker.speaker_id}_s{sentence_index:03d}",
                correlation=cfg.frame_correlation,
            )
            sentences.append(LoadedSentence(frames=frames.vectors, alignment=track))
        corpus_speakers.append((speaker.speaker_id, tuple(sentences)))
    return LoadedCorpus(speakers=tuple(corpus_speakers), seed=cfg.seed)


def write_corpus(cfg: SynthCorpusConfig, out_dir) -> Path:
    """Write a synthetic corpus to disk and return the manifest path.

    Layout: one directory per speaker holding feature CSVs and alignment
    files, plus a manifest.json at the root that the harness and the CLI
    consume directly.
    """
    corpus = make_corpus(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"seed": cfg.seed, "speakers": []}
    for speaker_id, sentences in corpus.speakers:
        speaker_dir = out / speaker_id
        speaker_dir.mkdir(exist_ok=True)
        entries = []
        for sentence_index, sentence in enumerate(sentences):
            stem = f"s{sentence_index:03d}"
            save_features_csv(sentence.frames, speaker_dir / f"{stem}.csv")
            (speaker_dir / f"{stem}.ali").write_text(
                format_alignment(sentence.alignment), encoding="utf-8"
            )
            entries.append(
                {
                    "features": f"{speaker_id}/{stem}.csv",
                    "alignment": f"{speaker_id}/{stem}.ali",
                }
            )
        manifest["speakers"].append({"id": speaker_id, "sentences": entries})
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return manifest_path
