"""Closed-set identification against a registry of reference models.

The decision rule is the argmin of the chosen measure over all registered
speakers; every measure is zero at identity and positive elsewhere, so
smaller means more similar. Ties break to the earliest-registered speaker,
keeping results reproducible.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianModel, SpdFactorization, factorize
from .measures import MU_G, MU_GC, MU_SC, SC_DECOMPOSITION, SC_CONVENTIONS, evaluate


@dataclass(frozen=True)
class ScoreSheet:
    """Measure values of one test against every registered speaker."""

    test_id: str
    scores: tuple
    decision: str


class SpeakerRegistry:
    """Ordered collection of reference models, factorized once at registration."""

    def __init__(self, allow_loading: bool = True):
        self.allow_loading = allow_loading
        self._models: dict[str, GaussianModel] = {}
        self._facts: dict[str, SpdFactorization] = {}
        self._stacks = None

    @classmethod
    def from_models(cls, models, allow_loading: bool = True) -> "SpeakerRegistry":
        """Build a registry from an ordered id -> model mapping."""
        registry = cls(allow_loading=allow_loading)
        for speaker_id, model in models.items():
            registry.register(speaker_id, model)
        return registry

    def __len__(self) -> int:
        return len(self._models)

    @property
    def ids(self) -> tuple:
        return tuple(self._models)

    @property
    def dim(self) -> int | None:
        for model in self._models.values():
            return model.dim
        return None

    def model(self, speaker_id: str) -> GaussianModel:
        return self._models[speaker_id]

    def factorization(self, speaker_id: str) -> SpdFactorization:
        return self._facts[speaker_id]

    def register(self, speaker_id: str, model: GaussianModel) -> "SpeakerRegistry":
        if speaker_id in self._models:
            raise ValueError(f"speaker id {speaker_id!r} already registered")
        if self.dim is not None and model.dim != self.dim:
            raise ValueError(
                f"model dimension {model.dim} does not match registry dimension {self.dim}"
            )
        fact = factorize(model, allow_loading=self.allow_loading)
        self._models[speaker_id] = model
        self._facts[speaker_id] = fact
        self._stacks = None
        return self

    def _reference_stacks(self):
        """Stacked reference arrays reused by the batch scorer."""
        if self._stacks is None:
            models = list(self._models.values())
            facts = list(self._facts.values())
            self._stacks = {
                "covs": np.stack([m.cov for m in models]),
                "invs": np.stack([f.inverse for f in facts]),
                "log_dets": np.array([f.log_det for f in facts]),
                "means": np.stack([m.mean for m in models]),
                "counts": np.array([m.count for m in models], dtype=float),
            }
        return self._stacks


def identify(
    registry: SpeakerRegistry,
    test: GaussianModel,
    kind: str = MU_G,
    sc_convention: str = SC_DECOMPOSITION,
    test_id: str = "",
    test_fact: SpdFactorization | None = None,
) -> ScoreSheet:
    """Score a test model against every speaker and pick the argmin."""
    if len(registry) == 0:
        raise ValueError("cannot identify against an empty registry")
    if registry.dim != test.dim:
        raise ValueError(
            f"test dimension {test.dim} does not match registry dimension {registry.dim}"
        )
    if test_fact is None:
        test_fact = factorize(test, allow_loading=registry.allow_loading)
    scores = []
    for speaker_id in registry.ids:
        value = evaluate(
            kind,
            registry.model(speaker_id),
            test,
            ref_fact=registry.factorization(speaker_id),
            test_fact=test_fact,
            sc_convention=sc_convention,
        )
        scores.append((speaker_id, value))
    values = np.array([value for _, value in scores])
    decision = scores[int(np.argmin(values))][0]
    return ScoreSheet(test_id=test_id, scores=tuple(scores), decision=decision)


def score_matrix(
    registry: SpeakerRegistry,
    tests,
    test_facts,
    kind: str,
    sc_convention: str = SC_DECOMPOSITION,
) -> np.ndarray:
    """(n_tests, n_speakers) matrix of measure values, computed in bulk.

    Equivalent to looping :func:`identify` but vectorized; the experiment
    protocols score thousands of short tests per run.
    """
    if len(registry) == 0:
        raise ValueError("cannot score against an empty registry")
    if kind not in (MU_G, MU_GC, MU_SC):
        raise ValueError(f"unknown measure kind {kind!r}")
    if sc_convention not in SC_CONVENTIONS:
        raise ValueError(f"unknown mu_sc convention {sc_convention!r}")
    refs = registry._reference_stacks()
    p = registry.dim
    test_covs = np.stack([m.cov for m in tests])
    test_invs = np.stack([f.inverse for f in test_facts])
    test_log_dets = np.array([f.log_det for f in test_facts])
    test_means = np.stack([m.mean for m in tests])
    test_counts = np.array([m.count for m in tests], dtype=float)

    total = refs["counts"][None, :] + test_counts[:, None]
    a = refs["counts"][None, :] / total
    b = test_counts[:, None] / total
    tr1 = np.einsum("tij,rji->tr", test_covs, refs["invs"])
    tr2 = np.einsum("rij,tji->tr", refs["covs"], test_invs)
    ldr = test_log_dets[:, None] - refs["log_dets"][None, :]

    if kind == MU_SC:
        base = a * np.log(tr1) + b * np.log(tr2) - np.log(p)
        if sc_convention == SC_DECOMPOSITION:
            return base - (a - b) * ldr / p
        return base + (a - b) * ldr / p

    values = (a * tr1 + b * tr2 - (a - b) * ldr) / p - 1.0
    if kind == MU_G:
        diff = test_means[:, None, :] - refs["means"][None, :, :]
        quad_ref = np.einsum("trp,rpq,trq->tr", diff, refs["invs"], diff)
        quad_test = np.einsum("trp,tpq,trq->tr", diff, test_invs, diff)
        values = values + (a * quad_ref + b * quad_test) / p
    return values


def decisions_from_scores(registry: SpeakerRegistry, values: np.ndarray) -> list:
    """Argmin speaker id per row of a score matrix (first minimum wins)."""
    ids = registry.ids
    return [ids[int(i)] for i in np.argmin(values, axis=1)]


def score_sheets_csv(sheets) -> str:
    """CSV export: test_id, decision, then one score column per speaker."""
    sheets = list(sheets)
    out = io.StringIO()
    if not sheets:
        out.write("test_id,decision\n")
        return out.getvalue()
    speaker_ids = [speaker_id for speaker_id, _ in sheets[0].scores]
    out.write("test_id,decision," + ",".join(speaker_ids) + "\n")
    for sheet in sheets:
        row_ids = [speaker_id for speaker_id, _ in sheet.scores]
        if row_ids != speaker_ids:
            raise ValueError("score sheets come from different registries")
        values = ",".join(format(value, ".17g") for _, value in sheet.scores)
        out.write(f"{sheet.test_id},{sheet.decision},{values}\n")
    return out.getvalue()
