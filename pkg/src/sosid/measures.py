"""Symmetrized second-order dissimilarity measures between Gaussian models.

Three measures compare a reference model (X, xbar, M frames) with a test
model (Y, ybar, N frames). Each is a weighted sum of an asymmetric
statistic and its dual, with weights a = M/(M+N) and b = N/(M+N):

* ``mu_g``   likelihood-ratio style measure using covariances and means,
             (1/p)[a tr(YX^-1) + b tr(XY^-1) - (a-b) log(det Y / det X)]
             + (1/p)(ybar-xbar)^T [a X^-1 + b Y^-1] (ybar-xbar) - 1
* ``mu_gc``  the covariance-only part of ``mu_g`` (no mean term)
* ``mu_sc``  sphericity measure comparing the arithmetic and geometric
             means of the eigenvalues of Y X^-1 (and of the dual X Y^-1)

All three are zero when the models coincide and invariant under a common
affine change of feature basis.

``mu_sc`` ships with two conventions. The "decomposition" default is the
weighted sum of the one-sided sphericity statistics,

    a [log(tr(YX^-1)/p) - (1/p) log det(YX^-1)]
      + b [log(tr(XY^-1)/p) - (1/p) log det(XY^-1)],

which is non-negative by the AM-GM inequality. "as-printed" flips the sign
of the determinant term; the two agree whenever M = N and the flag exists
only so both readings can be compared on unbalanced counts.
"""

from __future__ import annotations

import math

from .gaussian import GaussianModel, SpdFactorization, factorize, trace_product

MU_G = "mu_g"
MU_GC = "mu_gc"
MU_SC = "mu_sc"
MEASURE_KINDS = (MU_G, MU_GC, MU_SC)

SC_DECOMPOSITION = "decomposition"
SC_AS_PRINTED = "as-printed"
SC_CONVENTIONS = (SC_DECOMPOSITION, SC_AS_PRINTED)


def _pair_terms(ref, test, ref_fact, test_fact):
    """Shared per-pair quantities: weights, traces, log det ratio."""
    if ref.dim != test.dim:
        raise ValueError(f"dimension mismatch: {ref.dim} vs {test.dim}")
    if ref_fact is None:
        ref_fact = factorize(ref)
    if test_fact is None:
        test_fact = factorize(test)
    total = ref.count + test.count
    a = ref.count / total
    b = test.count / total
    tr_test_refinv = trace_product(test.cov, ref_fact.inverse)
    tr_ref_testinv = trace_product(ref.cov, test_fact.inverse)
    logdet_ratio = test_fact.log_det - ref_fact.log_det
    return a, b, tr_test_refinv, tr_ref_testinv, logdet_ratio, ref_fact, test_fact


def mu_gc(
    ref: GaussianModel,
    test: GaussianModel,
    ref_fact: SpdFactorization | None = None,
    test_fact: SpdFactorization | None = None,
) -> float:
    """Covariance-only measure; zero iff the covariances are equal."""
    a, b, tr1, tr2, ldr, _, _ = _pair_terms(ref, test, ref_fact, test_fact)
    return (a * tr1 + b * tr2 - (a - b) * ldr) / ref.dim - 1.0


def mu_g(
    ref: GaussianModel,
    test: GaussianModel,
    ref_fact: SpdFactorization | None = None,
    test_fact: SpdFactorization | None = None,
) -> float:
    """Full measure: ``mu_gc`` plus the weighted mean-difference quadratic form."""
    a, b, tr1, tr2, ldr, ref_fact, test_fact = _pair_terms(ref, test, ref_fact, test_fact)
    diff = test.mean - ref.mean
    quad = a * float(diff @ ref_fact.inverse @ diff) + b * float(
        diff @ test_fact.inverse @ diff
    )
    return (a * tr1 + b * tr2 - (a - b) * ldr + quad) / ref.dim - 1.0


def mu_sc(
    ref: GaussianModel,
    test: GaussianModel,
    ref_fact: SpdFactorization | None = None,
    test_fact: SpdFactorization | None = None,
    convention: str = SC_DECOMPOSITION,
) -> float:
    """Sphericity measure; see module docstring for the two conventions."""
    if convention not in SC_CONVENTIONS:
        raise ValueError(f"unknown mu_sc convention {convention!r}")
    a, b, tr1, tr2, ldr, _, _ = _pair_terms(ref, test, ref_fact, test_fact)
    p = ref.dim
    base = a * math.log(tr1) + b * math.log(tr2) - math.log(p)
    if convention == SC_DECOMPOSITION:
        return base - (a - b) * ldr / p
    return base + (a - b) * ldr / p


def evaluate(
    kind: str,
    ref: GaussianModel,
    test: GaussianModel,
    ref_fact: SpdFactorization | None = None,
    test_fact: SpdFactorization | None = None,
    sc_convention: str = SC_DECOMPOSITION,
) -> float:
    """Dispatch on a measure name ("mu_g" | "mu_gc" | "mu_sc")."""
    if kind == MU_G:
        return mu_g(ref, test, ref_fact, test_fact)
    if kind == MU_GC:
        return mu_gc(ref, test, ref_fact, test_fact)
    if kind == MU_SC:
        return mu_sc(ref, test, ref_fact, test_fact, convention=sc_convention)
    raise ValueError(f"unknown measure kind {kind!r}")
