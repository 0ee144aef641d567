"""Sum-rate capacity evaluation for panelized linear receivers.

All rates are in bits (per channel use). Determinants are always
evaluated on the K x K user side, which is tiny compared to the antenna
count, and the filter enters only through the orthogonal projector onto
its column space. Rank-deficient filters therefore degrade gracefully to
a lower-rank projector instead of requiring an explicit Gram inverse.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics
from .equalizers import EqualizerSet
from .errors import NumericalDomainError

#: Allowed slack when checking rates against the channel-capacity ceiling.
CEILING_SLACK_BITS = 1e-6

#: Allowed backward slack in monotone cumulative traces.
MONOTONE_SLACK_BITS = 1e-9


@dataclass(frozen=True)
class CapacityReport:
    """Per-trial capacity summary.

    ``per_panel_cumulative`` holds the running sum rate after each panel
    of a chain run and is empty for algorithms without a chain pass.
    """

    sum_rate_bits: float
    per_panel_cumulative: np.ndarray
    channel_capacity_bits: float

    def validate(self) -> None:
        """Runtime check of the ceiling bound and monotone accumulation."""
        if self.sum_rate_bits > self.channel_capacity_bits + CEILING_SLACK_BITS:
            raise NumericalDomainError(
                f"sum rate {self.sum_rate_bits} exceeds channel capacity "
                f"{self.channel_capacity_bits}")
        trace = self.per_panel_cumulative
        if trace.size:
            if np.any(np.diff(trace) < -MONOTONE_SLACK_BITS):
                raise NumericalDomainError(
                    "per-panel cumulative rate is not nondecreasing")


def _logdet_eye_plus(gram: np.ndarray) -> float:
    k = gram.shape[0]
    a = np.eye(k) + gram
    a = 0.5 * (a + a.conj().T)
    return numerics.logdet2_hpd(a)


def sum_rate_full(h, w, rho: float) -> float:
    """Rate through a single dense filter, ``log2 det(I + rho H^H P H)``.

    ``P`` is the orthogonal projector onto the column space of ``w``,
    obtained from an orthonormal range basis; the Gram inverse of the
    full-rank formulation is never formed, so rank-deficient filters are
    handled continuously.
    """
    h = numerics._as_matrix(h, "channel")
    w = numerics._as_matrix(w, "filter")
    if w.shape[0] != h.shape[0]:
        raise ValueError("channel and filter must share the antenna dimension")
    q = numerics.orthonormal_range(w)
    g = q.conj().T @ h
    return _logdet_eye_plus(rho * (g.conj().T @ g))


def channel_capacity(h, rho: float) -> float:
    """Capacity of the raw antenna interface, ``log2 det(I + rho H^H H)``."""
    h = numerics._as_matrix(h, "channel")
    return _logdet_eye_plus(rho * (h.conj().T @ h))


def _panel_grams(blocks, eq: EqualizerSet, rho: float):
    """Per-panel terms ``rho H_i^H S_i H_i`` as K x K matrices."""
    if len(blocks) != len(eq):
        raise ValueError("one equalizer per channel block is required")
    grams = []
    for h, pe in zip(blocks, eq):
        h = numerics._as_matrix(h, "channel block")
        if pe.m_rows != h.shape[0]:
            raise ValueError("equalizer and block disagree on antenna count")
        g = pe.orthonormal_columns().conj().T @ h
        grams.append(rho * (g.conj().T @ g))
    return grams


def sum_rate_panelized(blocks, eq: EqualizerSet, rho: float) -> float:
    """Rate of the block-diagonal receiver.

    Evaluates ``log2 det(I_K + rho sum_i H_i^H S_i H_i)`` with ``S_i``
    the projector onto the i-th filter's column space; identical to
    ``sum_rate_full`` on the assembled dense block-diagonal filter.
    """
    grams = _panel_grams(blocks, eq, rho)
    return _logdet_eye_plus(sum(grams))


def chain_capacity_trace(blocks, eq: EqualizerSet, rho: float) -> np.ndarray:
    """Cumulative sum rate after each panel of a chain run.

    Entry i is the rate delivered by panels 0..i together. The final
    entry equals ``sum_rate_panelized`` and consecutive differences equal
    the per-panel increments reported by the chain steps.
    """
    grams = _panel_grams(blocks, eq, rho)
    if not grams:
        return np.zeros(0)
    acc = np.zeros_like(grams[0])
    out = np.empty(len(grams))
    for i, g in enumerate(grams):
        acc = acc + g
        out[i] = _logdet_eye_plus(acc)
    return out
