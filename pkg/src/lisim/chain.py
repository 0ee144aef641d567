"""Daisy-chain and centralized execution of the panel algorithms.

A chain run folds the local interference-cancellation step over the
panels in scenario order, threading the Hermitian K x K accumulator from
panel to panel. Centralized execution reuses the exact same fold, so the
resulting filters are bit-identical; only the interconnect accounting
changes (full CSI upload instead of panel-to-panel messages).

Traffic is counted in complex scalars; one complex scalar is two 8-byte
reals, so multiply by 16 for bytes.
"""

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import capacity, numerics
from .equalizers import (ChainMessage, EqualizerSet, PanelEqualizer,
                         iic_local_step, rmf_filter)
from .errors import ConfigError


class Algorithm(Enum):
    IIC = "iic"
    RMF = "rmf"


@dataclass(frozen=True)
class TrafficReport:
    """Interconnect accounting for one run, in complex scalars.

    ``chain_complex_scalars`` counts the K x K accumulator messages on
    the dedicated panel-to-panel links (zero for local-only algorithms
    and for centralized execution). ``chain_hermitian_scalars`` is the
    same traffic under triangular compression of the Hermitian message,
    reported for reference; the headline count is uncompressed.
    """

    chain_complex_scalars: int
    backplane_scalars_per_use: int
    cpu_scalars_per_use: int
    centralized_csi_scalars: int
    chain_hermitian_scalars: int

    @property
    def chain_bytes(self) -> int:
        return 16 * self.chain_complex_scalars


@dataclass(frozen=True)
class ChainResult:
    """Filters, capacity report, traffic accounting, and pass count."""

    equalizers: EqualizerSet
    report: capacity.CapacityReport
    traffic: TrafficReport
    passes_executed: int


def _validate_blocks(blocks, np_outputs: int):
    if not blocks:
        raise ConfigError("at least one channel block is required")
    blocks = [numerics._as_matrix(b, "channel block") for b in blocks]
    k = blocks[0].shape[1]
    if any(b.shape[1] != k for b in blocks):
        raise ConfigError("all channel blocks must share the user dimension")
    if np_outputs < 1:
        raise ConfigError("np_outputs must be at least 1")
    if np_outputs > min(b.shape[0] for b in blocks):
        raise ConfigError("np_outputs cannot exceed the panel antenna count")
    return blocks, k


def _build_report(blocks, eq: EqualizerSet, rho: float,
                  with_trace: bool) -> capacity.CapacityReport:
    cap = capacity.channel_capacity(np.vstack(blocks), rho)
    if with_trace:
        trace = capacity.chain_capacity_trace(blocks, eq, rho)
        sum_rate = float(trace[-1])
    else:
        trace = np.zeros(0)
        sum_rate = capacity.sum_rate_panelized(blocks, eq, rho)
    report = capacity.CapacityReport(sum_rate_bits=sum_rate,
                                     per_panel_cumulative=trace,
                                     channel_capacity_bits=cap)
    report.validate()
    return report


def run_iic_chain(blocks, rho: float, np_outputs: int,
                  passes: int = 1) -> ChainResult:
    """Decentralized interference-cancellation run over a panel chain.

    The first pass starts the accumulator at the identity and folds the
    local step over the panels in list order. Additional passes revisit
    each panel and re-optimize its filter against the leave-one-out
    accumulator built from every other panel's current filter, which can
    only increase the objective. The default single pass matches the
    envisioned hardware pipeline.

    Parameters
    ----------
    blocks : sequence of array_like
        Per-panel Mp x K channel blocks in chain order.
    rho : float
        Linear SNR.
    np_outputs : int
        Outputs per panel; at most the panel antenna count.
    passes : int
        Number of sweeps over the chain, at least 1.
    """
    blocks, k = _validate_blocks(blocks, np_outputs)
    if passes < 1:
        raise ConfigError("passes must be at least 1")
    if rho <= 0.0:
        raise ConfigError("rho must be positive")

    msg = ChainMessage.initial(k)
    filters: list[PanelEqualizer] = []
    for h in blocks:
        eq, _, msg = iic_local_step(h, msg, rho, np_outputs)
        filters.append(eq)

    # per-panel accumulator contributions, needed for leave-one-out passes
    contribs: list[np.ndarray] = []
    for h, eq in zip(blocks, filters):
        t = eq.w.conj().T @ h
        contribs.append(rho * (t.conj().T @ t))

    hop = msg.hop_index
    for _ in range(passes - 1):
        total = sum(contribs)
        for i, h in enumerate(blocks):
            z_loo = np.eye(k) + (total - contribs[i])
            z_loo = 0.5 * (z_loo + z_loo.conj().T)
            eq, _, out = iic_local_step(h, ChainMessage(z_loo, hop), rho,
                                        np_outputs)
            hop = out.hop_index
            filters[i] = eq
            t = eq.w.conj().T @ h
            fresh = rho * (t.conj().T @ t)
            total = total - contribs[i] + fresh
            contribs[i] = fresh

    eq_set = EqualizerSet(per_panel=tuple(filters))
    report = _build_report(blocks, eq_set, rho, with_trace=True)
    p = len(blocks)
    hops = (p - 1) * passes
    traffic = TrafficReport(
        chain_complex_scalars=hops * k * k,
        backplane_scalars_per_use=eq_set.n_total,
        cpu_scalars_per_use=k,
        centralized_csi_scalars=0,
        chain_hermitian_scalars=hops * k * (k + 1) // 2,
    )
    return ChainResult(equalizers=eq_set, report=report, traffic=traffic,
                       passes_executed=passes)


def run_rmf(blocks, np_outputs: int, rho: float) -> ChainResult:
    """Reduced-matched-filter run; every panel works from local CSI only.

    No panel-to-panel messages are needed, so chain traffic is zero. The
    filter construction itself does not depend on the SNR; ``rho`` only
    enters the returned capacity report.
    """
    blocks, k = _validate_blocks(blocks, np_outputs)
    if rho <= 0.0:
        raise ConfigError("rho must be positive")
    eq_set = EqualizerSet(per_panel=tuple(
        rmf_filter(h, np_outputs) for h in blocks))
    report = _build_report(blocks, eq_set, rho, with_trace=False)
    traffic = TrafficReport(
        chain_complex_scalars=0,
        backplane_scalars_per_use=eq_set.n_total,
        cpu_scalars_per_use=k,
        centralized_csi_scalars=0,
        chain_hermitian_scalars=0,
    )
    return ChainResult(equalizers=eq_set, report=report, traffic=traffic,
                       passes_executed=1)


def run_centralized(blocks, rho: float, np_outputs: int,
                    algorithm: Algorithm, passes: int = 1) -> ChainResult:
    """Same algorithms executed at a central unit holding all CSI.

    Reuses the decentralized folds verbatim, so filters and capacities
    are bit-identical to the decentralized run; only the traffic
    accounting differs: the full M x K channel is uploaded once and no
    panel-to-panel messages flow.
    """
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.IIC:
        base = run_iic_chain(blocks, rho, np_outputs, passes)
    else:
        base = run_rmf(blocks, np_outputs, rho)
    m_total = sum(np.asarray(b).shape[0] for b in blocks)
    users_k = np.asarray(blocks[0]).shape[1]
    traffic = replace(base.traffic,
                      chain_complex_scalars=0,
                      chain_hermitian_scalars=0,
                      centralized_csi_scalars=m_total * users_k)
    return ChainResult(equalizers=base.equalizers, report=base.report,
                       traffic=traffic, passes_executed=base.passes_executed)
