"""Per-panel linear filters for the panelized uplink receiver.

Three constructions are provided:

* ``rmf_filter``: the reduced matched filter, keeping the strongest user
  columns of the local channel block.
* ``single_panel_filter``: the capacity-optimal subspace filter for an
  isolated panel, built from dominant left singular vectors.
* ``iic_local_step``: one step of the iterative interference cancellation
  chain. Each panel whitens its channel block against the Hermitian
  accumulator received from the previous panel, keeps the dominant left
  singular vectors of the whitened block, and forwards the updated
  accumulator.

Filters only matter through the column space of their matrix, so
semi-unitary representatives are used wherever possible.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import block_diag

from . import numerics
from .errors import NumericalDomainError

#: Residual-norm threshold for accepting a canonical completion column.
_COMPLETION_TOL = 1e-8


class EqualizerKind(Enum):
    RMF = "rmf"
    SVD_OPT = "svd_opt"
    IIC = "iic"


@dataclass(frozen=True)
class PanelEqualizer:
    """Filter matrix of one panel plus provenance flags.

    ``semi_unitary`` is True when ``w.conj().T @ w`` is the identity by
    construction (subspace filters); the reduced matched filter keeps raw
    channel columns and is generally not semi-unitary.
    """

    w: np.ndarray
    kind: EqualizerKind
    semi_unitary: bool

    @property
    def n_cols(self) -> int:
        return self.w.shape[1]

    @property
    def m_rows(self) -> int:
        return self.w.shape[0]

    def orthonormal_columns(self) -> np.ndarray:
        """Orthonormal basis of the filter column space."""
        if self.semi_unitary:
            return self.w
        return numerics.orthonormal_range(self.w)

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the filter column space."""
        q = self.orthonormal_columns()
        return q @ q.conj().T


@dataclass(frozen=True)
class EqualizerSet:
    """Ordered per-panel filters forming one block-diagonal equalizer."""

    per_panel: tuple

    def __len__(self) -> int:
        return len(self.per_panel)

    def __iter__(self):
        return iter(self.per_panel)

    def __getitem__(self, i) -> PanelEqualizer:
        return self.per_panel[i]

    @property
    def n_total(self) -> int:
        """Total number of filter outputs across panels."""
        return sum(pe.n_cols for pe in self.per_panel)

    def block_diagonal(self) -> np.ndarray:
        """Dense M x N block-diagonal matrix with one block per panel."""
        return block_diag(*[pe.w for pe in self.per_panel])


@dataclass(frozen=True)
class ChainMessage:
    """Hermitian K x K accumulator passed from panel to panel.

    Starts at the identity and only ever grows by positive semidefinite
    updates, so every eigenvalue stays at or above 1.
    """

    z: np.ndarray
    hop_index: int = 0

    @classmethod
    def initial(cls, users_k: int) -> "ChainMessage":
        return cls(z=np.eye(users_k, dtype=complex), hop_index=0)

    @property
    def users_k(self) -> int:
        return self.z.shape[0]


def rmf_filter(h_panel, np_outputs: int) -> PanelEqualizer:
    """Reduced matched filter: the strongest channel columns of a panel.

    Column strength is the squared Euclidean norm. The filter keeps
    ``min(np_outputs, K)`` columns ordered by descending strength; ties
    keep ascending user index. More outputs than users would only
    duplicate columns without adding rank, so the width is capped at K.
    """
    if np_outputs < 1:
        raise ValueError("np_outputs must be at least 1")
    h = numerics._as_matrix(h_panel, "channel block")
    norms = np.sum(np.abs(h) ** 2, axis=0)
    order = np.argsort(-norms, kind="stable")
    selected = order[: min(np_outputs, h.shape[1])]
    return PanelEqualizer(w=h[:, selected], kind=EqualizerKind.RMF,
                          semi_unitary=False)


def single_panel_filter(h, n_outputs: int) -> PanelEqualizer:
    """Capacity-optimal filter for an isolated panel.

    Keeps the ``min(n_outputs, rank(h))`` dominant left singular vectors,
    which span everything that matters for the rate at the filter output.
    A zero block has no preferred directions; the first ``n_outputs``
    canonical unit vectors are returned so the output width stays usable.
    """
    h = numerics._as_matrix(h, "channel block")
    if n_outputs < 1:
        raise ValueError("n_outputs must be at least 1")
    if n_outputs > h.shape[0]:
        raise ValueError("n_outputs cannot exceed the number of antennas")
    dec = numerics.svd(h)
    rank = dec.rank()
    if rank == 0:
        w = np.eye(h.shape[0], dtype=complex)[:, :n_outputs]
    else:
        w = dec.left[:, : min(n_outputs, rank)]
    return PanelEqualizer(w=w, kind=EqualizerKind.SVD_OPT, semi_unitary=True)


def iic_local_step(h_panel, z_prev: ChainMessage, rho: float,
                   np_outputs: int):
    """One panel's step of the interference-cancellation chain.

    Whitens the local block against the incoming accumulator, selects the
    dominant left singular vectors of the whitened block as the filter,
    and forwards the accumulator grown by the captured signal covariance.

    Parameters
    ----------
    h_panel : array_like
        Local Mp x K channel block.
    z_prev : ChainMessage
        Accumulator from the previous panel; Hermitian positive definite
        (identity at the head of the chain).
    rho : float
        Linear SNR.
    np_outputs : int
        Requested filter width; clamped to Mp. If the whitened block has
        lower rank, the filter is completed to full width with canonical
        unit vectors orthogonalized against the chosen columns. The extra
        columns carry no signal and add no capacity.

    Returns
    -------
    (PanelEqualizer, float, ChainMessage)
        The panel filter, the capacity increment ``delta_c`` in bits
        contributed by this panel, and the accumulator to forward.
    """
    h = numerics._as_matrix(h_panel, "channel block")
    if np_outputs < 1:
        raise ValueError("np_outputs must be at least 1")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    dec = numerics.hermitian_eig(z_prev.z)
    if dec.values.size == 0 or dec.values[-1] <= 0.0:
        raise NumericalDomainError(
            "chain accumulator must be positive definite")

    whiten = dec.basis * dec.values**-0.5
    h_hat = np.sqrt(rho) * (h @ whiten)
    h_dec = numerics.svd(h_hat)
    width = min(np_outputs, h.shape[0])
    chosen = h_dec.left[:, : min(width, h_dec.rank())]
    w = _complete_with_canonical(chosen, width)
    eq = PanelEqualizer(w=w, kind=EqualizerKind.IIC, semi_unitary=True)

    g = w.conj().T @ h_hat
    captured = g.conj().T @ g + np.eye(h.shape[1])
    captured = 0.5 * (captured + captured.conj().T)
    delta_c = numerics.logdet2_hpd(captured)

    t = w.conj().T @ h
    z_next = z_prev.z + rho * (t.conj().T @ t)
    z_next = 0.5 * (z_next + z_next.conj().T)
    return eq, delta_c, ChainMessage(z=z_next, hop_index=z_prev.hop_index + 1)


def apply_equalizers(eq: EqualizerSet, y) -> np.ndarray:
    """Filter a received M-vector panel by panel.

    Equivalent to multiplying by the Hermitian transpose of the dense
    block-diagonal filter matrix: segment i of ``y`` is reduced to
    ``w_i^H y_i`` and the results are concatenated.
    """
    y = np.asarray(y, dtype=complex)
    if y.ndim != 1:
        raise ValueError(f"expected a 1-D received vector, got shape {y.shape}")
    total = sum(pe.m_rows for pe in eq)
    if y.shape[0] != total:
        raise ValueError(
            f"received vector has {y.shape[0]} entries, panels expect {total}")
    out = []
    start = 0
    for pe in eq:
        stop = start + pe.m_rows
        out.append(pe.w.conj().T @ y[start:stop])
        start = stop
    return np.concatenate(out) if out else np.zeros(0, dtype=complex)


def _complete_with_canonical(w: np.ndarray, target_cols: int) -> np.ndarray:
    """Grow ``w`` to ``target_cols`` orthonormal columns.

    Appends canonical unit vectors, taken in ascending index order and
    orthogonalized against everything already accepted. Candidates whose
    residual is below ``_COMPLETION_TOL`` already lie in the span and are
    skipped. Processing happens in chunks through a QR factorization,
    which matches a classical Gram-Schmidt sweep up to per-column phases.
    """
    m, have = w.shape
    need = target_cols - have
    if need <= 0:
        return w
    if target_cols > m:
        raise ValueError("cannot build more orthonormal columns than rows")
    pads = []
    accepted = 0
    j = 0
    while accepted < need and j < m:
        chunk = min(m - j, need - accepted + 8)
        cand = np.zeros((m, chunk), dtype=complex)
        cand[j:j + chunk] = np.eye(chunk)
        # project out the current span twice to keep orthogonality tight
        for _ in range(2):
            if have:
                cand -= w @ (w.conj().T @ cand)
            for p in pads:
                cand -= p @ (p.conj().T @ cand)
        q, r = np.linalg.qr(cand)
        keep = np.flatnonzero(np.abs(np.diag(r)) > _COMPLETION_TOL)
        keep = keep[: need - accepted]
        if keep.size:
            pads.append(q[:, keep])
            accepted += int(keep.size)
        j += chunk
    if accepted < need:
        raise NumericalDomainError("failed to complete an orthonormal basis")
    return np.hstack([w] + pads) if have else np.hstack(pads)
