"""Instantaneous SINRs and spectral efficiencies for one channel realization.

Covers the four stages of the link: maximum-ratio combining at the relay
(access phase), the conventional broadcast slots, the successive-cancelation
broadcast slots, and the zero-forcing stage that extracts the remaining
symbols from the residual linear system. All functions are pure; user and
slot indices are 1-based.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky

from .exceptions import DegenerateChannelError, SingularSystemError
from .schedule import SlotIndexer, known_set, partner_index

__all__ = [
    "ZfStage",
    "uplink_sinr",
    "conventional_dl_sinr",
    "proposed_dl_sinr",
    "build_zf_stage",
    "zf_sinr",
    "instantaneous_se",
    "relay_precode",
]

# Gram pivots below this fraction of the largest pivot count as singular.
PIVOT_RTOL = 1e-12


def _column_products(G, k):
    """(cross, self_norm): g_k^H g_i for all i, and ||g_k||^2."""
    K = G.shape[1]
    if not 1 <= k <= K:
        raise ValueError(f"user {k} outside 1..{K}")
    cross = G[:, k - 1].conj() @ G
    return cross, float(cross[k - 1].real)


def _broadcast_scale(beta, p_r, M):
    return p_r / (M * float(np.sum(beta)))


def uplink_sinr(G, p_u, k):
    """Post-MRC SINR of user k's symbol at the relay.

    p_u * ||g_k||^4 over (p_u * sum_{i != k} |g_k^H g_i|^2 + ||g_k||^2).
    """
    cross, n2 = _column_products(G, k)
    if n2 == 0.0:
        raise DegenerateChannelError(f"column {k} of the channel matrix is zero")
    power = np.abs(cross) ** 2
    interference = float(power.sum() - power[k - 1])
    return p_u * n2**2 / (p_u * interference + n2)


def conventional_dl_sinr(G, beta, p_r, k, t):
    """Downlink SINR of user k in conventional broadcast slot t.

    After self-interference removal only the beams of users k and k-t
    (cyclically) drop out, leaving K-2 interference terms.
    """
    K = G.shape[1]
    if not 1 <= t <= K - 1:
        raise ValueError(f"slot {t} outside 1..{K - 1}")
    cross, n2 = _column_products(G, k)
    c = _broadcast_scale(beta, p_r, G.shape[0])
    keep_out = {partner_index(k, t, K), k}
    interference = sum(
        float(abs(cross[i - 1]) ** 2)
        for i in range(1, K + 1)
        if partner_index(i, t, K) not in keep_out
    )
    return c * n2**2 / (c * interference + 1.0)


def proposed_dl_sinr(G, beta, p_r, k, t):
    """Downlink SINR of user k in cancelation slot t.

    Every symbol user k already holds (its own plus those decoded in slots
    1..t-1, plus the current desired one) leaves the interference sum, so
    only K - (t + 1) terms remain. Coincides with the conventional SINR at
    t = 1 and is nondecreasing in t on any fixed realization.
    """
    K = G.shape[1]
    limit = SlotIndexer(K).sic_slots
    if not 1 <= t <= limit:
        raise ValueError(f"slot {t} outside 1..{limit}")
    cross, n2 = _column_products(G, k)
    c = _broadcast_scale(beta, p_r, G.shape[0])
    held = known_set(k, t, K)
    interference = sum(
        float(abs(cross[i - 1]) ** 2)
        for i in range(1, K + 1)
        if partner_index(i, t, K) not in held
    )
    return c * n2**2 / (c * interference + 1.0)


@dataclass(frozen=True)
class ZfStage:
    """Residual linear system of one user after the cancelation slots.

    ``mixing`` is the sic_slots x n_unknowns coefficient matrix (row m is
    residual equation m), ``gram`` its Hermitian Gram matrix, and
    ``noise_gain`` the diagonal of the Gram inverse — the per-unknown noise
    amplification of the zero-forcing combiner.
    """

    user: int
    mixing: np.ndarray
    gram: np.ndarray
    noise_gain: np.ndarray

    @property
    def n_unknowns(self):
        return self.mixing.shape[1]

    def combiner(self):
        """Zero-forcing combiner: gram^(-1) @ mixing^H, satisfying combiner @ mixing = I."""
        if self.n_unknowns == 0:
            return np.zeros((0, self.mixing.shape[0]), dtype=complex)
        low = _factor_gram(self.gram)
        return cho_solve((low, True), self.mixing.conj().T)


def _factor_gram(gram):
    try:
        low = cholesky(gram, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Gram factorization failed: {exc}") from exc
    pivots = np.diag(low).real ** 2
    largest = pivots.max()
    if pivots.min() < PIVOT_RTOL * largest:
        raise SingularSystemError(
            "Gram matrix numerically singular",
            condition=float(largest / pivots.min()) if pivots.min() > 0 else float("inf"),
        )
    return low


def build_zf_stage(G, k, indexer=None):
    """Assemble user k's residual system and its noise gains.

    Entry (m, n) is g_k^H g_j with j the beam that carries the n-th unknown
    in broadcast slot m (offset rule sic_slots + n - m). Noise gains come
    from Hermitian solves against the Gram factor, not an explicit inverse.
    For K = 2 there is nothing left to solve and the stage is empty.
    """
    M, K = G.shape
    indexer = indexer if indexer is not None else SlotIndexer(K)
    if indexer.K != K:
        raise ValueError(f"indexer is for K={indexer.K}, channel has K={K}")
    rows, cols = indexer.sic_slots, indexer.n_unknowns
    if cols == 0:
        empty = np.zeros((rows, 0), dtype=complex)
        return ZfStage(user=k, mixing=empty, gram=np.zeros((0, 0), dtype=complex),
                       noise_gain=np.zeros(0))
    cross, _ = _column_products(G, k)
    mixing = np.empty((rows, cols), dtype=complex)
    for m in range(1, rows + 1):
        for n in range(1, cols + 1):
            mixing[m - 1, n - 1] = cross[indexer.beam(k, m, n) - 1]
    gram = mixing.conj().T @ mixing
    low = _factor_gram(gram)
    inverse = cho_solve((low, True), np.eye(cols, dtype=complex))
    return ZfStage(user=k, mixing=mixing, gram=gram,
                   noise_gain=np.diag(inverse).real.copy())


def zf_sinr(stage, beta, p_r, M, n):
    """Post-combining SINR of the n-th recovered unknown.

    The combiner leaves a clean symbol at scale sqrt(p_r / (M sum(beta)))
    plus noise with power noise_gain[n], so the SINR is their ratio.
    """
    if not 1 <= n <= stage.n_unknowns:
        raise ValueError(f"unknown index {n} outside 1..{stage.n_unknowns}")
    return _broadcast_scale(beta, p_r, M) / float(stage.noise_gain[n - 1])


def instantaneous_se(sinr):
    """Spectral efficiency log2(1 + sinr) in bit/s/Hz; accepts arrays."""
    sinr = np.asarray(sinr)
    if np.any(sinr < 0):
        raise ValueError("SINR must be nonnegative")
    out = np.log2(1.0 + sinr)
    return float(out) if out.ndim == 0 else out


def relay_precode(G, beta, p_r, symbols):
    """Broadcast vector sqrt(p_r / (M sum(beta))) * sum_i g_i * symbols[i].

    ``symbols`` must already be ordered by transmit beam (entry i rides on
    column i); with unit-energy symbols the average transmit power is p_r.
    """
    symbols = np.asarray(symbols)
    if symbols.shape != (G.shape[1],):
        raise ValueError(f"expected {G.shape[1]} symbols, got shape {symbols.shape}")
    return np.sqrt(_broadcast_scale(beta, p_r, G.shape[0])) * (G @ symbols)
