"""Integer algebra of the transmission schedule.

Everything here is pure bookkeeping: how many broadcast slots each scheme
needs, which symbol the relay routes to which user in a given slot, which
symbols a user already knows after successive cancelation, and where the
remaining unknowns sit inside the residual zero-forcing system. User and
slot indices are 1-based throughout.
"""

from dataclasses import dataclass, field

from .exceptions import InvalidConfigError

__all__ = [
    "slot_count",
    "partner_index",
    "known_set",
    "remaining_unknowns",
    "zf_coefficient_offset",
    "SlotIndexer",
]


def _check_users(K):
    if int(K) != K or K < 2:
        raise InvalidConfigError(f"user count must be an integer >= 2, got {K!r}")
    return int(K)


def slot_count(K):
    """Number of successive-cancelation broadcast slots, ceil((K-1)/2)."""
    return _check_users(K) // 2


def partner_index(k, t, K):
    """Index of the symbol routed to user k in broadcast slot t.

    Total circular shift ((k + t - 1) mod K) + 1, defined for all integer
    k and t so that successive-cancelation offsets (k - t <= 0) need no
    special casing. Satisfies partner_index(k - t, t, K) == k.
    """
    K = _check_users(K)
    return (k + t - 1) % K + 1


def known_set(k, t, K):
    """Symbols user k knows after broadcast slot t (its own plus t decoded ones)."""
    limit = slot_count(K)
    if not 0 <= t <= limit:
        raise ValueError(f"slot {t} outside 0..{limit} for K={K}")
    return {partner_index(k - t + i, t, K) for i in range(t + 1)}


def remaining_unknowns(k, K):
    """Symbols user k still lacks after the cancelation slots, in decoding order."""
    t_sic = slot_count(K)
    return [partner_index(k, t, K) for t in range(t_sic + 1, K)]


def zf_coefficient_offset(m, n, sic_slots):
    """Shift applied to the n-th unknown's beam in the m-th residual equation.

    Equation m comes from broadcast slot m; the coefficient multiplying the
    n-th unknown there is the cross product with column partner_index(k,
    offset) where offset = sic_slots + n - m. Column n therefore collects
    the offsets {n, ..., n + sic_slots - 1}.
    """
    if not 1 <= m <= sic_slots:
        raise ValueError(f"row {m} outside 1..{sic_slots}")
    if n < 1:
        raise ValueError(f"column {n} must be >= 1")
    return sic_slots + n - m


@dataclass(frozen=True)
class SlotIndexer:
    """Slot bookkeeping for a K-user exchange.

    The cancelation phase never leaves the residual system underdetermined:
    sic_slots >= n_unknowns holds for every K >= 2.
    """

    K: int
    sic_slots: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sic_slots", slot_count(self.K))

    @property
    def n_unknowns(self):
        return self.K - self.sic_slots - 1

    @property
    def proposed_slots(self):
        """Total slots for the cancelation scheme: one access slot + sic_slots."""
        return self.sic_slots + 1

    @property
    def conventional_slots(self):
        """Total slots for the conventional scheme: one access slot + K - 1."""
        return self.K

    def partner(self, k, t):
        return partner_index(k, t, self.K)

    def known(self, k, t):
        return known_set(k, t, self.K)

    def remaining(self, k):
        return remaining_unknowns(k, self.K)

    def offset(self, m, n):
        if not 1 <= n <= self.n_unknowns:
            raise ValueError(f"column {n} outside 1..{self.n_unknowns}")
        return zf_coefficient_offset(m, n, self.sic_slots)

    def beam(self, k, m, n):
        """Column index whose beam carries unknown n in residual equation m of user k."""
        return self.partner(k, self.offset(m, n))
