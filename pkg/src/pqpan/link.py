"""Byte-exact link-layer transfer model.

An application artifact of N bytes is cut into ATT PDUs (each carrying at
most ``att_mtu - 3`` value bytes under a 3 B ATT header), wrapped in a 4 B
L2CAP header, and segmented into link-layer data PDUs of at most ``ll_pdu``
payload bytes. Every data PDU costs a fixed 10 B of link-layer overhead on
air and is answered by an empty (overhead-only) acknowledgement frame;
consecutive frames are separated by the inter-frame spacing.

The model is analytical: frames are never lost, reordered, or retransmitted,
and connection-event scheduling is not represented. All functions here are
pure and operate on value types.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import InvalidConfig

ATT_HEADER = 3
L2CAP_HEADER = 4
LL_OVERHEAD = 10
SDU_HEADERS = ATT_HEADER + L2CAP_HEADER


class Direction(enum.Enum):
    """Frame direction relative to the party that initiated the transfer."""

    TO_RESPONDER = "i2r"
    TO_INITIATOR = "r2i"


@dataclass(frozen=True)
class LinkConfig:
    """Link parameters for one transfer.

    ``conn_interval`` is carried for reporting only; the analytical model
    converts bytes to airtime directly and does not schedule connection
    events. ``ifs_slots`` is the number of inter-frame gaps charged per
    data/ack exchange (2 = data, gap, ack, gap).
    """

    att_mtu: int
    ll_pdu: int
    phy_rate: float = 1_000_000.0
    ifs: float = 150e-6
    conn_interval: float = 50e-3
    ifs_slots: int = 2

    def __post_init__(self):
        if self.att_mtu < 23:
            raise InvalidConfig(f"att_mtu must be >= 23, got {self.att_mtu}")
        if not 27 <= self.ll_pdu <= 251:
            raise InvalidConfig(f"ll_pdu must be in [27, 251], got {self.ll_pdu}")
        if self.phy_rate <= 0:
            raise InvalidConfig("phy_rate must be positive")
        if self.ifs < 0:
            raise InvalidConfig("ifs must be non-negative")
        if self.ifs_slots not in (1, 2):
            raise InvalidConfig(f"ifs_slots must be 1 or 2, got {self.ifs_slots}")

    @property
    def att_chunk(self) -> int:
        """Value bytes carried per ATT PDU."""
        return self.att_mtu - ATT_HEADER


@dataclass(frozen=True)
class LinkFrame:
    direction: Direction
    payload_bytes: int
    overhead_bytes: int = LL_OVERHEAD
    is_ack: bool = False

    def __post_init__(self):
        if self.is_ack and self.payload_bytes != 0:
            raise InvalidConfig("ack frames carry no payload")
        if self.payload_bytes < 0:
            raise InvalidConfig("payload_bytes must be non-negative")

    @property
    def on_air_bytes(self) -> int:
        return self.payload_bytes + self.overhead_bytes


@dataclass(frozen=True)
class FragmentationPlan:
    """Ordered frame sequence for one artifact transfer.

    ``att_chunks`` records the value bytes carried by each ATT PDU, in order,
    so the artifact can be reconstructed chunk by chunk.
    """

    frames: tuple[LinkFrame, ...]
    att_pdu_count: int
    ll_data_pdu_count: int
    att_chunks: tuple[int, ...] = field(default=())

    @property
    def ack_count(self) -> int:
        return sum(1 for f in self.frames if f.is_ack)

    def data_frames(self) -> tuple[LinkFrame, ...]:
        return tuple(f for f in self.frames if not f.is_ack)

    def frame_dicts(self) -> list[dict]:
        """JSON-friendly ordered frame list for trace inspection."""
        return [
            {"dir": f.direction.value, "payload_B": f.payload_bytes,
             "overhead_B": f.overhead_bytes, "is_ack": f.is_ack}
            for f in self.frames
        ]


@dataclass(frozen=True)
class TimeBudget:
    """Sender-side radio-on times for one plan, in seconds.

    ``t_tx`` covers data frames, ``t_rx`` the returning acks, ``t_ifs`` the
    cumulative inter-frame spacing.
    """

    t_tx: float
    t_rx: float
    t_ifs: float

    @property
    def total(self) -> float:
        return self.t_tx + self.t_rx + self.t_ifs


def plan_counts(artifact_size: int, cfg: LinkConfig) -> tuple[int, int]:
    """Closed-form (att_pdu_count, ll_data_pdu_count) for an artifact.

    Chunking is greedy: every ATT PDU but the last carries the full
    ``att_mtu - 3`` value bytes, and each 7-byte-headed SDU splits into
    ceil(sdu / ll_pdu) maximal link-layer frames.
    """
    if artifact_size < 1:
        raise InvalidConfig(f"artifact_size must be >= 1, got {artifact_size}")
    chunk = cfg.att_chunk
    n_att = -(-artifact_size // chunk)
    last_chunk = artifact_size - (n_att - 1) * chunk
    frames_full = -(-(chunk + SDU_HEADERS) // cfg.ll_pdu)
    frames_last = -(-(last_chunk + SDU_HEADERS) // cfg.ll_pdu)
    return n_att, (n_att - 1) * frames_full + frames_last


def plan_transfer(artifact_size: int, cfg: LinkConfig,
                  direction: Direction = Direction.TO_RESPONDER) -> FragmentationPlan:
    """Build the full frame sequence for transferring one artifact.

    Data frames flow in ``direction``; each is followed by an empty ack in
    the opposite direction.
    """
    if artifact_size < 1:
        raise InvalidConfig(f"artifact_size must be >= 1, got {artifact_size}")
    back = (Direction.TO_INITIATOR if direction is Direction.TO_RESPONDER
            else Direction.TO_RESPONDER)
    frames: list[LinkFrame] = []
    chunks: list[int] = []
    remaining = artifact_size
    while remaining > 0:
        chunk = min(cfg.att_chunk, remaining)
        remaining -= chunk
        chunks.append(chunk)
        sdu = chunk + SDU_HEADERS
        while sdu > 0:
            payload = min(cfg.ll_pdu, sdu)
            sdu -= payload
            frames.append(LinkFrame(direction, payload))
            frames.append(LinkFrame(back, 0, is_ack=True))
    n_data = sum(1 for f in frames if not f.is_ack)
    return FragmentationPlan(frames=tuple(frames), att_pdu_count=len(chunks),
                             ll_data_pdu_count=n_data, att_chunks=tuple(chunks))


def bytes_on_air(plan: FragmentationPlan) -> tuple[int, int]:
    """(tx_bytes, rx_bytes) at the PHY layer, from the sender's viewpoint."""
    tx = sum(f.on_air_bytes for f in plan.frames if not f.is_ack)
    rx = sum(f.on_air_bytes for f in plan.frames if f.is_ack)
    return tx, rx


def airtime(plan: FragmentationPlan, cfg: LinkConfig) -> TimeBudget:
    """Convert a plan's PHY bytes into the sender-side time budget.

    On-air time is 8 * bytes / phy_rate per frame; every data/ack exchange
    additionally costs ``cfg.ifs_slots`` inter-frame gaps.
    """
    tx_bytes, rx_bytes = bytes_on_air(plan)
    return TimeBudget(
        t_tx=8.0 * tx_bytes / cfg.phy_rate,
        t_rx=8.0 * rx_bytes / cfg.phy_rate,
        t_ifs=cfg.ifs_slots * plan.ll_data_pdu_count * cfg.ifs,
    )
