"""Decision mathematics for the byline-position ultimatum game.

Pure functions over small value types: position utility curves, discounting,
displacement bookkeeping, and the accept / issue / withdraw decisions. No RNG
and no loop mechanics live here; the round engine composes these.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class PositionUtilityParams:
    """Noise parameters of an author's position-utility curve u(x) = (1-r1)/(x+r2)."""

    r1: float
    r2: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.r1 <= 0.25):
            raise ValueError(f"r1 must lie in [0, 0.25], got {self.r1}")
        if not (0.0 <= self.r2 <= 0.25):
            raise ValueError(f"r2 must lie in [0, 0.25], got {self.r2}")


@dataclass(frozen=True)
class AuthorParams:
    """Static per-author parameters.

    u0 is the utility of finishing the project, u1 the position-utility curve,
    and (w_mean, w_std) the per-round contribution distribution in normalized
    project units.
    """

    id: int
    u0: float
    u1: PositionUtilityParams
    w_mean: float
    w_std: float

    def __post_init__(self) -> None:
        if self.u0 <= 0:
            raise ValueError(f"u0 must be positive, got {self.u0}")
        if self.w_mean < 0:
            raise ValueError(f"w_mean must be nonnegative, got {self.w_mean}")
        if self.w_std < 0:
            raise ValueError(f"w_std must be nonnegative, got {self.w_std}")


@dataclass
class AuthorState:
    """Mutable per-author game state: accrued contribution and byline position."""

    params: AuthorParams
    contributed: float = 0.0
    position: int = 1
    has_issued: bool = False


@dataclass(frozen=True)
class DiscountParams:
    """Time preference and withdrawal cost, as two independent per-round knobs."""

    discount_rate: float = 0.0
    withdrawal_penalty: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.discount_rate <= 1.0):
            raise ValueError(f"discount_rate must lie in [0, 1], got {self.discount_rate}")
        if not (0.0 <= self.withdrawal_penalty <= 1.0):
            raise ValueError(
                f"withdrawal_penalty must lie in [0, 1], got {self.withdrawal_penalty}"
            )


@dataclass(frozen=True)
class UltimatumProposal:
    """A demand by `issuer` to move from byline position `from_position` to `to_position`."""

    issuer: int
    from_position: int
    to_position: int
    round: int
    horizon: int

    def __post_init__(self) -> None:
        if not (1 <= self.to_position < self.from_position):
            raise ValueError(
                f"demanded position must improve: need 1 <= k < j, "
                f"got k={self.to_position}, j={self.from_position}"
            )
        # Overtime rounds (round > horizon) are legal: noisy accrual can push
        # completion past the nominal horizon.
        if self.round < 0:
            raise ValueError(f"round must be nonnegative, got {self.round}")


class Decision(enum.Enum):
    WITHDRAW = "withdraw"
    HOLD = "hold"


def position_utility(params: PositionUtilityParams, position: int) -> float:
    """Utility of holding byline position `position`: (1 - r1) / (position + r2).

    Strictly positive and strictly decreasing in position.
    """
    if position < 1:
        raise ValueError(f"position must be >= 1, got {position}")
    return (1.0 - params.r1) / (position + params.r2)


def discount_factor(d: DiscountParams, remaining_rounds: int) -> float:
    """1 / (1 + rate)^remaining. Accepts negative remainders for overtime rounds."""
    return (1.0 + d.discount_rate) ** (-remaining_rounds)


def discounted_completion_utility(u0: float, d: DiscountParams, remaining_rounds: int) -> float:
    """Present value of the completion utility u0 with `remaining_rounds` to go."""
    if remaining_rounds < 0:
        raise ValueError(f"remaining_rounds must be >= 0, got {remaining_rounds}")
    return u0 * discount_factor(d, remaining_rounds)


def displacement(proposal: UltimatumProposal, responder_position: int) -> int:
    """Position a responder ends up in if the proposal is accepted.

    Authors occupying positions k..j-1 each slide down one slot; everyone else
    is untouched. The issuer's own slot is not a valid responder position.
    """
    if responder_position < 1:
        raise ValueError(f"responder position must be >= 1, got {responder_position}")
    if responder_position == proposal.from_position:
        raise ValueError("responder cannot occupy the issuer's position")
    if proposal.to_position <= responder_position < proposal.from_position:
        return responder_position + 1
    return responder_position


def responder_accepts(
    responder: AuthorState, proposal: UltimatumProposal, d: DiscountParams
) -> bool:
    """Whether a responder consents to the demanded reordering.

    A displaced responder accepts when the contribution already sunk into the
    project exceeds the discounted value lost by sliding down one position;
    an unaffected responder has nothing to lose and always accepts.
    """
    new_position = displacement(proposal, responder.position)
    if new_position == responder.position:
        return True
    p = responder.params
    loss = (
        p.u0
        * (position_utility(p.u1, responder.position) - position_utility(p.u1, new_position))
        * discount_factor(d, proposal.horizon - proposal.round)
    )
    return responder.contributed > loss


def issuer_gain(
    issuer: AuthorState, to_position: int, round: int, horizon: int, d: DiscountParams
) -> float:
    """Discounted position-value gain the issuer realizes by moving j -> k."""
    j = issuer.position
    if not (1 <= to_position < j):
        raise ValueError(f"need 1 <= k < j, got k={to_position}, j={j}")
    p = issuer.params
    return (
        p.u0
        * (position_utility(p.u1, to_position) - position_utility(p.u1, j))
        * discount_factor(d, horizon - round)
    )


def best_ultimatum(
    issuer: AuthorState,
    others: Sequence[AuthorState],
    round: int,
    horizon: int,
    d: DiscountParams,
) -> Optional[UltimatumProposal]:
    """The most ambitious demand every co-author would accept, or None.

    Feasibility is monotone in the demanded position: lowering k only enlarges
    the displaced set, and each displaced responder's one-slot loss does not
    depend on k. So feasible targets form a contiguous block ending at j-1 and
    a downward linear scan finds the smallest (maximal-gain) feasible k.
    """
    j = issuer.position
    if j == 1 or issuer.has_issued:
        return None
    best: Optional[UltimatumProposal] = None
    for k in range(j - 1, 0, -1):
        proposal = UltimatumProposal(
            issuer=issuer.params.id,
            from_position=j,
            to_position=k,
            round=round,
            horizon=horizon,
        )
        if all(responder_accepts(o, proposal, d) for o in others):
            best = proposal
        else:
            break
    return best


def issuance_worthwhile(
    issuer: AuthorState, proposal: UltimatumProposal, d: DiscountParams
) -> bool:
    """Whether the demand is worth the issuer's own stake.

    An author holds the project hostage only while the discounted position
    gain still exceeds the contribution they would forfeit if the standoff
    sank the project: those who have invested little are the ones with little
    to lose. The stake is weighed once per co-author the demand displaces,
    since every displaced co-author is one more consent the standoff must
    extract; for the minimal one-slot demand this is the plain stake rule.
    """
    gain = issuer_gain(issuer, proposal.to_position, proposal.round, proposal.horizon, d)
    displaced = proposal.from_position - proposal.to_position
    return gain > issuer.contributed * displaced


def withdraw_or_hold(
    issuer: AuthorState, round: int, horizon: int, d: DiscountParams
) -> Decision:
    """Resolve a rejected ultimatum from the issuer's side.

    Withdrawing keeps the discounted status-quo payoff minus the withdrawal
    penalty on accrued contribution; holding collapses the project and forfeits
    the sunk contribution. Ties go to withdrawing. Under full information the
    engine never reaches this branch (demands are only issued when all accept).
    """
    p = issuer.params
    withdraw_value = (
        p.u0
        * position_utility(p.u1, issuer.position)
        * discount_factor(d, horizon - round)
        - d.withdrawal_penalty * issuer.contributed
    )
    hold_value = -issuer.contributed
    return Decision.WITHDRAW if withdraw_value >= hold_value else Decision.HOLD


def apply_ultimatum(order: Sequence[int], proposal: UltimatumProposal) -> list[int]:
    """Reorder a byline (author ids listed best-position-first) per an accepted demand.

    The issuer moves to position k; authors formerly at k..j-1 slide down one.
    """
    j = proposal.from_position
    k = proposal.to_position
    n = len(order)
    if not (1 <= k <= j - 1) or j > n:
        raise ValueError(f"invalid move j={j} -> k={k} for {n} authors")
    if order[j - 1] != proposal.issuer:
        raise ValueError(
            f"proposal inconsistent with order: position {j} holds author "
            f"{order[j - 1]}, not issuer {proposal.issuer}"
        )
    new_order = list(order)
    moved = new_order.pop(j - 1)
    new_order.insert(k - 1, moved)
    return new_order
