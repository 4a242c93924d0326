"""
Coalition structures: every provider anchors one exclusive block, every peer
is attached to one provider or left unattached.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from core.exceptions import InvalidStructure
from game.coalition import bits_to_mask, mask_to_bits
from game.model import Game

UNATTACHED = None


@dataclass(frozen=True)
class CoalitionStructure:
    providers: Tuple[int, ...]
    peers: Tuple[int, ...]
    assignment: Tuple[Optional[int], ...]

    def __post_init__(self):
        if len(self.assignment) != len(self.peers):
            raise InvalidStructure(f"{len(self.assignment)} assignments for {len(self.peers)} peers")
        anchors = set(self.providers)
        for peer, provider in zip(self.peers, self.assignment):
            if provider is not UNATTACHED and provider not in anchors:
                raise InvalidStructure(f"Peer {peer} is assigned to {provider}, which is not a provider")

    @classmethod
    def from_assignment(cls, game: Game, assignment: Sequence[Optional[int]]) -> "CoalitionStructure":
        """`assignment` is aligned with the game's peers in ascending index order."""
        return cls(tuple(game.provider_indices()), tuple(game.peer_indices()), tuple(assignment))

    @classmethod
    def unattached(cls, game: Game) -> "CoalitionStructure":
        return cls.from_assignment(game, [UNATTACHED] * len(game.peer_indices()))

    @classmethod
    def round_robin(cls, game: Game) -> "CoalitionStructure":
        providers = game.provider_indices()
        peers = game.peer_indices()
        if not providers:
            return cls.unattached(game)
        return cls.from_assignment(game, [providers[k % len(providers)] for k in range(len(peers))])

    @classmethod
    def from_blocks(cls, game: Game, blocks: Sequence[int]) -> "CoalitionStructure":
        """Build from an explicit partition given as coalition masks."""
        seen = 0
        owner: Dict[int, Optional[int]] = {}
        for block in blocks:
            game.validate(block)
            if block == 0:
                raise InvalidStructure("Blocks must be nonempty")
            if seen & block:
                raise InvalidStructure("Blocks overlap")
            seen |= block
            members = mask_to_bits(block)
            anchors = [i for i in members if game.is_provider(i)]
            if len(anchors) > 1:
                raise InvalidStructure(f"Block {members} holds {len(anchors)} providers")
            for i in members:
                if not game.is_provider(i):
                    owner[i] = anchors[0] if anchors else UNATTACHED
        if seen != game.grand:
            raise InvalidStructure("Blocks do not cover every player")
        peers = game.peer_indices()
        return cls.from_assignment(game, [owner[p] for p in peers])

    def provider_of(self, peer: int) -> Optional[int]:
        return self.assignment[self.peers.index(peer)]

    def block_of(self, player: int) -> int:
        if player in self.providers:
            anchor = player
        else:
            anchor = self.provider_of(player)
            if anchor is UNATTACHED:
                return 1 << player
        return bits_to_mask([anchor] + [peer for peer, provider in zip(self.peers, self.assignment)
                                        if provider == anchor])

    def blocks(self) -> List[int]:
        """Provider blocks in ascending provider order, then unattached peers."""
        result = [self.block_of(p) for p in self.providers]
        result.extend(1 << peer for peer, provider in zip(self.peers, self.assignment)
                      if provider is UNATTACHED)
        return result

    def moved(self, peer: int, destination: Optional[int]) -> "CoalitionStructure":
        assignment = list(self.assignment)
        assignment[self.peers.index(peer)] = destination
        return CoalitionStructure(self.providers, self.peers, tuple(assignment))

    def encode(self) -> Tuple[Optional[int], ...]:
        return self.assignment

    def as_list(self) -> List[Optional[int]]:
        return list(self.assignment)
