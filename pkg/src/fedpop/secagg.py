"""Masking-based secure aggregation with dropout recovery.

Each client hides its update behind a self-mask expanded from a private seed
b_i and pairwise masks expanded from DH shared keys k_ij = g^(k_i*k_j); masks
between two surviving clients cancel in the sum (+ for the lower index, - for
the higher).  Shamir shares of b_i and k_i let the server remove what does
not cancel: self-masks of clients whose update arrived, and pairwise masks
pointing at clients that dropped.  If any needed secret cannot be rebuilt
from at least t_sa shares, the whole round aborts rather than emit a sum
with residual masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .encoding import FixedPointParams, ModelVector
from .errors import ParameterError, StateError, UnmaskableRoundError
from .group import Q, GroupElement, generator_pow, scalar_to_bytes
from .hashing import TAG_PAIR, hash_to_digest, prg_expand
from .rng import Drbg
from .shamir import ShamirShare, shamir_reconstruct, shamir_share

# Complete graphs are affordable at benchmark scale and guarantee that any
# surviving-majority dropout pattern stays recoverable; the logarithmic
# regular graph only pays off well beyond that.
_COMPLETE_GRAPH_LIMIT = 128


def default_degree(n: int) -> int:
    if n <= _COMPLETE_GRAPH_LIMIT:
        return n - 1
    return min(n - 1, 2 * math.ceil(math.log2(n)) + 2)


def neighbor_graph(n: int, degree: int) -> Dict[int, Tuple[int, ...]]:
    """Undirected regular-ish graph on clients 1..n.

    degree == n-1 yields the complete graph; otherwise a circulant (Harary)
    graph with edges to the `degree` nearest indices modulo n.
    """
    if n < 2:
        raise ParameterError("need at least 2 clients")
    if degree < 1 or degree >= n:
        raise ParameterError("degree must satisfy 1 <= degree < n")
    if degree == n - 1:
        everyone = set(range(1, n + 1))
        return {i: tuple(sorted(everyone - {i})) for i in everyone}
    half = (degree + 1) // 2
    graph: Dict[int, set] = {i: set() for i in range(1, n + 1)}
    for i in range(1, n + 1):
        for off in range(1, half + 1):
            j = (i - 1 + off) % n + 1
            graph[i].add(j)
            graph[j].add(i)
    return {i: tuple(sorted(nbrs)) for i, nbrs in graph.items()}


@dataclass(frozen=True)
class SAParams:
    n: int
    degree: int
    t_sa: int
    dimension: int
    fixed_point: FixedPointParams = FixedPointParams()

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("need at least 2 clients")
        if self.degree < 1 or self.degree >= self.n:
            raise ParameterError("degree must satisfy 1 <= degree < n")
        if self.t_sa < 1 or self.t_sa > self.degree:
            raise ParameterError("recovery threshold must satisfy 1 <= t_sa <= degree")
        if self.dimension < 1:
            raise ParameterError("dimension must be >= 1")

    @classmethod
    def create(
        cls,
        n: int,
        dimension: int,
        degree: Optional[int] = None,
        t_sa: Optional[int] = None,
        fixed_point: FixedPointParams = FixedPointParams(),
    ) -> "SAParams":
        if degree is None:
            degree = default_degree(n)
        if t_sa is None:
            t_sa = math.ceil(2 * degree / 3)
        return cls(n, degree, t_sa, dimension, fixed_point)


def pairwise_seed(shared_key: GroupElement) -> bytes:
    """Mask seed both endpoints derive from the DH shared key g^(k_i*k_j)."""
    return hash_to_digest(TAG_PAIR, [shared_key.to_bytes()])


def pair_sign(i: int, j: int) -> int:
    """+1 when i < j, -1 otherwise, so each pair's masks cancel in the sum."""
    if i == j:
        raise ParameterError("no pairwise mask with oneself")
    return 1 if i < j else -1


@dataclass
class SAClientState:
    """Per-client aggregation state for one round."""

    index: int
    params: SAParams
    dh_secret: int
    dh_public: GroupElement
    self_seed: int  # b_i
    neighbor_publics: Dict[int, GroupElement]
    # shares of neighbors' secrets this client holds, keyed by owner index
    held_b_shares: Dict[int, ShamirShare] = field(default_factory=dict)
    held_k_shares: Dict[int, ShamirShare] = field(default_factory=dict)
    protected: bool = False

    @property
    def neighbors(self) -> Tuple[int, ...]:
        return tuple(sorted(self.neighbor_publics))

    def shared_key(self, j: int) -> GroupElement:
        try:
            return self.neighbor_publics[j] * self.dh_secret
        except KeyError:
            raise StateError(f"client {self.index} has no public key for neighbor {j}")

    def mask_offset(self) -> List[int]:
        """The total mask this client adds in sa_protect, recomputable at will."""
        d = self.params.dimension
        total = prg_expand(scalar_to_bytes(self.self_seed), d)
        for j in self.neighbors:
            pair_mask = prg_expand(pairwise_seed(self.shared_key(j)), d)
            sign = pair_sign(self.index, j)
            total = [(t + sign * m) % Q for t, m in zip(total, pair_mask)]
        return total

    def recovery_shares(
        self, online: Iterable[int], dropped: Iterable[int]
    ) -> Tuple[Dict[int, ShamirShare], Dict[int, ShamirShare]]:
        """Shares this client reveals: b-shares for online neighbors, k-shares
        for dropped ones.  Never both for the same owner."""
        online = set(online)
        dropped = set(dropped)
        overlap = online & dropped
        if overlap:
            raise StateError(f"neighbors classified both online and dropped: {sorted(overlap)}")
        b_out = {j: self.held_b_shares[j] for j in online if j in self.held_b_shares}
        k_out = {j: self.held_k_shares[j] for j in dropped if j in self.held_k_shares}
        return b_out, k_out


@dataclass
class SAServerState:
    """Server-side registry and per-round recovery bookkeeping."""

    params: SAParams
    publics: Dict[int, GroupElement]
    graph: Dict[int, Tuple[int, ...]]


def sa_setup(params: SAParams, rng: Drbg) -> Tuple[Dict[int, SAClientState], SAServerState]:
    """Key pairs, self-mask seeds and Shamir shares for every client.

    Share delivery between neighbors is modeled as already end-to-end
    encrypted through the server, so shares land directly in the recipients'
    state here.
    """
    graph = neighbor_graph(params.n, params.degree)
    clients: Dict[int, SAClientState] = {}
    for i in range(1, params.n + 1):
        crng = rng.child("sa-client", i)
        k_i = crng.scalar(nonzero=True)
        clients[i] = SAClientState(
            index=i,
            params=params,
            dh_secret=k_i,
            dh_public=generator_pow(k_i),
            self_seed=crng.scalar(),
            neighbor_publics={},
        )
    for i, state in clients.items():
        for j in graph[i]:
            state.neighbor_publics[j] = clients[j].dh_public
    # each client Shamir-shares b_i and k_i among its neighbors, indexed by
    # the recipients' global ids
    for i, state in clients.items():
        nbrs = list(graph[i])
        srng = rng.child("sa-shares", i)
        b_shares = shamir_share(state.self_seed, params.t_sa, len(nbrs), srng, indices=nbrs)
        k_shares = shamir_share(state.dh_secret, params.t_sa, len(nbrs), srng, indices=nbrs)
        for share_b, share_k in zip(b_shares, k_shares):
            clients[share_b.index].held_b_shares[i] = share_b
            clients[share_k.index].held_k_shares[i] = share_k
    server = SAServerState(
        params=params,
        publics={i: c.dh_public for i, c in clients.items()},
        graph=graph,
    )
    return clients, server


def sa_protect(state: SAClientState, update: ModelVector) -> ModelVector:
    """Mask a model update: c_i = m_i + expand(b_i) +/- pairwise masks."""
    if update.dimension != state.params.dimension:
        raise ParameterError("update dimension does not match round parameters")
    if len(state.neighbor_publics) != len(state.neighbors):
        raise StateError("neighbor publics incomplete")
    if state.protected:
        raise StateError(f"client {state.index} already protected an update this round")
    masked = update.add_mask(state.mask_offset())
    state.protected = True
    return masked


def sa_aggregate(
    server: SAServerState,
    masked: Mapping[int, ModelVector],
    b_shares: Mapping[int, Sequence[ShamirShare]],
    k_shares: Mapping[int, Sequence[ShamirShare]],
) -> ModelVector:
    """Sum the online updates and strip every mask.

    `masked` holds c_i for the online set; `b_shares[i]` are shares of b_i for
    online i, `k_shares[j]` shares of k_j for dropped j.  Raises
    UnmaskableRoundError when any needed secret has fewer than t_sa shares.
    """
    params = server.params
    online = set(masked)
    if not online:
        raise UnmaskableRoundError("no masked updates received")
    everyone = set(server.graph)
    if not online <= everyone:
        raise ParameterError(f"unknown client ids: {sorted(online - everyone)}")
    dropped = everyone - online

    misplaced_b = set(b_shares) - online
    if misplaced_b:
        raise StateError(f"b-shares supplied for non-online clients: {sorted(misplaced_b)}")
    misplaced_k = set(k_shares) & online
    if misplaced_k:
        raise StateError(f"k-shares supplied for online clients: {sorted(misplaced_k)}")

    d = params.dimension
    total: Optional[ModelVector] = None
    for i in sorted(online):
        c_i = masked[i]
        if c_i.dimension != d:
            raise ParameterError(f"client {i} update has wrong dimension")
        total = c_i if total is None else total + c_i

    # self-masks of online clients come off via reconstructed b_i
    for i in sorted(online):
        shares = list(b_shares.get(i, ()))
        if len(shares) < params.t_sa:
            raise UnmaskableRoundError(
                f"client {i}: {len(shares)} b-shares < t_sa={params.t_sa}"
            )
        b_i = shamir_reconstruct(shares, params.t_sa)
        total = total.add_mask(prg_expand(scalar_to_bytes(b_i), d), sign=-1)

    # pairwise masks toward dropped neighbors come off via reconstructed k_j
    needed = {j for j in dropped if any(i in online for i in server.graph[j])}
    recovered: Dict[int, int] = {}
    for j in sorted(needed):
        shares = list(k_shares.get(j, ()))
        if len(shares) < params.t_sa:
            raise UnmaskableRoundError(
                f"dropped client {j}: {len(shares)} k-shares < t_sa={params.t_sa}"
            )
        k_j = shamir_reconstruct(shares, params.t_sa)
        if generator_pow(k_j) != server.publics[j]:
            raise UnmaskableRoundError(f"reconstructed key for client {j} mismatches registry")
        recovered[j] = k_j

    for j in sorted(needed):
        k_j = recovered[j]
        for i in sorted(server.graph[j]):
            if i not in online:
                continue
            shared = server.publics[i] * k_j  # g^(k_i * k_j)
            mask = prg_expand(pairwise_seed(shared), d)
            # remove what client i added toward j
            total = total.add_mask(mask, sign=-pair_sign(i, j))

    return total
