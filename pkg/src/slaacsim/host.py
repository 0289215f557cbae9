"""Host-side stateless autoconfiguration: link-local generation, duplicate
address detection, router-advertisement processing, default-router selection,
lifetime bookkeeping, and dual-stack next-hop resolution.

All times are engine milliseconds; wire lifetimes are seconds and are
converted at the point of use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .addressing import (
    IID_MASK,
    UNSPECIFIED,
    Ipv4Address,
    Ipv6Address,
    MacAddress,
    Prefix,
    derive_eui64,
    global_from,
    link_local_from,
)
from .defense import cga_generate, verify_ra
from .messages import (
    AddressFamily,
    NdMessage,
    NeighborAdvertisement,
    NeighborSolicitation,
    RouterAdvertisement,
    RouterPreference,
    RouterSolicitation,
)

if TYPE_CHECKING:
    from .engine import Engine

MS = 1000
DAD_TIMEOUT_MS = 1 * MS  # single probe, one-second deadline
TWO_HOURS = 7200  # seconds

LINK_LOCAL = "link-local"
SLAAC = "slaac"


class AddressState(enum.Enum):
    TENTATIVE = "tentative"
    ASSIGNED = "assigned"
    ABANDONED = "abandoned"


@dataclass
class AddressEntry:
    """One configured address. ``valid_until``/``preferred_until`` are absolute
    engine times; None means an infinite lifetime (link-local)."""

    address: Ipv6Address
    state: AddressState
    origin: str  # LINK_LOCAL or SLAAC
    prefix: Optional[Prefix] = None  # set for SLAAC entries
    learned_from: Optional[str] = None
    valid_until: Optional[int] = None
    preferred_until: Optional[int] = None


@dataclass
class DefaultRouterEntry:
    router_ip: Ipv6Address
    router_mac: MacAddress
    expires_at: int
    preference: RouterPreference
    refreshed_at: int


@dataclass(frozen=True)
class NextHop:
    """Resolved next hop for an off-link destination."""

    family: AddressFamily
    router_ip: Optional[Ipv6Address]  # IPv6 route
    gateway_node: Optional[str]  # IPv4 route
    src_addr: str


def apply_two_hour_rule(remaining: int, received: int, two_hours: int = TWO_HOURS) -> int:
    """Valid-lifetime update rule limiting how far an unauthenticated
    advertisement can shorten an address's remaining lifetime."""
    if received > two_hours or received > remaining:
        return received
    if remaining <= two_hours:
        return remaining
    return two_hours


class Host(object):
    """SLAAC state machine for one interface on the simulated link."""

    def __init__(
        self,
        node_id: str,
        mac: MacAddress,
        ipv6_enabled: bool = True,
        ipv4: Optional[tuple[Ipv4Address, str]] = None,
        send_only: bool = False,
        iid_override: Optional[int] = None,
        cga: Optional[tuple[str, int]] = None,
    ):
        self.node_id = node_id
        self.mac = mac
        self.ipv6_enabled = ipv6_enabled
        self.ipv4 = ipv4
        self.send_only = send_only
        if iid_override is not None:
            self.iid = iid_override & IID_MASK
        elif cga is not None:
            self.iid = cga_generate(cga[0], cga[1])
        else:
            self.iid = derive_eui64(mac)
        self.addresses: list[AddressEntry] = []
        self.router_list: list[DefaultRouterEntry] = []
        self.dad_pending: dict[Ipv6Address, int] = {}
        self.family_preference: tuple[AddressFamily, ...] = (
            AddressFamily.IPV6,
            AddressFamily.IPV4,
        )

    # -- phase 1 -------------------------------------------------------------

    def begin_autoconf(self, ctx: "Engine", now: int) -> None:
        """Create the tentative link-local address and start its DAD probe."""
        if not self.ipv6_enabled:
            return
        if any(e.origin == LINK_LOCAL for e in self.addresses):
            return
        entry = AddressEntry(link_local_from(self.iid), AddressState.TENTATIVE, LINK_LOCAL)
        self.addresses.append(entry)
        self._start_dad(ctx, entry, now)

    def _start_dad(self, ctx: "Engine", entry: AddressEntry, now: int) -> None:
        deadline = now + DAD_TIMEOUT_MS
        self.dad_pending[entry.address] = deadline
        ctx.trace(self.node_id, "dad-start", addr=entry.address, deadline=deadline)
        ctx.broadcast(
            self.node_id,
            NeighborSolicitation(self.mac, UNSPECIFIED, entry.address),
            now,
        )
        ctx.set_timer(self.node_id, f"dad:{entry.address}", deadline)

    def on_neighbor_solicitation(
        self, ctx: "Engine", msg: NeighborSolicitation, sender_id: str, now: int
    ) -> None:
        if not self.ipv6_enabled:
            return
        entry = self._entry_for(msg.target)
        if entry is None:
            return
        if entry.state is AddressState.ASSIGNED:
            # Defend an address we hold: the soliciting node must abandon.
            self._send_na(ctx, entry.address, entry.address, now)
        elif entry.state is AddressState.TENTATIVE:
            # Simultaneous DAD for the same target; the lexicographically
            # smaller node id wins, the other abandons.
            if self.node_id < sender_id:
                self._send_na(ctx, entry.address, UNSPECIFIED, now)
            else:
                self._abandon_tentative(ctx, entry)

    def on_neighbor_advertisement(self, ctx: "Engine", msg: NeighborAdvertisement, now: int) -> None:
        if not self.ipv6_enabled:
            return
        entry = self._entry_for(msg.target)
        if entry is not None and entry.state is AddressState.TENTATIVE:
            self._abandon_tentative(ctx, entry)

    def _send_na(self, ctx: "Engine", target: Ipv6Address, src_ip: Ipv6Address, now: int) -> None:
        ctx.broadcast(self.node_id, NeighborAdvertisement(self.mac, src_ip, target), now)

    def _abandon_tentative(self, ctx: "Engine", entry: AddressEntry) -> None:
        entry.state = AddressState.ABANDONED
        self.dad_pending.pop(entry.address, None)
        ctx.trace(self.node_id, "dad-failed", addr=entry.address)

    def dad_deadline(self, ctx: "Engine", address: Ipv6Address, now: int) -> None:
        """No conflict arrived before the deadline: assign the address."""
        deadline = self.dad_pending.get(address)
        if deadline is None or deadline > now:
            return  # cancelled by a conflict, or superseded
        del self.dad_pending[address]
        entry = self._entry_for(address)
        if entry is None or entry.state is not AddressState.TENTATIVE:
            return
        entry.state = AddressState.ASSIGNED
        ctx.trace(self.node_id, "addr-assigned", addr=address, origin=entry.origin)
        if entry.origin == LINK_LOCAL:
            # Phase 2 entry point: solicit router advertisements.
            ctx.broadcast(self.node_id, RouterSolicitation(self.mac, address), now)

    # -- phase 2 -------------------------------------------------------------

    def process_ra(self, ctx: "Engine", ra: RouterAdvertisement, now: int) -> None:
        if not self.ipv6_enabled:
            return
        if self.send_only and not verify_ra(ra, ctx.trust_registry):
            ctx.trace(self.node_id, "ra-rejected-send", src=ra.src_ip)
            return
        self._update_router_list(ctx, ra, now)
        for info in ra.prefixes:
            if not info.autonomous:
                continue
            if info.prefix.length != 64:
                ctx.trace(self.node_id, "prefix-ignored", prefix=info.prefix, reason="length")
                continue
            self._apply_prefix(ctx, ra, info, now)

    def _update_router_list(self, ctx: "Engine", ra: RouterAdvertisement, now: int) -> None:
        entry = next((e for e in self.router_list if e.router_ip == ra.src_ip), None)
        if ra.router_lifetime > 0:
            expires = now + ra.router_lifetime * MS
            if entry is None:
                self.router_list.append(
                    DefaultRouterEntry(ra.src_ip, ra.src_mac, expires, ra.preference, now)
                )
                ctx.trace(
                    self.node_id, "router-added",
                    router=ra.src_ip, pref=ra.preference, expires=expires,
                )
            else:
                entry.router_mac = ra.src_mac
                entry.expires_at = expires
                entry.preference = ra.preference
                entry.refreshed_at = now
                ctx.trace(
                    self.node_id, "router-refreshed",
                    router=ra.src_ip, pref=ra.preference, expires=expires,
                )
            ctx.set_timer(self.node_id, "expiry", expires)
        elif entry is not None:
            self.router_list.remove(entry)
            ctx.trace(self.node_id, "router-removed", router=ra.src_ip, reason="lifetime-zero")

    def _apply_prefix(self, ctx: "Engine", ra: RouterAdvertisement, info, now: int) -> None:
        existing = next(
            (e for e in self.addresses if e.origin == SLAAC and e.prefix == info.prefix), None
        )
        if existing is None:
            entry = AddressEntry(
                global_from(info.prefix, self.iid),
                AddressState.TENTATIVE,
                SLAAC,
                prefix=info.prefix,
                learned_from=ctx.node_label_for_ip(ra.src_ip),
                valid_until=now + info.valid_lifetime * MS,
                preferred_until=now + info.preferred_lifetime * MS,
            )
            self.addresses.append(entry)
            ctx.set_timer(self.node_id, "expiry", entry.valid_until)
            self._start_dad(ctx, entry, now)
        elif existing.state is not AddressState.ABANDONED:
            self._refresh_lifetimes(ctx, existing, info, now)
        # An abandoned entry for the prefix means autoconfiguration stopped;
        # never re-create it.

    def _refresh_lifetimes(self, ctx: "Engine", entry: AddressEntry, info, now: int) -> None:
        remaining_ms = max(0, (entry.valid_until or now) - now)
        received_ms = info.valid_lifetime * MS
        if ctx.two_hour_rule:
            new_valid_ms = apply_two_hour_rule(remaining_ms, received_ms, TWO_HOURS * MS)
        else:
            new_valid_ms = received_ms
        entry.valid_until = now + new_valid_ms
        entry.preferred_until = min(now + info.preferred_lifetime * MS, entry.valid_until)
        ctx.set_timer(self.node_id, "expiry", entry.valid_until)
        ctx.trace(self.node_id, "addr-lifetime", addr=entry.address, valid_ms=new_valid_ms)

    # -- bookkeeping -----------------------------------------------------------

    def tick_lifetimes(self, ctx: "Engine", now: int) -> None:
        for entry in [e for e in self.router_list if e.expires_at <= now]:
            self.router_list.remove(entry)
            ctx.trace(self.node_id, "router-removed", router=entry.router_ip, reason="expired")
        for entry in self.addresses:
            if (
                entry.state is not AddressState.ABANDONED
                and entry.valid_until is not None
                and entry.valid_until <= now
            ):
                entry.state = AddressState.ABANDONED
                self.dad_pending.pop(entry.address, None)
                ctx.trace(self.node_id, "addr-abandoned", addr=entry.address, reason="expired")

    def select_default_router(self, now: int) -> Optional[DefaultRouterEntry]:
        """Highest preference among unexpired entries; ties broken by most
        recent refresh, then lowest router address."""
        live = [e for e in self.router_list if e.expires_at > now]
        if not live:
            return None
        return max(live, key=lambda e: (e.preference, e.refreshed_at, -e.router_ip.value))

    def first_assigned_global(self, now: int) -> Optional[AddressEntry]:
        for entry in self.addresses:
            if entry.origin == SLAAC and entry.state is AddressState.ASSIGNED:
                return entry
        return None

    def resolve_next_hop(self, now: int) -> Optional[NextHop]:
        """Next hop for an off-link destination, in address-family preference
        order; None when no family can reach off-link (the DoS condition)."""
        for family in self.family_preference:
            if family is AddressFamily.IPV6 and self.ipv6_enabled:
                source = self.first_assigned_global(now)
                router = self.select_default_router(now)
                if source is not None and router is not None:
                    return NextHop(family, router.router_ip, None, str(source.address))
            elif family is AddressFamily.IPV4 and self.ipv4 is not None:
                return NextHop(family, None, self.ipv4[1], str(self.ipv4[0]))
        return None

    # -- dispatch ---------------------------------------------------------------

    def on_message(self, ctx: "Engine", msg: NdMessage, sender_id: str, now: int) -> None:
        if isinstance(msg, RouterAdvertisement):
            self.process_ra(ctx, msg, now)
        elif isinstance(msg, NeighborSolicitation):
            self.on_neighbor_solicitation(ctx, msg, sender_id, now)
        elif isinstance(msg, NeighborAdvertisement):
            self.on_neighbor_advertisement(ctx, msg, now)
        # Router solicitations and data payloads are not for hosts.

    def on_timer(self, ctx: "Engine", timer_id: str, now: int) -> None:
        if timer_id == "autoconf":
            self.begin_autoconf(ctx, now)
        elif timer_id.startswith("dad:"):
            self.dad_deadline(ctx, Ipv6Address.parse(timer_id[4:]), now)
        elif timer_id == "expiry":
            self.tick_lifetimes(ctx, now)

    def _entry_for(self, address: Ipv6Address) -> Optional[AddressEntry]:
        for entry in self.addresses:
            if entry.address == address and entry.state is not AddressState.ABANDONED:
                return entry
        return None
