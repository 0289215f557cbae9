"""Neighbor-discovery message vocabulary plus the generic data payload used
for path probing."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

from .addressing import Ipv6Address, MacAddress, Prefix


class RouterPreference(enum.IntEnum):
    """Default-router selection preference; total order LOW < MEDIUM < HIGH."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @classmethod
    def parse(cls, text: str) -> "RouterPreference":
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown preference {text!r}") from None

    def __str__(self) -> str:
        return self.name.lower()


class AddressFamily(enum.Enum):
    IPV6 = "ipv6"
    IPV4 = "ipv4"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PrefixInfo:
    """Prefix option carried in a router advertisement."""

    prefix: Prefix
    autonomous: bool
    valid_lifetime: int
    preferred_lifetime: int

    def __post_init__(self):
        if self.valid_lifetime < 0 or self.preferred_lifetime < 0:
            raise ValueError("lifetimes must be non-negative")
        if self.preferred_lifetime > self.valid_lifetime:
            raise ValueError("preferred lifetime exceeds valid lifetime")


@dataclass(frozen=True)
class AuthToken:
    """Opaque authentication token; producible only by a key holder."""

    key_id: str
    tag: bytes


MAX_ROUTER_LIFETIME = 65535


@dataclass(frozen=True)
class RouterAdvertisement:
    src_mac: MacAddress
    src_ip: Ipv6Address
    router_lifetime: int  # seconds; 0 means "not a default router"
    preference: RouterPreference = RouterPreference.MEDIUM
    prefixes: tuple[PrefixInfo, ...] = ()
    auth: Optional[AuthToken] = None

    def __post_init__(self):
        if not 0 <= self.router_lifetime <= MAX_ROUTER_LIFETIME:
            raise ValueError(f"router lifetime {self.router_lifetime} out of range")


@dataclass(frozen=True)
class RouterSolicitation:
    src_mac: MacAddress
    src_ip: Ipv6Address


@dataclass(frozen=True)
class NeighborSolicitation:
    src_mac: MacAddress
    src_ip: Ipv6Address
    target: Ipv6Address


@dataclass(frozen=True)
class NeighborAdvertisement:
    src_mac: MacAddress
    src_ip: Ipv6Address
    target: Ipv6Address


@dataclass(frozen=True)
class DataMessage:
    """Unicast payload used to probe the forwarding path to the external sink."""

    src_node: str
    dst_node: str
    family: AddressFamily
    src_addr: str
    payload_id: int


NdMessage = Union[
    RouterAdvertisement,
    RouterSolicitation,
    NeighborSolicitation,
    NeighborAdvertisement,
    DataMessage,
]
