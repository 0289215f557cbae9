"""Port filtering, advertisement signing, and digest-bound identifiers."""

import random
from dataclasses import replace

import pytest

from slaacsim.addressing import Ipv6Address, MacAddress
from slaacsim.defense import (
    PortClass,
    PortPolicy,
    SwitchPort,
    TrustAnchorRegistry,
    UnknownKeyError,
    cga_generate,
    cga_verify,
    filter_ingress,
    sign_ra,
    verify_ra,
)
from slaacsim.messages import NeighborSolicitation, RouterAdvertisement, RouterPreference

R1_MAC = MacAddress.parse("00:00:5e:00:53:01")
A1_MAC = MacAddress.parse("00:00:5e:00:53:66")
R1_IP = Ipv6Address.parse("fe80::1")


def make_ra(src_mac=R1_MAC, lifetime=1800) -> RouterAdvertisement:
    return RouterAdvertisement(src_mac, R1_IP, lifetime, RouterPreference.HIGH)


def port(port_class=PortClass.HOST_FACING, ra_guard=False, acl=None) -> SwitchPort:
    return SwitchPort("p1", "N1", port_class, PortPolicy(ra_guard, acl))


# -- ingress filtering ---------------------------------------------------------

def test_ra_guard_drops_ra_on_host_port():
    assert filter_ingress(port(ra_guard=True), make_ra()) == "ra-guard"


def test_ra_guard_spares_router_ports():
    guarded = port(PortClass.ROUTER_FACING, ra_guard=True)
    assert filter_ingress(guarded, make_ra()) is None


def test_acl_forwards_listed_source():
    allowing = port(PortClass.ROUTER_FACING, acl=frozenset({R1_MAC}))
    assert filter_ingress(allowing, make_ra()) is None


def test_acl_drops_unlisted_source():
    allowing = port(acl=frozenset({R1_MAC}))
    assert filter_ingress(allowing, make_ra(src_mac=A1_MAC)) == "acl"


def test_empty_acl_drops_every_ra():
    assert filter_ingress(port(acl=frozenset()), make_ra()) == "acl"


def test_non_ra_messages_always_pass():
    guarded = port(ra_guard=True, acl=frozenset())
    ns = NeighborSolicitation(A1_MAC, Ipv6Address(0), R1_IP)
    assert filter_ingress(guarded, ns) is None


# -- signing -----------------------------------------------------------------------

@pytest.fixture
def registry():
    reg = TrustAnchorRegistry()
    reg.add_key("k1")
    return reg


def test_sign_then_verify_round_trip(registry):
    assert verify_ra(sign_ra(make_ra(), "k1", registry), registry)


def test_mutated_lifetime_fails_verification(registry):
    signed = sign_ra(make_ra(lifetime=1800), "k1", registry)
    tampered = replace(signed, router_lifetime=0)
    assert not verify_ra(tampered, registry)


def test_unsigned_ra_fails_verification(registry):
    assert not verify_ra(make_ra(), registry)


def test_unknown_key_fails_verification(registry):
    signed = sign_ra(make_ra(), "k1", registry)
    assert not verify_ra(signed, TrustAnchorRegistry())


def test_signing_with_unknown_key_raises(registry):
    with pytest.raises(UnknownKeyError):
        sign_ra(make_ra(), "k9", registry)


def test_tag_is_128_bits(registry):
    assert len(sign_ra(make_ra(), "k1", registry).auth.tag) == 16


# -- digest-bound identifiers ----------------------------------------------------------

def test_cga_is_deterministic():
    assert cga_generate("key", 7) == cga_generate("key", 7)


def test_cga_distinct_keys_collide_nowhere_in_sample():
    rng = random.Random(7)
    keys = [f"key-{rng.getrandbits(64):x}" for _ in range(1000)]
    iids = {cga_generate(k, 0) for k in keys}
    assert len(iids) == len(keys)


def test_cga_round_trip_and_mutations():
    iid = cga_generate("key", 7)
    assert cga_verify(iid, "key", 7)
    assert not cga_verify(iid, "other", 7)
    assert not cga_verify(iid, "key", 8)


def test_cga_clears_flag_bits():
    for modifier in range(32):
        iid = cga_generate("key", modifier)
        assert iid >> 56 & 0x03 == 0
        assert iid < 1 << 64
