"""Adversary plays: capture, lifetime-zero replay, persona forging."""

import pytest

from conftest import records

from slaacsim.addressing import Ipv6Address, MacAddress, Prefix
from slaacsim.attacker import AttackMode, Attacker, NoCapturedRa, PersonaMissing
from slaacsim.defense import sign_ra
from slaacsim.messages import (
    NeighborSolicitation,
    PrefixInfo,
    RouterAdvertisement,
    RouterPreference,
)
from slaacsim.router import RouterConfig

A1_MAC = MacAddress.parse("00:00:5e:00:53:66")
A1_IP = Ipv6Address.parse("fe80::66")
R1_MAC = MacAddress.parse("00:00:5e:00:53:01")
R1_IP = Ipv6Address.parse("fe80::1")


def make_attacker(persona=None) -> Attacker:
    return Attacker("A1", A1_MAC, A1_IP, persona)


def make_persona(**kw) -> RouterConfig:
    defaults = dict(
        node_id="A1",
        mac=A1_MAC,
        link_local=A1_IP,
        advertised_prefixes=(PrefixInfo(Prefix.parse("2001:db8:bad::/64"), True, 3600, 3600),),
        router_lifetime=9000,
        preference=RouterPreference.HIGH,
    )
    defaults.update(kw)
    return RouterConfig(**defaults)


def legit_ra(lifetime=1800) -> RouterAdvertisement:
    return RouterAdvertisement(R1_MAC, R1_IP, lifetime, RouterPreference.HIGH)


def test_capture_stores_ras_in_order(engine):
    attacker = make_attacker()
    engine.add_node(attacker)
    attacker.on_message(engine, legit_ra(1800), "R1", 0)
    attacker.on_message(engine, legit_ra(900), "R1", 10)
    assert [c.ra.router_lifetime for c in attacker.captured_ras] == [1800, 900]
    assert [c.time for c in attacker.captured_ras] == [0, 10]


def test_non_ra_messages_are_not_captured(engine):
    attacker = make_attacker()
    engine.add_node(attacker)
    ns = NeighborSolicitation(R1_MAC, R1_IP, Ipv6Address.parse("fe80::5"))
    attacker.on_message(engine, ns, "R1", 0)
    assert attacker.captured_ras == []


def test_spoof_zeroes_lifetime_and_keeps_source(engine):
    attacker = make_attacker()
    engine.add_node(attacker)
    attacker.capture_ra(engine, legit_ra(), "R1", 0)
    spoof = attacker.spoof_kill_ra("R1")
    assert spoof.router_lifetime == 0
    assert spoof.src_mac == R1_MAC and spoof.src_ip == R1_IP
    assert spoof.prefixes == legit_ra().prefixes


def test_spoof_without_capture_raises():
    with pytest.raises(NoCapturedRa):
        make_attacker().spoof_kill_ra("R1")


def test_spoof_strips_auth_token(engine):
    engine.keystore.add_key("k1")
    attacker = make_attacker()
    engine.add_node(attacker)
    attacker.capture_ra(engine, sign_ra(legit_ra(), "k1", engine.keystore), "R1", 0)
    assert attacker.spoof_kill_ra("R1").auth is None


def test_forge_uses_attacker_source():
    attacker = make_attacker(make_persona())
    ra = attacker.forge_fake_router_ra()
    assert ra.src_mac == A1_MAC and ra.src_ip == A1_IP
    assert ra.router_lifetime == 9000 and ra.auth is None
    assert str(ra.prefixes[0].prefix) == "2001:db8:bad::/64"


def test_forge_without_persona_raises():
    with pytest.raises(PersonaMissing):
        make_attacker().forge_fake_router_ra()


def test_kill_playbook_emits_exactly_one_spoof(engine):
    attacker = make_attacker()
    engine.add_node(attacker)
    attacker.capture_ra(engine, legit_ra(), "R1", 0)
    attacker.run_playbook(engine, AttackMode.KILL_ROUTER, "R1", 5_000)
    assert len(records(engine, "ra-sent")) == 1
    assert not any(True for (_, _, a) in engine._queue if getattr(a, "timer_id", None) == "ra")


def test_passive_playbook_emits_nothing(engine):
    attacker = make_attacker(make_persona())
    engine.add_node(attacker)
    attacker.run_playbook(engine, AttackMode.PASSIVE, None, 0)
    assert records(engine, "ra-sent") == []


def test_mitm_playbook_kills_then_forges_periodically(engine):
    attacker = make_attacker(make_persona())
    engine.add_node(attacker)
    attacker.capture_ra(engine, legit_ra(), "R1", 0)
    attacker.run_playbook(engine, AttackMode.FAKE_ROUTER_MITM, None, 5_000)
    sent = records(engine, "ra-sent")
    assert len(sent) == 2  # the kill replay, then the first forgery
    assert dict(sent[0].attrs)["lifetime"] == "0"
    assert dict(sent[0].attrs)["src"] == str(R1_IP)
    assert dict(sent[1].attrs)["src"] == str(A1_IP)
    engine.run_until(15_000)
    assert len(records(engine, "ra-sent")) == 3  # re-forged at 15 s
    assert attacker.routing_enabled()


def test_blackhole_playbook_never_routes(engine):
    attacker = make_attacker(make_persona(can_route=True))
    engine.add_node(attacker)
    attacker.run_playbook(engine, AttackMode.BLACKHOLE_GATEWAY, None, 0)
    assert not attacker.routing_enabled()


def test_dualstack_playbook_routes_per_persona(engine):
    attacker = make_attacker(make_persona(can_route=True))
    engine.add_node(attacker)
    attacker.run_playbook(engine, AttackMode.DUAL_STACK_ROGUE, None, 0)
    assert attacker.routing_enabled()
    assert records(engine, "ra-sent")


def test_attacker_never_emits_valid_auth(engine):
    # Even when signed RAs are captured, everything the attacker emits is
    # unauthenticated.
    from slaacsim.defense import verify_ra

    engine.keystore.add_key("k1")
    engine.trust_registry.add_key("k1", engine.keystore.secret_for("k1"))
    attacker = make_attacker(make_persona())
    engine.add_node(attacker)
    attacker.capture_ra(engine, sign_ra(legit_ra(), "k1", engine.keystore), "R1", 0)
    emissions = [
        attacker.spoof_kill_ra("R1"),
        attacker.forge_fake_router_ra(),
    ]
    assert all(not verify_ra(ra, engine.trust_registry) for ra in emissions)
