"""Line-oriented scenario files: parsing, validation, canonical re-printing,
and wiring a parsed scenario into an engine.

Grammar (one directive per line, ``#`` starts a comment)::

    link-latency <sec>
    switch <id> ports=<n>
    node router <id> mac=<mac> [ip=<v6>] [prefix=<p>/64[,...]] [lifetime=<s>]
         [preference=low|medium|high] [interval=<s>] [valid=<s>] [preferred=<s>]
         [routes=yes|no] [ra=on|off] [jitter=<s>]
    node host <id> mac=<mac> [ipv6=on|off] [ipv4=<v4> gw4=<node>] [send=on|off]
         [iid=<16 hex>] [cga-key=<id> cga-modifier=<n>]
    node attacker <id> mac=<mac> [ip=<v6>] [persona-prefix=<p>/64]
         [persona-lifetime=<s>] [persona-preference=<pref>] [persona-interval=<s>]
         [persona-routes=yes|no] [persona-valid=<s>] [persona-preferred=<s>]
    attach <node> <switch>.<port> class=router|host
    policy <switch>.<port> ra-guard
    policy <switch>.<port> acl=<mac>[,<mac>...]
    policy global two-hour-rule
    key <router> <key-id>
    trust <key-id>
    at <sec> attack <attacker> kill-router target=<router>
    at <sec> attack <attacker> fake-router|blackhole|dual-stack|passive
    at <sec> measure
    at <sec> disable <router> | enable <router>
    allow-dup-mac
    expect <metric>=<value>
    run <sec> [seed=<n>]
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .addressing import (
    AddressParseError,
    Ipv4Address,
    Ipv6Address,
    MacAddress,
    Prefix,
    derive_eui64,
    iid_text,
    link_local_from,
    parse_iid,
)
from .attacker import Attacker, AttackMode
from .defense import PortClass
from .engine import (
    SINK,
    AttackDirective,
    Engine,
    MeasureDirective,
    RunMetrics,
    ToggleDirective,
)
from .host import Host
from .messages import PrefixInfo, RouterPreference
from .router import Router, RouterConfig

MS = 1000

_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")

ATTACK_MODES = {m.value: m for m in AttackMode}
FLAG_METRICS = ("dos_success", "mitm_success", "dualstack_success")
HOST_METRIC_FIELDS = ("default_router", "family_in_use", "iid")


class ScenarioError(ValueError):
    pass


class ScenarioParseError(ScenarioError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ScenarioValidationError(ScenarioError):
    pass


# -- declarations -------------------------------------------------------------

@dataclass(frozen=True)
class RouterDecl:
    node_id: str
    mac: MacAddress
    ip: Ipv6Address
    prefixes: tuple[Prefix, ...] = ()
    lifetime: int = 1800
    preference: RouterPreference = RouterPreference.MEDIUM
    interval_ms: int = 10 * MS
    valid: int = 3600
    preferred: int = 3600
    routes: bool = True
    ra_on: bool = True
    jitter_ms: int = 0


@dataclass(frozen=True)
class HostDecl:
    node_id: str
    mac: MacAddress
    ipv6_on: bool = True
    ipv4: Optional[Ipv4Address] = None
    gw4: Optional[str] = None
    send_on: bool = False
    iid: Optional[int] = None
    cga_key: Optional[str] = None
    cga_modifier: Optional[int] = None


@dataclass(frozen=True)
class PersonaDecl:
    prefix: Optional[Prefix] = None
    lifetime: int = 9000
    preference: RouterPreference = RouterPreference.MEDIUM
    interval_ms: int = 10 * MS
    routes: bool = True
    valid: int = 3600
    preferred: int = 3600


@dataclass(frozen=True)
class AttackerDecl:
    node_id: str
    mac: MacAddress
    ip: Ipv6Address
    persona: Optional[PersonaDecl] = None


NodeDecl = Union[RouterDecl, HostDecl, AttackerDecl]


@dataclass(frozen=True)
class AttachDecl:
    node: str
    switch: str
    port: str
    port_class: str  # "router" | "host"


@dataclass(frozen=True)
class PolicyLine:
    switch: str
    port: str
    kind: str  # "ra-guard" | "acl"
    acl: tuple[MacAddress, ...] = ()


@dataclass(frozen=True)
class AttackAt:
    time_ms: int
    attacker: str
    mode: str
    target: Optional[str] = None


@dataclass(frozen=True)
class MeasureAt:
    time_ms: int


@dataclass(frozen=True)
class ToggleAt:
    time_ms: int
    node: str
    enabled: bool


Directive = Union[AttackAt, MeasureAt, ToggleAt]


@dataclass
class Scenario:
    link_latency_ms: int = 1
    switch: Optional[tuple[str, int]] = None
    nodes: list[NodeDecl] = field(default_factory=list)
    attaches: list[AttachDecl] = field(default_factory=list)
    policies: list[PolicyLine] = field(default_factory=list)
    two_hour_rule: bool = False
    keys: list[tuple[str, str]] = field(default_factory=list)
    trusts: list[str] = field(default_factory=list)
    directives: list[Directive] = field(default_factory=list)
    expects: list[tuple[str, str]] = field(default_factory=list)
    allow_dup_mac: bool = False
    run_ms: int = 0
    seed: int = 0

    def node_ids(self) -> list[str]:
        return [n.node_id for n in self.nodes]


# -- parsing -------------------------------------------------------------------

def _parse_time_ms(text: str, line_no: int) -> int:
    try:
        value = float(text)
    except ValueError:
        raise ScenarioParseError(line_no, f"bad time {text!r}") from None
    if value < 0:
        raise ScenarioParseError(line_no, "time must be non-negative")
    return round(value * MS)


def _fmt_time(ms: int) -> str:
    if ms % MS == 0:
        return str(ms // MS)
    return f"{ms // MS}.{ms % MS:03d}".rstrip("0")


def _parse_int(text: str, line_no: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioParseError(line_no, f"bad {what} {text!r}") from None


def _parse_router_lifetime(text: str, line_no: int, what: str) -> int:
    value = _parse_int(text, line_no, what)
    if not 0 <= value <= 65535:
        raise ScenarioParseError(line_no, f"{what} {value} out of range 0..65535")
    return value


def _parse_interval_ms(text: str, line_no: int, what: str) -> int:
    value = _parse_time_ms(text, line_no)
    if value <= 0:
        raise ScenarioParseError(line_no, f"{what} must be positive")
    return value


def _parse_onoff(text: str, line_no: int, what: str) -> bool:
    if text in ("on", "yes"):
        return True
    if text in ("off", "no"):
        return False
    raise ScenarioParseError(line_no, f"bad {what} {text!r} (want on/off or yes/no)")


def _kv(tokens: list[str], line_no: int, allowed: tuple[str, ...]) -> dict[str, str]:
    out: dict[str, str] = {}
    for token in tokens:
        key, sep, value = token.partition("=")
        if not sep:
            raise ScenarioParseError(line_no, f"expected key=value, got {token!r}")
        if key not in allowed:
            raise ScenarioParseError(line_no, f"unknown key {key!r}")
        if key in out:
            raise ScenarioParseError(line_no, f"duplicate key {key!r}")
        out[key] = value
    return out


def _node_id(text: str, line_no: int) -> str:
    if not _ID_RE.match(text) or text in (SINK, "global"):
        raise ScenarioParseError(line_no, f"bad identifier {text!r}")
    return text


def _port_ref(text: str, line_no: int) -> tuple[str, str]:
    switch, sep, port = text.partition(".")
    if not sep or not switch or not port:
        raise ScenarioParseError(line_no, f"expected <switch>.<port>, got {text!r}")
    return switch, port


def parse_scenario(text: str) -> Scenario:
    sc = Scenario()
    seen_run = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        try:
            if head == "link-latency":
                _need(tokens, 2, line_no)
                sc.link_latency_ms = _parse_time_ms(tokens[1], line_no)
            elif head == "switch":
                if sc.switch is not None:
                    raise ScenarioParseError(line_no, "only one switch is supported")
                _need(tokens, 3, line_no)
                kv = _kv(tokens[2:], line_no, ("ports",))
                if "ports" not in kv:
                    raise ScenarioParseError(line_no, "switch needs ports=<n>")
                sc.switch = (_node_id(tokens[1], line_no), _parse_int(kv["ports"], line_no, "port count"))
            elif head == "node":
                _need_at_least(tokens, 3, line_no)
                sc.nodes.append(_parse_node(tokens, line_no))
            elif head == "attach":
                _need(tokens, 4, line_no)
                switch, port = _port_ref(tokens[2], line_no)
                kv = _kv(tokens[3:], line_no, ("class",))
                port_class = kv.get("class", "host")
                if port_class not in ("router", "host"):
                    raise ScenarioParseError(line_no, f"bad port class {port_class!r}")
                sc.attaches.append(AttachDecl(tokens[1], switch, port, port_class))
            elif head == "policy":
                sc.policies, sc.two_hour_rule = _parse_policy(
                    tokens, line_no, sc.policies, sc.two_hour_rule
                )
            elif head == "key":
                _need(tokens, 3, line_no)
                sc.keys.append((tokens[1], _node_id(tokens[2], line_no)))
            elif head == "trust":
                _need(tokens, 2, line_no)
                sc.trusts.append(_node_id(tokens[1], line_no))
            elif head == "at":
                _need_at_least(tokens, 3, line_no)
                sc.directives.append(_parse_directive(tokens, line_no))
            elif head == "expect":
                _need(tokens, 2, line_no)
                key, sep, value = tokens[1].partition("=")
                if not sep:
                    raise ScenarioParseError(line_no, "expect needs <metric>=<value>")
                sc.expects.append((key, value))
            elif head == "allow-dup-mac":
                sc.allow_dup_mac = True
            elif head == "run":
                _need_at_least(tokens, 2, line_no)
                sc.run_ms = _parse_time_ms(tokens[1], line_no)
                kv = _kv(tokens[2:], line_no, ("seed",))
                if "seed" in kv:
                    sc.seed = _parse_int(kv["seed"], line_no, "seed")
                seen_run = True
            else:
                raise ScenarioParseError(line_no, f"unknown directive {head!r}")
        except AddressParseError as exc:
            raise ScenarioParseError(line_no, str(exc)) from exc
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioParseError(line_no, str(exc)) from exc
    if not seen_run:
        raise ScenarioValidationError("scenario has no run directive")
    _validate(sc)
    return sc


def _need(tokens: list[str], count: int, line_no: int) -> None:
    if len(tokens) != count:
        raise ScenarioParseError(line_no, f"expected {count} tokens, got {len(tokens)}")


def _need_at_least(tokens: list[str], count: int, line_no: int) -> None:
    if len(tokens) < count:
        raise ScenarioParseError(line_no, f"expected at least {count} tokens")


_ROUTER_KEYS = (
    "mac", "ip", "prefix", "lifetime", "preference", "interval",
    "valid", "preferred", "routes", "ra", "jitter",
)
_HOST_KEYS = ("mac", "ipv6", "ipv4", "gw4", "send", "iid", "cga-key", "cga-modifier")
_ATTACKER_KEYS = (
    "mac", "ip", "persona-prefix", "persona-lifetime", "persona-preference",
    "persona-interval", "persona-routes", "persona-valid", "persona-preferred",
)


def _parse_node(tokens: list[str], line_no: int) -> NodeDecl:
    kind = tokens[1]
    node_id = _node_id(tokens[2], line_no)
    if kind == "router":
        kv = _kv(tokens[3:], line_no, _ROUTER_KEYS)
        mac = _require_mac(kv, line_no)
        ip = Ipv6Address.parse(kv["ip"]) if "ip" in kv else link_local_from(derive_eui64(mac))
        prefixes = tuple(
            Prefix.parse(p) for p in kv["prefix"].split(",") if p
        ) if "prefix" in kv else ()
        valid = _parse_int(kv.get("valid", "3600"), line_no, "valid lifetime")
        preferred = _parse_int(kv.get("preferred", "3600"), line_no, "preferred lifetime")
        if preferred > valid:
            raise ScenarioParseError(line_no, "preferred lifetime exceeds valid lifetime")
        return RouterDecl(
            node_id=node_id,
            mac=mac,
            ip=ip,
            prefixes=prefixes,
            lifetime=_parse_router_lifetime(kv.get("lifetime", "1800"), line_no, "lifetime"),
            preference=RouterPreference.parse(kv.get("preference", "medium")),
            interval_ms=_parse_interval_ms(kv.get("interval", "10"), line_no, "interval"),
            valid=valid,
            preferred=preferred,
            routes=_parse_onoff(kv.get("routes", "yes"), line_no, "routes"),
            ra_on=_parse_onoff(kv.get("ra", "on"), line_no, "ra"),
            jitter_ms=_parse_time_ms(kv.get("jitter", "0"), line_no),
        )
    if kind == "host":
        kv = _kv(tokens[3:], line_no, _HOST_KEYS)
        mac = _require_mac(kv, line_no)
        if ("ipv4" in kv) != ("gw4" in kv):
            raise ScenarioParseError(line_no, "ipv4 and gw4 must be given together")
        if ("cga-key" in kv) != ("cga-modifier" in kv):
            raise ScenarioParseError(line_no, "cga-key and cga-modifier must be given together")
        if "iid" in kv and "cga-key" in kv:
            raise ScenarioParseError(line_no, "iid and cga-key are mutually exclusive")
        return HostDecl(
            node_id=node_id,
            mac=mac,
            ipv6_on=_parse_onoff(kv.get("ipv6", "on"), line_no, "ipv6"),
            ipv4=Ipv4Address.parse(kv["ipv4"]) if "ipv4" in kv else None,
            gw4=kv.get("gw4"),
            send_on=_parse_onoff(kv.get("send", "off"), line_no, "send"),
            iid=parse_iid(kv["iid"]) if "iid" in kv else None,
            cga_key=kv.get("cga-key"),
            cga_modifier=_parse_int(kv["cga-modifier"], line_no, "cga modifier")
            if "cga-modifier" in kv else None,
        )
    if kind == "attacker":
        kv = _kv(tokens[3:], line_no, _ATTACKER_KEYS)
        mac = _require_mac(kv, line_no)
        ip = Ipv6Address.parse(kv["ip"]) if "ip" in kv else link_local_from(derive_eui64(mac))
        persona = None
        if any(k.startswith("persona-") for k in kv):
            valid = _parse_int(kv.get("persona-valid", "3600"), line_no, "persona valid")
            preferred = _parse_int(kv.get("persona-preferred", "3600"), line_no, "persona preferred")
            if preferred > valid:
                raise ScenarioParseError(line_no, "persona preferred exceeds persona valid")
            persona = PersonaDecl(
                prefix=Prefix.parse(kv["persona-prefix"]) if "persona-prefix" in kv else None,
                lifetime=_parse_router_lifetime(
                    kv.get("persona-lifetime", "9000"), line_no, "persona lifetime"
                ),
                preference=RouterPreference.parse(kv.get("persona-preference", "medium")),
                interval_ms=_parse_interval_ms(
                    kv.get("persona-interval", "10"), line_no, "persona interval"
                ),
                routes=_parse_onoff(kv.get("persona-routes", "yes"), line_no, "persona-routes"),
                valid=valid,
                preferred=preferred,
            )
        return AttackerDecl(node_id=node_id, mac=mac, ip=ip, persona=persona)
    raise ScenarioParseError(line_no, f"unknown node kind {kind!r}")


def _require_mac(kv: dict[str, str], line_no: int) -> MacAddress:
    if "mac" not in kv:
        raise ScenarioParseError(line_no, "node needs mac=<address>")
    return MacAddress.parse(kv["mac"])


def _parse_policy(
    tokens: list[str], line_no: int, policies: list[PolicyLine], two_hour: bool
) -> tuple[list[PolicyLine], bool]:
    _need_at_least(tokens, 3, line_no)
    if tokens[1] == "global":
        if tokens[2] != "two-hour-rule":
            raise ScenarioParseError(line_no, f"unknown global policy {tokens[2]!r}")
        return policies, True
    switch, port = _port_ref(tokens[1], line_no)
    spec = tokens[2]
    if spec == "ra-guard":
        policies.append(PolicyLine(switch, port, "ra-guard"))
    elif spec.startswith("acl="):
        raw = spec[len("acl="):]
        macs = tuple(MacAddress.parse(m) for m in raw.split(",") if m)
        policies.append(PolicyLine(switch, port, "acl", macs))
    else:
        raise ScenarioParseError(line_no, f"unknown policy {spec!r}")
    return policies, two_hour


def _parse_directive(tokens: list[str], line_no: int) -> Directive:
    time_ms = _parse_time_ms(tokens[1], line_no)
    verb = tokens[2]
    if verb == "measure":
        _need(tokens, 3, line_no)
        return MeasureAt(time_ms)
    if verb in ("disable", "enable"):
        _need(tokens, 4, line_no)
        return ToggleAt(time_ms, tokens[3], verb == "enable")
    if verb == "attack":
        _need_at_least(tokens, 5, line_no)
        attacker = tokens[3]
        mode = tokens[4]
        if mode not in ATTACK_MODES:
            raise ScenarioParseError(line_no, f"unknown attack mode {mode!r}")
        kv = _kv(tokens[5:], line_no, ("target",))
        target = kv.get("target")
        if mode == "kill-router" and target is None:
            raise ScenarioParseError(line_no, "kill-router needs target=<router>")
        if mode != "kill-router" and target is not None:
            raise ScenarioParseError(line_no, f"{mode} takes no target")
        return AttackAt(time_ms, attacker, mode, target)
    raise ScenarioParseError(line_no, f"unknown directive {verb!r}")


# -- validation ------------------------------------------------------------------

def _validate(sc: Scenario) -> None:
    ids = sc.node_ids()
    dup = {i for i in ids if ids.count(i) > 1}
    if dup:
        raise ScenarioValidationError(f"duplicate node id(s): {sorted(dup)}")
    declared = set(ids)
    if not sc.allow_dup_mac:
        macs = [str(n.mac) for n in sc.nodes]
        dup_macs = {m for m in macs if macs.count(m) > 1}
        if dup_macs:
            raise ScenarioValidationError(
                f"duplicate MAC(s) {sorted(dup_macs)}; add allow-dup-mac to permit"
            )
    if sc.switch is None:
        raise ScenarioValidationError("scenario needs a switch")
    switch_id, port_count = sc.switch
    valid_ports = {f"p{i}" for i in range(1, port_count + 1)}
    attached: dict[str, str] = {}
    used_ports: set[str] = set()
    for att in sc.attaches:
        if att.node not in declared:
            raise ScenarioValidationError(f"attach references undeclared node {att.node!r}")
        if att.switch != switch_id or att.port not in valid_ports:
            raise ScenarioValidationError(f"attach references unknown port {att.switch}.{att.port}")
        if att.node in attached:
            raise ScenarioValidationError(f"node {att.node!r} attached twice")
        if att.port in used_ports:
            raise ScenarioValidationError(f"port {att.port!r} attached twice")
        attached[att.node] = att.port
        used_ports.add(att.port)
    missing = declared - set(attached)
    if missing:
        raise ScenarioValidationError(f"node(s) not attached to the switch: {sorted(missing)}")
    for pol in sc.policies:
        if pol.switch != switch_id or pol.port not in valid_ports:
            raise ScenarioValidationError(f"policy references unknown port {pol.switch}.{pol.port}")
    routers = {n.node_id for n in sc.nodes if isinstance(n, RouterDecl)}
    attackers = {n.node_id for n in sc.nodes if isinstance(n, AttackerDecl)}
    for node, key_id in sc.keys:
        if node not in routers:
            raise ScenarioValidationError(f"key holder {node!r} is not a declared router")
    key_ids = {k for _, k in sc.keys}
    for key_id in sc.trusts:
        if key_id not in key_ids:
            raise ScenarioValidationError(f"trust references unknown key {key_id!r}")
    for n in sc.nodes:
        if isinstance(n, HostDecl) and n.gw4 is not None:
            if n.gw4 not in routers and n.gw4 not in attackers:
                raise ScenarioValidationError(
                    f"gw4 {n.gw4!r} of {n.node_id!r} is not a declared router or attacker"
                )
    for d in sc.directives:
        if isinstance(d, AttackAt):
            if d.attacker not in attackers:
                raise ScenarioValidationError(f"attack references non-attacker {d.attacker!r}")
            if d.target is not None and d.target not in declared:
                raise ScenarioValidationError(f"attack target {d.target!r} not declared")
        elif isinstance(d, ToggleAt):
            if d.node not in routers:
                raise ScenarioValidationError(f"enable/disable references non-router {d.node!r}")
    hosts = {n.node_id for n in sc.nodes if isinstance(n, HostDecl)}
    for key, _value in sc.expects:
        if key in FLAG_METRICS:
            continue
        host_id, sep, fld = key.partition(".")
        if not sep or host_id not in hosts or fld not in HOST_METRIC_FIELDS:
            raise ScenarioValidationError(f"unknown expectation metric {key!r}")


# -- canonical writer ---------------------------------------------------------------

def print_scenario(sc: Scenario) -> str:
    lines = [f"link-latency {_fmt_time(sc.link_latency_ms)}"]
    switch_id, ports = sc.switch
    lines.append(f"switch {switch_id} ports={ports}")
    for n in sc.nodes:
        lines.append(_print_node(n))
    for att in sc.attaches:
        lines.append(f"attach {att.node} {att.switch}.{att.port} class={att.port_class}")
    for pol in sc.policies:
        if pol.kind == "ra-guard":
            lines.append(f"policy {pol.switch}.{pol.port} ra-guard")
        else:
            lines.append(f"policy {pol.switch}.{pol.port} acl={','.join(str(m) for m in pol.acl)}")
    if sc.two_hour_rule:
        lines.append("policy global two-hour-rule")
    for node, key_id in sc.keys:
        lines.append(f"key {node} {key_id}")
    for key_id in sc.trusts:
        lines.append(f"trust {key_id}")
    for d in sc.directives:
        lines.append(_print_directive(d))
    if sc.allow_dup_mac:
        lines.append("allow-dup-mac")
    for key, value in sc.expects:
        lines.append(f"expect {key}={value}")
    lines.append(f"run {_fmt_time(sc.run_ms)} seed={sc.seed}")
    return "".join(line + "\n" for line in lines)


def _print_node(n: NodeDecl) -> str:
    if isinstance(n, RouterDecl):
        parts = [f"node router {n.node_id}", f"mac={n.mac}", f"ip={n.ip}"]
        if n.prefixes:
            parts.append(f"prefix={','.join(str(p) for p in n.prefixes)}")
        parts.extend(
            [
                f"lifetime={n.lifetime}",
                f"preference={n.preference}",
                f"interval={_fmt_time(n.interval_ms)}",
                f"valid={n.valid}",
                f"preferred={n.preferred}",
                f"routes={'yes' if n.routes else 'no'}",
                f"ra={'on' if n.ra_on else 'off'}",
                f"jitter={_fmt_time(n.jitter_ms)}",
            ]
        )
        return " ".join(parts)
    if isinstance(n, HostDecl):
        parts = [f"node host {n.node_id}", f"mac={n.mac}", f"ipv6={'on' if n.ipv6_on else 'off'}"]
        if n.ipv4 is not None:
            parts.append(f"ipv4={n.ipv4}")
            parts.append(f"gw4={n.gw4}")
        parts.append(f"send={'on' if n.send_on else 'off'}")
        if n.iid is not None:
            parts.append(f"iid={iid_text(n.iid)}")
        if n.cga_key is not None:
            parts.append(f"cga-key={n.cga_key}")
            parts.append(f"cga-modifier={n.cga_modifier}")
        return " ".join(parts)
    parts = [f"node attacker {n.node_id}", f"mac={n.mac}", f"ip={n.ip}"]
    if n.persona is not None:
        p = n.persona
        if p.prefix is not None:
            parts.append(f"persona-prefix={p.prefix}")
        parts.extend(
            [
                f"persona-lifetime={p.lifetime}",
                f"persona-preference={p.preference}",
                f"persona-interval={_fmt_time(p.interval_ms)}",
                f"persona-routes={'yes' if p.routes else 'no'}",
                f"persona-valid={p.valid}",
                f"persona-preferred={p.preferred}",
            ]
        )
    return " ".join(parts)


def _print_directive(d: Directive) -> str:
    if isinstance(d, MeasureAt):
        return f"at {_fmt_time(d.time_ms)} measure"
    if isinstance(d, ToggleAt):
        verb = "enable" if d.enabled else "disable"
        return f"at {_fmt_time(d.time_ms)} {verb} {d.node}"
    base = f"at {_fmt_time(d.time_ms)} attack {d.attacker} {d.mode}"
    if d.target is not None:
        base += f" target={d.target}"
    return base


# -- engine wiring --------------------------------------------------------------------

def build_engine(sc: Scenario, seed: Optional[int] = None) -> Engine:
    engine = Engine(
        link_latency_ms=sc.link_latency_ms,
        seed=sc.seed if seed is None else seed,
        two_hour_rule=sc.two_hour_rule,
    )
    switch_id, ports = sc.switch
    engine.add_switch(switch_id, ports)
    attach_for = {a.node: a for a in sc.attaches}
    key_for = dict(sc.keys)
    for decl in sc.nodes:
        att = attach_for[decl.node_id]
        port_class = PortClass.ROUTER_FACING if att.port_class == "router" else PortClass.HOST_FACING
        engine.add_node(_build_node(decl, key_for), att.port, port_class)
    for pol in sc.policies:
        port = engine.ports[pol.port]
        if pol.kind == "ra-guard":
            port.policy.ra_guard = True
        else:
            port.policy.acl_allowed_ra_sources = frozenset(pol.acl)
    for _node, key_id in sc.keys:
        engine.keystore.add_key(key_id)
    for key_id in sc.trusts:
        engine.trust_registry.add_key(key_id, engine.keystore.secret_for(key_id))
    # Node startup precedes same-time script steps.
    engine.bootstrap()
    for d in sc.directives:
        engine.schedule(d.time_ms, _build_step(d))
    return engine


def _build_node(decl: NodeDecl, key_for: dict[str, str]):
    if isinstance(decl, RouterDecl):
        config = RouterConfig(
            node_id=decl.node_id,
            mac=decl.mac,
            link_local=decl.ip,
            advertised_prefixes=tuple(
                PrefixInfo(p, True, decl.valid, decl.preferred) for p in decl.prefixes
            ),
            router_lifetime=decl.lifetime,
            preference=decl.preference,
            ra_interval_ms=decl.interval_ms,
            can_route=decl.routes,
            send_key=key_for.get(decl.node_id),
            ra_enabled=decl.ra_on,
            jitter_ms=decl.jitter_ms,
        )
        return Router(config)
    if isinstance(decl, HostDecl):
        ipv4 = (decl.ipv4, decl.gw4) if decl.ipv4 is not None else None
        cga = (decl.cga_key, decl.cga_modifier) if decl.cga_key is not None else None
        return Host(
            node_id=decl.node_id,
            mac=decl.mac,
            ipv6_enabled=decl.ipv6_on,
            ipv4=ipv4,
            send_only=decl.send_on,
            iid_override=decl.iid,
            cga=cga,
        )
    persona = None
    if decl.persona is not None:
        p = decl.persona
        prefixes = (PrefixInfo(p.prefix, True, p.valid, p.preferred),) if p.prefix else ()
        persona = RouterConfig(
            node_id=decl.node_id,
            mac=decl.mac,
            link_local=decl.ip,
            advertised_prefixes=prefixes,
            router_lifetime=p.lifetime,
            preference=p.preference,
            ra_interval_ms=p.interval_ms,
            can_route=p.routes,
        )
    return Attacker(decl.node_id, decl.mac, decl.ip, persona)


def _build_step(d: Directive):
    if isinstance(d, MeasureAt):
        return MeasureDirective()
    if isinstance(d, ToggleAt):
        return ToggleDirective(d.node, d.enabled)
    return AttackDirective(d.attacker, ATTACK_MODES[d.mode], d.target)


# -- expectations -----------------------------------------------------------------------

def evaluate_expects(sc: Scenario, metrics: RunMetrics) -> list[str]:
    """Return one failure description per unmet expectation."""
    failures = []
    for key, wanted in sc.expects:
        actual = _metric_value(metrics, key)
        if actual != wanted:
            failures.append(f"expect {key}={wanted}: got {actual}")
    return failures


def _metric_value(metrics: RunMetrics, key: str) -> str:
    if key in FLAG_METRICS:
        return "true" if getattr(metrics, key) else "false"
    host_id, _sep, fld = key.partition(".")
    hm = metrics.hosts.get(host_id)
    if hm is None:
        return "unmeasured"
    if fld == "default_router":
        return hm.default_router or "none"
    if fld == "family_in_use":
        return str(hm.family_in_use) if hm.family_in_use else "none"
    return iid_text(hm.iid)
