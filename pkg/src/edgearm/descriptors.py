"""Parsers for the two application descriptor files and the merged spec.

``docker-compose.yml`` contributes service ids and container images; everything
else in it (ports, volumes, build contexts) is carried opaquely and never
interpreted. ``requirements.yml`` annotates services with hardware (MB of RAM),
software, IoT devices, and directed latency/bandwidth demands towards other
services. Both directions of a service pair may be constrained independently,
with different values.
"""

from __future__ import annotations

import yaml

from .errors import DanglingLinkTarget, MalformedDescriptor, NegativeRequirement
from .model import ApplicationSpec, LinkRequirement, ServiceRequirement

COMPOSE_FILE = "docker-compose.yml"
REQUIREMENTS_FILE = "requirements.yml"


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate mapping keys instead of keeping the last."""


def _strict_mapping(loader, node, deep=False):
    mapping = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in mapping:
            raise MalformedDescriptor(f"duplicate key {key!r}")
        mapping[key] = loader.construct_object(value_node, deep=deep)
    return mapping


_StrictLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _strict_mapping
)


def _load_yaml(text: bytes | str) -> dict:
    try:
        doc = yaml.load(text, Loader=_StrictLoader)
    except MalformedDescriptor:
        raise
    except yaml.YAMLError as exc:
        raise MalformedDescriptor(f"not valid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise MalformedDescriptor("top level must be a mapping")
    return doc


def _services_section(doc: dict) -> dict:
    if "services" not in doc:
        raise MalformedDescriptor("missing top-level 'services' key")
    services = doc["services"]
    if services is None:
        return {}
    if not isinstance(services, dict):
        raise MalformedDescriptor("'services' must be a mapping")
    return services


def parse_compose(text: bytes | str) -> dict[str, str]:
    """Extract ``service id -> image reference`` from a compose file.

    Entries lacking ``image`` get an empty image reference. Unknown keys are
    ignored; ``version`` is ignored.
    """
    services = _services_section(_load_yaml(text))
    images: dict[str, str] = {}
    for service_id, body in services.items():
        sid = str(service_id)
        if body is None:
            images[sid] = ""
            continue
        if not isinstance(body, dict):
            raise MalformedDescriptor(f"service {sid!r} body must be a mapping")
        image = body.get("image", "")
        images[sid] = "" if image is None else str(image)
    return images


def _requirement_number(service_id: str, name: str, value, *, positive: bool) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise MalformedDescriptor(f"service {service_id!r}: {name} must be a number")
    if positive and value <= 0:
        raise NegativeRequirement(f"service {service_id!r}: {name} must be > 0")
    if not positive and value < 0:
        raise NegativeRequirement(f"service {service_id!r}: {name} must be >= 0")
    return float(value)


def parse_requirements(text: bytes | str) -> dict[str, ServiceRequirement]:
    """Parse ``requirements.yml`` into per-service requirement records.

    Defaults: hardware 0, software/iot empty, links empty. Link entries carry
    ``bandwidth`` (minimum Mbps) and ``latency`` (maximum ms), both positive.
    """
    services = _services_section(_load_yaml(text))
    out: dict[str, ServiceRequirement] = {}
    for service_id, body in services.items():
        sid = str(service_id)
        body = body or {}
        if not isinstance(body, dict):
            raise MalformedDescriptor(f"service {sid!r} body must be a mapping")
        hardware = int(
            _requirement_number(sid, "hardware", body.get("hardware", 0), positive=False)
        )
        software = body.get("software", []) or []
        iot = body.get("iot", []) or []
        if not isinstance(software, list) or not isinstance(iot, list):
            raise MalformedDescriptor(f"service {sid!r}: software/iot must be lists")
        links: dict[str, LinkRequirement] = {}
        raw_links = body.get("links", {}) or {}
        if not isinstance(raw_links, dict):
            raise MalformedDescriptor(f"service {sid!r}: links must be a mapping")
        for target, qos in raw_links.items():
            tid = str(target)
            if tid == sid:
                raise MalformedDescriptor(f"service {sid!r}: self-link requirement")
            if not isinstance(qos, dict):
                raise MalformedDescriptor(f"service {sid!r}: link {tid!r} must be a mapping")
            links[tid] = LinkRequirement(
                max_latency_ms=_requirement_number(sid, "latency", qos.get("latency"), positive=True),
                min_bandwidth_mbps=_requirement_number(sid, "bandwidth", qos.get("bandwidth"), positive=True),
            )
        out[sid] = ServiceRequirement(
            service_id=sid,
            hardware=hardware,
            software=frozenset(str(s) for s in software),
            iot=frozenset(str(s) for s in iot),
            links=links,
        )
    return out


def merge_spec(
    app_id: str,
    compose: dict[str, str],
    requirements: dict[str, ServiceRequirement] | None,
) -> ApplicationSpec:
    """Union the two descriptor views into one ApplicationSpec.

    A service present only in the compose file gets an all-default requirement;
    a service present only in the requirements file gets an empty image. A link
    requirement naming a service outside the union is an error.
    """
    requirements = requirements or {}
    service_ids = sorted(set(compose) | set(requirements))
    services: dict[str, ServiceRequirement] = {}
    for sid in service_ids:
        req = requirements.get(sid, ServiceRequirement(service_id=sid))
        for target in req.links:
            if target not in service_ids:
                raise DanglingLinkTarget(
                    f"service {sid!r} links to undeclared service {target!r}"
                )
        services[sid] = req
    images = {sid: compose.get(sid, "") for sid in service_ids}
    return ApplicationSpec(app_id=app_id, services=services, images=images)


def serialize_requirements(requirements: dict[str, ServiceRequirement]) -> str:
    """Render requirements back to YAML (round-trips through parse_requirements)."""
    doc: dict = {"services": {}}
    for sid in sorted(requirements):
        req = requirements[sid]
        body: dict = {"hardware": req.hardware}
        if req.software:
            body["software"] = sorted(req.software)
        if req.iot:
            body["iot"] = sorted(req.iot)
        if req.links:
            body["links"] = {
                target: {
                    "bandwidth": _plain_number(l.min_bandwidth_mbps),
                    "latency": _plain_number(l.max_latency_ms),
                }
                for target, l in sorted(req.links.items())
            }
        doc["services"][sid] = body
    return yaml.safe_dump(doc, sort_keys=False)


def serialize_compose(images: dict[str, str]) -> str:
    """Render a minimal compose file carrying only service ids and images."""
    doc = {
        "version": "3.3",
        "services": {
            sid: ({"image": image} if image else {}) for sid, image in sorted(images.items())
        },
    }
    return yaml.safe_dump(doc, sort_keys=False)


def _plain_number(x: float):
    return int(x) if float(x).is_integer() else float(x)


def spec_from_texts(
    app_id: str, compose_text: bytes | str, requirements_text: bytes | str | None
) -> ApplicationSpec:
    """Parse both descriptor texts and merge them (requirements may be absent)."""
    compose = parse_compose(compose_text)
    requirements = (
        parse_requirements(requirements_text) if requirements_text is not None else None
    )
    return merge_spec(app_id, compose, requirements)
