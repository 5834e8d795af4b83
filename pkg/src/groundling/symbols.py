"""Symbol spaces and the perception-classifier registry.

Three families of discrete symbols are inferred by the correspondence
models:

* scene symbols -- one per scene label in the fixed eight-label taxonomy;
* perception symbols -- one per registered classifier (object detectors,
  color detectors, and the structural stages that turn detections into
  world-model objects);
* grounding symbols -- type-level constraints (object type, color, region,
  spatial relation) plus one object symbol and one navigate-to action
  symbol per detected object.

Every symbol renders to a canonical string; spaces are ordered
lexicographically by that string so symbol indices are stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .errors import EmptyRegistry, InvalidSpec, UnknownClassifier, UnknownSchemaVersion

SCENE_LABELS = (
    "hallway",
    "kitchen",
    "laboratory",
    "lounge",
    "office",
    "parking_lot",
    "warehouse",
    "workshop",
)

# Surface word sequences that name each scene label in instructions.
REGION_SURFACE_FORMS: dict[str, tuple[tuple[str, ...], ...]] = {
    "hallway": (("hallway",),),
    "kitchen": (("kitchen",),),
    "laboratory": (("laboratory",), ("lab",)),
    "lounge": (("lounge",),),
    "office": (("office",),),
    "parking_lot": (("parking", "lot"),),
    "warehouse": (("warehouse",),),
    "workshop": (("workshop",),),
}

DEFAULT_OBJECT_CLASSES = (
    "ball",
    "bottle",
    "chair",
    "cone",
    "couch",
    "cup",
    "fork",
    "keyboard",
    "microwave",
    "person",
    "suitcase",
    "umbrella",
)

DEFAULT_COLORS = ("black", "blue", "green", "red", "white", "yellow")

# Classifier kinds.
OBJECT_DETECTOR = "object_detector"
COLOR_DETECTOR = "color_detector"
BBOX_ESTIMATOR = "bbox_estimator"
POSE_ESTIMATOR = "pose_estimator"
NOISE_FILTER = "noise_filter"

STRUCTURAL_KINDS = (BBOX_ESTIMATOR, NOISE_FILTER, POSE_ESTIMATOR)

RELATION_KINDS = ("farthest", "nearest")

REGISTRY_SCHEMA = 1


@dataclass(frozen=True)
class SemanticSymbol:
    """One scene label from the fixed taxonomy."""

    scene_label: str

    @property
    def canon(self) -> str:
        return f"scene={self.scene_label}"

    @property
    def variant(self) -> str:
        return "scene"

    @property
    def attributes(self) -> tuple[tuple[str, str], ...]:
        return (("scene", self.scene_label),)


@dataclass(frozen=True)
class PerceptionSymbol:
    """One runnable classifier: a detector, a color stage, or a structural stage."""

    kind: str
    param: str | None = None

    def __post_init__(self):
        if self.kind in (OBJECT_DETECTOR, COLOR_DETECTOR):
            if not self.param:
                raise InvalidSpec(f"{self.kind} needs a parameter")
        elif self.kind in STRUCTURAL_KINDS:
            if self.param is not None:
                raise InvalidSpec(f"{self.kind} takes no parameter")
        else:
            raise InvalidSpec(f"unknown classifier kind {self.kind!r}")

    @property
    def canon(self) -> str:
        if self.param is None:
            return self.kind
        return f"{self.kind}[{self.param}]"

    @property
    def variant(self) -> str:
        return {
            OBJECT_DETECTOR: "detector",
            COLOR_DETECTOR: "colordet",
            BBOX_ESTIMATOR: "bbox",
            POSE_ESTIMATOR: "posest",
            NOISE_FILTER: "denoise",
        }[self.kind]

    @property
    def attributes(self) -> tuple[tuple[str, str], ...]:
        if self.kind == OBJECT_DETECTOR:
            return (("class", self.param),)
        if self.kind == COLOR_DETECTOR:
            return (("color", self.param),)
        return ()


@dataclass(frozen=True)
class GroundingSymbol:
    """A grounding-space symbol.

    ``variant`` is one of objtype / color / region / rel / object / action;
    ``value`` carries the class, color, label, relation kind, or object id.
    Instance symbols (object, action) additionally carry the attributes of
    the detected object they denote, so features can compare them against
    child constraints.
    """

    variant: str
    value: str
    attrs: tuple[tuple[str, str], ...] = ()

    @property
    def canon(self) -> str:
        if self.variant == "objtype":
            return f"type[{self.value}]"
        if self.variant == "color":
            return f"color[{self.value}]"
        if self.variant == "region":
            return f"region[{self.value}]"
        if self.variant == "rel":
            return f"relation[{self.value}]"
        if self.variant == "object":
            return f"object[{self.value}]"
        if self.variant == "action":
            return f"action[navigate_to:{self.value}]"
        raise InvalidSpec(f"unknown grounding variant {self.variant!r}")

    @property
    def attributes(self) -> tuple[tuple[str, str], ...]:
        if self.variant == "objtype":
            return (("class", self.value),)
        if self.variant == "color":
            return (("color", self.value),)
        if self.variant == "region":
            return (("region", self.value),)
        if self.variant == "rel":
            return (("rel", self.value),)
        return self.attrs


def object_type(cls: str) -> GroundingSymbol:
    return GroundingSymbol("objtype", cls)


def color_symbol(color: str) -> GroundingSymbol:
    return GroundingSymbol("color", color)


def region_symbol(label: str) -> GroundingSymbol:
    return GroundingSymbol("region", label)


def relation_symbol(kind: str) -> GroundingSymbol:
    if kind not in RELATION_KINDS:
        raise InvalidSpec(f"unknown relation kind {kind!r}")
    return GroundingSymbol("rel", kind)


def _object_attrs(obj) -> tuple[tuple[str, str], ...]:
    attrs = [("class", obj.cls)]
    if obj.color is not None:
        attrs.append(("color", obj.color))
    if obj.region is not None:
        attrs.append(("region", obj.region))
    return tuple(attrs)


def object_instance(obj) -> GroundingSymbol:
    """Symbol for one detected object in the current world model."""
    return GroundingSymbol("object", obj.id, _object_attrs(obj))


def action_instance(obj) -> GroundingSymbol:
    """Navigate-to action targeting one detected object."""
    return GroundingSymbol("action", obj.id, _object_attrs(obj))


class SymbolSpace:
    """Ordered, duplicate-free collection of symbols for one domain.

    Symbols are sorted by canonical string; ``position`` gives the dense
    index of a symbol, which correspondence assignments use as column ids.
    """

    def __init__(self, domain: str, symbols):
        ordered = sorted(symbols, key=lambda s: s.canon)
        index: dict[str, int] = {}
        for j, sym in enumerate(ordered):
            if sym.canon in index:
                raise InvalidSpec(f"duplicate symbol {sym.canon}")
            index[sym.canon] = j
        self.domain = domain
        self.symbols = tuple(ordered)
        self._index = index

    def position(self, symbol) -> int:
        return self._index[symbol.canon]

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, j: int):
        return self.symbols[j]

    def __contains__(self, symbol) -> bool:
        return getattr(symbol, "canon", None) in self._index


@dataclass(frozen=True)
class CostModel:
    """Fixed invocation cost plus a per-scanned-item increment."""

    base_cost: float
    per_item_cost: float

    def __post_init__(self):
        if self.base_cost < 0 or self.per_item_cost < 0:
            raise InvalidSpec("costs must be non-negative")

    def cost(self, items_scanned: int) -> float:
        return self.base_cost + self.per_item_cost * items_scanned


# Default cost parameters, calibrated so that a full-registry build over the
# site-1 fixture comes to roughly 400 cost units (see tests).
_DEFAULT_COSTS = (
    (OBJECT_DETECTOR, CostModel(2.0, 0.1)),
    (COLOR_DETECTOR, CostModel(1.0, 0.03)),
    (BBOX_ESTIMATOR, CostModel(1.0, 0.08)),
    (POSE_ESTIMATOR, CostModel(1.0, 0.08)),
    (NOISE_FILTER, CostModel(0.5, 0.02)),
)


@dataclass(frozen=True)
class ClassifierRegistry:
    """Declares the available classifiers and their cost parameters.

    The registry also carries the object-class, color, and scene-label
    vocabularies so a single file pins everything the grammar and symbol
    spaces need.
    """

    object_classes: tuple[str, ...] = DEFAULT_OBJECT_CLASSES
    colors: tuple[str, ...] = DEFAULT_COLORS
    scene_labels: tuple[str, ...] = SCENE_LABELS
    structural_stages: tuple[str, ...] = STRUCTURAL_KINDS
    kind_costs: tuple[tuple[str, CostModel], ...] = _DEFAULT_COSTS
    cost_overrides: tuple[tuple[str, CostModel], ...] = ()
    scene_cost_per_observation: float = 0.2
    schema: int = REGISTRY_SCHEMA

    def __post_init__(self):
        # Canonicalise cost-table ordering so registries compare equal no
        # matter how their tables were assembled (construction vs. a file
        # loader, say).
        for field_name in ("kind_costs", "cost_overrides"):
            table = tuple(sorted(getattr(self, field_name), key=lambda item: item[0]))
            object.__setattr__(self, field_name, table)
        if tuple(sorted(self.scene_labels)) != tuple(self.scene_labels):
            raise InvalidSpec("scene labels must be listed in sorted order")
        if len(set(self.object_classes)) != len(self.object_classes):
            raise InvalidSpec("duplicate object class")
        if self.scene_cost_per_observation < 0:
            raise InvalidSpec("scene cost must be non-negative")
        for stage in self.structural_stages:
            if stage not in STRUCTURAL_KINDS:
                raise InvalidSpec(f"unknown structural stage {stage!r}")

    def classifiers(self) -> tuple[PerceptionSymbol, ...]:
        out = [PerceptionSymbol(OBJECT_DETECTOR, c) for c in self.object_classes]
        out += [PerceptionSymbol(COLOR_DETECTOR, c) for c in self.colors]
        out += [PerceptionSymbol(kind) for kind in self.structural_stages]
        return tuple(sorted(out, key=lambda s: s.canon))

    def cost_for(self, symbol: PerceptionSymbol) -> CostModel:
        if symbol not in set(self.classifiers()):
            raise UnknownClassifier(symbol.canon)
        for canon, model in self.cost_overrides:
            if canon == symbol.canon:
                return model
        for kind, model in self.kind_costs:
            if kind == symbol.kind:
                return model
        raise UnknownClassifier(f"no cost model for {symbol.canon}")

    def with_extra_class(self, cls: str) -> "ClassifierRegistry":
        return replace(self, object_classes=self.object_classes + (cls,))


def default_registry() -> ClassifierRegistry:
    return ClassifierRegistry()


def enumerate_semantic_space() -> SymbolSpace:
    """The fixed scene-symbol space; always eight symbols."""
    return SymbolSpace("semantic", [SemanticSymbol(l) for l in SCENE_LABELS])


def enumerate_perception_space(registry: ClassifierRegistry) -> SymbolSpace:
    """One symbol per registered classifier."""
    classifiers = registry.classifiers()
    if not classifiers:
        raise EmptyRegistry("registry declares no classifiers")
    return SymbolSpace("perception", classifiers)


def _type_level_symbols(registry: ClassifierRegistry) -> list[GroundingSymbol]:
    syms = [object_type(c) for c in registry.object_classes]
    syms += [color_symbol(c) for c in registry.colors]
    syms += [region_symbol(l) for l in registry.scene_labels]
    syms += [relation_symbol(k) for k in RELATION_KINDS]
    return syms


def enumerate_grounding_type_space(registry: ClassifierRegistry) -> SymbolSpace:
    """Constraint symbols only -- the subspace the grounding model trains on."""
    return SymbolSpace("grounding", _type_level_symbols(registry))


def enumerate_grounding_space(world, registry: ClassifierRegistry) -> SymbolSpace:
    """Type-level constraints plus object and action symbols for ``world``.

    The size is linear in the number of detected objects: two instance
    symbols per object on top of the fixed type-level set.
    """
    syms = _type_level_symbols(registry)
    for obj in world.objects:
        syms.append(object_instance(obj))
        syms.append(action_instance(obj))
    return SymbolSpace("grounding", syms)


def perception_from_canon(canon: str) -> PerceptionSymbol:
    if "[" in canon:
        kind, _, rest = canon.partition("[")
        return PerceptionSymbol(kind, rest.rstrip("]"))
    return PerceptionSymbol(canon)


def grounding_from_canon(canon: str) -> GroundingSymbol:
    """Rebuild a type-level grounding symbol from its canonical string."""
    for variant, prefix in (
        ("objtype", "type["),
        ("color", "color["),
        ("region", "region["),
        ("rel", "relation["),
    ):
        if canon.startswith(prefix) and canon.endswith("]"):
            return GroundingSymbol(variant, canon[len(prefix):-1])
    raise InvalidSpec(f"not a type-level grounding symbol: {canon!r}")


def save_registry(registry: ClassifierRegistry, path) -> None:
    doc = {
        "schema": registry.schema,
        "object_classes": list(registry.object_classes),
        "colors": list(registry.colors),
        "scene_labels": list(registry.scene_labels),
        "structural_stages": list(registry.structural_stages),
        "kind_costs": {
            kind: {"base_cost": m.base_cost, "per_item_cost": m.per_item_cost}
            for kind, m in registry.kind_costs
        },
        "cost_overrides": {
            canon: {"base_cost": m.base_cost, "per_item_cost": m.per_item_cost}
            for canon, m in registry.cost_overrides
        },
        "scene_cost_per_observation": registry.scene_cost_per_observation,
    }
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=True))


def load_registry(path) -> ClassifierRegistry:
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict):
        raise InvalidSpec("registry file is not a mapping")
    if doc.get("schema") != REGISTRY_SCHEMA:
        raise UnknownSchemaVersion(doc.get("schema"), REGISTRY_SCHEMA)
    try:
        kind_costs = tuple(
            (kind, CostModel(m["base_cost"], m["per_item_cost"]))
            for kind, m in sorted(doc.get("kind_costs", {}).items())
        )
        overrides = tuple(
            (canon, CostModel(m["base_cost"], m["per_item_cost"]))
            for canon, m in sorted(doc.get("cost_overrides", {}).items())
        )
        return ClassifierRegistry(
            object_classes=tuple(doc["object_classes"]),
            colors=tuple(doc["colors"]),
            scene_labels=tuple(doc["scene_labels"]),
            structural_stages=tuple(doc.get("structural_stages", STRUCTURAL_KINDS)),
            kind_costs=kind_costs,
            cost_overrides=overrides,
            scene_cost_per_observation=float(
                doc.get("scene_cost_per_observation", 0.0)
            ),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidSpec(f"registry file missing field: {exc}") from exc
