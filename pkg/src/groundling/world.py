"""Simulated robot world: sensing, scene classification, costed perception.

The simulator walks a fixed trajectory through a planar world of latent
objects.  At each waypoint it senses every object within range (3.5 m by
default) as a raw detection carrying a pose relative to the robot frame
and apparent class/color values (exact unless a confusion rate is
configured).  A co-occurrence scene classifier labels every observation as
it is taken.

Perception is lazy and costed: object detectors scan raw detections for
their class, then the noise filter, color detectors, and the bounding-box
and pose estimators refine the survivors.  A detection only becomes a
world-model object once the bounding-box and pose stages have run.
Duplicate detections of one physical object merge by class and proximity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import InvalidSpec, UnknownClassifier, UnknownSchemaVersion
from .symbols import (
    BBOX_ESTIMATOR,
    COLOR_DETECTOR,
    ClassifierRegistry,
    NOISE_FILTER,
    OBJECT_DETECTOR,
    POSE_ESTIMATOR,
    PerceptionSymbol,
    SCENE_LABELS,
)

SENSING_RANGE = 3.5
MERGE_RADIUS = 0.5
FALLBACK_SCENE = "hallway"
WORLD_SCHEMA = 1
OBS_LOG_SCHEMA = 1

Pose = tuple[float, float, float]


def planar_distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _to_robot_frame(robot: Pose, point: Pose) -> Pose:
    dx, dy = point[0] - robot[0], point[1] - robot[1]
    c, s = math.cos(-robot[2]), math.sin(-robot[2])
    return (c * dx - s * dy, s * dx + c * dy, point[2] - robot[2])


def _from_robot_frame(robot: Pose, rel: Pose) -> Pose:
    c, s = math.cos(robot[2]), math.sin(robot[2])
    return (
        robot[0] + c * rel[0] - s * rel[1],
        robot[1] + s * rel[0] + c * rel[1],
        robot[2] + rel[2],
    )


@dataclass(frozen=True)
class LatentObject:
    id: str
    cls: str
    color: str
    pose: Pose
    region: str


@dataclass(frozen=True)
class RawDetection:
    """One sensed return: pose relative to the robot frame plus appearances."""

    latent_id: str | None
    rel: Pose
    apparent_class: str
    apparent_color: str
    noisy: bool = False


@dataclass(frozen=True)
class Observation:
    t: int
    robot_pose: Pose
    sensed: tuple[RawDetection, ...]
    scene_label: str
    scene_scores: tuple[tuple[str, float], ...]

    def scores_dict(self) -> dict[str, float]:
        return dict(self.scene_scores)


@dataclass(frozen=True)
class CooccurrenceModel:
    """Per-scene class-conditional table used by the scene classifier.

    ``table`` maps scene label -> (class -> probability); rows are
    normalized over the characteristic classes.  Non-characteristic
    classes never vote.
    """

    table: tuple[tuple[str, tuple[tuple[str, float], ...]], ...]
    characteristic: frozenset[str]
    prior: tuple[tuple[str, float], ...] = ()
    alpha: float = 1.0

    @staticmethod
    def from_dict(rows: dict[str, dict[str, float]], characteristic,
                  prior: dict[str, float] | None = None) -> "CooccurrenceModel":
        table = []
        for label in sorted(rows):
            row = rows[label]
            total = sum(row.values())
            if total <= 0 or any(v < 0 for v in row.values()):
                raise InvalidSpec(f"co-occurrence row for {label!r} is not normalizable")
            # Already-normalised rows pass through untouched so that a
            # save/load cycle reproduces probabilities bit for bit.
            if abs(total - 1.0) < 1e-9:
                total = 1.0
            table.append((label, tuple((c, row[c] / total) for c in sorted(row))))
        labels = [label for label, _ in table]
        if prior is None:
            prior = {label: 1.0 / len(labels) for label in labels}
        ptotal = sum(prior.values())
        if abs(ptotal - 1.0) < 1e-9:
            ptotal = 1.0
        prior_t = tuple((l, prior[l] / ptotal) for l in sorted(prior))
        return CooccurrenceModel(
            table=tuple(table),
            characteristic=frozenset(characteristic),
            prior=prior_t,
        )

    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.table)

    def row(self, label: str) -> dict[str, float]:
        for l, row in self.table:
            if l == label:
                return dict(row)
        raise KeyError(label)

    def smoothed_log_prob(self, cls: str, label: str) -> float:
        # Laplace smoothing with alpha pseudo-mass per class on the
        # normalized row; rows stay valid distributions.
        k = len(self.characteristic)
        p = self.row(label).get(cls, 0.0)
        return math.log((p + self.alpha) / (1.0 + self.alpha * k))

    def log_prior(self, label: str) -> float:
        for l, p in self.prior:
            if l == label:
                return math.log(p) if p > 0 else -math.inf
        return -math.inf

    def to_dict(self) -> dict:
        return {
            "characteristic": sorted(self.characteristic),
            "prior": {l: p for l, p in self.prior},
            "table": {l: {c: p for c, p in row} for l, row in self.table},
        }


def _default_scores() -> tuple[tuple[str, float], ...]:
    # Used when no previous observation exists: the fallback label wins.
    return tuple(
        (label, 0.0 if label == FALLBACK_SCENE else -1.0) for label in SCENE_LABELS
    )


def classify_detections(classes, model: CooccurrenceModel,
                        prev_label: str | None = None,
                        prev_scores: tuple[tuple[str, float], ...] | None = None,
                        ) -> tuple[str, tuple[tuple[str, float], ...]]:
    """Naive-Bayes vote over apparent classes.

    Frames with zero characteristic detections inherit the previous
    observation's label and scores (fallback label when there is none), so
    the label always maximizes the reported scores.
    """
    voting = [c for c in classes if c in model.characteristic]
    if not voting:
        if prev_label is not None and prev_scores is not None:
            return prev_label, prev_scores
        scores = _default_scores()
        return FALLBACK_SCENE, scores
    scores = []
    for label in model.labels():
        s = model.log_prior(label)
        for c in voting:
            s += model.smoothed_log_prob(c, label)
        scores.append((label, s))
    top = max(v for _, v in scores)
    label = min(l for l, v in scores if v == top)
    return label, tuple(scores)


def scene_classify(obs: Observation, model: CooccurrenceModel,
                   prev_label: str | None = None,
                   prev_scores: tuple[tuple[str, float], ...] | None = None,
                   ) -> tuple[str, tuple[tuple[str, float], ...]]:
    """Classify one observation from its sensed apparent classes."""
    return classify_detections(
        [d.apparent_class for d in obs.sensed], model, prev_label, prev_scores
    )


@dataclass(frozen=True)
class WorldSpec:
    """Declarative description of a simulated site."""

    name: str
    seed: int
    objects: tuple[LatentObject, ...]
    trajectory: tuple[Pose, ...]
    cooccurrence: CooccurrenceModel
    noise: float = 0.0
    clutter_rate: float = 0.0
    sensing_range: float = SENSING_RANGE
    registry_classes: tuple[str, ...] = ()

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise InvalidSpec("duplicate latent object id")
        if not 0.0 <= self.noise <= 1.0:
            raise InvalidSpec("noise must be in [0, 1]")
        if not 0.0 <= self.clutter_rate <= 1.0:
            raise InvalidSpec("clutter rate must be in [0, 1]")
        if self.sensing_range <= 0:
            raise InvalidSpec("sensing range must be positive")
        for o in self.objects:
            if o.region not in SCENE_LABELS:
                raise InvalidSpec(f"object {o.id} has unknown region {o.region!r}")


def simulate(spec: WorldSpec, registry: ClassifierRegistry | None = None,
             ) -> tuple[Observation, ...]:
    """Run the trajectory and return one labeled observation per waypoint.

    Deterministic for a fixed spec: all randomness (confusion draws,
    clutter) comes from a generator seeded with ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    classes = tuple(registry.object_classes) if registry else None
    if classes is None:
        classes = spec.registry_classes or tuple(
            sorted({o.cls for o in spec.objects})
        )
    colors = tuple(sorted({o.color for o in spec.objects})) or ("white",)
    range2 = spec.sensing_range * spec.sensing_range

    observations: list[Observation] = []
    prev_label: str | None = None
    prev_scores = None
    for t, robot in enumerate(spec.trajectory):
        sensed: list[RawDetection] = []
        for obj in spec.objects:
            dx, dy = obj.pose[0] - robot[0], obj.pose[1] - robot[1]
            if dx * dx + dy * dy > range2:
                continue
            apparent_class = obj.cls
            apparent_color = obj.color
            if spec.noise > 0:
                if rng.random() < spec.noise:
                    apparent_class = str(rng.choice(classes))
                if rng.random() < spec.noise:
                    apparent_color = str(rng.choice(colors))
            sensed.append(RawDetection(
                latent_id=obj.id,
                rel=_to_robot_frame(robot, obj.pose),
                apparent_class=apparent_class,
                apparent_color=apparent_color,
            ))
        if spec.clutter_rate > 0 and rng.random() < spec.clutter_rate:
            angle = rng.random() * 2 * math.pi
            radius = rng.random() * spec.sensing_range
            sensed.append(RawDetection(
                latent_id=None,
                rel=(radius * math.cos(angle), radius * math.sin(angle), 0.0),
                apparent_class=str(rng.choice(classes)),
                apparent_color=str(rng.choice(colors)),
                noisy=True,
            ))
        label, scores = classify_detections(
            [d.apparent_class for d in sensed],
            spec.cooccurrence, prev_label, prev_scores,
        )
        observations.append(Observation(
            t=t, robot_pose=robot, sensed=tuple(sensed),
            scene_label=label, scene_scores=scores,
        ))
        prev_label, prev_scores = label, scores
    return tuple(observations)


@dataclass(frozen=True)
class Detection:
    """A raw detection routed through the perception pipeline.

    ``position``/``theta`` stay None until the bounding-box and pose
    stages compute them; ``color`` stays None until a color detector
    annotates it.
    """

    obs_t: int
    robot_pose: Pose
    raw: RawDetection
    position: tuple[float, float] | None = None
    theta: float | None = None
    color: str | None = None


@dataclass(frozen=True)
class DetectedObject:
    id: str
    cls: str
    color: str | None
    pose: Pose
    region: str
    provenance: frozenset[int]


@dataclass(frozen=True)
class WorldModel:
    objects: tuple[DetectedObject, ...]
    built_from: frozenset[int]
    classifiers_used: frozenset[PerceptionSymbol]
    total_cost: float
    robot_pose: Pose
    cost_ledger: tuple[tuple[str, float], ...] = ()

    def object_ids(self) -> frozenset[str]:
        return frozenset(o.id for o in self.objects)

    def digest(self) -> "WorldDigest":
        counts: dict[tuple[str, str], int] = {}
        for o in self.objects:
            for key in (("class", o.cls), ("color", o.color), ("region", o.region)):
                if key[1] is None:
                    continue
                counts[key] = counts.get(key, 0) + 1
        return WorldDigest(tuple(sorted(counts.items())))


@dataclass(frozen=True)
class WorldDigest:
    """Attribute counts over a world model, used as factor context."""

    counts: tuple[tuple[tuple[str, str], int], ...] = ()

    def has(self, key: str, value: str) -> bool:
        return dict(self.counts).get((key, value), 0) > 0


def empty_world(robot_pose: Pose = (0.0, 0.0, 0.0)) -> WorldModel:
    return WorldModel(
        objects=(), built_from=frozenset(), classifiers_used=frozenset(),
        total_cost=0.0, robot_pose=robot_pose,
    )


def run_classifier(symbol: PerceptionSymbol, observations,
                   registry: ClassifierRegistry,
                   detections: tuple[Detection, ...] | None = None,
                   ) -> tuple[tuple[Detection, ...], float]:
    """Run one classifier and return (detections, cost).

    Object detectors scan every raw detection in ``observations`` and keep
    those whose apparent class matches.  The other stages take the current
    detection set: the noise filter drops simulator-flagged noise, color
    detectors annotate matching colors, and the bounding-box / pose
    estimators compute absolute geometry.  Cost is base + per-item times
    the number of records scanned; a classifier that is never invoked
    (empty input) costs nothing.
    """
    cost_model = registry.cost_for(symbol)
    if symbol.kind == OBJECT_DETECTOR:
        obs = tuple(observations)
        if not obs:
            return (), 0.0
        scanned = 0
        matched: list[Detection] = []
        for o in obs:
            for raw in o.sensed:
                scanned += 1
                if raw.apparent_class == symbol.param:
                    matched.append(Detection(obs_t=o.t, robot_pose=o.robot_pose, raw=raw))
        return tuple(matched), cost_model.cost(scanned)

    dets = tuple(detections or ())
    if not dets:
        return (), 0.0
    if symbol.kind == NOISE_FILTER:
        kept = tuple(d for d in dets if not d.raw.noisy)
        return kept, cost_model.cost(len(dets))
    if symbol.kind == COLOR_DETECTOR:
        out = tuple(
            replace(d, color=symbol.param) if d.raw.apparent_color == symbol.param else d
            for d in dets
        )
        return out, cost_model.cost(len(dets))
    if symbol.kind == BBOX_ESTIMATOR:
        out = []
        for d in dets:
            absolute = _from_robot_frame(d.robot_pose, d.raw.rel)
            out.append(replace(d, position=(absolute[0], absolute[1])))
        return tuple(out), cost_model.cost(len(dets))
    if symbol.kind == POSE_ESTIMATOR:
        out = tuple(
            replace(d, theta=_from_robot_frame(d.robot_pose, d.raw.rel)[2])
            for d in dets
        )
        return tuple(out), cost_model.cost(len(dets))
    raise UnknownClassifier(symbol.canon)


def _majority(values, default=None):
    """Most common value, ties broken by lexicographic order."""
    counts: dict = {}
    for v in values:
        if v is None:
            continue
        counts[v] = counts.get(v, 0) + 1
    if not counts:
        return default
    top = max(counts.values())
    return min(str(v) for v, n in counts.items() if n == top)


def _object_id(cls: str, x: float, y: float) -> str:
    return f"{cls}@{x:.1f},{y:.1f}"


def _cluster(points: list[tuple[float, float]]) -> list[list[int]]:
    """Union-find single-linkage clustering at the merge radius."""
    n = len(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    r2 = MERGE_RADIUS * MERGE_RADIUS
    for i in range(n):
        for j in range(i + 1, n):
            dx = points[i][0] - points[j][0]
            dy = points[i][1] - points[j][1]
            if dx * dx + dy * dy <= r2:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def build_world_model(observations, classifiers, registry: ClassifierRegistry,
                      prior: WorldModel | None = None,
                      robot_pose: Pose | None = None) -> WorldModel:
    """Run the selected classifiers over the observations and merge objects.

    Stage order: object detectors, noise filter, color detectors, bounding
    box, pose.  Without both geometry stages no detection can become an
    object (their positions are unknown), though costs for stages that did
    run still accrue.  Duplicate detections of one object -- same apparent
    class within the merge radius -- collapse to a single object at the
    centroid, and objects from ``prior`` merge by the same rule.
    """
    obs = sorted(observations, key=lambda o: o.t)
    selected = frozenset(classifiers)
    known = set(registry.classifiers())
    for c in selected:
        if c not in known:
            raise UnknownClassifier(c.canon)
    if robot_pose is None:
        robot_pose = obs[-1].robot_pose if obs else (
            prior.robot_pose if prior else (0.0, 0.0, 0.0)
        )

    ledger: list[tuple[str, float]] = []
    detections: list[Detection] = []
    detectors = sorted(
        (c for c in selected if c.kind == OBJECT_DETECTOR), key=lambda c: c.canon
    )
    for det in detectors:
        found, cost = run_classifier(det, obs, registry)
        if cost:
            ledger.append((det.canon, cost))
        detections.extend(found)
    current = tuple(sorted(detections, key=lambda d: (d.obs_t, d.raw.apparent_class,
                                                      d.raw.rel)))

    def stage(symbol):
        nonlocal current
        out, cost = run_classifier(symbol, obs, registry, detections=current)
        if cost:
            ledger.append((symbol.canon, cost))
        current = out

    noise = PerceptionSymbol(NOISE_FILTER)
    if noise in selected:
        stage(noise)
    for color in sorted((c for c in selected if c.kind == COLOR_DETECTOR),
                        key=lambda c: c.canon):
        stage(color)
    geometry_ready = False
    bbox, pose_est = PerceptionSymbol(BBOX_ESTIMATOR), PerceptionSymbol(POSE_ESTIMATOR)
    if bbox in selected and pose_est in selected:
        stage(bbox)
        stage(pose_est)
        geometry_ready = True

    total_cost = sum(c for _, c in ledger)
    prior_objects = tuple(prior.objects) if prior else ()
    built_from = frozenset(o.t for o in obs) | (prior.built_from if prior else frozenset())

    if not geometry_ready:
        usable: list[Detection] = []
    else:
        usable = [d for d in current if d.position is not None and d.theta is not None]

    obs_by_t = {o.t: o for o in obs}
    objects: list[DetectedObject] = []
    by_class: dict[str, list] = {}
    for d in usable:
        by_class.setdefault(d.raw.apparent_class, []).append(("det", d))
    for po in prior_objects:
        by_class.setdefault(po.cls, []).append(("prior", po))

    for cls in sorted(by_class):
        members = by_class[cls]
        points = []
        for kind, m in members:
            if kind == "det":
                points.append(m.position)
            else:
                points.append((m.pose[0], m.pose[1]))
        for group in _cluster(points):
            xs = [points[i][0] for i in group]
            ys = [points[i][1] for i in group]
            cx, cy = sum(xs) / len(xs), sum(ys) / len(ys)
            colors, regions, provenance, thetas = [], [], set(), []
            for i in group:
                kind, m = members[i]
                if kind == "det":
                    colors.append(m.color)
                    regions.append(obs_by_t[m.obs_t].scene_label)
                    provenance.add(m.obs_t)
                    thetas.append((m.obs_t, m.theta))
                else:
                    colors.append(m.color)
                    regions.append(m.region)
                    provenance.update(m.provenance)
                    thetas.append((min(m.provenance, default=0), m.pose[2]))
            theta = min(thetas)[1] if thetas else 0.0
            objects.append(DetectedObject(
                id=_object_id(cls, cx, cy),
                cls=cls,
                color=_majority(colors),
                pose=(cx, cy, theta),
                region=_majority(regions, default=FALLBACK_SCENE),
                provenance=frozenset(provenance),
            ))

    objects.sort(key=lambda o: o.id)
    return WorldModel(
        objects=tuple(objects),
        built_from=built_from,
        classifiers_used=selected,
        total_cost=total_cost,
        robot_pose=robot_pose,
        cost_ledger=tuple(ledger),
    )


# ---------------------------------------------------------------------------
# Serialization

def save_world(spec: WorldSpec, path) -> None:
    doc = {
        "schema": WORLD_SCHEMA,
        "name": spec.name,
        "seed": spec.seed,
        "noise": spec.noise,
        "clutter_rate": spec.clutter_rate,
        "sensing_range": spec.sensing_range,
        "registry_classes": list(spec.registry_classes),
        "objects": [
            {
                "id": o.id, "class": o.cls, "color": o.color,
                "pose": [o.pose[0], o.pose[1], o.pose[2]], "region": o.region,
            }
            for o in spec.objects
        ],
        "trajectory": [[p[0], p[1], p[2]] for p in spec.trajectory],
        "cooccurrence": spec.cooccurrence.to_dict(),
    }
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=True))


def load_world(path) -> WorldSpec:
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict):
        raise InvalidSpec("world file is not a mapping")
    if doc.get("schema") != WORLD_SCHEMA:
        raise UnknownSchemaVersion(doc.get("schema"), WORLD_SCHEMA)
    try:
        cooc = doc["cooccurrence"]
        model = CooccurrenceModel.from_dict(
            cooc["table"], cooc["characteristic"], cooc.get("prior")
        )
        return WorldSpec(
            name=doc["name"],
            seed=int(doc["seed"]),
            noise=float(doc.get("noise", 0.0)),
            clutter_rate=float(doc.get("clutter_rate", 0.0)),
            sensing_range=float(doc.get("sensing_range", SENSING_RANGE)),
            registry_classes=tuple(doc.get("registry_classes", ())),
            objects=tuple(
                LatentObject(
                    id=o["id"], cls=o["class"], color=o["color"],
                    pose=tuple(o["pose"]), region=o["region"],
                )
                for o in doc["objects"]
            ),
            trajectory=tuple(tuple(p) for p in doc["trajectory"]),
            cooccurrence=model,
        )
    except (KeyError, TypeError) as exc:
        raise InvalidSpec(f"world file missing field: {exc}") from exc


def save_observations(observations, path) -> None:
    lines = [json.dumps({"schema": OBS_LOG_SCHEMA, "kind": "observation_log"},
                        sort_keys=True)]
    for o in observations:
        lines.append(json.dumps({
            "t": o.t,
            "robot_pose": list(o.robot_pose),
            "scene_label": o.scene_label,
            "scene_scores": [[l, s] for l, s in o.scene_scores],
            "sensed": [
                {
                    "latent_id": d.latent_id,
                    "rel": list(d.rel),
                    "apparent_class": d.apparent_class,
                    "apparent_color": d.apparent_color,
                    "noisy": d.noisy,
                }
                for d in o.sensed
            ],
        }, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n")


def load_observations(path) -> tuple[Observation, ...]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise InvalidSpec("empty observation log")
    header = json.loads(lines[0])
    if header.get("schema") != OBS_LOG_SCHEMA:
        raise UnknownSchemaVersion(header.get("schema"), OBS_LOG_SCHEMA)
    out = []
    for line in lines[1:]:
        if not line.strip():
            continue
        rec = json.loads(line)
        out.append(Observation(
            t=int(rec["t"]),
            robot_pose=tuple(rec["robot_pose"]),
            scene_label=rec["scene_label"],
            scene_scores=tuple((l, float(s)) for l, s in rec["scene_scores"]),
            sensed=tuple(
                RawDetection(
                    latent_id=d["latent_id"],
                    rel=tuple(d["rel"]),
                    apparent_class=d["apparent_class"],
                    apparent_color=d["apparent_color"],
                    noisy=bool(d["noisy"]),
                )
                for d in rec["sensed"]
            ),
        ))
    return tuple(out)
