"""End-to-end reproduction of the build-mode efficiency comparison.

Trains the model bundle from scratch (or loads one with ``--models``),
simulates both benchmark sites, runs every manifest case under all four
build modes, and writes the result CSV plus a per-run audit JSON.  The
printed table shows, per case, the world-model size and build cost of
each mode alongside its cost ratio against the build-everything
baseline.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from groundling import corpus
from groundling.correspondence import train
from groundling.fixtures import benchmark_manifest, reference_world, site_spec
from groundling.pipeline import ModelBundle, benchmark
from groundling.symbols import (
    default_registry,
    enumerate_grounding_type_space,
    enumerate_perception_space,
    enumerate_semantic_space,
)
from groundling.world import simulate


def train_bundle(registry, seed: int) -> ModelBundle:
    examples = corpus.generate(corpus.CorpusConfig(seed=seed), registry)
    train_set, _ = corpus.split(examples)
    sets = corpus.training_sets(train_set, registry, reference_world(registry))
    spaces = {
        "semantic": enumerate_semantic_space(),
        "perception": enumerate_perception_space(registry),
        "grounding": enumerate_grounding_type_space(registry),
    }
    return ModelBundle(**{
        domain: train(spaces[domain], sets[domain]).model
        for domain in ("semantic", "perception", "grounding")
    })


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--models", type=Path, default=None,
                        help="load a saved bundle instead of training")
    parser.add_argument("--out", type=Path, default=Path("benchmark.csv"))
    parser.add_argument("--audit", type=Path, default=Path("benchmark_audit.json"))
    parser.add_argument("--seed", type=int, default=7, help="corpus sampling seed")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)

    registry = default_registry()
    if args.models is not None:
        bundle = ModelBundle.load(args.models)
        print(f"loaded bundle from {args.models}")
    else:
        bundle = train_bundle(registry, args.seed)
        print("trained bundle from scratch")

    site_observations = {
        site: simulate(site_spec(site), registry) for site in ("site-1", "site-2")
    }
    report = benchmark(benchmark_manifest(), site_observations, bundle,
                       registry, jobs=args.jobs)
    report.write_csv(args.out)
    report.write_audit(args.audit)
    print(report.to_table())
    print(f"wrote {args.out} and {args.audit}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
