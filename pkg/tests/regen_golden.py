"""Regenerate golden outputs for the bundled fixtures.

Run from the repository root after regen_fixtures.py:

    python tests/regen_golden.py

The frozen values come from two sources: the library pipeline itself (for
determinism checks at loose float tolerance) and the brute-force oracle (for
optimality bounds: the solver must match or beat the best enumerated encoder
at every probe beta, and no enumerated encoder may dip below the frontier).
At this scale the oracle enumerates all 4^10 deterministic four-word
encoders; the soft simplex grid is exercised at the smaller scales covered
by the oracle acceptance test.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

import ibnaming as ib
from ibnaming.ingest import read_feature_table, read_naming_counts, read_similarity_csv

import oracle

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

CONTAINER_BETA_MAX = 64.0
CONTAINER_NUM_BETAS = 150
ANIMAL_BETA_MAX = 8192.0
ANIMAL_NUM_BETAS = 200
BASELINE_SAMPLES = 100
BASELINE_SEED = 7
# indices into the frontier grid probed against the oracle
ORACLE_GRID_INDICES = [15, 35, 55, 75, 90, 105, 120, 130, 140, 149]
ORACLE_WORDS = 4


def frontier_summary(front: ib.Frontier) -> dict:
    return {
        "betas": [p.beta for p in front.points],
        "complexity_bits": [p.complexity_bits for p in front.points],
        "accuracy_bits": [p.accuracy_bits for p in front.points],
        "objective_bits": [p.objective_bits for p in front.points],
        "effective_k": [p.effective_k for p in front.points],
        "converged": [p.converged for p in front.points],
    }


def oracle_block(space: ib.MeaningSpace, front: ib.Frontier) -> dict:
    p = space.need.mass
    reps = space.representations
    probe_betas = np.array([front.points[i].beta for i in ORACLE_GRID_INDICES])
    grid_betas = np.array([pt.beta for pt in front.points if pt.beta > 0])
    grid_objectives = np.array([pt.objective_bits for pt in front.points if pt.beta > 0])
    best = np.full(len(probe_betas), np.inf)
    worst_margin = np.inf
    for stack in oracle.deterministic_encoders(space.num_meanings, ORACLE_WORDS):
        c, a = oracle.batch_tradeoffs(p, reps, stack)
        f = c[:, None] - a[:, None] * probe_betas[None, :]
        best = np.minimum(best, f.min(axis=0))
        fg = c[:, None] - a[:, None] * grid_betas[None, :]
        margin = (fg - grid_objectives[None, :]) / grid_betas[None, :]
        worst_margin = min(worst_margin, float(margin.min()))
    return {
        "probe_indices": ORACLE_GRID_INDICES,
        "probe_betas": probe_betas.tolist(),
        "det_best_objective_bits": best.tolist(),
        "worst_margin": worst_margin,
        "num_words": ORACLE_WORDS,
    }


def container_pipeline():
    sim = read_similarity_csv(FIXTURES / "similarity.csv")
    space0 = ib.meaning_space_from_similarity(sim)
    order = space0.meaning_labels
    systems = {}
    weights = []
    for key, fname in (("langA", "naming_a.tsv"), ("langB", "naming_b.tsv")):
        counts = read_naming_counts(FIXTURES / fname)
        systems[key] = ib.naming_system_from_counts(counts, meaning_order=order)
        weights.append(ib.naming_weights_from_counts(counts, order))
    prior = ib.li_prior(list(systems.values()), epsilon=0.001, meaning_weights=weights)
    space = ib.attach_need(space0, prior)
    cfg = ib.SolverConfig(
        beta_grid=ib.default_beta_grid(CONTAINER_BETA_MAX, CONTAINER_NUM_BETAS)
    )
    front = ib.anneal_frontier(space, cfg)
    return space, prior, systems, front


def container_golden() -> dict:
    space, prior, systems, front = container_pipeline()
    assert front.validate() == []
    evals = {
        key: ib.fit_beta(sys, space, front).to_json_dict()
        for key, sys in systems.items()
    }
    base = ib.permutation_baseline(systems["langA"], space, front,
                                   BASELINE_SAMPLES, BASELINE_SEED)
    mix = ib.mixture_complexity(systems["langA"], systems["langB"], space.need, 0.5)
    return {
        "config": {"beta_max": CONTAINER_BETA_MAX, "num_betas": CONTAINER_NUM_BETAS},
        "prior": {"labels": list(prior.labels), "mass": prior.mass.tolist()},
        "space_mutual_information": space.mutual_information,
        "frontier": frontier_summary(front),
        "eval": evals,
        "baseline_langA": base.to_json_dict(),
        "mixture": {
            "weight": 0.5,
            "joint_bits": mix,
            "complexity_langA": ib.complexity(systems["langA"], space.need),
            "complexity_langB": ib.complexity(systems["langB"], space.need),
        },
        "oracle": oracle_block(space, front),
    }


def animal_pipeline():
    table = read_feature_table(FIXTURES / "features.csv", FIXTURES / "familiarity.csv")
    space = ib.meaning_space_from_features(table)
    cfg = ib.SolverConfig(beta_grid=ib.default_beta_grid(ANIMAL_BETA_MAX, ANIMAL_NUM_BETAS))
    return space, ib.anneal_frontier(space, cfg)


def animal_golden() -> dict:
    space, front = animal_pipeline()
    assert front.validate() == []
    report = ib.hierarchy_report(front, [1, 2, 3, 4], space, top_n=5)
    return {
        "config": {"beta_max": ANIMAL_BETA_MAX, "num_betas": ANIMAL_NUM_BETAS},
        "need": {"labels": list(space.need.labels), "mass": space.need.mass.tolist()},
        "space_mutual_information": space.mutual_information,
        "frontier": frontier_summary(front),
        "hierarchy": report.to_json_dict(),
        "oracle": oracle_block(space, front),
    }


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)
    for name, build in (("container.json", container_golden),
                        ("animal.json", animal_golden)):
        payload = build()
        (GOLDEN / name).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n",
                                   encoding="utf-8")
        print(f"wrote {GOLDEN / name}")


if __name__ == "__main__":
    main()
