"""How the log-replay metrics work, on a seven-product event.

A predicted facet path filters a recorded result set: a product is kept
iff the path is a prefix of its catalog path. Clicked products are the
truth. Deeper predictions keep fewer products (precision up), at the
risk of filtering out something the shopper wanted (recall down).

    python3 demos/replay_walkthrough.py
"""

import numpy as np

from facetpath.evalharness import SearchEventGroup, simulate_event, sweep_thresholds
from facetpath.predictors import PathPrediction
from facetpath.taxonomy import NodeId, Path, TaxonomyTree

tree = TaxonomyTree(
    {
        "p1": Path.of("sport", "basketball", "lebron"),
        "p2": Path.of("sport", "basketball", "lebron"),
        "p3": Path.of("sport", "basketball", "lebron"),
        "p4": Path.of("sport", "tennis", "nadal"),
        "p5": Path.of("sport", "tennis", "nadal"),
        "p6": Path.of("sport", "basketball", "jordan"),
        "p7": Path.of("sport", "basketball", "kobe"),
    }
)

# one search: seven results, the shopper clicked p1 and p4
event = SearchEventGroup(
    event_id="e1",
    timestamp=0,
    query="sport stars",
    session_products=(),
    result_set=("p1", "p2", "p3", "p4", "p5", "p6", "p7"),
    clicked=("p1", "p4"),
)

print("truth: clicked p1 (sport/basketball/lebron) and p4 (sport/tennis/nadal)\n")
print(f"{'predicted path':<28} {'kept':>4} {'tp':>3} {'fp':>3} {'fn':>3} {'precision':>10} {'recall':>7}")
for labels in (("sport",), ("sport", "basketball"), ("sport", "basketball", "lebron")):
    sim = simulate_event(event, Path(labels), tree)
    print(f"{'/'.join(labels):<28} {sim.tp + sim.fp:>4} {sim.tp:>3} {sim.fp:>3} {sim.fn:>3} "
          f"{sim.precision:>10.4f} {sim.recall:>7.4f}")

# the decoder emits one confidence per node; the threshold ct decides
# how much of the generated path survives
prediction = PathPrediction(
    nodes=(NodeId(1, "sport"), NodeId(2, "basketball"), NodeId(3, "lebron")),
    step_distributions=[np.array([0.9, 0.1])] * 3,
    step_gini=[0.999, 0.95, 0.60],
)

print("\none generated path, confidences 0.999 / 0.95 / 0.60, swept over ct:\n")
rows = sweep_thresholds([(event, prediction)], [0.996, 0.98, 0.9, 0.5], tree)
print(f"{'ct':>6} {'depth':>6} {'precision':>10} {'recall':>7}")
for row in rows:
    p = "-" if row.micro_precision is None else f"{row.micro_precision:.4f}"
    print(f"{row.ct:>6} {row.mean_depth:>6.1f} {p:>10} {row.micro_recall:>7.4f}")
print("\nlower ct keeps deeper paths: recall never rises, and the full")
print("path is the most precise filter even though the middle level dips.")
