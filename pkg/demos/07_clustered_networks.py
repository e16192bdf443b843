"""
Clustered networks: how much should clusters talk to each other?
================================================================

Two five-agent clusters on a ring. Inside a cluster, agents share one
task and combine with Metropolis weights; across the boundary (the two
ring edges joining the halves) an optional penalty couples the
clusters. We compare no coupling, a quadratic penalty, and an l1
penalty at two strengths, under two ground truths:

  * identical tasks: the clusters secretly agree, so inter-cluster
    coupling is free variance reduction (the closer to full-network
    averaging, the better),
  * distinct tasks: the clusters genuinely differ, and any coupling
    strong enough to matter drags both halves off target.

The l1 penalty's drag is capped at eta*rho per coordinate per step.
That cap is the knob: set it well below the task difference and the
bias stays bounded; set it above (rho=1 here caps at 2, while the
typical coordinate jump is about 1.1) and l1 merges the clusters just
as destructively as the quadratic.
"""

from adaptnets import run_experiment

COUPLINGS = [
    ("none (eta=0)", {"eta": 0.0}),
    ("quadratic rho=1", {"eta": 2.0, "penalty": "quadratic", "rho": 1.0}),
    ("l1 rho=1", {"eta": 2.0, "penalty": "l1", "rho": 1.0}),
    ("l1 rho=0.02", {"eta": 2.0, "penalty": "l1", "rho": 0.02}),
]
TRUTHS = [
    ("distinct", {"kind": "piecewise", "sizes": [5, 5], "scale": 1.0}),
    ("identical", {"kind": "constant", "scale": 1.0}),
]


def steady(truth, extra):
    return run_experiment({
        "schema": 1, "seed": 41, "iters": 5000, "runs": 5, "parallel": 4,
        "graph": {"kind": "ring", "n": 10},
        "model": {"kind": "mse", "m": 2, "noise_var": 0.1, "truth": truth},
        "strategy": {"kind": "clustered", "mu": 0.005,
                     "clusters": [5, 5], **extra},
    }).steady_wo.value


print(f"{'inter-cluster coupling':<24} {'distinct tasks':>15} "
      f"{'identical tasks':>16}")
for name, extra in COUPLINGS:
    row = [steady(truth, extra) for _, truth in TRUTHS]
    print(f"{name:<24} {row[0]:>15.3e} {row[1]:>16.3e}")

print("""
with identical tasks every coupling beats none, and l1 wins outright:
below its threshold it snaps the boundary pair to exact agreement,
which mixes the halves faster than the quadratic's 1% nudges. With
distinct tasks the ranking flips, no coupling is best, and only the
weak l1 cap keeps the damage to a few times the uncoupled error.
Couple clusters only as much as their tasks are related.""")
