"""
l1 edge penalties for tasks with sparse jumps
=============================================

Two halves of a ring hold two different task vectors: neighbor
differences are zero on eight edges and large on the two edges joining
the halves. A quadratic (Laplacian) coupling penalizes the jumps
heavily and drags both halves toward each other, which ruins the
estimates. The l1 edge penalty's pull is bounded by rho, so it shrinks
the noisy zero differences while merely nudging the true jumps.

Takeaways, in the order the table prints them:
  * quadratic coupling across real jumps is catastrophic,
  * l1 coupling at the same strength degrades ~50x less,
  * a weak l1 threshold even beats no coupling at all,
  * knowing the partition (subspace projection) is better still.
"""

from adaptnets import run_experiment

base = {
    "schema": 1,
    "seed": 31,
    "iters": 5000,
    "runs": 5,
    "parallel": 4,
    "graph": {"kind": "ring", "n": 10},
    "model": {"kind": "mse", "m": 2, "noise_var": 0.1,
              "truth": {"kind": "piecewise", "sizes": [5, 5], "scale": 1.0}},
    "strategy": None,
}

rows = [
    ("noncooperative", {"kind": "noncooperative", "mu": 0.005}),
    ("laplacian  eta=2", {"kind": "laplacian_reg", "mu": 0.005, "eta": 2.0}),
    ("prox l1    eta=2 rho=1", {"kind": "prox_l1", "mu": 0.005, "eta": 2.0,
                                "rho": 1.0}),
    ("prox l1    eta=2 rho=0.01", {"kind": "prox_l1", "mu": 0.005,
                                   "eta": 2.0, "rho": 0.01}),
    ("two-cluster projection", {"kind": "subspace_projection", "mu": 0.005,
                                "subspace": {"clusters": [5, 5]}}),
]

print(f"{'strategy':<28} {'steady MSD':>11}")
for name, strat in rows:
    res = run_experiment(dict(base, strategy=strat))
    print(f"{name:<28} {res.steady_wo.value:>11.3e}")

print("\nthe l1 penalty buys robustness: its worst case is a bounded bias,")
print("while the quadratic penalty's bias grows with the jump size.")
