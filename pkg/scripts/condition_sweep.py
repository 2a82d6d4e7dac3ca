"""CG iteration counts of the lagged-diffusivity system as eps shrinks.

Usage:
  python scripts/condition_sweep.py --n 256 --eps 1e-1,1e-2,1e-3,1e-4 --delta 0
"""

from __future__ import annotations

import argparse
import logging

from tvreg.solver.system import condition_sweep


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--eps", type=_floats, default=(1e-1, 1e-2, 1e-3, 1e-4))
    parser.add_argument("--delta", type=float, default=0.0)
    parser.add_argument("--lam", type=float, default=1.0)
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--max-iter", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING)
    rows = condition_sweep(
        n=args.n,
        eps_values=args.eps,
        delta=args.delta,
        lam=args.lam,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
    )
    print(f"{'eps':>10} {'a_min':>12} {'a_max':>12} {'cg_iters':>9} converged")
    for row in rows:
        print(f"{row.eps:>10.3g} {row.a_min:>12.4g} {row.a_max:>12.4g} {row.iterations:>9d} {row.converged}")


if __name__ == "__main__":
    main()
