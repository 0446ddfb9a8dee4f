"""How pessimistic is the certified bound?  |I_n| next to C_n, order by order.

    python scripts/bound_tightness.py --orders 12 --q 3 4 6
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass, field

from hidaprop.dyson import BoundParams, DysonSolver, log_tail_bound_cn
from hidaprop.kernels import OscillatorProblem
from hidaprop.measures import SignedMeasure


@dataclass
class TightnessConfig:
    coupling: float = 0.2
    k: float = 1.0
    length: float = 0.5
    x0: float = 0.3
    x: float = 0.3
    orders: int = 10
    q: list = field(default_factory=lambda: [4.0])


def run(cfg: TightnessConfig):
    p = OscillatorProblem.make(0.0, cfg.length, cfg.k, cfg.x0, cfg.x)
    nu = SignedMeasure.point_mass(cfg.coupling, 0.0, p.window)
    terms = DysonSolver(nu, p).terms(cfg.orders)
    params = {q: BoundParams.default(nu, p, q=q) for q in cfg.q}
    print("n,|I_n|," + ",".join(f"log10(C_n/|I_n|) q={q:g}" for q in cfg.q))
    for n, t in enumerate(terms):
        cols = [f"{(log_tail_bound_cn(n, nu, p, bp) - math.log(abs(t))) / math.log(10):.2f}"
                for bp in params.values()]
        print(f"{n},{abs(t):.3e}," + ",".join(cols))


def main(argv=None):
    d = TightnessConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--coupling", type=float, default=d.coupling)
    ap.add_argument("--k", type=float, default=d.k)
    ap.add_argument("--length", type=float, default=d.length)
    ap.add_argument("--x0", type=float, default=d.x0)
    ap.add_argument("--x", type=float, default=d.x)
    ap.add_argument("--orders", type=int, default=d.orders)
    ap.add_argument("--q", type=float, nargs="+", default=d.q)
    run(TightnessConfig(**vars(ap.parse_args(argv))))


if __name__ == "__main__":
    main()
