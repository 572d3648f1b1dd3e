"""
ReliaSpan - Edge-Count Scaling Tables
"""
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from reliaspan.construction.gradation import build_gradation
from reliaspan.construction.spanner1d import (
    build_1d,
    build_boosted_1d,
    derive_params,
    edge_bound,
    edge_count,
)
from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger
from reliaspan.core.seeding import CONSTRUCTION, derive_seed, rng
from reliaspan.geometry.spannerhd import build_hd, edge_count_hd


def edge_scaling(
    n_list: Sequence[int],
    rho: float,
    delta: Optional[float] = None,
    c_const: Optional[float] = None,
    seed: int = 0,
    variant: str = "1d",
    eps: Optional[float] = None,
    dim: int = 2,
    distinct: bool = False,
    output: Optional[str] = None,
) -> pd.DataFrame:
    """
    Edge counts against the size bound for growing n

    Args:
        n_list: Ascending vertex counts
        rho, delta, c_const: Construction parameters
        seed: Construction seed
        variant: "1d" or "hd"
        eps, dim: d-dimensional parameters
        distinct: Also enumerate distinct edges
        output: Optional CSV path

    Returns:
        1-D: n, eps_step, M, edges, distinct, bound, ratio (edges / (n/eps_step)),
        growth (vs the previous n), boosted (when delta is given).
        hd: n, N, M, edges, distinct, bound, within_bound.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidInputError("n_list must be non-empty and strictly ascending")

    rows: List[dict] = []
    for n in n_list:
        if variant == "1d":
            params = derive_params(n, rho, delta, c_const)
            s = build_1d(build_gradation(n, derive_seed(CONSTRUCTION, seed)), params)
            count = edge_count(s, distinct=distinct)
            row = {
                "n": n,
                "eps_step": params.eps_step,
                "M": params.M,
                "edges": count.total,
                "distinct": count.distinct,
                "bound": edge_bound(params),
                "ratio": count.total / (n / params.eps_step),
            }
            if delta is not None:
                union = build_boosted_1d(n, rho, delta, c_const, seed)
                row["boosted"] = sum(edge_count(c).total for c in union.copies)
        elif variant == "hd":
            if eps is None:
                raise InvalidInputError("hd scaling needs eps")
            points = rng(derive_seed("points", seed, n, dim)).random((n, dim))
            s = build_hd(points, eps, rho, delta, c_const, seed)
            count = edge_count_hd(s, distinct=distinct)
            row = {
                "n": n,
                "N": s.params.N,
                "M": s.params.M,
                "edges": count.total,
                "distinct": count.distinct,
                "bound": count.bound,
                "within_bound": count.total <= count.bound,
            }
        else:
            raise InvalidInputError(f"unknown variant {variant!r}")
        rows.append(row)

    table = pd.DataFrame(rows)
    if variant == "1d":
        table["growth"] = table["edges"] / table["edges"].shift(1)
        table.loc[0, "growth"] = np.nan
    if output:
        table.to_csv(output, index=False)
    app_logger.info(f"Edge scaling over n={n_list[0]}..{n_list[-1]} ({variant})")
    return table
