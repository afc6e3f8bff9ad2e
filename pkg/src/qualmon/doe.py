"""Full-factorial what-if experiments on a trained ensemble: per-member level
effects, cross-member envelopes and recommended setting bounds.

Effects over hard 0/1 incidences are computed in exact rational arithmetic so
the balanced-design identity (effects sum to zero per member and factor)
holds exactly; floats appear only in serialized output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class OperatingPoint:
    """Fixed natural-unit values for every uncontrollable factor."""

    values: dict

    def validate(self, schema):
        expected = {f.name for f in schema if not f.controllable}
        got = set(self.values)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValueError(f"operating point mismatch: missing={missing} extra={extra}")
        return self

    def to_dict(self):
        return dict(self.values)


def default_operating_point(dataset):
    """Demo operating point: discrete protocol factors at their first state,
    product counts at the training median, remaining continuous factors at
    the training mean."""
    values = {}
    for j, f in enumerate(dataset.schema):
        if f.controllable:
            continue
        if f.kind == "discrete":
            values[f.name] = f.states[0]
        else:
            col = np.asarray([row[j] for row in dataset.raw], dtype=float)
            if "product" in f.name:
                values[f.name] = float(np.median(col))
            else:
                values[f.name] = float(col.mean())
    return OperatingPoint(values=values).validate(dataset.schema)


@dataclass
class FactorialPlan:
    """Cross product of controllable-factor levels, row-major in factor order."""

    factors: list  # controllable FactorSpec, schema order
    levels: dict  # factor name -> list of natural-unit levels
    run_level_idx: np.ndarray  # runs x factors, level index per factor

    @property
    def n_runs(self):
        return self.run_level_idx.shape[0]

    def run_values(self, run):
        return {
            f.name: self.levels[f.name][self.run_level_idx[run, i]]
            for i, f in enumerate(self.factors)
        }

    def to_dict(self):
        return {
            "factors": [f.name for f in self.factors],
            "levels": {k: list(v) for k, v in self.levels.items()},
            "runs": self.run_level_idx.tolist(),
        }


def build_plan(schema, operating_point, levels_per_factor):
    """Inclusive evenly spaced grids for continuous controllables, all states
    for discrete ones; `levels_per_factor` is an int or a per-name mapping."""
    operating_point.validate(schema)
    controllable = [f for f in schema if f.controllable]
    if not controllable:
        raise ValueError("schema has no controllable factors")
    levels = {}
    for f in controllable:
        if f.kind == "discrete":
            levels[f.name] = list(f.states)
            continue
        count = levels_per_factor[f.name] if isinstance(levels_per_factor, dict) else levels_per_factor
        if count < 2:
            raise ValueError(f"factor {f.name}: need at least 2 levels, got {count}")
        lo, hi = f.bounds
        levels[f.name] = [float(v) for v in np.linspace(lo, hi, int(count))]
    grids = [range(len(levels[f.name])) for f in controllable]
    run_level_idx = np.asarray(list(itertools.product(*grids)), dtype=int)
    return FactorialPlan(factors=controllable, levels=levels, run_level_idx=run_level_idx)


def simulate_plan(ensemble, plan, operating_point, encoder, use_scores=False):
    """Predict every run with every ensemble member.

    Rows are assembled from the operating point plus the run's controllable
    values, encoded with the model's stored normalization. Returns a
    runs x members matrix of hard incidences (or scores when use_scores).
    """
    operating_point.validate(encoder.schema)
    plan_names = {f.name for f in plan.factors}
    schema_names = {f.name for f in encoder.schema if f.controllable}
    if plan_names != schema_names:
        raise ValueError("plan factors do not match the schema's controllable factors")
    rows = []
    for run in range(plan.n_runs):
        run_vals = plan.run_values(run)
        row = []
        for f in encoder.schema:
            row.append(run_vals[f.name] if f.controllable else operating_point.values[f.name])
        rows.append(tuple(row))
    X = encoder.encode_many(rows)
    columns = []
    for member in ensemble.members:
        columns.append(member.score(X) if use_scores else member.predict_class(X))
    out = np.column_stack(columns)
    return out.astype(float) if use_scores else out.astype(int)


@dataclass
class EffectTable:
    """effects[member][factor name] = list of per-level effects (Fractions)."""

    factors: list
    levels: dict
    effects: list  # per member: {factor name: [Fraction, ...]}

    @property
    def n_members(self):
        return len(self.effects)

    def as_float(self, member, factor):
        return [float(v) for v in self.effects[member][factor]]

    def to_dict(self):
        return {
            "factors": [f.name for f in self.factors],
            "levels": {k: list(v) for k, v in self.levels.items()},
            "effects": [
                {name: [float(v) for v in per_factor[name]] for name in per_factor}
                for per_factor in self.effects
            ],
        }


def factor_effects(incidence, plan):
    """Per member, factor and level: mean incidence at the level minus the
    grand mean; exact rationals when the incidences are hard 0/1 counts."""
    incidence = np.asarray(incidence)
    if incidence.shape[0] != plan.n_runs:
        raise ValueError("incidence rows must equal plan runs")
    exact = incidence.dtype.kind in "iub"
    r = plan.n_runs
    effects = []
    for m in range(incidence.shape[1]):
        col = incidence[:, m]
        grand_num = int(col.sum()) if exact else float(col.sum())
        per_factor = {}
        for fi, f in enumerate(plan.factors):
            vals = []
            for li in range(len(plan.levels[f.name])):
                mask = plan.run_level_idx[:, fi] == li
                n_level = int(mask.sum())
                level_num = int(col[mask].sum()) if exact else float(col[mask].sum())
                if exact:
                    vals.append(Fraction(level_num, n_level) - Fraction(grand_num, r))
                else:
                    vals.append(level_num / n_level - grand_num / r)
            per_factor[f.name] = vals
        effects.append(per_factor)
    return EffectTable(factors=plan.factors, levels=plan.levels, effects=effects)


@dataclass
class EffectEnvelope:
    """Per factor and level: [min, max] effect across members, plus the
    recommended levels (those whose upper bound does not exceed zero)."""

    factors: list
    levels: dict
    lower: dict  # factor name -> [Fraction/float per level]
    upper: dict

    def to_dict(self):
        out = {}
        rec = recommend_bounds(self)
        for f in self.factors:
            out[f.name] = {
                "levels": list(self.levels[f.name]),
                "lower": [float(v) for v in self.lower[f.name]],
                "upper": [float(v) for v in self.upper[f.name]],
                **rec[f.name],
            }
        return out


def envelope(effect_table):
    """Member-wise min/max effect per (factor, level)."""
    if effect_table.n_members < 1:
        raise ValueError("need at least one member")
    lower, upper = {}, {}
    for f in effect_table.factors:
        per_member = [per[f.name] for per in effect_table.effects]
        lower[f.name] = [min(vals) for vals in zip(*per_member)]
        upper[f.name] = [max(vals) for vals in zip(*per_member)]
    return EffectEnvelope(
        factors=effect_table.factors, levels=effect_table.levels, lower=lower, upper=upper
    )


def recommend_bounds(env):
    """Levels whose upper envelope is <= 0: no member predicts increased risk.

    Contiguous recommended levels of a continuous factor also report as an
    interval [lowest level, highest level]; non-contiguous sets stay sets.
    """
    out = {}
    for f in env.factors:
        idx = [i for i, up in enumerate(env.upper[f.name]) if up <= 0]
        levels = [env.levels[f.name][i] for i in idx]
        contiguous = bool(idx) and idx == list(range(idx[0], idx[-1] + 1))
        interval = None
        if f.kind == "continuous" and contiguous and levels:
            interval = [levels[0], levels[-1]]
        out[f.name] = {
            "recommended_levels": levels,
            "interval": interval,
            "empty": not levels,
        }
    return out


def interaction_effects(incidence, plan, factor_a, factor_b):
    """Per-member level-pair interaction grid:
    mean at (a_i, b_j) - main effect a_i - main effect b_j - grand mean."""
    names = [f.name for f in plan.factors]
    if factor_a not in names or factor_b not in names:
        raise ValueError("both factors must be in the plan")
    ia, ib = names.index(factor_a), names.index(factor_b)
    incidence = np.asarray(incidence)
    if incidence.shape[0] != plan.n_runs:
        raise ValueError("incidence rows must equal plan runs")
    exact = incidence.dtype.kind in "iub"
    table = factor_effects(incidence, plan)
    r = plan.n_runs
    la, lb = len(plan.levels[factor_a]), len(plan.levels[factor_b])
    grids = []
    for m in range(incidence.shape[1]):
        col = incidence[:, m]
        grand = (
            Fraction(int(col.sum()), r) if exact else float(col.sum()) / r
        )
        main_a = table.effects[m][factor_a]
        main_b = table.effects[m][factor_b]
        grid = []
        for i in range(la):
            row = []
            for j in range(lb):
                mask = (plan.run_level_idx[:, ia] == i) & (plan.run_level_idx[:, ib] == j)
                n_cell = int(mask.sum())
                cell_sum = int(col[mask].sum()) if exact else float(col[mask].sum())
                cell_mean = Fraction(cell_sum, n_cell) if exact else cell_sum / n_cell
                row.append(cell_mean - main_a[i] - main_b[j] - grand)
            grid.append(row)
        grids.append(grid)
    return grids


def envelope_plot_data(env):
    """Per-factor (level, lower, upper) triples plus the recommended set;
    consumed by the CLI artifact and the operator console."""
    rec = recommend_bounds(env)
    out = []
    for f in env.factors:
        out.append(
            {
                "factor": f.name,
                "kind": f.kind,
                "points": [
                    [lvl, float(lo), float(up)]
                    for lvl, lo, up in zip(env.levels[f.name], env.lower[f.name], env.upper[f.name])
                ],
                **rec[f.name],
            }
        )
    return out
