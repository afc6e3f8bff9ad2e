from fractions import Fraction

import numpy as np
import pytest

import qualmon as qm
from qualmon.doe import (
    OperatingPoint,
    build_plan,
    default_operating_point,
    envelope,
    envelope_plot_data,
    factor_effects,
    interaction_effects,
    recommend_bounds,
    simulate_plan,
)


@pytest.fixture(scope="module")
def ctl_schema():
    return [
        qm.FactorSpec("a", "continuous", bounds=(0.0, 1.0), controllable=True),
        qm.FactorSpec("b", "continuous", bounds=(10.0, 20.0), controllable=True),
        qm.FactorSpec("mode", "discrete", states=("x", "y", "z"), controllable=True),
        qm.FactorSpec("env", "continuous", bounds=(-5.0, 5.0)),
    ]


@pytest.fixture(scope="module")
def op(ctl_schema):
    return OperatingPoint(values={"env": 0.0}).validate(ctl_schema)


def test_operating_point_validation(ctl_schema):
    with pytest.raises(ValueError, match="missing"):
        OperatingPoint(values={}).validate(ctl_schema)
    with pytest.raises(ValueError, match="extra"):
        OperatingPoint(values={"env": 0.0, "a": 1.0}).validate(ctl_schema)


def test_build_plan_shapes(ctl_schema, op):
    plan = build_plan(ctl_schema, op, 10)
    # 10 x 10 x 3 states
    assert plan.n_runs == 300
    assert plan.levels["a"] == [float(v) for v in np.linspace(0, 1, 10)]
    assert plan.levels["mode"] == ["x", "y", "z"]


def test_build_plan_three_factors_ten_levels():
    schema = [
        qm.FactorSpec(n, "continuous", bounds=(0.0, 1.0), controllable=True) for n in ("f1", "f2", "f3")
    ] + [qm.FactorSpec("env", "continuous", bounds=(0.0, 1.0))]
    plan = build_plan(schema, OperatingPoint(values={"env": 0.5}), 10)
    assert plan.n_runs == 1000


def test_build_plan_edges(op, ctl_schema):
    two = build_plan(
        [qm.FactorSpec("a", "continuous", bounds=(0.0, 1.0), controllable=True)],
        OperatingPoint(values={}),
        2,
    )
    assert two.n_runs == 2
    assert two.levels["a"] == [0.0, 1.0]
    three = build_plan(
        [qm.FactorSpec("a", "continuous", bounds=(0.0, 1.0), controllable=True)],
        OperatingPoint(values={}),
        3,
    )
    assert three.levels["a"] == [0.0, 0.5, 1.0]
    with pytest.raises(ValueError, match="controllable"):
        build_plan([qm.FactorSpec("env", "continuous", bounds=(0.0, 1.0))], OperatingPoint(values={"env": 0.0}), 5)
    with pytest.raises(ValueError, match="levels"):
        build_plan(ctl_schema, op, 1)


class _ThresholdMember:
    """Defect iff encoded factor `a` exceeds a cut in natural units."""

    family = "tree"

    def __init__(self, encoder, cut):
        self.encoder = encoder
        self.cut = cut
        pos = 0
        for f in encoder.schema:
            if f.name == "a":
                self.col = pos
                break
            pos += f.width
        self.mean = encoder.means["a"]
        self.std = encoder.stds["a"]

    def predict_class(self, X):
        natural = np.atleast_2d(X)[:, self.col] * self.std + self.mean
        return (natural > self.cut).astype(int)

    def score(self, X):
        return self.predict_class(X).astype(float)


class _ConstantMember:
    family = "tree"

    def __init__(self, klass):
        self.klass = klass

    def predict_class(self, X):
        return np.full(len(np.atleast_2d(X)), self.klass, dtype=int)

    def score(self, X):
        return self.predict_class(X).astype(float)


@pytest.fixture(scope="module")
def encoder(ctl_schema):
    rows = [
        (0.1, 11.0, "x", -1.0),
        (0.5, 15.0, "y", 0.0),
        (0.9, 19.0, "z", 1.0),
        (0.3, 13.0, "x", 2.0),
    ]
    from qualmon.data import Encoder

    return Encoder.fit(ctl_schema, rows)


def _vote(members):
    return qm.EnsembleModel(members=members, scheme="vote")


def test_simulate_plan_shapes_and_threshold_member(ctl_schema, op, encoder):
    plan = build_plan(ctl_schema, op, 4)
    member = _ThresholdMember(encoder, cut=0.5)
    ens = _vote([member, _ConstantMember(0)])
    inc = simulate_plan(ens, plan, op, encoder)
    assert inc.shape == (plan.n_runs, 2)
    assert set(np.unique(inc)) <= {0, 1}
    # hand-check: the threshold member fires exactly on runs with a > 0.5
    a_levels = np.asarray(plan.levels["a"])
    expected = (a_levels[plan.run_level_idx[:, 0]] > 0.5).astype(int)
    assert np.array_equal(inc[:, 0], expected)
    assert np.array_equal(inc[:, 1], np.zeros(plan.n_runs, dtype=int))


def test_factor_effects_constant_member(ctl_schema, op, encoder):
    plan = build_plan(ctl_schema, op, 3)
    inc = simulate_plan(_vote([_ConstantMember(1)]), plan, op, encoder)
    table = factor_effects(inc, plan)
    for factor in ("a", "b", "mode"):
        assert all(v == 0 for v in table.effects[0][factor])


def test_factor_effects_indicator_member(op):
    # member fires only at one level of a 10-level factor: effect 0.9 there,
    # -0.1 at the other nine levels
    schema = [
        qm.FactorSpec("a", "continuous", bounds=(0.0, 1.0), controllable=True),
        qm.FactorSpec("b", "continuous", bounds=(0.0, 1.0), controllable=True),
    ]
    plan = build_plan(schema, OperatingPoint(values={}), 10)
    inc = (plan.run_level_idx[:, 0] == 0).astype(int)[:, None]
    table = factor_effects(inc, plan)
    effects = table.effects[0]["a"]
    assert effects[0] == Fraction(9, 10)
    assert all(v == Fraction(-1, 10) for v in effects[1:])


def test_effects_sum_to_zero_exactly(ctl_schema, op, encoder):
    rng = np.random.default_rng(4)
    plan = build_plan(ctl_schema, op, 5)
    inc = rng.integers(0, 2, size=(plan.n_runs, 7))
    table = factor_effects(inc, plan)
    for m in range(7):
        for factor in ("a", "b", "mode"):
            assert sum(table.effects[m][factor], Fraction(0)) == 0


def test_effects_permutation_invariance(ctl_schema, op, encoder):
    rng = np.random.default_rng(5)
    plan = build_plan(ctl_schema, op, 4)
    inc = rng.integers(0, 2, size=(plan.n_runs, 3))
    table = factor_effects(inc, plan)
    perm = rng.permutation(plan.n_runs)
    from qualmon.doe import FactorialPlan

    shuffled = FactorialPlan(
        factors=plan.factors, levels=plan.levels, run_level_idx=plan.run_level_idx[perm]
    )
    table2 = factor_effects(inc[perm], shuffled)
    assert table.effects == table2.effects


def test_envelope_bounds_and_containment(ctl_schema, op, encoder):
    rng = np.random.default_rng(6)
    plan = build_plan(ctl_schema, op, 4)
    inc = rng.integers(0, 2, size=(plan.n_runs, 5))
    table = factor_effects(inc, plan)
    env = envelope(table)
    for factor in ("a", "b", "mode"):
        for li in range(len(plan.levels[factor])):
            lo, up = env.lower[factor][li], env.upper[factor][li]
            assert lo <= up
            for m in range(5):
                assert lo <= table.effects[m][factor][li] <= up


def test_envelope_single_member_collapses(ctl_schema, op, encoder):
    plan = build_plan(ctl_schema, op, 3)
    inc = simulate_plan(_vote([_ThresholdMember(encoder, 0.4)]), plan, op, encoder)
    env = envelope(factor_effects(inc, plan))
    assert env.lower == env.upper


def test_envelope_two_members_interval():
    schema = [qm.FactorSpec("a", "continuous", bounds=(0.0, 1.0), controllable=True)]
    plan = build_plan(schema, OperatingPoint(values={}), 2)
    table = factor_effects(np.asarray([[1, 0], [0, 1]]), plan)
    env = envelope(table)
    assert env.lower["a"][0] == min(table.effects[0]["a"][0], table.effects[1]["a"][0])
    assert env.upper["a"][0] == max(table.effects[0]["a"][0], table.effects[1]["a"][0])


def test_recommend_bounds_rules():
    schema = [qm.FactorSpec("a", "continuous", bounds=(0.0, 9.0), controllable=True)]
    plan = build_plan(schema, OperatingPoint(values={}), 10)
    env = envelope(factor_effects(np.zeros((10, 1), dtype=int), plan))
    rec = recommend_bounds(env)
    assert rec["a"]["recommended_levels"] == plan.levels["a"]  # all-zero envelope
    assert rec["a"]["interval"] == [0.0, 9.0]

    # upper <= 0 only at levels 3..6 -> contiguous interval [3, 6]
    from qualmon.doe import EffectEnvelope

    upper = [0.1, 0.1, 0.1, -0.05, -0.2, -0.1, 0.0, 0.3, 0.2, 0.5]
    upper[6] = -0.01
    env2 = EffectEnvelope(
        factors=schema,
        levels={"a": [float(v) for v in range(10)]},
        lower={"a": [u - 0.1 for u in upper]},
        upper={"a": upper},
    )
    rec2 = recommend_bounds(env2)
    assert rec2["a"]["recommended_levels"] == [3.0, 4.0, 5.0, 6.0]
    assert rec2["a"]["interval"] == [3.0, 6.0]

    # non-contiguous set stays a set, never an interval
    upper3 = [0.1, -0.1, 0.1, -0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
    env3 = EffectEnvelope(factors=schema, levels=env2.levels, lower={"a": upper3}, upper={"a": upper3})
    rec3 = recommend_bounds(env3)
    assert rec3["a"]["recommended_levels"] == [1.0, 3.0]
    assert rec3["a"]["interval"] is None

    # empty set reported explicitly
    env4 = EffectEnvelope(
        factors=schema, levels=env2.levels, lower={"a": [0.1] * 10}, upper={"a": [0.1] * 10}
    )
    assert recommend_bounds(env4)["a"]["empty"] is True


def test_interaction_effects_identities(ctl_schema, op, encoder):
    rng = np.random.default_rng(8)
    plan = build_plan(ctl_schema, op, 4)
    inc = rng.integers(0, 2, size=(plan.n_runs, 3))
    grids = interaction_effects(inc, plan, "a", "b")
    for grid in grids:
        total = sum((v for row in grid for v in row), Fraction(0))
        assert total == 0
    # constant member -> all zero
    const = simulate_plan(_vote([_ConstantMember(1)]), plan, op, encoder)
    for grid in interaction_effects(const, plan, "a", "b"):
        assert all(v == 0 for row in grid for v in row)
    with pytest.raises(ValueError):
        interaction_effects(inc, plan, "a", "nope")


def test_interaction_additive_member_is_zero(op, encoder, ctl_schema):
    # incidence depending on each factor separately has zero interaction
    plan = build_plan(ctl_schema, op, 4)
    inc = ((plan.run_level_idx[:, 0] >= 2).astype(int) | (plan.run_level_idx[:, 1] >= 2).astype(int))[
        :, None
    ]
    # OR is not additive; use a one-factor indicator instead, which is
    only_a = (plan.run_level_idx[:, 0] >= 2).astype(int)[:, None]
    for grid in interaction_effects(only_a, plan, "a", "b"):
        assert all(v == 0 for row in grid for v in row)


def test_default_operating_point(small_dataset):
    op = default_operating_point(small_dataset)
    uncontrollable = {f.name for f in small_dataset.schema if not f.controllable}
    assert set(op.values) == uncontrollable
    assert op.values["num_passes"] == "1"
    assert op.values["num_layers"] == "1"
    j = [f.name for f in small_dataset.schema].index("num_products")
    col = np.asarray([row[j] for row in small_dataset.raw], dtype=float)
    assert op.values["num_products"] == pytest.approx(float(np.median(col)))


def test_envelope_plot_data_shape(ctl_schema, op, encoder):
    plan = build_plan(ctl_schema, op, 4)
    inc = simulate_plan(_vote([_ThresholdMember(encoder, 0.4), _ConstantMember(0)]), plan, op, encoder)
    data = envelope_plot_data(envelope(factor_effects(inc, plan)))
    assert [d["factor"] for d in data] == ["a", "b", "mode"]
    assert len(data[0]["points"]) == 4
    for lvl, lo, up in data[0]["points"]:
        assert lo <= up
