"""Quality-monitoring toolkit: classifier pools, ensemble selection and
fusion, the statistical comparison battery, and surrogate-driven tuning of
controllable process factors."""

from .data import (
    Dataset,
    DataView,
    Encoder,
    FactorSpec,
    FoldAssignment,
    SplitPlan,
    bagging_sample,
    default_schema,
    holdout_split,
    load_csv,
    load_schema,
    save_csv,
    save_schema,
    stratified_kfold,
    synth_generate,
)
from .classifiers import (
    TrainedClassifier,
    TrainingConfig,
    train_family,
)
from .ensemble import (
    ClassifierPool,
    DiversityMatrix,
    EnsembleModel,
    diversity_matrix,
    double_fault,
    df_to_ensemble,
    ensemble_predict,
    fuse_mean,
    fuse_vote,
    generate_pool,
    mie,
    pair_counts,
    select_by_accuracy,
    select_sad,
    train_fuser,
)
from .evaluation import ConfusionMatrix, CrossValReport, RateReport, confusion, crossval, mcnemar_u, rates
from .doe import (
    EffectEnvelope,
    EffectTable,
    FactorialPlan,
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

__version__ = "0.1.0"
