"""Correlation-based fixed-length descriptors for per-frame feature series,
with a linear one-vs-rest SVM and a repeated random-split evaluation
protocol."""

from .correlation import ZERO_FILL, DegeneratePolicy, pearson, sample_acf
from .encoder import (
    EncoderConfig,
    GroupedMatrix,
    SelectionScheme,
    TcfLayout,
    TcfVector,
    TimeSeriesMatrix,
    acf_length,
    build_matrix,
    ccf_length,
    encode_acf,
    encode_ccf,
    encode_tcf,
    group,
    partition,
    select_subset,
    tcf_length,
)
from .errors import (
    ConvergenceError,
    FormatError,
    ShortSeriesWarning,
    TscorrError,
    ValidationError,
)
from .evaluation import (
    DatasetItem,
    EvalReport,
    LabeledDataset,
    PoolingMode,
    SplitSpec,
    baseline_pool,
    confusion_matrix,
    make_split,
    run_protocol,
    sweep,
    sweep_table,
)
from .svm import (
    LinearOvrModel,
    Normalization,
    TrainConfig,
    decision_scores,
    load_model,
    predict,
    predict_batch,
    save_model,
    train_ovr,
)

__version__ = "0.1.0"
