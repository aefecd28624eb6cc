//! Track records, hit labels, splits and feature scaling.

pub mod io;
mod label;
mod record;
mod scale;
mod split;

pub use label::{
    class_distribution, deduplicate, label_hit, LabeledDataset, LabeledRow, LabeledTrack,
    DEFAULT_HIT_THRESHOLD, SCHEMA_VERSION,
};
pub use record::{
    check_popularity, AudioFeatures, TrackRecord, FEATURE_NAMES, HIT_COLUMN, N_FEATURES,
    RECORD_COLUMNS,
};
pub use scale::StandardizationParams;
pub use split::{
    round_half_up, split, split_stratified, split_two_way, three_way_sizes, SplitIndices, SplitPlan,
    SplitScheme,
    TEST_FRACTION, TWO_WAY_TEST_FRACTION, VALIDATION_FRACTION,
};
