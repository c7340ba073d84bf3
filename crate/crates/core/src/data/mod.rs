//! Synthetic generation, libsvm/CSV ingestion and row partitioning.

mod delimited;
mod libsvm;
mod partition;
mod synth;

pub use delimited::{parse_csv, read_csv, write_csv, CsvOptions};
pub use libsvm::{open_maybe_gz, parse_libsvm, read_libsvm, write_libsvm, LibsvmOptions};
pub use partition::{partition, shuffled_order, Partition};
pub use synth::{
    normal_cdf, normal_quantile, synth_classification, synth_generate, true_beta, SynthData, SynthSpec, HETERO_INDEX,
    TRUE_SUPPORT,
};
