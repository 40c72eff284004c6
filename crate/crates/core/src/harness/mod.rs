//! Monte-Carlo ensembles, figure tables and the verification suite.
//!
//! Every table shares one row schema ([`Row`]); sweeps fill the empirical
//! columns, figure tables only the analytic one.

mod ensemble;
mod figures;
mod table;
mod verify;

pub use ensemble::{
    run_ensemble, EnsembleStats, ModelKind, SweepConfig, SweepPoint, UTildeChoice,
    DEFAULT_SAMPLES, DEFAULT_SEED,
};
pub use figures::{figure_data, FigureOverrides};
pub use table::{sweep_rows, write_table, OutputFormat, Row, CSV_HEADER};
pub use verify::{
    entropy_corpus, haar_check, oracle_corpus, verify, CheckResult, CorpusReport, HaarCheck,
    Tier, VerifyReport,
};
