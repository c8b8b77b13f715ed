pub mod collect;
pub mod eval;
pub mod replay;
pub mod run;
pub mod train;

pub use collect::{cmd_collect, CollectOutcome};
pub use eval::cmd_eval;
pub use replay::{cmd_replay, ReplaySummary};
pub use run::{cmd_run, RunOutcome};
pub use train::{cmd_train, TrainOutcome};
