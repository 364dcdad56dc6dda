use crate::{ClassId, KernelId, ObjectId};

/// Errors raised while building or querying a graph.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("class {0} is not declared")]
    UnknownClass(ClassId),
    #[error("class {0} is declared twice")]
    DuplicateClass(ClassId),
    #[error("class {0} has weight 0; weights must be at least 1")]
    InvalidWeight(ClassId),
    #[error("kernel {kernel} already belongs to class {existing}, cannot add it to class {requested}")]
    KernelClassConflict {
        kernel: KernelId,
        existing: ClassId,
        requested: ClassId,
    },
    #[error("kernel not found: {0}")]
    KernelNotFound(KernelId),
    #[error("object not found: {0}")]
    ObjectNotFound(ObjectId),
    #[error("seed set is empty")]
    EmptySeedSet,
    #[error("object {0} appears twice in the seed set")]
    DuplicateSeed(ObjectId),
    #[error("effective count {effective} exceeds total {total}")]
    EffectiveExceedsTotal { effective: u64, total: u64 },
}
