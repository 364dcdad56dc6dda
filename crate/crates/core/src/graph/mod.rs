//! The recommendation-session graph.
//!
//! Arcs are stored as a deduplicated edge list sorted by `(kernel, object)`.
//! Two adjacency indexes are derived from it when a [`GraphBuilder`] is
//! frozen: kernel → objects and object → kernels. Every id list handed out
//! by a snapshot is in ascending numeric order.

mod builder;
mod snapshot;
mod stats;

pub use builder::GraphBuilder;
pub use snapshot::{GraphSnapshot, Session};
pub use stats::{ClassCounts, GraphStats, ValidationReport};

use alloc::string::String;
use core::fmt;

use crate::{ClassId, Error, KernelId, ObjectId, Result};

/// One directed kernel → object arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Arc {
    pub kernel: KernelId,
    pub object: ObjectId,
    pub class_id: ClassId,
}

impl Arc {
    pub fn new(kernel: impl Into<KernelId>, object: impl Into<ObjectId>, class_id: impl Into<ClassId>) -> Self {
        Arc {
            kernel: kernel.into(),
            object: object.into(),
            class_id: class_id.into(),
        }
    }
}

/// Where the kernels of a class come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassKind {
    /// Created by user actions: orders, visits, wishlists.
    #[default]
    Behavioural,
    /// Derived from object features: categories, series.
    Static,
    /// External influence, e.g. expert picks.
    Mixed,
}

impl ClassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassKind::Behavioural => "behavioural",
            ClassKind::Static => "static",
            ClassKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for ClassKind {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "behavioural" | "behavioral" => Ok(ClassKind::Behavioural),
            "static" => Ok(ClassKind::Static),
            "mixed" => Ok(ClassKind::Mixed),
            _ => Err(()),
        }
    }
}

/// A cell of the kernel partition. `weight` is the per-arc weight used by
/// weighted scoring and is always at least 1.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelClass {
    pub id: ClassId,
    pub name: String,
    pub kind: ClassKind,
    pub weight: u32,
}

impl KernelClass {
    pub fn new(id: impl Into<ClassId>, name: impl Into<String>, kind: ClassKind, weight: u32) -> Result<Self> {
        let id = id.into();
        if weight == 0 {
            return Err(Error::InvalidWeight(id));
        }
        Ok(KernelClass {
            id,
            name: name.into(),
            kind,
            weight,
        })
    }

    /// A class with weight 1 and a generated name, as registered when an
    /// edge list is loaded without a class table.
    pub fn unnamed(id: impl Into<ClassId>) -> Self {
        let id = id.into();
        KernelClass {
            id,
            name: alloc::format!("class-{id}"),
            kind: ClassKind::default(),
            weight: 1,
        }
    }
}
