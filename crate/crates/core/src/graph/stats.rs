use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::GraphSnapshot;
use crate::{ClassId, KernelId, ObjectId};

/// Size counts of a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphStats {
    pub count_objects: usize,
    pub count_kernels: usize,
    pub count_nodes: usize,
    pub count_arcs: usize,
    pub count_classes: usize,
    pub per_class: BTreeMap<ClassId, ClassCounts>,
}

/// Kernels in a class, and the distinct objects those kernels reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassCounts {
    pub kernels: usize,
    pub objects: usize,
}

/// Constraint violations found in a snapshot. Violations are data; an
/// empty report means every kernel and object has an arc and every class
/// in use is declared.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub ok: bool,
    pub orphan_kernels: Vec<KernelId>,
    pub orphan_objects: Vec<ObjectId>,
    pub undeclared_classes: Vec<ClassId>,
}

impl GraphSnapshot {
    pub fn stats(&self) -> GraphStats {
        let mut per_class: BTreeMap<ClassId, ClassCounts> =
            self.classes().map(|c| (c.id, ClassCounts::default())).collect();
        let mut touched: BTreeMap<ClassId, BTreeSet<ObjectId>> = BTreeMap::new();
        for (_, class_id, objects) in self.kernel_entries() {
            per_class.entry(class_id).or_default().kernels += 1;
            touched.entry(class_id).or_default().extend(objects.iter().copied());
        }
        for (class_id, objects) in touched {
            per_class.entry(class_id).or_default().objects = objects.len();
        }
        GraphStats {
            count_objects: self.object_count(),
            count_kernels: self.kernel_count(),
            count_nodes: self.node_count(),
            count_arcs: self.arc_count(),
            count_classes: per_class.len(),
            per_class,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let orphan_kernels: Vec<KernelId> = self
            .kernel_entries()
            .filter(|(_, _, objects)| objects.is_empty())
            .map(|(k, _, _)| k)
            .collect();
        let orphan_objects: Vec<ObjectId> = self
            .object_entries()
            .filter(|(_, kernels)| kernels.is_empty())
            .map(|(o, _)| o)
            .collect();
        let undeclared_classes: Vec<ClassId> = self
            .kernel_entries()
            .map(|(_, c, _)| c)
            .filter(|c| self.class(*c).is_none())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        ValidationReport {
            ok: orphan_kernels.is_empty() && orphan_objects.is_empty() && undeclared_classes.is_empty(),
            orphan_kernels,
            orphan_objects,
            undeclared_classes,
        }
    }
}
