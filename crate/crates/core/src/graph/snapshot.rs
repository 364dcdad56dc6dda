use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use super::{Arc, KernelClass};
use crate::{ClassId, Error, KernelId, ObjectId, Result};

/// Immutable, indexed recommendation-session graph.
///
/// The sorted edge list is canonical; both adjacency indexes are derived
/// from it at construction and never change afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphSnapshot {
    classes: BTreeMap<ClassId, KernelClass>,
    arcs: Vec<Arc>,
    // kernel index: kernels[i] owns arcs[kernel_offsets[i]..kernel_offsets[i + 1]]
    kernels: Vec<KernelId>,
    kernel_classes: Vec<ClassId>,
    kernel_offsets: Vec<usize>,
    kernel_objects: Vec<ObjectId>,
    // object index, same layout over object_kernels
    objects: Vec<ObjectId>,
    object_offsets: Vec<usize>,
    object_kernels: Vec<KernelId>,
}

/// The star subgraph of one kernel: the kernel, its arcs and every object
/// they reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Session<'a> {
    pub kernel: KernelId,
    pub class_id: ClassId,
    pub objects: &'a [ObjectId],
    pub arcs: &'a [Arc],
}

impl GraphSnapshot {
    /// `kernel_table` and `arcs` must be sorted and free of duplicates, and
    /// every arc kernel must appear in `kernel_table` with the arc's class.
    pub(super) fn assemble(
        classes: BTreeMap<ClassId, KernelClass>,
        kernel_table: Vec<(KernelId, ClassId)>,
        extra_objects: BTreeSet<ObjectId>,
        arcs: Vec<Arc>,
    ) -> Self {
        debug_assert!(arcs
            .windows(2)
            .all(|w| (w[0].kernel, w[0].object) < (w[1].kernel, w[1].object)));

        let (kernels, kernel_classes): (Vec<_>, Vec<_>) = kernel_table.into_iter().unzip();
        let mut kernel_offsets = Vec::with_capacity(kernels.len() + 1);
        let mut cursor = 0;
        for &kernel in &kernels {
            kernel_offsets.push(cursor);
            while cursor < arcs.len() && arcs[cursor].kernel == kernel {
                cursor += 1;
            }
        }
        kernel_offsets.push(cursor);
        debug_assert_eq!(cursor, arcs.len());
        let kernel_objects: Vec<ObjectId> = arcs.iter().map(|a| a.object).collect();

        let mut objects: Vec<ObjectId> = kernel_objects.clone();
        objects.extend(extra_objects);
        objects.sort_unstable();
        objects.dedup();

        let mut object_offsets = vec![0usize; objects.len() + 1];
        let positions: Vec<usize> = arcs
            .iter()
            .map(|a| objects.binary_search(&a.object).expect("arc object is in the universe"))
            .collect();
        for &p in &positions {
            object_offsets[p + 1] += 1;
        }
        for i in 1..object_offsets.len() {
            object_offsets[i] += object_offsets[i - 1];
        }
        let mut fill = object_offsets.clone();
        let mut object_kernels = vec![KernelId(0); arcs.len()];
        // arcs are kernel-sorted, so each object's kernel list comes out ascending
        for (arc, &p) in arcs.iter().zip(&positions) {
            object_kernels[fill[p]] = arc.kernel;
            fill[p] += 1;
        }

        GraphSnapshot {
            classes,
            arcs,
            kernels,
            kernel_classes,
            kernel_offsets,
            kernel_objects,
            objects,
            object_offsets,
            object_kernels,
        }
    }

    /// Replaces the class table. Arcs referencing a class missing from the
    /// new table are reported by [`GraphSnapshot::validate`].
    pub fn with_class_table(mut self, classes: impl IntoIterator<Item = KernelClass>) -> Self {
        self.classes = classes.into_iter().map(|c| (c.id, c)).collect();
        self
    }

    /// Arcs sorted by `(kernel, object)`.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn classes(&self) -> impl Iterator<Item = &KernelClass> {
        self.classes.values()
    }

    pub fn class(&self, id: ClassId) -> Option<&KernelClass> {
        self.classes.get(&id)
    }

    /// Weight of a class; classes missing from the table weigh 1.
    pub fn weight_of(&self, id: ClassId) -> u32 {
        self.classes.get(&id).map_or(1, |c| c.weight)
    }

    /// All kernels, ascending, including kernels without arcs.
    pub fn kernels(&self) -> &[KernelId] {
        &self.kernels
    }

    /// All objects, ascending, including objects without arcs.
    pub fn objects(&self) -> &[ObjectId] {
        &self.objects
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn kernel_count(&self) -> usize {
        self.kernels.len()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    /// |N| = |O| + |J|.
    pub fn node_count(&self) -> usize {
        self.objects.len() + self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    pub fn kernel_class(&self, kernel: KernelId) -> Option<ClassId> {
        self.kernels.binary_search(&kernel).ok().map(|i| self.kernel_classes[i])
    }

    /// Objects reached by `kernel`, ascending. Empty for an unknown kernel.
    pub fn objects_of(&self, kernel: KernelId) -> &[ObjectId] {
        match self.kernels.binary_search(&kernel) {
            Ok(i) => &self.kernel_objects[self.kernel_offsets[i]..self.kernel_offsets[i + 1]],
            Err(_) => &[],
        }
    }

    /// Kernels with an arc into `object`, ascending. Empty for an unknown object.
    pub fn kernels_of(&self, object: ObjectId) -> &[KernelId] {
        match self.objects.binary_search(&object) {
            Ok(i) => &self.object_kernels[self.object_offsets[i]..self.object_offsets[i + 1]],
            Err(_) => &[],
        }
    }

    pub fn session_of(&self, kernel: KernelId) -> Result<Session<'_>> {
        let i = self
            .kernels
            .binary_search(&kernel)
            .map_err(|_| Error::KernelNotFound(kernel))?;
        let range = self.kernel_offsets[i]..self.kernel_offsets[i + 1];
        Ok(Session {
            kernel,
            class_id: self.kernel_classes[i],
            objects: &self.kernel_objects[range.clone()],
            arcs: &self.arcs[range],
        })
    }

    pub(super) fn kernel_entries(&self) -> impl Iterator<Item = (KernelId, ClassId, &[ObjectId])> {
        self.kernels.iter().enumerate().map(move |(i, &k)| {
            (
                k,
                self.kernel_classes[i],
                &self.kernel_objects[self.kernel_offsets[i]..self.kernel_offsets[i + 1]],
            )
        })
    }

    pub(super) fn object_entries(&self) -> impl Iterator<Item = (ObjectId, &[KernelId])> {
        self.objects.iter().enumerate().map(move |(i, &o)| {
            (
                o,
                &self.object_kernels[self.object_offsets[i]..self.object_offsets[i + 1]],
            )
        })
    }
}
