use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{Arc, GraphSnapshot, KernelClass};
use crate::{ClassId, Error, KernelId, ObjectId, Result};

/// Single-writer accumulator for arcs.
///
/// A `(kernel, object)` pair is stored at most once; repeated insertions are
/// counted and dropped. Each kernel is pinned to the class of its first arc.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    classes: BTreeMap<ClassId, KernelClass>,
    kernel_class: BTreeMap<KernelId, ClassId>,
    pairs: BTreeSet<(KernelId, ObjectId)>,
    extra_objects: BTreeSet<ObjectId>,
    dropped: u64,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a builder with the given classes declared.
    pub fn with_classes(classes: impl IntoIterator<Item = KernelClass>) -> Result<Self> {
        let mut builder = Self::new();
        for class in classes {
            builder.declare_class(class)?;
        }
        Ok(builder)
    }

    pub fn declare_class(&mut self, class: KernelClass) -> Result<()> {
        if class.weight == 0 {
            return Err(Error::InvalidWeight(class.id));
        }
        if self.classes.contains_key(&class.id) {
            return Err(Error::DuplicateClass(class.id));
        }
        self.classes.insert(class.id, class);
        Ok(())
    }

    pub fn has_class(&self, class_id: ClassId) -> bool {
        self.classes.contains_key(&class_id)
    }

    /// Registers a kernel without adding arcs. A kernel that never receives
    /// an arc shows up as an orphan in validation.
    pub fn declare_kernel(&mut self, kernel: KernelId, class_id: ClassId) -> Result<()> {
        self.pin_class(kernel, class_id)
    }

    /// Registers an object without adding arcs.
    pub fn declare_object(&mut self, object: ObjectId) {
        self.extra_objects.insert(object);
    }

    /// Inserts the arc `kernel → object`. Returns `false` when the pair was
    /// already present; the drop counter is bumped in that case.
    pub fn add_arc(&mut self, kernel: KernelId, object: ObjectId, class_id: ClassId) -> Result<bool> {
        self.pin_class(kernel, class_id)?;
        if self.pairs.insert((kernel, object)) {
            Ok(true)
        } else {
            self.dropped += 1;
            Ok(false)
        }
    }

    fn pin_class(&mut self, kernel: KernelId, class_id: ClassId) -> Result<()> {
        if !self.classes.contains_key(&class_id) {
            return Err(Error::UnknownClass(class_id));
        }
        match self.kernel_class.get(&kernel) {
            Some(&existing) if existing != class_id => Err(Error::KernelClassConflict {
                kernel,
                existing,
                requested: class_id,
            }),
            Some(_) => Ok(()),
            None => {
                self.kernel_class.insert(kernel, class_id);
                Ok(())
            }
        }
    }

    pub fn arc_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn duplicates_dropped(&self) -> u64 {
        self.dropped
    }

    pub fn freeze(self) -> GraphSnapshot {
        let GraphBuilder {
            classes,
            kernel_class,
            pairs,
            extra_objects,
            ..
        } = self;
        let arcs: Vec<Arc> = pairs
            .into_iter()
            .map(|(kernel, object)| Arc {
                kernel,
                object,
                class_id: kernel_class[&kernel],
            })
            .collect();
        GraphSnapshot::assemble(classes, kernel_class.into_iter().collect(), extra_objects, arcs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ClassKind;

    fn builder() -> GraphBuilder {
        GraphBuilder::with_classes([
            KernelClass::new(1, "orders", ClassKind::Behavioural, 1).unwrap(),
            KernelClass::new(2, "categories", ClassKind::Static, 3).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn first_insert_then_duplicate() {
        let mut b = builder();
        assert!(b.add_arc(KernelId(1), ObjectId(1), ClassId(1)).unwrap());
        assert!(!b.add_arc(KernelId(1), ObjectId(1), ClassId(1)).unwrap());
        assert_eq!(b.duplicates_dropped(), 1);
        assert!(b.add_arc(KernelId(1), ObjectId(2), ClassId(1)).unwrap());
        assert!(b.add_arc(KernelId(2), ObjectId(1), ClassId(1)).unwrap());
        assert_eq!(b.arc_count(), 3);
    }

    #[test]
    fn undeclared_class_rejected() {
        let mut b = builder();
        assert_eq!(
            b.add_arc(KernelId(1), ObjectId(1), ClassId(9)),
            Err(Error::UnknownClass(ClassId(9)))
        );
        assert_eq!(b.arc_count(), 0);
    }

    #[test]
    fn kernel_class_conflict_rejected() {
        let mut b = builder();
        b.add_arc(KernelId(5), ObjectId(10), ClassId(1)).unwrap();
        assert_eq!(
            b.add_arc(KernelId(5), ObjectId(11), ClassId(2)),
            Err(Error::KernelClassConflict {
                kernel: KernelId(5),
                existing: ClassId(1),
                requested: ClassId(2)
            })
        );
    }

    #[test]
    fn class_table_checks() {
        let mut b = builder();
        assert_eq!(
            b.declare_class(KernelClass::unnamed(1)),
            Err(Error::DuplicateClass(ClassId(1)))
        );
        assert_eq!(
            KernelClass::new(4, "x", ClassKind::Mixed, 0),
            Err(Error::InvalidWeight(ClassId(4)))
        );
    }

    #[test]
    fn empty_freeze() {
        let s = GraphBuilder::new().freeze();
        assert_eq!(s.arc_count(), 0);
        assert_eq!(s.object_count(), 0);
        assert_eq!(s.kernel_count(), 0);
    }
}
