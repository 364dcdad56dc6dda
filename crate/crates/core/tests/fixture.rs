mod oracle;

use std::collections::BTreeMap;

use ars_core::{
    neighborhood_first, neighborhood_second, recommend, recommend_for_path, score_in_degrees, Arc, ClassId, ClassKind,
    Error, GraphBuilder, GraphSnapshot, KernelClass, KernelId, ObjectId, Scored, SeedSet,
};
use oracle::{brute_recommend, F1};

fn classes(w1: u32, w2: u32) -> Vec<KernelClass> {
    vec![
        KernelClass::new(1, "orders", ClassKind::Behavioural, w1).unwrap(),
        KernelClass::new(2, "categories", ClassKind::Static, w2).unwrap(),
    ]
}

fn f1_with(w1: u32, w2: u32) -> GraphSnapshot {
    let mut b = GraphBuilder::with_classes(classes(w1, w2)).unwrap();
    for (k, o, c) in F1 {
        assert!(b.add_arc(KernelId(k), ObjectId(o), ClassId(c)).unwrap());
    }
    b.freeze()
}

fn f1() -> GraphSnapshot {
    f1_with(1, 1)
}

fn pairs(v: &[Scored]) -> Vec<(u32, u64)> {
    v.iter().map(|s| (s.object.0, s.score)).collect()
}

fn obj(ids: &[u32]) -> Vec<ObjectId> {
    ids.iter().copied().map(ObjectId).collect()
}

fn ker(ids: &[u32]) -> Vec<KernelId> {
    ids.iter().copied().map(KernelId).collect()
}

#[test]
fn freeze_counts() {
    let s = f1();
    assert_eq!(s.arc_count(), 8);
    assert_eq!(s.kernels().len(), 4);
    assert_eq!(s.objects().len(), 5);

    // any insertion order freezes to the same snapshot
    let mut b = GraphBuilder::with_classes(classes(1, 1)).unwrap();
    for (k, o, c) in F1.iter().rev() {
        b.add_arc(KernelId(*k), ObjectId(*o), ClassId(*c)).unwrap();
    }
    assert_eq!(b.freeze(), s);
}

#[test]
fn validate_fixture_and_empty() {
    assert!(f1().validate().ok);
    assert!(GraphBuilder::new().freeze().validate().ok);
}

#[test]
fn orphan_object_reported() {
    let mut b = GraphBuilder::with_classes(classes(1, 1)).unwrap();
    for (k, o, c) in F1 {
        b.add_arc(KernelId(k), ObjectId(o), ClassId(c)).unwrap();
    }
    b.declare_object(ObjectId(9));
    let report = b.freeze().validate();
    assert!(!report.ok);
    assert_eq!(report.orphan_objects, obj(&[9]));
    assert!(report.orphan_kernels.is_empty());
}

#[test]
fn kernels_of_fixture() {
    let s = f1();
    assert_eq!(s.kernels_of(ObjectId(1)), ker(&[1, 2]).as_slice());
    assert_eq!(s.kernels_of(ObjectId(5)), ker(&[4]).as_slice());
    assert!(s.kernels_of(ObjectId(99)).is_empty());
}

#[test]
fn session_of_fixture() {
    let s = f1();
    let j3 = s.session_of(KernelId(3)).unwrap();
    assert_eq!(j3.objects, obj(&[2, 3, 4]).as_slice());
    assert_eq!(j3.class_id, ClassId(2));
    assert_eq!(j3.arcs.len(), 3);
    assert_eq!(s.session_of(KernelId(4)).unwrap().objects, obj(&[5]).as_slice());
    assert_eq!(s.session_of(KernelId(99)), Err(Error::KernelNotFound(KernelId(99))));
}

#[test]
fn stats_fixture() {
    let st = f1().stats();
    assert_eq!(
        (
            st.count_objects,
            st.count_kernels,
            st.count_nodes,
            st.count_arcs,
            st.count_classes
        ),
        (5, 4, 9, 8, 2)
    );
    let c1 = st.per_class[&ClassId(1)];
    let c2 = st.per_class[&ClassId(2)];
    assert_eq!((c1.kernels, c1.objects), (3, 4));
    assert_eq!((c2.kernels, c2.objects), (1, 3));

    let empty = GraphBuilder::new().freeze().stats();
    assert_eq!((empty.count_nodes, empty.count_arcs, empty.count_classes), (0, 0, 0));
}

#[test]
fn neighborhoods_fixture() {
    let s = f1();
    let g1 = neighborhood_first(&s, ObjectId(1)).unwrap();
    assert_eq!((g1.kernels, g1.objects, g1.arcs.len()), (ker(&[1, 2]), obj(&[1]), 2));
    let g5 = neighborhood_first(&s, ObjectId(5)).unwrap();
    assert_eq!((g5.kernels, g5.objects, g5.arcs.len()), (ker(&[4]), obj(&[5]), 1));
    assert_eq!(
        neighborhood_first(&s, ObjectId(99)),
        Err(Error::ObjectNotFound(ObjectId(99)))
    );

    let g2 = neighborhood_second(&s, ObjectId(1)).unwrap();
    assert_eq!(g2.kernels, ker(&[1, 2]));
    assert_eq!(g2.objects, obj(&[1, 2, 3]));
    assert_eq!(
        g2.arcs,
        vec![
            Arc::new(1, 1, 1),
            Arc::new(1, 2, 1),
            Arc::new(2, 1, 1),
            Arc::new(2, 3, 1)
        ]
    );
    let g2 = neighborhood_second(&s, ObjectId(5)).unwrap();
    assert_eq!((g2.kernels, g2.objects, g2.arcs.len()), (ker(&[4]), obj(&[5]), 1));
}

#[test]
fn neighborhood_second_saturates() {
    let mut b = GraphBuilder::with_classes(classes(1, 1)).unwrap();
    for o in 1..=6 {
        b.add_arc(KernelId(1), ObjectId(o), ClassId(1)).unwrap();
    }
    let s = b.freeze();
    assert_eq!(neighborhood_second(&s, ObjectId(3)).unwrap().objects, s.objects());
}

#[test]
fn scores_fixture() {
    let s = f1();
    let sc: Vec<_> = score_in_degrees(&s, ObjectId(1), false)
        .unwrap()
        .iter()
        .map(|(o, v)| (o.0, v))
        .collect();
    assert_eq!(sc, vec![(2, 1), (3, 1)]);
    let sc: Vec<_> = score_in_degrees(&s, ObjectId(3), false)
        .unwrap()
        .iter()
        .map(|(o, v)| (o.0, v))
        .collect();
    assert_eq!(sc, vec![(1, 1), (2, 1), (4, 1)]);
    let w = f1_with(1, 3);
    let sc: Vec<_> = score_in_degrees(&w, ObjectId(3), true)
        .unwrap()
        .iter()
        .map(|(o, v)| (o.0, v))
        .collect();
    assert_eq!(sc, vec![(1, 1), (2, 3), (4, 3)]);
}

/// Goldens were produced by the brute-force oracle; the oracle is re-run
/// here so a drift in either side shows up.
#[test]
fn recommend_goldens() {
    let s = f1();
    let w = f1_with(1, 3);
    let weights: BTreeMap<u16, u32> = [(1, 1), (2, 3)].into();

    let golden_o1 = vec![(2, 1), (3, 1)];
    assert_eq!(brute_recommend(&F1, &[1], None), golden_o1);
    assert_eq!(pairs(&recommend(&s, ObjectId(1), None, false).unwrap()), golden_o1);

    let golden_o3 = vec![(1, 1), (2, 1), (4, 1)];
    assert_eq!(brute_recommend(&F1, &[3], None), golden_o3);
    assert_eq!(pairs(&recommend(&s, ObjectId(3), None, false).unwrap()), golden_o3);

    assert!(brute_recommend(&F1, &[5], None).is_empty());
    assert!(recommend(&s, ObjectId(5), None, false).unwrap().is_empty());

    let golden_w = vec![(2, 3), (4, 3), (1, 1)];
    assert_eq!(brute_recommend(&F1, &[3], Some(&weights)), golden_w);
    assert_eq!(pairs(&recommend(&w, ObjectId(3), None, true).unwrap()), golden_w);

    let golden_path = vec![(2, 2), (3, 2)];
    assert_eq!(brute_recommend(&F1, &[1, 4], None), golden_path);
    let seeds = SeedSet::new(obj(&[1, 4])).unwrap();
    assert_eq!(
        pairs(&recommend_for_path(&s, &seeds, None, false).unwrap()),
        golden_path
    );
}

#[test]
fn limits() {
    let s = f1();
    assert!(recommend(&s, ObjectId(1), Some(0), false).unwrap().is_empty());
    assert_eq!(
        pairs(&recommend(&s, ObjectId(3), Some(2), false).unwrap()),
        vec![(1, 1), (2, 1)]
    );
    assert_eq!(recommend(&s, ObjectId(3), Some(50), false).unwrap().len(), 3);
    assert_eq!(
        recommend(&s, ObjectId(99), Some(5), false),
        Err(Error::ObjectNotFound(ObjectId(99)))
    );
}

#[test]
fn path_errors_and_single_seed() {
    let s = f1();
    assert_eq!(
        recommend_for_path(&s, &SeedSet::single(ObjectId(1)), None, false),
        recommend(&s, ObjectId(1), None, false)
    );
    let bad = SeedSet::new(obj(&[1, 99])).unwrap();
    assert_eq!(
        recommend_for_path(&s, &bad, None, false),
        Err(Error::ObjectNotFound(ObjectId(99)))
    );
    assert_eq!(SeedSet::new(Vec::new()), Err(Error::EmptySeedSet));
    assert_eq!(SeedSet::new(obj(&[2, 2])), Err(Error::DuplicateSeed(ObjectId(2))));
}

#[test]
fn top_set_is_prefix() {
    let w = f1_with(1, 3);
    let v = recommend(&w, ObjectId(3), None, true).unwrap();
    assert_eq!(pairs(v.top_set()), vec![(2, 3), (4, 3)]);
}

#[test]
fn undeclared_class_after_table_swap() {
    let s = f1().with_class_table(classes(1, 1).into_iter().take(1));
    let report = s.validate();
    assert!(!report.ok);
    assert_eq!(report.undeclared_classes, vec![ClassId(2)]);
    assert_eq!(s.weight_of(ClassId(2)), 1);
}

#[test]
fn orphan_kernel_reported() {
    let mut b = GraphBuilder::with_classes(classes(1, 1)).unwrap();
    b.add_arc(KernelId(1), ObjectId(1), ClassId(1)).unwrap();
    b.declare_kernel(KernelId(7), ClassId(2)).unwrap();
    let s = b.freeze();
    let report = s.validate();
    assert_eq!(report.orphan_kernels, ker(&[7]));
    assert!(!report.ok);
    let st = s.stats();
    assert_eq!(st.per_class[&ClassId(2)].kernels, 1);
    assert_eq!(st.per_class[&ClassId(2)].objects, 0);
}
