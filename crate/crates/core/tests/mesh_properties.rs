use std::collections::HashMap;

use proptest::prelude::*;
use signorini_dg::mesh::Edge;
use signorini_dg::problems::{model_problem_1, model_problem_2};
use signorini_dg::{BoundaryTag, Mesh};

fn total_area(m: &Mesh) -> f64 {
    (0..m.n_triangles()).map(|t| m.area(t)).sum()
}

/// No vertex may lie in the interior of an edge (hanging node).
fn assert_conforming(m: &Mesh) {
    for (e, edge) in m.edges().iter().enumerate() {
        let [a, b] = m.edge_points(e);
        for (v, p) in m.vertices().iter().enumerate() {
            if edge.vertices.contains(&v) {
                continue;
            }
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            let along = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (edge.length * edge.length);
            let on_segment = cross.abs() < 1e-12 && along > 1e-12 && along < 1.0 - 1e-12;
            assert!(!on_segment, "vertex {v} hangs on edge {e}");
        }
    }
}

fn boundary_is_tagged(m: &Mesh) -> bool {
    m.edges()
        .iter()
        .all(|e: &Edge| e.is_boundary() == (e.tag != BoundaryTag::Interior))
}

fn boundary_length_by_tag(m: &Mesh) -> HashMap<BoundaryTag, f64> {
    let mut out = HashMap::new();
    for e in m.edges().iter().filter(|e| e.is_boundary()) {
        *out.entry(e.tag).or_insert(0.0) += e.length;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bisection_preserves_invariants(
        n in 1usize..4,
        wedge in any::<bool>(),
        rounds in prop::collection::vec(prop::collection::vec(any::<prop::sample::Index>(), 1..6), 1..6),
    ) {
        let spec = if wedge { model_problem_2() } else { model_problem_1() };
        let mut m = spec.initial_mesh(n).unwrap();
        let angle0 = m.min_angle();
        let lengths0 = boundary_length_by_tag(&m);
        for marks in rounds {
            let marked: Vec<usize> = marks.iter().map(|i| i.index(m.n_triangles())).collect();
            let before = m.n_triangles();
            let next = m.bisect(&marked);
            prop_assert!(next.n_triangles() > before);
            for &t in &marked {
                // every marked triangle is gone: none of the new triangles has its three vertices
                let old = m.triangles()[t].vertices.map(|v| m.vertices()[v]);
                let survives = next.triangles().iter().any(|tri| {
                    let p = tri.vertices.map(|v| next.vertices()[v]);
                    old.iter().all(|q| p.contains(q))
                });
                prop_assert!(!survives, "marked triangle {t} not refined");
            }
            m = next;
            prop_assert_eq!(m.euler_characteristic(), 1);
            prop_assert!((total_area(&m) - 1.0).abs() < 1e-12);
            prop_assert!(boundary_is_tagged(&m));
            prop_assert!(m.check_single_contact_edge().is_ok());
            prop_assert!(m.min_angle() >= angle0 - 1e-12);
            assert_conforming(&m);
        }
        for (tag, len) in boundary_length_by_tag(&m) {
            prop_assert!((len - lengths0[&tag]).abs() < 1e-12);
        }
    }

    #[test]
    fn text_format_round_trips(n in 1usize..4, marks in prop::collection::vec(any::<prop::sample::Index>(), 0..5)) {
        let m = model_problem_1().initial_mesh(n).unwrap();
        let marked: Vec<usize> = marks.iter().map(|i| i.index(m.n_triangles())).collect();
        let m = m.bisect(&marked);
        let back = Mesh::from_text(&m.to_text()).unwrap();
        prop_assert_eq!(back.vertices(), m.vertices());
        prop_assert_eq!(back.triangles(), m.triangles());
        prop_assert_eq!(back.edges(), m.edges());
    }
}

#[test]
fn uniform_refinement_keeps_shape() {
    let mut m = model_problem_1().initial_mesh(1).unwrap();
    for k in 1..=4 {
        m = m.uniform_refine();
        assert_eq!(m.n_triangles(), 2 * 4usize.pow(k));
        assert_eq!(m.euler_characteristic(), 1);
        assert!((m.mesh_size() - 2f64.sqrt() * 0.5f64.powi(k as i32)).abs() < 1e-14);
        assert!((m.min_angle() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert_conforming(&m);
    }
}

#[test]
fn repeated_local_refinement_terminates_near_a_corner() {
    let mut m = model_problem_2().initial_mesh(2).unwrap();
    for _ in 0..30 {
        let t = (0..m.n_triangles())
            .min_by(|&a, &b| {
                let d = |t: usize| {
                    let c = m.centroid(t);
                    (c[0] - 1.0).hypot(c[1] - 0.5)
                };
                d(a).total_cmp(&d(b))
            })
            .unwrap();
        m = m.bisect(&[t]);
    }
    assert_eq!(m.euler_characteristic(), 1);
    assert!(m.min_angle() >= std::f64::consts::FRAC_PI_4 - 1e-12);
    // graded: the 30 bisections cost a bounded number of closure triangles
    assert!(m.n_triangles() < 200, "{}", m.n_triangles());
}
