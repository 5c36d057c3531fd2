mod common;

use a2_building::arith::{Matrix, Prime, Scalar};
use a2_building::building::{
    flags_opposite, germ_flag, germ_of_chamber, induced_tree_action, lattice_normal_form,
    panel_tree_project, residue_chambers, residue_opposite, sector_point, theta_symmetry_check,
    tree_distance, u_cylinder_contains, vector_distance, ChamberAtInfinity, TreeVertex, Vertex,
    VertexAtInfinity,
};
use a2_building::coxeter::A2Vector;
use common::*;
use num_rational::Rational64;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_vertex(r: &mut ChaCha8Rng, p: Prime) -> Vertex {
    Vertex::new(&random_matrix(r, p, -2, 2), p).unwrap()
}

fn random_flag(r: &mut ChaCha8Rng, p: Prime) -> ChamberAtInfinity {
    loop {
        let v: Vec<Scalar> = (0..3).map(|_| random_scalar(r, p, -1, 2)).collect();
        let w: Vec<Scalar> = (0..3).map(|_| random_scalar(r, p, -1, 2)).collect();
        if let Ok(f) = ChamberAtInfinity::from_vectors(&v, &w) {
            return f;
        }
    }
}

/// θ from the elimination oracle, PGL-normalized and descending.
fn theta_oracle(x: &Vertex, y: &Vertex) -> A2Vector {
    let rel = &x.basis().inverse().unwrap() * y.basis();
    let d = smith_oracle(&rel, x.prime());
    A2Vector::from_ints(d[2], d[1], d[0]).pgl_normalize()
}

#[test]
fn opposition_involution_on_small_vectors() {
    assert_eq!(
        A2Vector::from_ints(1, 0, 0).opposition(),
        A2Vector::from_ints(1, 1, 0)
    );
    for a in 0..=4 {
        for b in 0..=4 {
            for c in 0..=4 {
                let v = A2Vector::from_ints(a, b, c);
                assert_eq!(v.opposition_raw().opposition_raw(), v);
                assert_eq!(v.opposition_raw().sum(), -v.sum());
                assert_eq!(v.opposition_raw().squared_norm(), v.squared_norm());
                let t = v.type_residue().unwrap();
                let swapped = [0, 2, 1][t as usize];
                assert_eq!(v.opposition_raw().type_residue(), Some(swapped));
                let d = v.dominance_project();
                assert_eq!(d.dominance_project(), d);
                assert!(d.opposition().is_dominant());
            }
        }
    }
}

#[test]
fn standard_vertex_neighbors() {
    for prime in [2u64, 3] {
        let p = Prime::new(prime).unwrap();
        let o = Vertex::standard(p);
        let nb = o.neighbors();
        assert_eq!(nb.len() as u64, 2 * (prime * prime + prime + 1));
        let mut uniq = nb.clone();
        uniq.sort_by_key(|v| format!("{:?}", v.basis().to_string_rows()));
        uniq.dedup();
        assert_eq!(uniq.len(), nb.len());
        for y in &nb {
            let t = vector_distance(&o, y).unwrap().pgl;
            assert!(
                t == A2Vector::from_ints(1, 0, 0) || t == A2Vector::from_ints(1, 1, 0),
                "{t:?}"
            );
        }
    }
}

#[test]
fn residue_of_pg2_3() {
    let p = Prime::new(3).unwrap();
    let all = residue_chambers(p);
    assert_eq!(all.len(), 13 * 4);
    for c in &all {
        assert_eq!(all.iter().filter(|d| residue_opposite(c, d)).count(), 27);
    }
}

#[test]
fn germ_of_the_diagonal_sector() {
    let p = p2();
    let o = Vertex::standard(p);
    let f = ChamberAtInfinity::standard();
    let g = germ_of_chamber(&o, &f).unwrap();
    for (a, b) in [(2, 1), (3, 1), (5, 2)] {
        let x = sector_point(&o, &f, [0, b, a]).unwrap();
        assert_eq!(
            vector_distance(&o, &x).unwrap().pgl,
            A2Vector::from_ints(a, b, 0)
        );
        assert_eq!(germ_flag(&o, &x).unwrap(), g);
        assert!(u_cylinder_contains(&o, &x, &f).unwrap());
        assert!(!u_cylinder_contains(&o, &x, &ChamberAtInfinity::reversed()).unwrap());
    }
    assert!(flags_opposite(
        &ChamberAtInfinity::standard(),
        &ChamberAtInfinity::reversed()
    ));
    assert!(!flags_opposite(&f, &f));
}

#[test]
fn panel_tree_of_the_first_axis() {
    let p = p2();
    let v = VertexAtInfinity::point(&[Scalar::one(), Scalar::zero(), Scalar::zero()]).unwrap();
    let o = Vertex::standard(p);
    let x = Vertex::new(&Matrix::p_diagonal(p, &[0, 3, 1]), p).unwrap();
    let d = tree_distance(
        &panel_tree_project(&v, &o).unwrap(),
        &panel_tree_project(&v, &x).unwrap(),
    )
    .unwrap();
    assert_eq!(d, 2);
    let moving = Matrix::from_i64(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
    assert!(induced_tree_action(&v, &moving).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vector_distance_matches_the_smith_oracle(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = p2();
        let (x, y) = (random_vertex(r, p), random_vertex(r, p));
        prop_assert_eq!(vector_distance(&x, &y).unwrap().pgl, theta_oracle(&x, &y));
    }

    #[test]
    fn theta_is_invariant_under_type_preserving_elements(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = p2();
        let (x, y) = (random_vertex(r, p), random_vertex(r, p));
        let g = random_type_preserving(r, p, -2, 2);
        let before = vector_distance(&x, &y).unwrap();
        let after = vector_distance(&g.act(&x), &g.act(&y)).unwrap();
        prop_assert_eq!(before.pgl, after.pgl);
        prop_assert!(theta_symmetry_check(&x, &y).unwrap());
    }

    #[test]
    fn normal_form_is_a_class_invariant(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = Prime::new(3).unwrap();
        let m = random_matrix(r, p, -2, 2);
        let u = random_unimodular(r, p);
        let k = r.random_range(-3i64..=3);
        let a = Vertex::new(&m, p).unwrap();
        prop_assert_eq!(&Vertex::new(&(&m * &u), p).unwrap(), &a);
        prop_assert_eq!(&Vertex::new(&m.scale(&p.pow(k)), p).unwrap(), &a);
        let nf = lattice_normal_form(&m, p).unwrap();
        prop_assert_eq!(lattice_normal_form(&nf, p).unwrap(), nf);
    }

    #[test]
    fn vertex_types_follow_the_determinant(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = p2();
        let (x, y) = (random_vertex(r, p), random_vertex(r, p));
        let t = vector_distance(&x, &y).unwrap().raw.sum();
        let shift = (Rational64::from(i64::from(y.vertex_type()) - i64::from(x.vertex_type())) - t).to_integer();
        prop_assert_eq!(shift.rem_euclid(3), 0);
    }

    #[test]
    fn opposition_of_flags_is_equivariant(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = p2();
        let (f, h) = (random_flag(r, p), random_flag(r, p));
        let g = random_matrix(r, p, -2, 2);
        prop_assert_eq!(flags_opposite(&f.act(&g).unwrap(), &h.act(&g).unwrap()), flags_opposite(&f, &h));
    }

    #[test]
    fn germs_are_equivariant_under_the_stabilizer(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = p2();
        let o = Vertex::standard(p);
        let f = random_flag(r, p);
        let u = random_unimodular(r, p);
        let germ = germ_of_chamber(&o, &f).unwrap();
        prop_assert_eq!(germ_of_chamber(&o, &f.act(&u).unwrap()).unwrap(), germ.act(&u).unwrap());
    }

    #[test]
    fn sector_points_localize_to_the_chamber_germ(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = p2();
        let o = random_vertex(r, p);
        let f = random_flag(r, p);
        let b = r.random_range(1i64..=3);
        let a = b + r.random_range(1i64..=3);
        let x = sector_point(&o, &f, [0, b, a]).unwrap();
        prop_assert_eq!(vector_distance(&o, &x).unwrap().pgl, A2Vector::from_ints(a, b, 0));
        prop_assert_eq!(germ_flag(&o, &x).unwrap(), germ_of_chamber(&o, &f).unwrap());
        prop_assert!(u_cylinder_contains(&o, &x, &f).unwrap());
    }

    #[test]
    fn opposition_persists_along_the_sector(seed in any::<u64>()) {
        let r = &mut rng(seed);
        let p = p2();
        // the diagonal apartment, possibly translated
        let t = Matrix::p_diagonal(p, &[r.random_range(-2..=2), r.random_range(-2..=2), 0]);
        let o = Vertex::new(&t, p).unwrap();
        let f = random_flag(r, p);
        let h = random_flag(r, p);
        let y = sector_point(&o, &f, [0, r.random_range(0..=2), r.random_range(2..=4)]).unwrap();
        prop_assert!(u_cylinder_contains(&o, &y, &f).unwrap());
        if flags_opposite(&f, &h) && residue_opposite(&germ_of_chamber(&o, &f).unwrap(), &germ_of_chamber(&o, &h).unwrap()) {
            prop_assert!(residue_opposite(&germ_of_chamber(&y, &f).unwrap(), &germ_of_chamber(&y, &h).unwrap()));
        }
    }

    #[test]
    fn panel_projection_is_equivariant_and_lipschitz(seed in any::<u64>(), line in any::<bool>()) {
        let r = &mut rng(seed);
        let p = p2();
        let e1 = [Scalar::one(), Scalar::zero(), Scalar::zero()];
        let e3 = [Scalar::zero(), Scalar::zero(), Scalar::one()];
        let v = if line { VertexAtInfinity::line(&e3).unwrap() } else { VertexAtInfinity::point(&e1).unwrap() };
        // upper triangular elements stabilize both ⟨e1⟩ and the plane e3 = 0
        let mut g = random_matrix(r, p, -1, 2);
        for (i, j) in [(1, 0), (2, 0), (2, 1)] {
            g[(i, j)] = Scalar::zero();
        }
        for i in 0..3 {
            if g[(i, i)].is_zero() {
                g[(i, i)] = Scalar::one();
            }
        }
        let h = induced_tree_action(&v, &g).unwrap();
        let (x, y) = (random_vertex(r, p), random_vertex(r, p));
        let px = panel_tree_project(&v, &x).unwrap();
        let gx = panel_tree_project(&v, &x.act(&g).unwrap()).unwrap();
        prop_assert_eq!(gx, px.act(&h).unwrap());
        let py = panel_tree_project(&v, &y).unwrap();
        let spread = vector_distance(&x, &y).unwrap().pgl.to_ints().unwrap()[0];
        prop_assert!(tree_distance(&px, &py).unwrap() as i64 <= spread);
    }
}

#[test]
fn tree_vertices_are_classes() {
    let p = p2();
    let a = TreeVertex::new(&Matrix::from_i64(&[&[2, 1], &[0, 1]]), p).unwrap();
    let b = TreeVertex::new(&Matrix::from_i64(&[&[4, 2], &[0, 2]]), p).unwrap();
    assert_eq!(a, b);
    assert_eq!(tree_distance(&a, &b).unwrap(), 0);
}
