mod common;

use std::f64::consts::PI;


use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use quatquot::grid::GridSpec;
use quatquot::group_action::torus_act;
use quatquot::joyce;
use quatquot::moment::{self, MomentSpec};
use quatquot::qalg::{fiber_act, ComplexSplit, Quaternion, UPoint};
use quatquot::toric_data::{self, CombinatorialData, LatticeVector};
use quatquot::twistor_class;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn split() -> impl Strategy<Value = ComplexSplit> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(|[a, b, c, d]| ComplexSplit::from_parts(a, b, c, d))
}

fn upoint(k: usize) -> impl Strategy<Value = UPoint> {
    prop::collection::vec(split(), k).prop_map(UPoint::new)
}

fn lattice_vectors() -> impl Strategy<Value = Vec<LatticeVector>> {
    prop::collection::vec((-5i64..6, -5i64..6), 3..7)
        .prop_map(|v| v.into_iter().map(|(a, b)| LatticeVector::new(a, b)).collect())
}

#[derive(Clone, Copy)]
struct Frac(i128, i128);

impl Frac {
    fn new(n: i128, d: i128) -> Self {
        let g = gcd(n.abs(), d.abs()).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Frac(s * n / g, s * d / g)
    }
    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
    fn sub(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Negative-definiteness of the intersection form on the `k − 2` compact
/// divisors, with signs fixed so that consecutive determinants are positive.
/// Exact: the leading minors of the tridiagonal form alternate in sign.
fn intersection_oracle(vs: &[LatticeVector]) -> bool {
    let mut u = vs.to_vec();
    for i in 1..u.len() {
        if u[i - 1].det(u[i]) < 0 {
            u[i] = -u[i];
        }
    }
    let det = |a: LatticeVector, b: LatticeVector| a.det(b) as i128;
    let diag: Vec<Frac> = (1..u.len() - 1)
        .map(|i| Frac::new(-det(u[i - 1], u[i + 1]), det(u[i - 1], u[i]) * det(u[i], u[i + 1])))
        .collect();
    let off: Vec<Frac> = (1..u.len() - 2).map(|i| Frac::new(1, det(u[i], u[i + 1]))).collect();
    let (mut prev, mut cur) = (Frac(1, 1), diag[0]);
    if cur.0 >= 0 {
        return false;
    }
    for n in 1..diag.len() {
        let next = diag[n].mul(cur).sub(off[n - 1].mul(off[n - 1]).mul(prev));
        // sign of the n+1 leading minor must be (−1)^{n+1}
        if (n % 2 == 1 && next.0 <= 0) || (n % 2 == 0 && next.0 >= 0) {
            return false;
        }
        prev = cur;
        cur = next;
    }
    true
}

fn k_fixture(k: usize) -> Setup {
    match k {
        3 => setup("k3"),
        4 => setup("k4_convex"),
        _ => setup("k5_generic"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn s_t_round_trip(seed in any::<u64>(), k in 3usize..9) {
        let s = random_valid_s(k, &mut ChaCha8Rng::seed_from_u64(seed));
        let t = toric_data::derive_T(&s);
        prop_assert_eq!(toric_data::recover_S(&t).unwrap(), s);
    }

    #[test]
    fn convexity_matches_intersection_form(vs in lattice_vectors()) {
        prop_assume!(vs.windows(2).all(|w| w[0].det(w[1]) != 0));
        prop_assert_eq!(toric_data::convex_vectors(&vs), intersection_oracle(&vs));
    }

    #[test]
    fn convexity_is_gl2z_invariant(vs in lattice_vectors(), m in prop::sample::select(vec![
        [[1, 1], [0, 1]], [[0, -1], [1, 0]], [[2, 1], [1, 1]], [[1, 0], [-3, 1]],
        [[1, 0], [0, -1]], [[0, 1], [1, 0]],
    ])) {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let mut image: Vec<LatticeVector> = vs
            .iter()
            .map(|v| LatticeVector::new(m[0][0] * v.a + m[0][1] * v.b, m[1][0] * v.a + m[1][1] * v.b))
            .collect();
        if det < 0 {
            // a reflection reverses the cyclic order
            image.reverse();
        }
        prop_assert_eq!(toric_data::convex_vectors(&image), toric_data::convex_vectors(&vs));
    }

    #[test]
    fn nu_is_torus_invariant(p in upoint(4), t in prop::collection::vec(-PI..PI, 4)) {
        let q = torus_act(&t, &p).unwrap();
        for (a, b) in moment::nu(&p).iter().zip(moment::nu(&q).iter()) {
            for (x, y) in a.arr().iter().zip(b.arr()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nu_scales_under_fibre(p in upoint(3), c in prop::array::uniform4(-1.5f64..1.5)) {
        let c = Quaternion::new(c[0], c[1], c[2], c[3]);
        let n2 = c.w * c.w + c.a * c.a + c.b * c.b + c.c * c.c;
        let q = fiber_act(c, &p).unwrap();
        for (a, b) in moment::nu(&p).iter().zip(moment::nu(&q).iter()) {
            prop_assert!((b.norm() - n2 * a.norm()).abs() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn dmu_matches_finite_differences(k in 3usize..6, seed in any::<u64>()) {
        let set = k_fixture(k);
        let p = random_upoint(k, &mut ChaCha8Rng::seed_from_u64(seed));
        let j = moment::dmu(&p, &set.spec);
        let v = p.to_real();
        let h = 1e-6;
        let flat = |w: &nalgebra::DVector<f64>| -> Vec<f64> {
            moment::mu(&UPoint::from_real(w), &set.spec).iter().flat_map(|m| m.arr()).collect()
        };
        for i in 0..v.len() {
            let (mut a, mut b) = (v.clone(), v.clone());
            a[i] += h;
            b[i] -= h;
            let (fa, fb) = (flat(&a), flat(&b));
            for row in 0..fa.len() {
                prop_assert!(((fa[row] - fb[row]) / (2.0 * h) - j[(row, i)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn membership_tests_agree(k in 3usize..6, x in -3.0f64..3.0, y in 0.05f64..4.0, perturb in 0.0f64..1.0) {
        let set = k_fixture(k);
        let mut p = moment::orbit_point(&set.r, x, y).unwrap();
        // half the cases leave P
        if perturb > 0.5 {
            p.coords[0] = ComplexSplit::from_parts(perturb, 0.3, -0.2, perturb);
        }
        prop_assert_eq!(moment::in_P(&p, &set.spec), moment::nu_in_w(&p, &set.r, 1e-9));
    }

    #[test]
    fn membership_independent_of_bstar(k in 3usize..6, x in -3.0f64..3.0, y in 0.05f64..4.0, angle in -PI..PI) {
        let set = k_fixture(k);
        let mut other = MomentSpec { bstar: set.spec.bstar.clone(), ..set.spec.clone() };
        if other.bstar.nrows() >= 2 {
            // rotate the first two rows of the annihilator basis
            let (c, s) = (angle.cos(), angle.sin());
            let r0 = other.bstar.row(0).clone_owned();
            let r1 = other.bstar.row(1).clone_owned();
            other.bstar.set_row(0, &(&r0 * c - &r1 * s));
            other.bstar.set_row(1, &(&r0 * s + &r1 * c));
        } else {
            other.bstar *= -2.0;
        }
        let p = moment::orbit_point(&set.r, x, y).unwrap();
        let q = UPoint::new(p.coords.iter().enumerate().map(|(i, c)| if i == 1 { c.scaled(1.1) } else { *c }).collect());
        for pt in [&p, &q] {
            prop_assert_eq!(moment::in_P(pt, &set.spec), moment::in_P(pt, &other));
        }
    }

    #[test]
    fn joyce_identity(k in 3usize..6, x in -4.0f64..4.0, y in 0.01f64..5.0) {
        let set = k_fixture(k);
        let p = moment::orbit_point(&set.r, x, y).unwrap();
        let m = moment::transversality_det(&p, &set.t, &set.r).unwrap();
        let ps = joyce::p_from_r(&set.r);
        let j = joyce::boundary_normalized_det(&set.t, &ps, x, y).unwrap();
        let sin_prod: f64 = set.r.theta.iter().skip(1).map(|t| t.sin()).product();
        prop_assert!((j + m / sin_prod).abs() <= 1e-9 * j.abs().max(1.0));
    }

    #[test]
    fn psi_reality(k in 3usize..6, seed in any::<u64>()) {
        let set = k_fixture(k);
        let z = twistor_class::random_z(&set.r, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = twistor_class::psi(&set.t, &set.r, z).unwrap();
        let b = twistor_class::psi(&set.t, &set.r, -1.0 / z.conj()).unwrap();
        for i in 0..2 {
            let want = Complex64::new(1.0, 0.0) / a[i].conj();
            prop_assert!((b[i] - want).norm() <= 1e-9 * want.norm().max(1.0));
        }
    }

    #[test]
    fn grid_evaluation_keeps_order(n in 1usize..20) {
        let g = GridSpec::new(n, -1.0, 2.0, 3.0).unwrap();
        let par: Vec<(f64, f64)> = g.evaluate(|c| (c.x, c.y)).into_iter().map(|(_, v)| v).collect();
        let seq: Vec<(f64, f64)> = g.cells().map(|c| (c.x, c.y)).collect();
        prop_assert_eq!(par, seq);
    }

    #[test]
    fn generation_flag_matches_minors(seed in any::<u64>(), k in 3usize..7, scale in 1i64..4) {
        let s = random_valid_s(k, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = CombinatorialData::new(s.vectors.iter().map(|v| v.scale(scale)).collect());
        let pairs: Vec<[i64; 2]> = s.vectors.iter().map(|v| v.arr()).collect();
        let v = toric_data::validate_S(&s).unwrap();
        prop_assert_eq!(v.simply_connected(), index_by_minors(&pairs) == 1);
    }
}

#[test]
fn descended_structure_is_torus_invariant() {
    let set = setup("k4_convex");
    let p = moment::orbit_point(&set.r, 0.3, 0.9).unwrap();
    let frame = quatquot::quotient_geom::descend_H(&p, &set.spec).unwrap();
    let check = quatquot::quotient_geom::torus_invariance(&frame, &set.spec, &[0.4, -1.1, 2.0, 0.3]).unwrap();
    assert!(check.conjugation_residual < 1e-9 && check.conformal_distance < 1e-9);
    let g = quatquot::quotient_geom::conformal_rep(&frame).unwrap();
    assert!((&g - g.transpose()).amax() < 1e-12);
    assert!(DMatrix::from_fn(4, 4, |i, j| g[(i, j)]).symmetric_eigenvalues().min() > 0.0);
}

#[test]
fn intersection_oracle_on_fixtures() {
    for (name, convex) in [("k3", true), ("k4_convex", true), ("k5_generic", true), ("nonconvex", false), ("sublattice", true)] {
        let s = fixture(name).s();
        assert_eq!(intersection_oracle(&s.vectors), convex, "{name}");
        assert_eq!(toric_data::is_convex(&s).unwrap(), convex, "{name}");
    }
}
