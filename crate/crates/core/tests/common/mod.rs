#![allow(dead_code)]

use quatquot::group_action::{build_omega, integer_kernel};
use quatquot::io::{read_input, InputData};
use quatquot::moment::MomentSpec;
use quatquot::qalg::{ComplexSplit, UPoint};
use quatquot::toric_data::{self, CombinatorialData, ConformalData, DerivedData};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: [&str; 6] = ["k3", "k4_convex", "k5_generic", "nonconvex", "sublattice", "bad_angles"];
/// Fixtures whose conformal data is valid.
pub const VALID_R: [&str; 5] = ["k3", "k4_convex", "k5_generic", "nonconvex", "sublattice"];

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> InputData {
    read_input(fixture_path(name).as_ref()).unwrap()
}

pub struct Setup {
    pub s: CombinatorialData,
    pub t: DerivedData,
    pub r: ConformalData,
    pub spec: MomentSpec,
}

pub fn setup(name: &str) -> Setup {
    let input = fixture(name);
    let s = input.s();
    let t = toric_data::derive_T(&s);
    let r = input.r().unwrap();
    let spec = MomentSpec::new(&r, integer_kernel(&build_omega(&t)).unwrap()).unwrap();
    Setup { s, t, r, spec }
}

pub fn random_upoint(k: usize, rng: &mut ChaCha8Rng) -> UPoint {
    UPoint::new(
        (0..k)
            .map(|_| {
                ComplexSplit::from_parts(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect(),
    )
}

/// Random S passing sector normalization and consecutive independence.
pub fn random_valid_s(k: usize, rng: &mut ChaCha8Rng) -> CombinatorialData {
    loop {
        let mut v = vec![[rng.gen_range(1..4), 0]];
        for _ in 1..k {
            v.push([rng.gen_range(-6..7), rng.gen_range(1..7)]);
        }
        let s = CombinatorialData::from_pairs(&v);
        if toric_data::validate_S(&s).map(|r| r.is_valid()).unwrap_or(false) {
            return s;
        }
    }
}

/// Index of the lattice spanned by `vs` in Z²: gcd of all 2×2 minors.
pub fn index_by_minors(vs: &[[i64; 2]]) -> i64 {
    let mut g = 0i64;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let m = vs[i][0] * vs[j][1] - vs[i][1] * vs[j][0];
            g = num_gcd(g, m.abs());
        }
    }
    g
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}
