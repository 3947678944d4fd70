//! The moment map on a sampled orbit and a transversality scan.
use quatquot::grid::GridSpec;
use quatquot::group_action::{build_omega, integer_kernel};
use quatquot::moment::{self, MomentSpec};
use quatquot::toric_data::{self, CombinatorialData, ConformalData};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

fn main() -> quatquot::Result<()> {
    let s = CombinatorialData::from_pairs(&[[1, 0], [0, 1], [-1, 1]]);
    let r = ConformalData::new(vec![0.0, FRAC_PI_4, FRAC_PI_2]);
    let t = toric_data::derive_T(&s);
    let spec = MomentSpec::new(&r, integer_kernel(&build_omega(&t))?)?;
    println!("B* = {:.6}", spec.bstar);

    let p = moment::orbit_point(&r, 0.4, 1.3)?;
    println!("|μ(p)| = {:e}", moment::mu_norm(&p, &spec));
    println!("holomorphicity residual = {:e}", moment::holomorphicity_residual(&p, &spec));
    println!("normalized transversality det = {}", moment::transversality_normalized(&p, &t, &r)?);

    let grid = GridSpec::around(&r, 30);
    let scan = moment::scan_transversality(&t, &r, &spec, &grid, moment::DEFAULT_ZERO_TOL)?;
    println!("scan: min |det| {:e}, sign changes {}, passed {}", scan.min_abs_det, scan.sign_changes, scan.passed);
    Ok(())
}
