//! Joyce's elementary solutions and the correspondence with transversality.
use quatquot::grid::GridSpec;
use quatquot::joyce::{self, DEFAULT_BOUNDARY_EPS, DEFAULT_DET_TOL};
use quatquot::toric_data::{self, CombinatorialData, ConformalData};

fn main() -> quatquot::Result<()> {
    let s = CombinatorialData::from_pairs(&[[1, 0], [1, 1], [0, 1], [-1, 1]]);
    let r = ConformalData::new(vec![0.0, 0.2 * std::f64::consts::PI, std::f64::consts::FRAC_PI_2, 0.75 * std::f64::consts::PI]);
    let t = toric_data::derive_T(&s);
    let ps = joyce::p_from_r(&r);
    println!("p = {:?}", ps.iter().map(|p| p.to_string()).collect::<Vec<_>>());
    println!("f^p at (0.3, 1.0): {:?}", joyce::f_p(ps[1], 0.3, 1.0)?);
    println!("Joyce det at (0.3, 1.0): {}", joyce::joyce_matrix(&t, &ps, 0.3, 1.0)?.det());

    let grid = GridSpec::around(&r, 40);
    let scan = joyce::nondegeneracy_scan(&t, &ps, &grid, &DEFAULT_BOUNDARY_EPS, DEFAULT_DET_TOL)?;
    println!("nondegenerate: {} (min |det| {:e})", scan.passed, scan.min_abs_det);
    let corr = joyce::correspondence_check(&t, &r, &grid, DEFAULT_DET_TOL)?;
    println!(
        "correspondence: {} of {} both nonzero, relative sign {:?}, passed {}",
        corr.both_nonzero, corr.samples, corr.relative_sign, corr.passed
    );
    Ok(())
}
