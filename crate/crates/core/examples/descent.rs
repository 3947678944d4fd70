//! Descend the quaternionic structure to the 4-dimensional quotient.
use quatquot::group_action::{build_omega, integer_kernel};
use quatquot::moment::{self, MomentSpec};
use quatquot::quotient_geom;
use quatquot::toric_data::{self, CombinatorialData, ConformalData};

fn main() -> quatquot::Result<()> {
    let s = CombinatorialData::from_pairs(&[[1, 0], [2, 1], [1, 1], [1, 2], [-1, 3]]);
    let r = ConformalData::new(vec![0.0, 0.4, 1.1, 1.9, 2.6]);
    let t = toric_data::derive_T(&s);
    let spec = MomentSpec::new(&r, integer_kernel(&build_omega(&t))?)?;

    let p = moment::orbit_point(&r, 0.2, 1.5)?;
    let frame = quotient_geom::descend_H(&p, &spec)?;
    println!("dim ker dμ = {}, margin = {:.3}", frame.kernel_dim, frame.margin);
    println!("Î_1 = {:.4}", frame.endos[0]);
    println!("relation residual = {:e}", frame.relation_residual());
    println!("conformal Gram matrix = {:.4}", quotient_geom::conformal_rep(&frame)?);
    let j = quotient_geom::descend_nu1(&p, &frame)?;
    println!("‖J² + 1‖ = {:e}", (&j * &j + nalgebra::DMatrix::<f64>::identity(4, 4)).amax());

    let rep = quotient_geom::descent_report(&r, &spec, 100, 7)?;
    println!("100 random points: accepted {}, max residual {:e}", rep.accepted, rep.max_residual);
    Ok(())
}
