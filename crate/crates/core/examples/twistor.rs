//! Twistor lines, the involution Ψ, its pushforward ψ and the classification triple.
use num_complex::Complex64;
use quatquot::toric_data::{self, CombinatorialData, ConformalData};
use quatquot::twistor_class;

fn main() -> quatquot::Result<()> {
    let s = CombinatorialData::from_pairs(&[[1, 0], [0, 1], [-1, 1]]);
    let r = ConformalData::new(vec![0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2]);
    let t = toric_data::derive_T(&s);

    let z = Complex64::new(0.3, -0.7);
    println!("ℓ(z) = {:?}", twistor_class::line_point(&r, Some(z)));
    println!("Ψ(z)·ℓ(z) vs ℓ(−z): {:e}", twistor_class::involution_residual(&r, z)?);
    println!("ψ(z) = {:?}", twistor_class::psi(&t, &r, z)?);

    let rep = twistor_class::classification_report(&s, &r, 500, 1)?;
    println!("{}", serde_json::to_string_pretty(&rep).expect("serializable"));
    Ok(())
}
