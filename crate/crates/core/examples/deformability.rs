//! G_S-invariant quadratic twistor functions beyond the torus-invariant span.
use quatquot::toric_data::{self, CombinatorialData};
use quatquot::twistor_class;

fn main() -> quatquot::Result<()> {
    for pairs in [
        vec![[1, 0], [0, 1], [-1, 1]],
        vec![[1, 0], [1, 1], [0, 1], [-1, 1]],
        vec![[1, 0], [2, 1], [1, 1], [1, 2], [-1, 3]],
    ] {
        let t = toric_data::derive_T(&CombinatorialData::from_pairs(&pairs));
        let rep = twistor_class::deformability(&t)?;
        println!("S = {pairs:?}");
        println!("  invariant dim {}, extra weights {:?}, extra dim {}", rep.tk_invariant_dim, rep.extra_weights, rep.extra_dim);
    }
    Ok(())
}
