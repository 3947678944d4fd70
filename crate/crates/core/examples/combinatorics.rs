//! Validate combinatorial data, test convexity and move between S and T.
use quatquot::toric_data::{self, CombinatorialData};

fn main() -> quatquot::Result<()> {
    for pairs in [
        vec![[1, 0], [0, 1], [-1, 1]],
        vec![[1, 0], [1, 1], [0, 1], [-1, 1]],
        vec![[1, 0], [0, 1], [1, 1]],
        vec![[2, 0], [0, 2], [-2, 2]],
    ] {
        let s = CombinatorialData::from_pairs(&pairs);
        let v = toric_data::validate_S(&s)?;
        let t = toric_data::derive_T(&s);
        let back = toric_data::recover_S(&t)?;
        println!("S = {pairs:?}");
        println!("  valid: {}, simply connected: {}, convex: {}", v.is_valid(), v.simply_connected(), toric_data::is_convex(&s)?);
        println!("  T = {:?}", t.vectors.iter().map(|v| v.arr()).collect::<Vec<_>>());
        println!("  S recovered from T: {}", back == s);
        for issue in &v.issues {
            println!("  {}: {}", issue.check, issue.message);
        }
    }
    Ok(())
}
