//! Ω, the integer kernel g and the locally-free screen.
use quatquot::group_action::{self, build_omega, integer_kernel};
use quatquot::toric_data::{self, CombinatorialData};

fn main() -> quatquot::Result<()> {
    let s = CombinatorialData::from_pairs(&[[1, 0], [1, 1], [0, 1], [-1, 1]]);
    let t = toric_data::derive_T(&s);
    let omega = build_omega(&t);
    let d = integer_kernel(&omega)?;
    println!("Ω = {:?}", omega.matrix);
    println!("kernel basis = {:?}", d.rows);
    println!("T^k / G_S = F: {}", group_action::quotient_is_F(&s, &d));

    let screen = group_action::locally_free_screen(&t, group_action::DEFAULT_SCREEN_BOUND);
    println!("locally free: {:?}", screen.locally_free);

    // two consecutive parallel vectors in S break local freeness
    let bad = toric_data::derive_T(&CombinatorialData::from_pairs(&[[1, 0], [2, 0], [0, 1], [-1, 1]]));
    let screen = group_action::locally_free_screen(&bad, group_action::DEFAULT_SCREEN_BOUND);
    println!("degenerate T: {:?}, first witness {:?}", screen.locally_free, screen.witnesses.first());
    Ok(())
}
