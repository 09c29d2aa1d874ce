// Size and structure of the tile permutation space.
//
//     cargo run --example permutation_space

use std::error::Error;

use microbe_screen::augment::{count_reachable, count_reachable_exact, cycle_decomposition, TilePermutation};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let space = count_reachable(4)?;
    println!("4x4 grid: {space} reachable arrangements");
    assert_eq!(space, (1..=16u64).product::<u64>());

    // Exhaustive check on small grids: 4 to 12 swaps reach every permutation
    // once there are enough tiles for both parities.
    for tiles in 2..=6 {
        let reached = count_reachable_exact(tiles, 4..=12)?;
        let all: usize = (1..=tiles).product();
        println!("{tiles} tiles: {reached} of {all}");
        assert_eq!(reached, all);
    }

    let p = TilePermutation::from_swaps(&[(0, 1), (1, 2), (4, 5), (8, 15), (3, 3 + 9)])?;
    let cycles = cycle_decomposition(p.mapping());
    println!("mapping {:?}", p.mapping());
    println!("cycles {cycles:?} sign {}", p.sign());
    assert_eq!(p.sign(), -1);
    assert_eq!(p.inverse().inverse(), p);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
