//! The earth mover's distance between fixation densities: exact transport
//! costs on small grids, metric properties, and the effect of the
//! downsampling grid on the reported units.
//!
//! ```bash
//! cargo run --example transport_distance
//! ```

use camobench::map::{to_distribution, ScalarMap};
use camobench::metrics::transport::{emd, DEFAULT_EMD_GRID};
use camobench::Result;
use rand::{Rng, SeedableRng};

fn impulse(w: u32, h: u32, x: u32, y: u32) -> ScalarMap {
    let mut values = vec![0.0; (w * h) as usize];
    values[(y * w + x) as usize] = 1.0;
    ScalarMap::new(w, h, values).unwrap()
}

fn main() -> Result<()> {
    // Moving a unit of mass 3 cells right and 4 down costs exactly the
    // Euclidean 5.
    let p = to_distribution(&impulse(8, 8, 0, 0))?;
    let q = to_distribution(&impulse(8, 8, 3, 4))?;
    println!("impulse (0,0) -> (3,4): emd = {}", emd(&p, &q, DEFAULT_EMD_GRID)?);

    // Splitting the mass costs the weighted sum of the routes.
    let a = to_distribution(&ScalarMap::new(3, 1, vec![1.0, 0.0, 0.0])?)?;
    let b = to_distribution(&ScalarMap::new(3, 1, vec![0.0, 0.5, 0.5])?)?;
    println!("split onto two cells:   emd = {}", emd(&a, &b, DEFAULT_EMD_GRID)?);

    // Symmetry and identity on random 4x4 distributions.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut random = || -> Result<_> {
        let values: Vec<f64> = (0..16).map(|_| rng.gen_range(0.01..1.0)).collect();
        to_distribution(&ScalarMap::new(4, 4, values)?)
    };
    let (x, y) = (random()?, random()?);
    let forward = emd(&x, &y, DEFAULT_EMD_GRID)?;
    let backward = emd(&y, &x, DEFAULT_EMD_GRID)?;
    println!("random pair: forward = {forward:.12}, backward = {backward:.12}");
    assert!((forward - backward).abs() < 1e-9);
    assert_eq!(emd(&x, &x, DEFAULT_EMD_GRID)?, 0.0);

    // Large maps are area-averaged onto grid x grid cells first; the cost
    // unit is one cell width of the downsampled grid, so halving the grid
    // halves the number for the same displacement.
    let big_p = to_distribution(&impulse(256, 256, 64, 128))?;
    let big_q = to_distribution(&impulse(256, 256, 192, 128))?;
    for grid in [32, 16, 8] {
        println!("256x256 impulses 128px apart, grid {grid:>2}: emd = {}", emd(&big_p, &big_q, grid)?);
    }
    Ok(())
}
