//! Uniform local binary patterns: radius 1, 8 neighbors, 59 bins.
//!
//! Bit k is set when the k-th ring neighbor is >= the center value, so a
//! constant region produces code 255 (the flat pattern). Uniform codes
//! (at most two 0/1 transitions around the ring) each get their own bin in
//! ascending code order; everything else shares bin 58.

/// Number of histogram bins: 58 uniform patterns plus one catch-all.
pub const LBP_BINS: usize = 59;

/// Ring neighbors in clockwise order starting at the top-left.
const RING: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

fn transitions(code: u8) -> u32 {
    let rotated = code.rotate_left(1);
    (code ^ rotated).count_ones()
}

/// Bin index for an 8-bit LBP code.
pub fn lbp_bin(code: u8) -> usize {
    // uniform codes in ascending order get bins 0..57; the rest share 58
    static TABLE: std::sync::OnceLock<[usize; 256]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [58usize; 256];
        let mut next = 0;
        for code in 0..=255u8 {
            if transitions(code) <= 2 {
                t[code as usize] = next;
                next += 1;
            }
        }
        debug_assert_eq!(next, 58);
        t
    });
    table[code as usize]
}

/// The bin a constant region maps to (all neighbors >= center, code 255).
pub fn flat_pattern_bin() -> usize {
    lbp_bin(0xFF)
}

/// LBP code at an interior pixel of a row-major value grid.
pub fn lbp_code(values: &[f64], width: u32, x: u32, y: u32) -> u8 {
    let center = values[(y * width + x) as usize];
    let mut code = 0u8;
    for (k, (dx, dy)) in RING.iter().enumerate() {
        let nx = (x as i64 + dx) as u32;
        let ny = (y as i64 + dy) as u32;
        if values[(ny * width + nx) as usize] >= center {
            code |= 1 << k;
        }
    }
    code
}

/// Accumulates the uniform-LBP histogram over the given interior pixel
/// indices; the result is L1-normalized when any pixel contributed.
pub fn lbp_histogram(
    values: &[f64],
    width: u32,
    height: u32,
    members: impl IntoIterator<Item = usize>,
) -> Vec<f64> {
    let mut hist = vec![0.0f64; LBP_BINS];
    let mut total = 0.0;
    for idx in members {
        let x = (idx % width as usize) as u32;
        let y = (idx / width as usize) as u32;
        // border pixels have no full ring
        if x == 0 || y == 0 || x + 1 >= width || y + 1 >= height {
            continue;
        }
        hist[lbp_bin(lbp_code(values, width, x, y))] += 1.0;
        total += 1.0;
    }
    if total > 0.0 {
        for v in hist.iter_mut() {
            *v /= total;
        }
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_table_structure() {
        // 58 uniform bins plus the catch-all
        let uniform = (0..=255u8).filter(|&c| transitions(c) <= 2).count();
        assert_eq!(uniform, 58);
        assert_eq!(lbp_bin(0), 0);
        assert_eq!(lbp_bin(0b0000_0101), 58, "two separated bits is non-uniform");
        assert_eq!(lbp_bin(0xFF), flat_pattern_bin());
        let mut seen = std::collections::BTreeSet::new();
        for c in 0..=255u8 {
            if transitions(c) <= 2 {
                assert!(seen.insert(lbp_bin(c)), "uniform bins are distinct");
            } else {
                assert_eq!(lbp_bin(c), 58);
            }
        }
    }

    #[test]
    fn constant_region_concentrates_in_flat_bin() {
        let values = vec![3.25; 36];
        let hist = lbp_histogram(&values, 6, 6, 0..36);
        assert!((hist[flat_pattern_bin()] - 1.0).abs() < 1e-12);
        assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn border_only_members_yield_zero_histogram() {
        let values = vec![1.0; 16];
        let border: Vec<usize> = (0..16)
            .filter(|&i| {
                let (x, y) = (i % 4, i / 4);
                x == 0 || y == 0 || x == 3 || y == 3
            })
            .collect();
        let hist = lbp_histogram(&values, 4, 4, border);
        assert!(hist.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_edge_patterns_are_uniform() {
        // step at x=3 on a 6-wide grid: ring splits into two contiguous arcs
        let mut values = vec![0.0; 36];
        for y in 0..6 {
            for x in 3..6 {
                values[y * 6 + x] = 1.0;
            }
        }
        for y in 1..5u32 {
            for x in 1..5u32 {
                let code = lbp_code(&values, 6, x, y);
                assert!(transitions(code) <= 2, "edge code {code:#010b} at ({x},{y})");
            }
        }
    }
}
