//! Earth mover's distance between density maps.
//!
//! Maps are area-averaged onto a coarse grid (default 32 cells per side),
//! renormalized, and the exact minimum-cost transportation problem is solved
//! with the transportation simplex. Ground distance is the Euclidean
//! distance between cell centers, in downsampled-cell units.

use crate::error::{Error, Result};
use crate::map::{Distribution, ScalarMap};

pub const DEFAULT_EMD_GRID: u32 = 32;

/// Reduced-cost tolerance: arcs this close to zero are treated as optimal.
const RC_TOL: f64 = 1e-12;
const PRICE_BLOCK: usize = 8192;
const CAND_MAX: usize = 64;

/// Area-average onto at most `grid` cells per side. Maps already within the
/// grid are returned unchanged; otherwise each side shrinks to
/// `min(side, grid)` with exact fractional-coverage box filtering, so total
/// mass is preserved up to a constant factor.
pub fn downsample_to_grid(map: &ScalarMap, grid: u32) -> ScalarMap {
    let (w, h) = map.dims();
    if w <= grid && h <= grid {
        return map.clone();
    }
    let tw = w.min(grid);
    let th = h.min(grid);
    let sx = tw as f64 / w as f64;
    let sy = th as f64 / h as f64;
    let mut out = vec![0.0f64; (tw * th) as usize];
    for y in 0..h {
        let y0 = y as f64 * sy;
        let y1 = y0 + sy;
        let ty_start = y0.floor() as u32;
        let ty_end = (y1.ceil() as u32).min(th);
        for x in 0..w {
            let v = map.get(x, y);
            if v == 0.0 {
                continue;
            }
            let x0 = x as f64 * sx;
            let x1 = x0 + sx;
            let tx_start = x0.floor() as u32;
            let tx_end = (x1.ceil() as u32).min(tw);
            for ty in ty_start..ty_end {
                let oy = (y1.min((ty + 1) as f64) - y0.max(ty as f64)).max(0.0);
                if oy == 0.0 {
                    continue;
                }
                for tx in tx_start..tx_end {
                    let ox = (x1.min((tx + 1) as f64) - x0.max(tx as f64)).max(0.0);
                    out[(ty * tw + tx) as usize] += v * ox * oy;
                }
            }
        }
    }
    ScalarMap::new(tw, th, out).expect("box filter output is finite")
}

/// Cells with positive mass, normalized to sum exactly 1.
#[cfg(test)]
fn positive_cells(map: &ScalarMap) -> Result<Vec<(u32, u32, f64)>> {
    let total = map.sum();
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let (w, _) = map.dims();
    let mut cells = Vec::new();
    for (i, &v) in map.values().iter().enumerate() {
        if v > 0.0 {
            cells.push((i as u32 % w, i as u32 / w, v / total));
        }
    }
    Ok(cells)
}

/// The signed difference of the normalized maps, split into surplus cells
/// (sources) and deficit cells (sinks). The ground distance is a metric, so
/// mass shared by both maps stays in place in some optimal plan and only
/// the difference ever moves; this shrinks the transport problem without
/// changing its optimum.
fn surplus_cells(
    pm: &ScalarMap,
    qm: &ScalarMap,
) -> Result<(Vec<(u32, u32, f64)>, Vec<(u32, u32, f64)>)> {
    let (tp, tq) = (pm.sum(), qm.sum());
    if tp <= 0.0 || tq <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let w = pm.dims().0;
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for (i, (&a, &b)) in pm.values().iter().zip(qm.values()).enumerate() {
        let d = a / tp - b / tq;
        let cell = (i as u32 % w, i as u32 / w);
        if d > 0.0 {
            sources.push((cell.0, cell.1, d));
        } else if d < 0.0 {
            sinks.push((cell.0, cell.1, -d));
        }
    }
    Ok((sources, sinks))
}

fn cell_distance(a: (u32, u32), b: (u32, u32)) -> f64 {
    let dx = a.0 as f64 - b.0 as f64;
    let dy = a.1 as f64 - b.1 as f64;
    (dx * dx + dy * dy).sqrt()
}

/// EMD with the default 32-cell grid.
pub fn emd_default(p: &Distribution, q: &Distribution) -> Result<f64> {
    emd(p, q, DEFAULT_EMD_GRID)
}

/// EMD at an explicit grid size, in downsampled-cell units.
pub fn emd(p: &Distribution, q: &Distribution, grid: u32) -> Result<f64> {
    if p.as_map().dims() != q.as_map().dims() {
        return Err(Error::dims(p.as_map().dims(), q.as_map().dims()));
    }
    if grid == 0 {
        return Err(Error::InvalidConfig("emd grid must be positive".into()));
    }
    let pm = downsample_to_grid(p.as_map(), grid);
    let qm = downsample_to_grid(q.as_map(), grid);
    let (sources, sinks) = surplus_cells(&pm, &qm)?;
    // either side empty means the normalized maps coincide
    if sources.is_empty() || sinks.is_empty() {
        return Ok(0.0);
    }
    Ok(solve_transport(&sources, &sinks))
}

/// EMD multiplied by a caller-chosen unit scale (e.g. to report original
/// pixel units instead of downsampled-cell units).
pub fn emd_with_scale(p: &Distribution, q: &Distribution, grid: u32, scale: f64) -> Result<f64> {
    Ok(emd(p, q, grid)? * scale)
}

/// Exact transportation simplex over positive-mass cells.
///
/// Northwest-corner start, spanning-tree duals, block pricing for the
/// entering arc. After a generous pivot budget the pricing rule degrades to
/// Bland's rule, which cannot cycle.
fn solve_transport(sources: &[(u32, u32, f64)], sinks: &[(u32, u32, f64)]) -> f64 {
    let m = sources.len();
    let n = sinks.len();

    if m == 1 {
        let s = (sources[0].0, sources[0].1);
        return sinks
            .iter()
            .map(|&(x, y, d)| d * cell_distance(s, (x, y)))
            .sum();
    }
    if n == 1 {
        let t = (sinks[0].0, sinks[0].1);
        return sources
            .iter()
            .map(|&(x, y, s)| s * cell_distance((x, y), t))
            .sum();
    }

    let mut cost = vec![0.0f64; m * n];
    for (i, &(sx, sy, _)) in sources.iter().enumerate() {
        for (j, &(tx, ty, _)) in sinks.iter().enumerate() {
            cost[i * n + j] = cell_distance((sx, sy), (tx, ty));
        }
    }

    // northwest-corner initial basis: exactly m + n - 1 arcs
    let mut supply: Vec<f64> = sources.iter().map(|c| c.2).collect();
    let mut demand: Vec<f64> = sinks.iter().map(|c| c.2).collect();
    let narcs = m + n - 1;
    let mut arc_i = Vec::with_capacity(narcs);
    let mut arc_j = Vec::with_capacity(narcs);
    let mut arc_flow = Vec::with_capacity(narcs);
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let a = supply[i].min(demand[j]).max(0.0);
        arc_i.push(i as u32);
        arc_j.push(j as u32);
        arc_flow.push(a);
        supply[i] -= a;
        demand[j] -= a;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 {
            i += 1;
        } else if supply[i] <= demand[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    debug_assert_eq!(arc_flow.len(), narcs);

    let nodes = m + n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    let mut u = vec![0.0f64; m];
    let mut v = vec![0.0f64; n];
    let mut queue: Vec<usize> = Vec::with_capacity(nodes);
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut seen = vec![false; nodes];

    let bland_after = 100 * nodes + 1_000;
    let hard_cap = 100 * bland_after;
    let mut cursor = 0usize;
    let total_arcs = m * n;
    let mut candidates: Vec<usize> = Vec::with_capacity(CAND_MAX);

    for pivots in 0..hard_cap {
        // rebuild tree adjacency and recompute duals from node 0 (u[0] = 0)
        for a in adj.iter_mut() {
            a.clear();
        }
        for a in 0..narcs {
            let si = arc_i[a] as usize;
            let tj = m + arc_j[a] as usize;
            adj[si].push((tj, a));
            adj[tj].push((si, a));
        }
        queue.clear();
        queue.push(0);
        seen.iter_mut().for_each(|s| *s = false);
        seen[0] = true;
        u[0] = 0.0;
        let mut head = 0;
        while head < queue.len() {
            let node = queue[head];
            head += 1;
            for &(next, a) in &adj[node] {
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                let c = cost[arc_i[a] as usize * n + arc_j[a] as usize];
                if next >= m {
                    v[next - m] = c - u[arc_i[a] as usize];
                } else {
                    u[next] = c - v[arc_j[a] as usize];
                }
                queue.push(next);
            }
        }

        // entering arc: candidate-list pricing (harvest a batch of
        // attractive arcs once, re-verify cheaply across pivots), then
        // Bland's rule if degenerate pivoting drags on
        let entering = if pivots < bland_after {
            // drop candidates gone stale under the updated duals
            candidates.retain(|&idx| cost[idx] - u[idx / n] - v[idx % n] < -RC_TOL);
            if candidates.is_empty() {
                let mut scanned = 0usize;
                while scanned < total_arcs && candidates.len() < CAND_MAX {
                    let block = PRICE_BLOCK.min(total_arcs - scanned);
                    for k in 0..block {
                        let idx = (cursor + k) % total_arcs;
                        if cost[idx] - u[idx / n] - v[idx % n] < -RC_TOL {
                            candidates.push(idx);
                        }
                    }
                    cursor = (cursor + block) % total_arcs;
                    scanned += block;
                    if !candidates.is_empty() && scanned >= PRICE_BLOCK * 4 {
                        break;
                    }
                }
            }
            candidates
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let ra = cost[a] - u[a / n] - v[a % n];
                    let rb = cost[b] - u[b / n] - v[b % n];
                    ra.partial_cmp(&rb).unwrap()
                })
                .inspect(|idx| candidates.retain(|c| c != idx))
        } else {
            (0..total_arcs).find(|&idx| cost[idx] - u[idx / n] - v[idx % n] < -RC_TOL)
        };
        let Some(enter_idx) = entering else {
            break;
        };
        let ei = enter_idx / n;
        let ej = enter_idx % n;

        // unique tree path from source ei to sink ej closes the cycle
        parent.iter_mut().for_each(|p| *p = None);
        queue.clear();
        queue.push(ei);
        let mut head = 0;
        let target = m + ej;
        while head < queue.len() {
            let node = queue[head];
            head += 1;
            if node == target {
                break;
            }
            for &(next, a) in &adj[node] {
                if next != ei && parent[next].is_none() {
                    parent[next] = Some((node, a));
                    queue.push(next);
                }
            }
        }

        // walk back from the sink; arcs alternate -, +, -, ... and the
        // entering arc itself takes +theta
        let mut minus_arcs: Vec<usize> = Vec::new();
        let mut plus_arcs: Vec<usize> = Vec::new();
        let mut node = target;
        let mut minus = true;
        while node != ei {
            let (prev, a) = parent[node].expect("basis tree is connected");
            if minus {
                minus_arcs.push(a);
            } else {
                plus_arcs.push(a);
            }
            minus = !minus;
            node = prev;
        }

        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for &a in &minus_arcs {
            if arc_flow[a] < theta || (arc_flow[a] == theta && a < leave) {
                theta = arc_flow[a];
                leave = a;
            }
        }
        debug_assert!(leave != usize::MAX);

        for &a in &plus_arcs {
            arc_flow[a] += theta;
        }
        for &a in &minus_arcs {
            arc_flow[a] = (arc_flow[a] - theta).max(0.0);
        }
        arc_i[leave] = ei as u32;
        arc_j[leave] = ej as u32;
        arc_flow[leave] = theta;
    }

    (0..narcs)
        .map(|a| arc_flow[a] * cost[arc_i[a] as usize * n + arc_j[a] as usize])
        .sum()
}
