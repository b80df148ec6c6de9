use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::problem::GridGeometry;

/// Non-overlapping cores plus overlapping extensions of a structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub core_cells: Vec<Vec<usize>>,
    pub extended_cells: Vec<Vec<usize>>,
    pub overlap: usize,
    pub n_cells: usize,
}

impl Partition {
    pub fn n_subdomains(&self) -> usize {
        self.core_cells.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct Box3 {
    lo: [usize; 3],
    hi: [usize; 3],
}

/// Recursive coordinate bisection of a `cells_per_axis^dimension` grid into
/// `n_subdomains` boxes, each extended by `overlap` layers of face neighbors.
///
/// Each split halves the longest axis of a box (lowest axis on ties), so
/// `n_subdomains` has to be a power of two that the grid can be bisected into.
pub fn partition_cells(
    cells_per_axis: usize,
    dimension: usize,
    n_subdomains: usize,
    overlap: usize,
) -> Result<Partition> {
    if !(1..=3).contains(&dimension) || cells_per_axis == 0 {
        return Err(Error::InvalidInput(format!(
            "cannot partition a {dimension}-dimensional grid with {cells_per_axis} cells per axis"
        )));
    }
    let geo = GridGeometry::new(dimension, cells_per_axis, 1.0);
    let n_cells = geo.n_cells();
    let achievable = achievable_count(cells_per_axis, dimension, n_subdomains);
    if n_subdomains == 0 || achievable != n_subdomains {
        return Err(Error::InvalidInput(format!(
            "{n_subdomains} subdomains cannot be reached by bisecting a {cells_per_axis}^{dimension} grid; \
             nearest achievable count is {achievable}"
        )));
    }

    let mut root = Box3 {
        lo: [0; 3],
        hi: [1; 3],
    };
    for axis in 0..dimension {
        root.hi[axis] = cells_per_axis;
    }
    let mut boxes = Vec::with_capacity(n_subdomains);
    bisect(root, n_subdomains, dimension, &mut boxes);

    let core_cells: Vec<Vec<usize>> = boxes.iter().map(|b| box_cells(b, &geo)).collect();
    let extended_cells = core_cells
        .iter()
        .map(|core| grow(core, &geo, overlap))
        .collect();
    Ok(Partition {
        core_cells,
        extended_cells,
        overlap,
        n_cells,
    })
}

/// Largest count `<= requested` reachable by repeated halving.
fn achievable_count(cells_per_axis: usize, dimension: usize, requested: usize) -> usize {
    let mut lens = vec![cells_per_axis; dimension];
    let mut parts = 1;
    // every box at a given depth has the same shape up to one cell; track the smallest
    while parts * 2 <= requested.max(1) {
        let (axis, &len) = lens
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        if len < 2 {
            break;
        }
        lens[axis] = len / 2;
        parts *= 2;
    }
    parts
}

fn bisect(b: Box3, parts: usize, dimension: usize, out: &mut Vec<Box3>) {
    if parts == 1 {
        out.push(b);
        return;
    }
    let mut axis = 0;
    for k in 1..dimension {
        if b.hi[k] - b.lo[k] > b.hi[axis] - b.lo[axis] {
            axis = k;
        }
    }
    let mid = b.lo[axis] + (b.hi[axis] - b.lo[axis]) / 2;
    let mut left = b;
    let mut right = b;
    left.hi[axis] = mid;
    right.lo[axis] = mid;
    bisect(left, parts / 2, dimension, out);
    bisect(right, parts / 2, dimension, out);
}

fn box_cells(b: &Box3, geo: &GridGeometry) -> Vec<usize> {
    let mut cells = Vec::new();
    for k in b.lo[2]..b.hi[2] {
        for j in b.lo[1]..b.hi[1] {
            for i in b.lo[0]..b.hi[0] {
                cells.push(geo.index(&[i, j, k][..geo.dimension]));
            }
        }
    }
    cells.sort_unstable();
    cells
}

fn grow(core: &[usize], geo: &GridGeometry, layers: usize) -> Vec<usize> {
    let mut set: BTreeSet<usize> = core.iter().copied().collect();
    let mut frontier: Vec<usize> = core.to_vec();
    for _ in 0..layers {
        let mut next = Vec::new();
        for &c in &frontier {
            for nb in geo.neighbors(c) {
                if set.insert(nb) {
                    next.push(nb);
                }
            }
        }
        frontier = next;
    }
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_bisection() {
        let p = partition_cells(8, 1, 2, 1).unwrap();
        assert_eq!(p.core_cells, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        assert_eq!(
            p.extended_cells,
            vec![vec![0, 1, 2, 3, 4], vec![3, 4, 5, 6, 7]]
        );
    }

    #[test]
    fn single_subdomain_ignores_overlap() {
        let p = partition_cells(4, 2, 1, 3).unwrap();
        assert_eq!(p.core_cells[0], (0..16).collect::<Vec<_>>());
        assert_eq!(p.extended_cells, p.core_cells);
    }

    #[test]
    fn unreachable_count_names_achievable() {
        match partition_cells(8, 2, 3, 1) {
            Err(Error::InvalidInput(msg)) => assert!(msg.contains("achievable count is 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        match partition_cells(2, 1, 4, 0) {
            Err(Error::InvalidInput(msg)) => assert!(msg.contains("achievable count is 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cores_cover_exactly_once() {
        let p = partition_cells(8, 3, 8, 2).unwrap();
        let mut seen = vec![0; p.n_cells];
        for core in &p.core_cells {
            assert_eq!(core.len(), 64);
            for &c in core {
                seen[c] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }
}
