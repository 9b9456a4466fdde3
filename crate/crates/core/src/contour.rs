//! Marching-squares zero contours of a sampled scalar field.
//!
//! The field lives on an `nx × ny` lattice stored with `x` as the outer
//! index (`values[i * ny + j]`). Non-finite samples mask every cell that
//! touches them. Contours are returned as ordered vertex chains in
//! fractional index coordinates; the caller maps them to physical axes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// `(i, j)`–`(i+1, j)`.
    Horizontal(usize, usize),
    /// `(i, j)`–`(i, j+1)`.
    Vertical(usize, usize),
}

struct Lattice<'a> {
    values: &'a [f64],
    ny: usize,
}

impl Lattice<'_> {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    fn crossing(&self, edge: Edge) -> (f64, f64) {
        let (a, b, i, j) = match edge {
            Edge::Horizontal(i, j) => (self.at(i, j), self.at(i + 1, j), i, j),
            Edge::Vertical(i, j) => (self.at(i, j), self.at(i, j + 1), i, j),
        };
        let t = if a == b { 0.5 } else { a / (a - b) };
        match edge {
            Edge::Horizontal(..) => (i as f64 + t, j as f64),
            Edge::Vertical(..) => (i as f64, j as f64 + t),
        }
    }
}

fn inside(v: f64) -> bool {
    v >= 0.0
}

/// Zero contours of `values`, each an ordered list of `(x, y)` vertices in
/// index units. Closed loops repeat their first vertex at the end.
pub fn zero_contours(values: &[f64], nx: usize, ny: usize) -> Vec<Vec<(f64, f64)>> {
    assert_eq!(values.len(), nx * ny, "field size does not match the lattice");
    let lattice = Lattice { values, ny };
    let mut segments: Vec<[Edge; 2]> = Vec::new();

    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            let a = lattice.at(i, j);
            let b = lattice.at(i + 1, j);
            let c = lattice.at(i + 1, j + 1);
            let d = lattice.at(i, j + 1);
            if ![a, b, c, d].iter().all(|v| v.is_finite()) {
                continue;
            }
            let bottom = Edge::Horizontal(i, j);
            let right = Edge::Vertical(i + 1, j);
            let top = Edge::Horizontal(i, j + 1);
            let left = Edge::Vertical(i, j);
            let case = (inside(a) as u8) | (inside(b) as u8) << 1 | (inside(c) as u8) << 2 | (inside(d) as u8) << 3;
            let center_inside = inside(0.25 * (a + b + c + d));
            match case {
                0 | 15 => {}
                5 => {
                    if center_inside {
                        segments.push([bottom, right]);
                        segments.push([top, left]);
                    } else {
                        segments.push([bottom, left]);
                        segments.push([right, top]);
                    }
                }
                10 => {
                    if center_inside {
                        segments.push([bottom, left]);
                        segments.push([right, top]);
                    } else {
                        segments.push([bottom, right]);
                        segments.push([top, left]);
                    }
                }
                _ => {
                    let mut crossed = [bottom; 2];
                    let mut n = 0;
                    for (edge, p, q) in [(bottom, a, b), (right, b, c), (top, d, c), (left, a, d)] {
                        if inside(p) != inside(q) {
                            crossed[n] = edge;
                            n += 1;
                        }
                    }
                    debug_assert_eq!(n, 2);
                    segments.push(crossed);
                }
            }
        }
    }

    link(&lattice, &segments)
}

fn link(lattice: &Lattice<'_>, segments: &[[Edge; 2]]) -> Vec<Vec<(f64, f64)>> {
    let mut adjacency: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, seg) in segments.iter().enumerate() {
        for e in seg {
            adjacency.entry(*e).or_default().push(k);
        }
    }
    let mut used = alloc::vec![false; segments.len()];
    let mut chains = Vec::new();

    let open_ends: Vec<(Edge, usize)> = adjacency
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(e, segs)| (*e, segs[0]))
        .collect();
    for (start, seg) in open_ends {
        if !used[seg] {
            chains.push(walk(lattice, segments, &adjacency, &mut used, start, seg));
        }
    }
    for seg in 0..segments.len() {
        if !used[seg] {
            let start = segments[seg][0];
            chains.push(walk(lattice, segments, &adjacency, &mut used, start, seg));
        }
    }
    chains
}

fn walk(
    lattice: &Lattice<'_>,
    segments: &[[Edge; 2]],
    adjacency: &BTreeMap<Edge, Vec<usize>>,
    used: &mut [bool],
    start: Edge,
    first: usize,
) -> Vec<(f64, f64)> {
    let mut chain = alloc::vec![lattice.crossing(start)];
    let mut at = start;
    let mut seg = first;
    loop {
        used[seg] = true;
        let [p, q] = segments[seg];
        let next = if p == at { q } else { p };
        chain.push(lattice.crossing(next));
        at = next;
        match adjacency[&at].iter().copied().find(|&s| !used[s]) {
            Some(s) => seg = s,
            None => break,
        }
    }
    chain
}
