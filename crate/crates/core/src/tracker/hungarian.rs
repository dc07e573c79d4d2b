//! Maximum-weight bipartite assignment with a similarity gate.
//!
//! The admissible pairs (similarity at or above the gate) split into connected
//! components that are solved independently. Each component is padded to a
//! square problem where every row and column may stay unmatched at zero cost,
//! solved with the shortest-augmenting-path Hungarian method, and then
//! canonicalized: among all optimal assignments the one whose row-to-column
//! vector is lexicographically smallest (unmatched ranking after every column)
//! is returned.

use crate::similarity::SimilarityMatrix;

/// Slack under which a reduced cost counts as tight.
pub const TIE_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    /// Matched `(row, col)` pairs sorted by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl Assignment {
    pub fn total(&self, sim: &SimilarityMatrix) -> f64 {
        self.matches.iter().map(|&(i, j)| sim.get(i, j)).sum()
    }

    pub fn col_of(&self, row: usize) -> Option<usize> {
        self.matches.iter().find(|m| m.0 == row).map(|m| m.1)
    }
}

fn allowed(sim: &SimilarityMatrix, i: usize, j: usize, gate: f64) -> bool {
    let v = sim.get(i, j);
    sim.is_admissible(i, j) && v.is_finite() && v >= gate && v > 0.0
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Optimal one-to-one assignment over pairs with `sim >= gate`, maximizing the
/// summed similarity. Ties resolve to the lexicographically smallest pairing.
pub fn hungarian_assign(sim: &SimilarityMatrix, gate: f64) -> Assignment {
    let (nr, nc) = (sim.rows(), sim.cols());
    let mut dsu = DisjointSet::new(nr + nc);
    let mut has_edge_row = vec![false; nr];
    let mut has_edge_col = vec![false; nc];
    for i in 0..nr {
        for j in 0..nc {
            if allowed(sim, i, j, gate) {
                dsu.union(i, nr + j);
                has_edge_row[i] = true;
                has_edge_col[j] = true;
            }
        }
    }

    // group rows/cols by component root, in ascending index order
    let mut comps: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for i in (0..nr).filter(|&i| has_edge_row[i]) {
        let r = dsu.find(i);
        comps.entry(r).or_default().0.push(i);
    }
    for j in (0..nc).filter(|&j| has_edge_col[j]) {
        let r = dsu.find(nr + j);
        comps.entry(r).or_default().1.push(j);
    }

    let mut row_match: Vec<Option<usize>> = vec![None; nr];
    for (rows, cols) in comps.values() {
        let w: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| allowed(sim, i, j, gate).then(|| sim.get(i, j))).collect())
            .collect();
        for (a, m) in solve_component(&w).into_iter().enumerate() {
            row_match[rows[a]] = m.map(|b| cols[b]);
        }
    }

    let mut out = Assignment::default();
    let mut col_used = vec![false; nc];
    for (i, m) in row_match.iter().enumerate() {
        match m {
            Some(j) => {
                out.matches.push((i, *j));
                col_used[*j] = true;
            }
            None => out.unmatched_rows.push(i),
        }
    }
    out.unmatched_cols = (0..nc).filter(|&j| !col_used[j]).collect();
    out
}

/// Solves one component; `w[i][j]` is `Some(weight > 0)` for allowed pairs.
fn solve_component(w: &[Vec<Option<f64>>]) -> Vec<Option<usize>> {
    let r = w.len();
    let c = w.first().map_or(0, Vec::len);
    if r == 1 {
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in w[0].iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
        }
        return vec![best.map(|b| b.0)];
    }
    if c == 1 {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in w.iter().enumerate() {
            if let Some(v) = row[0] {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        return (0..r).map(|i| (best.map(|b| b.0) == Some(i)).then_some(0)).collect();
    }

    // square padding: rows r.. and cols c.. are "unmatched" slots at cost 0
    let n = r + c;
    let cost = |i: usize, j: usize| -> f64 {
        if i < r && j < c {
            w[i][j].map_or(f64::INFINITY, |v| -v)
        } else {
            0.0
        }
    };
    let (u, v, mut mate_row) = hungarian_min(n, &cost);
    let tight = |i: usize, j: usize| {
        let cij = cost(i, j);
        cij.is_finite() && (cij - u[i] - v[j]).abs() <= TIE_TOLERANCE
    };

    let mut mate_col = vec![0usize; n];
    for (i, &j) in mate_row.iter().enumerate() {
        mate_col[j] = i;
    }

    let mut fixed = vec![false; n];
    for row in 0..r {
        let current = mate_row[row];
        let limit = if current < c { current } else { c };
        for j in 0..limit {
            if !tight(row, j) {
                continue;
            }
            let r2 = mate_col[j];
            if fixed[r2] {
                continue;
            }
            let mut visited = vec![false; n];
            visited[j] = true;
            fixed[row] = true;
            let found = reroute(r2, current, n, &tight, &fixed, &mut visited, &mut mate_row, &mut mate_col);
            fixed[row] = false;
            if found {
                mate_row[row] = j;
                mate_col[j] = row;
                break;
            }
        }
        fixed[row] = true;
    }

    (0..r).map(|i| (mate_row[i] < c).then_some(mate_row[i])).collect()
}

/// Finds an alternating path of tight edges from `row` to the freed column
/// `target`, moving only unfixed rows, and applies it.
#[allow(clippy::too_many_arguments)]
fn reroute(
    row: usize,
    target: usize,
    n: usize,
    tight: &dyn Fn(usize, usize) -> bool,
    fixed: &[bool],
    visited: &mut [bool],
    mate_row: &mut [usize],
    mate_col: &mut [usize],
) -> bool {
    for col in 0..n {
        if visited[col] || !tight(row, col) {
            continue;
        }
        visited[col] = true;
        let moved = if col == target {
            true
        } else {
            let next = mate_col[col];
            !fixed[next] && reroute(next, target, n, tight, fixed, visited, mate_row, mate_col)
        };
        if moved {
            mate_row[row] = col;
            mate_col[col] = row;
            return true;
        }
    }
    false
}

/// Square min-cost assignment (shortest augmenting paths with potentials).
/// Returns row potentials, column potentials and the row-to-column matching.
fn hungarian_min(n: usize, cost: &dyn Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    // 1-based internally; index 0 is the virtual root
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut mate_row = vec![0usize; n];
    for j in 1..=n {
        mate_row[p[j] - 1] = j - 1;
    }
    (u[1..].to_vec(), v[1..].to_vec(), mate_row)
}
