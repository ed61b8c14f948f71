//! Progressive edge growth.
//!
//! Edges are placed one bit at a time.  Each new edge goes to a check that
//! is as far as possible from the bit in the current graph (unreachable
//! beats any finite distance), which greedily maximizes girth.  Distance
//! ties are broken toward the lowest-degree check, then uniformly at random
//! from the seeded generator, so a seed pins the whole graph.
//!
//! Check degrees are capped at ceil(edges/checks).  With the cap, a regular
//! profile that divides evenly comes out exactly regular; irregular profiles
//! may relax the cap by one when the graph gets tight near the end.

use rand::Rng;

use super::LdpcError;
use crate::rng;

pub(super) fn build(
    n_bits: usize,
    n_checks: usize,
    bit_degrees: &[usize],
    strict_cap: bool,
    seed: u64,
) -> Result<Vec<Vec<u32>>, LdpcError> {
    let total_edges: usize = bit_degrees.iter().sum();
    let cap = total_edges.div_ceil(n_checks);
    if bit_degrees.iter().any(|&d| d > n_checks) {
        return Err(LdpcError::InvalidParameters(format!(
            "bit degree exceeds {n_checks} checks"
        )));
    }

    let mut grow = Growth {
        bit_adj: vec![Vec::new(); n_bits],
        check_adj: vec![Vec::new(); n_checks],
        check_degree: vec![0u32; n_checks],
        check_dist: vec![-1i64; n_checks],
        bit_seen: vec![false; n_bits],
        check_seen: vec![false; n_checks],
        bit_frontier: Vec::new(),
        check_frontier: Vec::new(),
        rng: rng::stream(seed),
    };

    // Low-degree bits first: they have the least placement freedom later.
    let mut order: Vec<usize> = (0..n_bits).collect();
    order.sort_by_key(|&b| (bit_degrees[b], b));

    for &bit in &order {
        for _ in 0..bit_degrees[bit] {
            let check = match grow.place(bit, cap) {
                Some(c) => c,
                None if !strict_cap => grow
                    .place(bit, cap + 1)
                    .ok_or(LdpcError::ConstructionFailed { bit })?,
                None => return Err(LdpcError::ConstructionFailed { bit }),
            };
            grow.bit_adj[bit].push(check as u32);
            grow.check_adj[check].push(bit as u32);
            grow.check_degree[check] += 1;
        }
    }
    Ok(grow.bit_adj)
}

struct Growth {
    bit_adj: Vec<Vec<u32>>,
    check_adj: Vec<Vec<u32>>,
    check_degree: Vec<u32>,
    check_dist: Vec<i64>,
    bit_seen: Vec<bool>,
    check_seen: Vec<bool>,
    bit_frontier: Vec<usize>,
    check_frontier: Vec<usize>,
    rng: rand_chacha::ChaCha8Rng,
}

impl Growth {
    /// Pick the check for the next edge of `bit`, or None if every
    /// non-adjacent check is at the degree cap.
    fn place(&mut self, bit: usize, cap: usize) -> Option<usize> {
        if !self.bit_adj[bit].is_empty() {
            self.bfs_distances(bit);
        } else {
            // Isolated bit: everything is unreachable.
            self.check_dist.fill(-1);
        }

        // Best = (unreached, then max distance), then min degree.
        let mut best_dist = i64::MIN;
        let mut best_degree = u32::MAX;
        let mut ties: Vec<usize> = Vec::new();
        for c in 0..self.check_adj.len() {
            if self.check_degree[c] as usize >= cap {
                continue;
            }
            if self.bit_adj[bit].iter().any(|&a| a as usize == c) {
                continue;
            }
            // Unreached sorts above every finite distance.
            let dist = if self.check_dist[c] < 0 {
                i64::MAX
            } else {
                self.check_dist[c]
            };
            let degree = self.check_degree[c];
            if dist > best_dist || (dist == best_dist && degree < best_degree) {
                best_dist = dist;
                best_degree = degree;
                ties.clear();
                ties.push(c);
            } else if dist == best_dist && degree == best_degree {
                ties.push(c);
            }
        }
        if ties.is_empty() {
            return None;
        }
        Some(ties[self.rng.gen_range(0..ties.len())])
    }

    /// Breadth-first distances (in edges) from `bit` to every check over
    /// the current graph.  Unreached checks keep distance -1.
    fn bfs_distances(&mut self, bit: usize) {
        self.check_dist.fill(-1);
        self.bit_seen.fill(false);
        self.check_seen.fill(false);
        self.bit_frontier.clear();

        self.bit_seen[bit] = true;
        self.bit_frontier.push(bit);
        let mut depth = 0i64;
        while !self.bit_frontier.is_empty() {
            self.check_frontier.clear();
            for &b in &self.bit_frontier {
                for &c in &self.bit_adj[b] {
                    let c = c as usize;
                    if !self.check_seen[c] {
                        self.check_seen[c] = true;
                        self.check_dist[c] = depth + 1;
                        self.check_frontier.push(c);
                    }
                }
            }
            self.bit_frontier.clear();
            for i in 0..self.check_frontier.len() {
                let c = self.check_frontier[i];
                for j in 0..self.check_adj[c].len() {
                    let nb = self.check_adj[c][j] as usize;
                    if !self.bit_seen[nb] {
                        self.bit_seen[nb] = true;
                        self.bit_frontier.push(nb);
                    }
                }
            }
            depth += 2;
        }
    }
}
