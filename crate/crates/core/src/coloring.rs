//! Random proper colourings under "must differ" constraints.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Items `0..items`, pairs that must receive different colours, and the
/// number of colours available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringConstraints {
    pub items: usize,
    pub edges: Vec<(usize, usize)>,
    pub colors: u32,
}

impl ColoringConstraints {
    pub fn new(items: usize, edges: Vec<(usize, usize)>, colors: u32) -> Self {
        Self { items, edges, colors }
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.items];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    pub fn is_proper(&self, colors: &[u32]) -> bool {
        colors.len() == self.items
            && colors.iter().all(|&c| (1..=self.colors).contains(&c))
            && self.edges.iter().all(|&(a, b)| colors[a] != colors[b])
    }
}

/// Randomised greedy colouring with colours `1..=k`.
///
/// Items are visited in a uniformly shuffled order; each takes a uniform
/// choice among the colours not already used by its coloured neighbours.
/// Requires every item to have at most `k - 1` constraints.
pub fn sample_constrained_coloring<R: Rng + ?Sized>(
    constraints: &ColoringConstraints,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let n = constraints.items;
    let k = constraints.colors as usize;
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &constraints.edges {
        if a >= n || b >= n || a == b {
            return Err(Error::PreconditionViolation(format!(
                "constraint ({a}, {b}) is not a pair of distinct items below {n}"
            )));
        }
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
    if n > 0 && max_degree >= k {
        return Err(Error::PreconditionViolation(format!(
            "constraint degree {max_degree} needs more than {k} colours"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut colors = vec![0u32; n];
    let mut used = vec![false; k + 1];
    let mut free = Vec::with_capacity(k);
    for &item in &order {
        for &nb in &adjacency[item] {
            used[colors[nb] as usize] = true;
        }
        free.clear();
        free.extend((1..=k as u32).filter(|&c| !used[c as usize]));
        colors[item] = free[rng.random_range(0..free.len())];
        for &nb in &adjacency[item] {
            used[colors[nb] as usize] = false;
        }
    }
    Ok(colors)
}
