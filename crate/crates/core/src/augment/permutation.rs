use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AugmentConfig, AugmentError, TILE_COUNT};

/// A bijection on the 16 tile positions of a 4×4 grid, built from `transpositions` swaps.
///
/// Output position `i` holds input tile `mapping[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TilePermutation {
    mapping: [u8; TILE_COUNT],
    transpositions: u32,
}

impl TilePermutation {
    pub fn identity() -> Self {
        let mut mapping = [0u8; TILE_COUNT];
        for (i, m) in mapping.iter_mut().enumerate() {
            *m = i as u8;
        }
        TilePermutation { mapping, transpositions: 0 }
    }

    /// Builds a permutation from an explicit mapping and the number of swaps that produced it.
    ///
    /// Rejects mappings that are not bijections or whose parity disagrees with
    /// `transpositions`.
    pub fn from_mapping(mapping: [u8; TILE_COUNT], transpositions: u32) -> Result<Self, AugmentError> {
        if !is_bijection(&mapping) {
            return Err(AugmentError::InvalidPermutation(format!(
                "mapping {mapping:?} is not a bijection on 0..{TILE_COUNT}"
            )));
        }
        let perm = TilePermutation { mapping, transpositions };
        if perm.is_even() != (transpositions % 2 == 0) {
            return Err(AugmentError::InvalidPermutation(format!(
                "parity of {mapping:?} is inconsistent with {transpositions} transpositions"
            )));
        }
        Ok(perm)
    }

    /// Composes a sequence of swaps onto the identity. Self-swaps are rejected.
    pub fn from_swaps(swaps: &[(usize, usize)]) -> Result<Self, AugmentError> {
        let mut perm = Self::identity();
        for &(a, b) in swaps {
            if a == b || a >= TILE_COUNT || b >= TILE_COUNT {
                return Err(AugmentError::InvalidPermutation(format!("invalid swap ({a}, {b})")));
            }
            perm.swap(a, b);
        }
        Ok(perm)
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.mapping.swap(a, b);
        self.transpositions += 1;
    }

    pub fn mapping(&self) -> &[u8; TILE_COUNT] {
        &self.mapping
    }

    pub fn transpositions(&self) -> u32 {
        self.transpositions
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m as usize)
    }

    /// The inverse arrangement. Built from the same swaps in reverse order, so the
    /// transposition count carries over.
    pub fn inverse(&self) -> Self {
        let mut mapping = [0u8; TILE_COUNT];
        for (i, &m) in self.mapping.iter().enumerate() {
            mapping[m as usize] = i as u8;
        }
        TilePermutation { mapping, transpositions: self.transpositions }
    }

    /// Cycles of length ≥ 2, each starting at its smallest position.
    pub fn cycles(&self) -> Vec<Vec<u8>> {
        cycle_decomposition(&self.mapping).into_iter().filter(|c| c.len() > 1).collect()
    }

    /// Parity from the cycle decomposition: a permutation of n points with c cycles
    /// (fixed points included) is even iff n − c is even.
    pub fn is_even(&self) -> bool {
        let cycles = cycle_decomposition(&self.mapping).len();
        (TILE_COUNT - cycles) % 2 == 0
    }

    /// Sign of the permutation, +1 or −1.
    pub fn sign(&self) -> i8 {
        if self.is_even() {
            1
        } else {
            -1
        }
    }

    /// Packs the mapping into 64 bits (4 bits per position); equal signatures mean equal mappings.
    pub fn signature(&self) -> u64 {
        self.mapping.iter().enumerate().fold(0u64, |acc, (i, &m)| acc | (u64::from(m) << (4 * i)))
    }
}

impl Default for TilePermutation {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Display for TilePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (k={})", self.mapping, self.transpositions)
    }
}

fn is_bijection(mapping: &[u8]) -> bool {
    let mut seen = vec![false; mapping.len()];
    for &m in mapping {
        let m = m as usize;
        if m >= mapping.len() || seen[m] {
            return false;
        }
        seen[m] = true;
    }
    true
}

/// All cycles of `mapping`, fixed points included.
pub fn cycle_decomposition(mapping: &[u8]) -> Vec<Vec<u8>> {
    let mut visited = vec![false; mapping.len()];
    let mut cycles = Vec::new();
    for start in 0..mapping.len() {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            cycle.push(i as u8);
            i = mapping[i] as usize;
        }
        cycles.push(cycle);
    }
    cycles
}

/// Draws k uniformly from `[min_swaps, max_swaps]` and composes k swaps of two
/// distinct, uniformly chosen positions onto the identity.
pub fn sample_permutation<R: Rng + ?Sized>(rng: &mut R, config: &AugmentConfig) -> TilePermutation {
    let k = rng.random_range(config.min_swaps..=config.max_swaps);
    let mut perm = TilePermutation::identity();
    for _ in 0..k {
        let a = rng.random_range(0..TILE_COUNT);
        let mut b = rng.random_range(0..TILE_COUNT - 1);
        if b >= a {
            b += 1;
        }
        perm.swap(a, b);
    }
    perm
}

/// 16!: the size of the full permutation space of a 4×4 grid.
///
/// This is the space of arrangements, not what [`sample_permutation`] can reach:
/// a product of k swaps has sign (−1)^k and needs at least (16 − cycles) swaps,
/// so a 16-cycle (15 swaps) is never produced with `max_swaps = 12`.
/// [`count_reachable_exact`] gives true reachable counts for small grids.
pub fn count_reachable(grid_side: u32) -> Result<u64, AugmentError> {
    if grid_side != super::GRID_SIDE {
        return Err(AugmentError::UnsupportedGrid(grid_side));
    }
    Ok((1..=TILE_COUNT as u64).product())
}

/// Number of distinct permutations of `tiles` points that are products of exactly k
/// transpositions for some k in `swaps`. Exhaustive layer-by-layer search, so only
/// feasible for small `tiles` (at most 8).
pub fn count_reachable_exact(tiles: usize, swaps: std::ops::RangeInclusive<u32>) -> Result<usize, AugmentError> {
    if !(2..=8).contains(&tiles) {
        return Err(AugmentError::InvalidConfig(format!(
            "exact reachability is limited to 2..=8 tiles, got {tiles}"
        )));
    }
    let identity: Vec<u8> = (0..tiles as u8).collect();
    let mut layer: HashSet<Vec<u8>> = HashSet::from([identity]);
    let mut reachable: HashSet<Vec<u8>> = HashSet::new();
    for k in 0..=*swaps.end() {
        if k >= *swaps.start() {
            reachable.extend(layer.iter().cloned());
        }
        if k == *swaps.end() {
            break;
        }
        let mut next = HashSet::with_capacity(layer.len() * 2);
        for perm in &layer {
            for a in 0..tiles {
                for b in (a + 1)..tiles {
                    let mut p = perm.clone();
                    p.swap(a, b);
                    next.insert(p);
                }
            }
        }
        layer = next;
    }
    Ok(reachable.len())
}
