//! Uniform cell grid over the simulation box.
//!
//! Queries expand Chebyshev rings of cells around the query cell. After ring
//! `s` has been scanned every unvisited point is at least `s * cell_side`
//! away, which is what lets nearest and ranked queries stop early.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::geometry::domain::{PointSet, SimDomain};
use crate::scalar::Scalar;

const TARGET_OCCUPANCY: f64 = 2.0;
const ABSENT: usize = usize::MAX;

/// A point index together with its squared distance to a query position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub index: usize,
    pub sq_distance: T,
}

impl<T: Scalar> Neighbor<T> {
    pub fn distance(&self) -> T {
        self.sq_distance.sqrt()
    }

    /// Ordering by `(distance, index)`; the tie rule used everywhere.
    #[inline]
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        self.sq_distance
            .partial_cmp(&other.sq_distance)
            .unwrap_or(Ordering::Equal)
            .then(self.index.cmp(&other.index))
    }
}

#[derive(Debug, Clone, Copy)]
struct Ranked<T>(Neighbor<T>);

impl<T: Scalar> PartialEq for Ranked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Ranked<T> {}
impl<T: Scalar> PartialOrd for Ranked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Ranked<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

/// Spatial hash of a subset of a [`PointSet`], supporting removal.
#[derive(Debug, Clone)]
pub struct GridIndex<'a, T> {
    domain: SimDomain<T>,
    points: &'a PointSet<T>,
    per_axis: usize,
    cell_side: T,
    slack: T,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    slot_of: Vec<usize>,
    len: usize,
}

impl<'a, T: Scalar> GridIndex<'a, T> {
    /// Indexes the points selected by `mask` (all points when `None`), with a
    /// cell side close to the typical nearest-neighbour spacing.
    pub fn new(domain: &SimDomain<T>, points: &'a PointSet<T>, mask: Option<&[bool]>) -> Self {
        let count = match mask {
            Some(m) => m.iter().filter(|&&b| b).count(),
            None => points.len(),
        };
        let per_axis = Self::default_cells_per_axis(domain.dim(), count);
        Self::with_cells_per_axis(domain, points, mask, per_axis)
    }

    fn default_cells_per_axis(dim: usize, count: usize) -> usize {
        let cells = (count as f64 / TARGET_OCCUPANCY).max(1.0);
        let per_axis = cells.powf(1.0 / dim as f64).floor() as usize;
        per_axis.clamp(1, 1 << 20)
    }

    pub fn with_cells_per_axis(
        domain: &SimDomain<T>,
        points: &'a PointSet<T>,
        mask: Option<&[bool]>,
        per_axis: usize,
    ) -> Self {
        assert_eq!(points.dim(), domain.dim(), "point dimension mismatch");
        if let Some(m) = mask {
            assert_eq!(m.len(), points.len(), "mask length mismatch");
        }
        let per_axis = per_axis.max(1);
        let num_cells = per_axis.pow(domain.dim() as u32);
        let cell_side = domain.side() / T::lit(per_axis as f64);
        let slack = T::epsilon() * domain.side() * T::lit(8.0);
        let mut grid = Self {
            domain: *domain,
            points,
            per_axis,
            cell_side,
            slack,
            cells: vec![Vec::new(); num_cells],
            cell_of: vec![ABSENT; points.len()],
            slot_of: vec![ABSENT; points.len()],
            len: 0,
        };
        for i in 0..points.len() {
            if mask.is_none_or(|m| m[i]) {
                grid.insert(i);
            }
        }
        grid
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn points(&self) -> &'a PointSet<T> {
        self.points
    }

    pub fn domain(&self) -> &SimDomain<T> {
        &self.domain
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        self.cell_of[index] != ABSENT
    }

    /// Indexed point ids in unspecified order.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().flatten().copied()
    }

    fn insert(&mut self, index: usize) {
        if self.contains(index) {
            return;
        }
        let cell = self.cell_id(&self.cell_coords(self.points.point(index)));
        self.cell_of[index] = cell;
        self.slot_of[index] = self.cells[cell].len();
        self.cells[cell].push(index);
        self.len += 1;
    }

    /// Removes a point from the index; returns whether it was present.
    pub fn remove(&mut self, index: usize) -> bool {
        let cell = self.cell_of[index];
        if cell == ABSENT {
            return false;
        }
        let slot = self.slot_of[index];
        let bucket = &mut self.cells[cell];
        bucket.swap_remove(slot);
        if let Some(&moved) = bucket.get(slot) {
            self.slot_of[moved] = slot;
        }
        self.cell_of[index] = ABSENT;
        self.slot_of[index] = ABSENT;
        self.len -= 1;
        true
    }

    #[inline]
    fn axis_cell(&self, x: T) -> usize {
        let c = (x / self.cell_side).floor().to_usize().unwrap_or(0);
        c.min(self.per_axis - 1)
    }

    #[inline]
    fn cell_coords(&self, p: &[T]) -> [usize; 3] {
        let mut c = [0usize; 3];
        for (slot, &x) in c.iter_mut().zip(p) {
            *slot = self.axis_cell(x);
        }
        c
    }

    #[inline]
    fn cell_id(&self, c: &[usize; 3]) -> usize {
        let n = self.per_axis;
        c[0] + n * (c[1] + n * c[2])
    }

    /// Offsets along one axis that ring `s` may use around cell coordinate `c`.
    fn axis_range(&self, c: usize, s: usize) -> (isize, isize) {
        let n = self.per_axis;
        let s = s as isize;
        if self.domain.is_torus() {
            // Each wrapped cell appears once, at its minimal-image offset.
            let neg = ((n - 1) / 2) as isize;
            let pos = (n / 2) as isize;
            (-(s.min(neg)), s.min(pos))
        } else {
            (-(s.min(c as isize)), s.min((n - 1 - c) as isize))
        }
    }

    fn ring_reachable(&self, center: &[usize; 3], s: usize) -> bool {
        let n = self.per_axis;
        if self.domain.is_torus() {
            s <= n / 2
        } else {
            (0..self.domain.dim()).any(|a| s <= center[a].max(n - 1 - center[a]))
        }
    }

    /// Calls `visit` for every cell whose ring distance from `center` is exactly `s`.
    /// Returns false once the ring lies entirely outside the grid.
    fn visit_ring(&self, center: &[usize; 3], s: usize, visit: &mut impl FnMut(usize)) -> bool {
        if !self.ring_reachable(center, s) {
            return false;
        }
        let mut offset = [0isize; 3];
        self.visit_ring_axis(center, s, 0, false, &mut offset, visit);
        true
    }

    fn visit_ring_axis(
        &self,
        center: &[usize; 3],
        s: usize,
        axis: usize,
        on_surface: bool,
        offset: &mut [isize; 3],
        visit: &mut impl FnMut(usize),
    ) {
        let dim = self.domain.dim();
        let (lo, hi) = self.axis_range(center[axis], s);
        let si = s as isize;
        if axis + 1 == dim {
            let mut emit = |v: isize, offset: &mut [isize; 3]| {
                offset[axis] = v;
                visit(self.offset_cell(center, offset));
            };
            if on_surface {
                for v in lo..=hi {
                    emit(v, offset);
                }
            } else {
                if lo == -si {
                    emit(lo, offset);
                }
                if hi == si && hi != lo {
                    emit(hi, offset);
                }
            }
            return;
        }
        for v in lo..=hi {
            offset[axis] = v;
            self.visit_ring_axis(center, s, axis + 1, on_surface || v.abs() == si, offset, visit);
        }
    }

    #[inline]
    fn offset_cell(&self, center: &[usize; 3], offset: &[isize; 3]) -> usize {
        let n = self.per_axis as isize;
        let mut c = [0usize; 3];
        for a in 0..self.domain.dim() {
            c[a] = (center[a] as isize + offset[a]).rem_euclid(n) as usize;
        }
        self.cell_id(&c)
    }

    /// Lower bound on the distance to any point outside rings `0..=s`.
    #[inline]
    fn ring_bound(&self, s: usize) -> T {
        (T::lit(s as f64) * self.cell_side - self.slack).max(T::zero())
    }

    /// Nearest indexed point to `center`, skipping `exclude`.
    pub fn nearest(&self, center: &[T], exclude: Option<usize>) -> Option<Neighbor<T>> {
        let cc = self.cell_coords(center);
        let mut best: Option<Neighbor<T>> = None;
        let mut s = 0;
        loop {
            let reachable = self.visit_ring(&cc, s, &mut |cell| {
                for &j in &self.cells[cell] {
                    if Some(j) == exclude {
                        continue;
                    }
                    let cand = Neighbor {
                        index: j,
                        sq_distance: self.domain.sq_distance(center, self.points.point(j)),
                    };
                    if best.is_none_or(|b| cand.rank_cmp(&b) == Ordering::Less) {
                        best = Some(cand);
                    }
                }
            });
            if !reachable {
                return best;
            }
            if let Some(b) = best {
                let bound = self.ring_bound(s);
                if b.sq_distance < bound * bound {
                    return best;
                }
            }
            s += 1;
        }
    }

    /// Indexed points in non-decreasing `(distance, index)` order, produced lazily.
    pub fn neighbors<'g>(&'g self, center: &[T], exclude: Option<usize>) -> NeighborIter<'g, 'a, T> {
        NeighborIter {
            grid: self,
            search: RingSearch::new(self, center, exclude),
        }
    }

    /// Number of indexed points within distance `r` (inclusive) of `center`.
    pub fn count_within(&self, center: &[T], r: T, exclude: Option<usize>) -> usize {
        let cc = self.cell_coords(center);
        let mut count = 0;
        let mut s = 0;
        // ring s holds points at distance >= (s - 1) * cell_side
        while s == 0 || self.ring_bound(s - 1) <= r {
            let reachable = self.visit_ring(&cc, s, &mut |cell| {
                for &j in &self.cells[cell] {
                    if Some(j) != exclude
                        && self.domain.distance(center, self.points.point(j)) <= r
                    {
                        count += 1;
                    }
                }
            });
            if !reachable {
                break;
            }
            s += 1;
        }
        count
    }
}

/// Resumable ring-expansion state for ranked neighbour enumeration.
#[derive(Debug, Clone)]
pub struct RingSearch<T> {
    center: Vec<T>,
    center_cell: [usize; 3],
    exclude: Option<usize>,
    heap: BinaryHeap<Reverse<Ranked<T>>>,
    next_ring: usize,
    exhausted: bool,
}

impl<T: Scalar> RingSearch<T> {
    pub fn new(grid: &GridIndex<'_, T>, center: &[T], exclude: Option<usize>) -> Self {
        Self {
            center: center.to_vec(),
            center_cell: grid.cell_coords(center),
            exclude,
            heap: BinaryHeap::new(),
            next_ring: 0,
            exhausted: false,
        }
    }

    /// Next neighbour in rank order. `grid` must be the index this search was created for
    /// and must not have been modified since.
    pub fn next_in(&mut self, grid: &GridIndex<'_, T>) -> Option<Neighbor<T>> {
        loop {
            if let Some(Reverse(Ranked(top))) = self.heap.peek() {
                let settled = self.exhausted || {
                    let scanned = self.next_ring.checked_sub(1);
                    scanned.is_some_and(|s| {
                        let b = grid.ring_bound(s);
                        top.sq_distance < b * b
                    })
                };
                if settled {
                    return self.heap.pop().map(|Reverse(Ranked(n))| n);
                }
            } else if self.exhausted {
                return None;
            }
            let s = self.next_ring;
            let (center, exclude, heap) = (&self.center, self.exclude, &mut self.heap);
            let reachable = grid.visit_ring(&self.center_cell, s, &mut |cell| {
                for &j in &grid.cells[cell] {
                    if Some(j) != exclude {
                        let d2 = grid.domain.sq_distance(center, grid.points.point(j));
                        heap.push(Reverse(Ranked(Neighbor { index: j, sq_distance: d2 })));
                    }
                }
            });
            if reachable {
                self.next_ring += 1;
            } else {
                self.exhausted = true;
            }
        }
    }
}

/// Borrowing iterator over ranked neighbours; see [`GridIndex::neighbors`].
pub struct NeighborIter<'g, 'a, T> {
    grid: &'g GridIndex<'a, T>,
    search: RingSearch<T>,
}

impl<T: Scalar> Iterator for NeighborIter<'_, '_, T> {
    type Item = Neighbor<T>;

    fn next(&mut self) -> Option<Self::Item> {
        self.search.next_in(self.grid)
    }
}

/// Owning ranked-neighbour sequence around one point of a set.
pub struct RankedNeighbors<'a, T> {
    grid: GridIndex<'a, T>,
    search: RingSearch<T>,
}

impl<'a, T: Scalar> RankedNeighbors<'a, T> {
    pub(crate) fn new(grid: GridIndex<'a, T>, query: usize) -> Self {
        let center = grid.points.point(query).to_vec();
        let search = RingSearch::new(&grid, &center, Some(query));
        Self { grid, search }
    }
}

impl<T: Scalar> Iterator for RankedNeighbors<'_, T> {
    type Item = Neighbor<T>;

    fn next(&mut self) -> Option<Self::Item> {
        self.search.next_in(&self.grid)
    }
}
