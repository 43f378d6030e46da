use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the simulation box treats its faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Opposite faces are identified; every point sees the same surroundings.
    Torus,
    /// Plain box with Euclidean distances; estimators keep an interior margin.
    EuclideanWindow,
}

/// The cube `[0, side)^dim` together with its boundary rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimDomain<T> {
    dim: usize,
    side: T,
    boundary: Boundary,
}

impl<T: Scalar> SimDomain<T> {
    pub fn new(dim: usize, side: T, boundary: Boundary) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension {
                dim,
                reason: "supported dimensions are 1, 2 and 3",
            });
        }
        if !(side > T::zero()) || !side.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "box side must be positive and finite, got {side}"
            )));
        }
        Ok(Self { dim, side, boundary })
    }

    pub fn torus(dim: usize, side: T) -> Result<Self> {
        Self::new(dim, side, Boundary::Torus)
    }

    pub fn window(dim: usize, side: T) -> Result<Self> {
        Self::new(dim, side, Boundary::EuclideanWindow)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn side(&self) -> T {
        self.side
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn is_torus(&self) -> bool {
        self.boundary == Boundary::Torus
    }

    pub fn volume(&self) -> T {
        self.side.powi(self.dim as i32)
    }

    /// Per-axis separation, taking the shorter way round on the torus.
    #[inline]
    pub fn axis_delta(&self, a: T, b: T) -> T {
        let diff = (a - b).abs();
        match self.boundary {
            Boundary::Torus => diff.min(self.side - diff),
            Boundary::EuclideanWindow => diff,
        }
    }

    #[inline]
    pub fn sq_distance(&self, a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), self.dim);
        debug_assert_eq!(b.len(), self.dim);
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let d = self.axis_delta(x, y);
                d * d
            })
            .fold(T::zero(), |acc, v| acc + v)
    }

    #[inline]
    pub fn distance(&self, a: &[T], b: &[T]) -> T {
        self.sq_distance(a, b).sqrt()
    }

    /// Maps a coordinate back into `[0, side)`.
    #[inline]
    pub fn wrap(&self, x: T) -> T {
        let mut y = x % self.side;
        if y < T::zero() {
            y = y + self.side;
        }
        if y >= self.side {
            y = y - self.side;
        }
        // `y + side` can round up to `side` itself
        if y >= self.side || y < T::zero() {
            T::zero()
        } else {
            y
        }
    }

    /// Distance from `p` to the nearest face of the box.
    pub fn distance_to_boundary(&self, p: &[T]) -> T {
        p.iter()
            .map(|&x| x.min(self.side - x))
            .fold(T::infinity(), T::min)
    }

    pub fn contains(&self, p: &[T]) -> bool {
        p.len() == self.dim && p.iter().all(|&x| x >= T::zero() && x < self.side)
    }
}

/// Finite point configuration stored as a flat coordinate array.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointSet<T> {
    pub fn empty(dim: usize) -> Self {
        Self { dim, coords: Vec::new() }
    }

    /// Builds a point set from a flat `len * dim` coordinate vector.
    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "coordinate count {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    /// Builds a point set from per-point positions, checking they lie in the domain.
    pub fn from_points<P: AsRef<[T]>>(domain: &SimDomain<T>, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * domain.dim());
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if !domain.contains(p) {
                return Err(Error::InvalidParameter(format!(
                    "point {i} ({p:?}) lies outside [0, {})^{}",
                    domain.side(),
                    domain.dim()
                )));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim: domain.dim(), coords })
    }

    /// Points on a line; convenient for one-dimensional examples.
    pub fn from_line(domain: &SimDomain<T>, xs: &[T]) -> Result<Self> {
        let pts: Vec<[T; 1]> = xs.iter().map(|&x| [x]).collect();
        Self::from_points(domain, &pts)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Shifts every point by `shift`, wrapping on the torus.
    pub fn translated(&self, domain: &SimDomain<T>, shift: &[T]) -> Self {
        assert_eq!(shift.len(), self.dim, "shift dimension mismatch");
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(k, &x)| domain.wrap(x + shift[k % self.dim]))
            .collect();
        Self { dim: self.dim, coords }
    }

    /// Keeps the points whose mask entry is set, in index order.
    pub fn select(&self, mask: &[bool]) -> Self {
        let coords = self
            .iter()
            .zip(mask)
            .filter(|(_, &keep)| keep)
            .flat_map(|(p, _)| p.iter().copied())
            .collect();
        Self { dim: self.dim, coords }
    }
}
