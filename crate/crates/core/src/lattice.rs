//! Dyadic boxes and lattice sites.
//!
//! Sites of `V_N` are ordered lexicographically by `(x, y)`; this is the
//! row-major order used for fields, dumps and CSV exports. Interior sites use
//! the same order restricted to `1..N` in both coordinates.

use crate::error::{Error, Result};

/// Largest supported level exponent. `N = 2^15` already needs 8 GiB per field.
pub const MAX_LEVEL: u32 = 15;

/// The box `V_N` with `N = 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxSpec {
    level: u32,
}

impl BoxSpec {
    pub fn new(level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::InvalidBox(format!(
                "level {level} exceeds the supported maximum {MAX_LEVEL}"
            )));
        }
        Ok(Self { level })
    }

    /// Box with side `side`, which must be a power of two.
    pub fn from_side(side: usize) -> Result<Self> {
        if side == 0 || !side.is_power_of_two() {
            return Err(Error::InvalidBox(format!(
                "side {side} is not a power of two"
            )));
        }
        Self::new(side.trailing_zeros())
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Side length `N`.
    pub fn side(&self) -> usize {
        1 << self.level
    }

    /// Number of interior sites per row, `N - 1`.
    pub fn interior_side(&self) -> usize {
        self.side() - 1
    }

    pub fn interior_count(&self) -> usize {
        self.interior_side() * self.interior_side()
    }

    /// Number of sites of `V_N`, `(N + 1)²`.
    pub fn site_count(&self) -> usize {
        (self.side() + 1) * (self.side() + 1)
    }

    /// The box one level down, `V_{N/2}`.
    pub fn half(&self) -> Result<Self> {
        if self.level == 0 {
            return Err(Error::InvalidBox("V_1 has no half box".into()));
        }
        Self::new(self.level - 1)
    }

    pub fn contains(&self, s: Site) -> bool {
        s.x <= self.side() && s.y <= self.side()
    }

    pub fn is_boundary(&self, s: Site) -> bool {
        let n = self.side();
        s.x == 0 || s.y == 0 || s.x == n || s.y == n
    }

    pub fn center(&self) -> Site {
        Site::new(self.side() / 2, self.side() / 2)
    }

    /// Position of `s` in the lexicographic order of all sites.
    pub fn site_index(&self, s: Site) -> usize {
        s.x * (self.side() + 1) + s.y
    }

    pub fn site_at(&self, index: usize) -> Site {
        let w = self.side() + 1;
        Site::new(index / w, index % w)
    }

    /// Position of an interior site among interior sites, `None` on the boundary.
    pub fn interior_index(&self, s: Site) -> Option<usize> {
        if !self.contains(s) || self.is_boundary(s) {
            return None;
        }
        Some((s.x - 1) * self.interior_side() + (s.y - 1))
    }

    pub fn interior_site(&self, index: usize) -> Site {
        let m = self.interior_side();
        Site::new(index / m + 1, index % m + 1)
    }

    pub fn interior_sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.interior_count()).map(move |i| self.interior_site(i))
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.site_count()).map(move |i| self.site_at(i))
    }
}

/// A lattice site `(x, y)`. The derived order is lexicographic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

impl Site {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// The four nearest neighbours that exist in the nonnegative quadrant.
    pub fn neighbors(&self) -> impl Iterator<Item = Site> {
        let Site { x, y } = *self;
        [
            (x.checked_sub(1), Some(y)),
            (Some(x + 1), Some(y)),
            (Some(x), y.checked_sub(1)),
            (Some(x), Some(y + 1)),
        ]
        .into_iter()
        .filter_map(|(a, b)| Some(Site::new(a?, b?)))
    }
}

/// An axis-aligned rectangle of sites `[x_min, x_max] × [y_min, y_max]`
/// (inclusive). Used as the region of a Dirichlet problem: the rectangle is
/// the set of unknowns, and its discrete boundary is the set of outside sites
/// adjacent to it (corners excluded).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x_min: usize,
    pub x_max: usize,
    pub y_min: usize,
    pub y_max: usize,
}

impl Rect {
    pub fn new(x_min: usize, x_max: usize, y_min: usize, y_max: usize) -> Result<Self> {
        if x_min > x_max || y_min > y_max {
            return Err(Error::NonRectangularRegion(format!(
                "empty rectangle [{x_min},{x_max}]x[{y_min},{y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// Recognize a site set as a full rectangle.
    pub fn from_sites(sites: &[Site]) -> Result<Self> {
        let first = sites
            .first()
            .ok_or_else(|| Error::NonRectangularRegion("empty site set".into()))?;
        let (mut x_min, mut x_max, mut y_min, mut y_max) = (first.x, first.x, first.y, first.y);
        for s in sites {
            x_min = x_min.min(s.x);
            x_max = x_max.max(s.x);
            y_min = y_min.min(s.y);
            y_max = y_max.max(s.y);
        }
        let rect = Self::new(x_min, x_max, y_min, y_max)?;
        let mut seen = vec![false; rect.len()];
        for s in sites {
            let i = rect.index(*s).expect("inside bounding box");
            if seen[i] {
                return Err(Error::NonRectangularRegion(format!(
                    "site ({}, {}) listed twice",
                    s.x, s.y
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|v| !v) {
            return Err(Error::NonRectangularRegion(format!(
                "{} sites do not fill their bounding box [{x_min},{x_max}]x[{y_min},{y_max}]",
                sites.len()
            )));
        }
        Ok(rect)
    }

    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: Site) -> bool {
        (self.x_min..=self.x_max).contains(&s.x) && (self.y_min..=self.y_max).contains(&s.y)
    }

    /// Lexicographic position inside the rectangle.
    pub fn index(&self, s: Site) -> Option<usize> {
        self.contains(s)
            .then(|| (s.x - self.x_min) * self.height() + (s.y - self.y_min))
    }

    pub fn site(&self, index: usize) -> Site {
        Site::new(
            self.x_min + index / self.height(),
            self.y_min + index % self.height(),
        )
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }

    /// Outer boundary, in lexicographic order. Requires `x_min, y_min >= 1`.
    pub fn boundary_sites(&self) -> Vec<Site> {
        let mut out = Vec::with_capacity(2 * (self.width() + self.height()));
        for y in self.y_min..=self.y_max {
            out.push(Site::new(self.x_min - 1, y));
        }
        for x in self.x_min..=self.x_max {
            out.push(Site::new(x, self.y_min - 1));
            out.push(Site::new(x, self.y_max + 1));
        }
        for y in self.y_min..=self.y_max {
            out.push(Site::new(self.x_max + 1, y));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let b = BoxSpec::new(3).unwrap();
        assert_eq!(b.side(), 8);
        assert_eq!(b.interior_count(), 49);
        assert_eq!(b.site_count(), 81);
        assert!(BoxSpec::from_side(12).is_err());
        assert_eq!(BoxSpec::from_side(16).unwrap().level(), 4);
    }

    #[test]
    fn boundary_predicate() {
        let b = BoxSpec::new(2).unwrap();
        let boundary = b.sites().filter(|s| b.is_boundary(*s)).count();
        assert_eq!(boundary, 25 - 9);
        assert!(b.is_boundary(Site::new(4, 2)));
        assert!(!b.is_boundary(Site::new(2, 3)));
    }

    #[test]
    fn index_roundtrip() {
        let b = BoxSpec::new(3).unwrap();
        for (i, s) in b.interior_sites().enumerate() {
            assert_eq!(b.interior_index(s), Some(i));
        }
        for i in 0..b.site_count() {
            assert_eq!(b.site_index(b.site_at(i)), i);
        }
        assert_eq!(b.interior_index(Site::new(0, 3)), None);
    }

    #[test]
    fn rect_recognition() {
        let r = Rect::new(1, 2, 1, 3).unwrap();
        let sites: Vec<_> = r.sites().collect();
        assert_eq!(Rect::from_sites(&sites).unwrap(), r);
        let l_shape = vec![Site::new(1, 1), Site::new(1, 2), Site::new(2, 1)];
        assert!(matches!(
            Rect::from_sites(&l_shape),
            Err(Error::NonRectangularRegion(_))
        ));
        assert_eq!(r.boundary_sites().len(), 2 * (2 + 3));
    }
}
