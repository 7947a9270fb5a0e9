//! Reproducible rejection sampling of points in boxes of the complex plane.

use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The fixed generator behind every seeded draw.
pub type Rng = SplitMix64;

pub fn rng(seed: u64) -> Rng {
    SplitMix64::seed_from_u64(seed)
}

/// Axis-aligned box `[re.0, re.1] x [im.0, im.1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Region {
    pub const fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    pub const fn square(half: f64) -> Self {
        Self { re: (-half, half), im: (-half, half) }
    }

    pub fn is_empty(&self) -> bool {
        !(self.re.0 <= self.re.1 && self.im.0 <= self.im.1)
    }

    pub fn contains(&self, z: C64) -> bool {
        (self.re.0..=self.re.1).contains(&z.re) && (self.im.0..=self.im.1).contains(&z.im)
    }

    pub fn draw(&self, rng: &mut Rng) -> C64 {
        C64::new(uniform(rng, self.re), uniform(rng, self.im))
    }
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Draws per requested point before giving up.
pub const DRAWS_PER_POINT: usize = 1000;

/// Draw `count` points from `region`, each at least `min_sep` from every
/// exclusion and from each other, continuing the given generator.
pub fn sample_points_with(
    rng: &mut Rng,
    region: &Region,
    count: usize,
    exclusions: &[C64],
    min_sep: f64,
) -> Result<Vec<C64>> {
    if region.is_empty() {
        return Err(Error::InvalidArgument("empty sampling region".into()));
    }
    let budget = DRAWS_PER_POINT * (count + 1);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        if draws == budget {
            return Err(Error::Exhausted { draws, context: format!("{} of {count} points placed", out.len()) });
        }
        draws += 1;
        let z = region.draw(rng);
        if exclusions.iter().chain(out.iter()).all(|e| (z - e).norm() >= min_sep) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Seeded entry point of [`sample_points_with`].
pub fn sample_points(region: &Region, count: usize, seed: u64, exclusions: &[C64], min_sep: f64) -> Result<Vec<C64>> {
    sample_points_with(&mut rng(seed), region, count, exclusions, min_sep)
}

/// Seed of the `k`-th independent stream derived from a master seed.
pub fn substream(seed: u64, k: u64) -> u64 {
    let mut r = rng(seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rand::Rng::next_u64(&mut r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_deterministic() {
        let r = Region::square(2.0);
        assert!(sample_points(&r, 0, 1, &[], 0.1).unwrap().is_empty());
        let a = sample_points(&r, 20, 7, &[], 0.1).unwrap();
        let b = sample_points(&r, 20, 7, &[], 0.1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_points(&r, 20, 8, &[], 0.1).unwrap());
    }

    #[test]
    fn exclusions_respected() {
        let ex = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let pts = sample_points(&Region::square(2.0), 100, 3, &ex, 0.05).unwrap();
        for (i, p) in pts.iter().enumerate() {
            assert!(ex.iter().all(|e| (p - e).norm() >= 0.05));
            assert!(pts[..i].iter().all(|q| (p - q).norm() >= 0.05));
        }
    }

    #[test]
    fn exhaustion_reported() {
        let r = Region::square(0.1);
        let err = sample_points(&r, 5, 1, &[C64::new(0.0, 0.0)], 1.0);
        assert!(matches!(err, Err(Error::Exhausted { .. })));
    }
}
