//! Uniform-grid spatial hashing for fixed-radius neighbor queries.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{Particle, Vector};

/// Bucket grid with cells of edge `cell_size`; a query with radius up to
/// `cell_size` only needs the surrounding `3^D` cells.
#[derive(Debug, Clone)]
pub struct NeighborGrid<const D: usize> {
    cell_size: f64,
    cells: HashMap<[i64; D], Vec<usize>>,
    len: usize,
    #[cfg(debug_assertions)]
    fingerprint: u64,
}

impl<const D: usize> NeighborGrid<D> {
    pub fn build(points: &[Vector<D>], cell_size: f64) -> Self {
        assert!(
            cell_size > 0.0 && cell_size.is_finite(),
            "cell size must be positive, got {cell_size}"
        );
        let mut cells: HashMap<[i64; D], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_index(p, cell_size)).or_default().push(i);
        }
        Self {
            cell_size,
            cells,
            len: points.len(),
            #[cfg(debug_assertions)]
            fingerprint: fingerprint(points.iter()),
        }
    }

    pub fn from_particles(particles: &[Particle<D>], cell_size: f64) -> Self {
        let points: Vec<Vector<D>> = particles.iter().map(|p| p.pos).collect();
        Self::build(&points, cell_size)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, p: &Vector<D>) -> [i64; D] {
        cell_index(p, self.cell_size)
    }

    /// Point ids stored in the cell `key`.
    pub fn cell(&self, key: &[i64; D]) -> &[usize] {
        self.cells.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Ids in the `3^D` block of cells around `p`, unsorted.
    pub fn candidates(&self, p: &Vector<D>) -> impl Iterator<Item = usize> + '_ {
        let center = self.cell_of(p);
        (0..3usize.pow(D as u32)).flat_map(move |code| {
            let mut key = center;
            let mut c = code;
            for k in key.iter_mut() {
                *k += (c % 3) as i64 - 1;
                c /= 3;
            }
            self.cell(&key).iter().copied()
        })
    }

    /// Sorted ids `j` with `|pos(j) - p| < radius`, for `radius <= cell_size`.
    pub fn query<F>(&self, p: &Vector<D>, radius: f64, pos: F) -> Vec<usize>
    where
        F: Fn(usize) -> Vector<D>,
    {
        debug_assert!(radius <= self.cell_size * (1.0 + 1e-12));
        let r2 = radius * radius;
        let mut out: Vec<usize> = self
            .candidates(p)
            .filter(|&j| (pos(j) - p).norm_squared() < r2)
            .collect();
        out.sort_unstable();
        out
    }

    /// Neighbors of particle `i` strictly within `cell_size`, ascending id.
    pub fn find_neighbors(&self, particles: &[Particle<D>], i: usize) -> Vec<usize> {
        self.debug_check_fresh(particles);
        self.neighbors_unchecked(particles, i)
    }

    fn neighbors_unchecked(&self, particles: &[Particle<D>], i: usize) -> Vec<usize> {
        let pi = particles[i].pos;
        let r2 = self.cell_size * self.cell_size;
        let mut out: Vec<usize> = self
            .candidates(&pi)
            .filter(|&j| j != i && (particles[j].pos - pi).norm_squared() < r2)
            .collect();
        out.sort_unstable();
        out
    }

    /// Panics in debug builds if `particles` moved since the grid was built.
    pub fn debug_check_fresh(&self, particles: &[Particle<D>]) {
        #[cfg(debug_assertions)]
        {
            assert_eq!(particles.len(), self.len, "neighbor grid is stale: particle count changed");
            assert_eq!(
                fingerprint(particles.iter().map(|p| &p.pos)),
                self.fingerprint,
                "neighbor grid is stale: positions changed since rebuild"
            );
        }
        #[cfg(not(debug_assertions))]
        let _ = particles;
    }
}

fn cell_index<const D: usize>(p: &Vector<D>, cell_size: f64) -> [i64; D] {
    let mut key = [0i64; D];
    for (k, x) in key.iter_mut().zip(p.iter()) {
        *k = (x / cell_size).floor() as i64;
    }
    key
}

#[cfg(debug_assertions)]
pub(crate) fn fingerprint<'a, const D: usize>(points: impl Iterator<Item = &'a Vector<D>>) -> u64 {
    use std::hash::{DefaultHasher, Hash, Hasher};
    let mut h = DefaultHasher::new();
    for p in points {
        for x in p.iter() {
            x.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Compressed neighbor lists for every particle, built from a fresh grid.
#[derive(Debug, Clone, Default)]
pub struct NeighborLists {
    offsets: Vec<usize>,
    indices: Vec<usize>,
}

impl NeighborLists {
    pub fn build<const D: usize>(grid: &NeighborGrid<D>, particles: &[Particle<D>]) -> Self {
        grid.debug_check_fresh(particles);
        let lists: Vec<Vec<usize>> = (0..particles.len())
            .into_par_iter()
            .map(|i| grid.neighbors_unchecked(particles, i))
            .collect();
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut indices = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            indices.extend_from_slice(&l);
            offsets.push(indices.len());
        }
        Self { offsets, indices }
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn particles(points: &[Vector2<f64>]) -> Vec<Particle<2>> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| Particle::fluid(i, *p, 1.0, 1000.0))
            .collect()
    }

    #[test]
    fn single_particle_has_no_neighbors() {
        let ps = particles(&[Vector2::new(0.3, 0.4)]);
        let g = NeighborGrid::from_particles(&ps, 0.1);
        assert!(g.find_neighbors(&ps, 0).is_empty());
    }

    #[test]
    fn distance_equal_to_radius_is_excluded() {
        let ps = particles(&[Vector2::new(0.0, 0.0), Vector2::new(0.25, 0.0)]);
        let g = NeighborGrid::from_particles(&ps, 0.25);
        assert!(g.find_neighbors(&ps, 0).is_empty());
        assert!(g.find_neighbors(&ps, 1).is_empty());
    }

    #[test]
    fn negative_coordinates_are_bucketed() {
        let ps = particles(&[Vector2::new(-0.01, -0.01), Vector2::new(0.01, 0.01)]);
        let g = NeighborGrid::from_particles(&ps, 0.1);
        assert_eq!(g.find_neighbors(&ps, 0), vec![1]);
        assert_eq!(g.cell_count(), 2);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let pts: Vec<Vector2<f64>> = (0..200)
                .map(|_| Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let ps = particles(&pts);
            let radius = 0.17;
            let g = NeighborGrid::from_particles(&ps, radius);
            let lists = NeighborLists::build(&g, &ps);
            for i in 0..ps.len() {
                let brute: Vec<usize> = (0..ps.len())
                    .filter(|&j| j != i && (pts[j] - pts[i]).norm() < radius)
                    .collect();
                assert_eq!(g.find_neighbors(&ps, i), brute);
                assert_eq!(lists.neighbors(i), brute.as_slice());
            }
        }
    }

    #[test]
    fn every_point_in_exactly_one_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vector2<f64>> = (0..300)
            .map(|_| Vector2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        let g = NeighborGrid::build(&pts, 0.07);
        let mut seen = vec![0; pts.len()];
        for v in g.cells.values() {
            for &i in v {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "stale")]
    fn stale_grid_is_detected() {
        let mut ps = particles(&[Vector2::new(0.0, 0.0), Vector2::new(0.05, 0.0)]);
        let g = NeighborGrid::from_particles(&ps, 0.1);
        ps[1].pos.x += 0.01;
        let _ = g.find_neighbors(&ps, 0);
    }
}
