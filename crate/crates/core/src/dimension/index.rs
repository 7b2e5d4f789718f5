use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Largest ambient dimension supported by [`CellIndex`].
pub const MAX_INDEX_DIM: usize = 8;

pub(crate) type CellKey = [i64; MAX_INDEX_DIM];

/// Uniform bucket grid over a flat point array.
pub(crate) struct CellIndex {
    n: usize,
    side: f64,
    cells: FxHashMap<CellKey, Vec<u32>>,
}

impl CellIndex {
    pub(crate) fn new(n: usize, coords: &[f64], side: f64) -> Result<Self> {
        if n > MAX_INDEX_DIM {
            return Err(Error::UnsupportedDimension {
                max: MAX_INDEX_DIM,
                got: n,
            });
        }
        let mut cells: FxHashMap<CellKey, Vec<u32>> = FxHashMap::default();
        for (i, p) in coords.chunks_exact(n).enumerate() {
            cells.entry(cell_of(p, side)).or_default().push(i as u32);
        }
        Ok(Self { n, side, cells })
    }

    pub(crate) fn key_of(&self, p: &[f64]) -> CellKey {
        cell_of(p, self.side)
    }

    pub(crate) fn occupied(&self) -> impl Iterator<Item = &CellKey> {
        self.cells.keys()
    }

    /// Calls `f` with every point index in cells within `ring` of `key`.
    pub(crate) fn for_each_near(&self, key: &CellKey, ring: i64, mut f: impl FnMut(u32)) {
        for_each_offset(self.n, ring, |off| {
            let mut k = *key;
            for d in 0..self.n {
                k[d] += off[d];
            }
            if let Some(ids) = self.cells.get(&k) {
                ids.iter().copied().for_each(&mut f);
            }
        });
    }
}

impl CellIndex {
    /// Number of points in cells within `ring` of `key`.
    pub(crate) fn count_near(&self, key: &CellKey, ring: i64) -> usize {
        let mut total = 0;
        for_each_offset(self.n, ring, |off| {
            let mut k = *key;
            for d in 0..self.n {
                k[d] += off[d];
            }
            total += self.cells.get(&k).map_or(0, Vec::len);
        });
        total
    }

    /// True if `pred` holds for some point index within `ring` of `key`.
    pub(crate) fn any_near(&self, key: &CellKey, ring: i64, mut pred: impl FnMut(u32) -> bool) -> bool {
        let mut found = false;
        for_each_offset(self.n, ring, |off| {
            if found {
                return;
            }
            let mut k = *key;
            for d in 0..self.n {
                k[d] += off[d];
            }
            if let Some(ids) = self.cells.get(&k) {
                found = ids.iter().any(|&i| pred(i));
            }
        });
        found
    }
}

pub(crate) fn cell_of(p: &[f64], side: f64) -> CellKey {
    let mut k = [0i64; MAX_INDEX_DIM];
    for (kd, x) in k.iter_mut().zip(p) {
        *kd = (x / side).floor() as i64;
    }
    k
}

/// Odometer over `{-ring..=ring}^n`.
pub(crate) fn for_each_offset(n: usize, ring: i64, mut f: impl FnMut(&CellKey)) {
    let mut off = [0i64; MAX_INDEX_DIM];
    off[..n].fill(-ring);
    loop {
        f(&off);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            if off[d] < ring {
                off[d] += 1;
                break;
            }
            off[d] = -ring;
            d += 1;
        }
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_cover_cube() {
        let mut count = 0;
        for_each_offset(3, 1, |_| count += 1);
        assert_eq!(count, 27);
        let mut count = 0;
        for_each_offset(2, 2, |_| count += 1);
        assert_eq!(count, 25);
    }

    #[test]
    fn neighbours_found() {
        let coords = [0.05, 0.05, 0.15, 0.05, 0.95, 0.95];
        let idx = CellIndex::new(2, &coords, 0.1).unwrap();
        let mut seen = Vec::new();
        idx.for_each_near(&idx.key_of(&[0.05, 0.05]), 1, |i| seen.push(i));
        seen.sort();
        assert_eq!(seen, vec![0, 1]);
        assert!(CellIndex::new(9, &[0.0; 9], 0.1).is_err());
    }
}
