//! Phase-shifted DFT multi-resolution codebook and its s-way search tree.
//!
//! Level `m` (1-based) holds `q_m = s^m` codewords. Codeword `i` at level `m`
//! is the normalized sum of the `N / q_m` DFT beams of its grid block, each
//! rotated by `exp(j * omega * k)`:
//!
//! ```text
//! w_i ∝ sum_{k in block(i)} a(theta_k) * exp(j omega k),   theta_k = -1 + (2k - 1) / N
//! ```
//!
//! The phase rotation flattens the gain ripple across the codeword's
//! beamwidth; without it adjacent DFT beams cancel between grid points.

use std::io::Write;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::Serialize;

use crate::array_channel::{inner, norm, steering_vector_unchecked, ArrayConfig};
use crate::error::{Error, Result};

/// Phase shift that flattens in-beam gain for the default 64-element array.
pub const DEFAULT_PHASE_SHIFT: f64 = 2.24;

/// A node of the search tree: level `m` in `1..=M`, index `i` in `1..=s^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeamIndex {
    pub level: usize,
    pub index: usize,
}

impl BeamIndex {
    pub fn new(level: usize, index: usize) -> Self {
        Self { level, index }
    }

    /// The level-`m-1` node whose children contain this one.
    pub fn parent(&self, branching: usize) -> Option<BeamIndex> {
        (self.level > 1).then(|| BeamIndex::new(self.level - 1, (self.index - 1) / branching + 1))
    }
}

/// Sine-angle of DFT grid point `k` (1-based) for an `n`-element array.
pub fn grid_angle(k: usize, n: usize) -> f64 {
    -1.0 + (2 * k - 1) as f64 / n as f64
}

/// Returns `log_s(n)` when `n` is an exact power of `s`.
pub fn exact_log(n: usize, s: usize) -> Option<usize> {
    if s < 2 || n < 1 {
        return None;
    }
    let mut depth = 0;
    let mut rem = n;
    while rem > 1 {
        if !rem.is_multiple_of(s) {
            return None;
        }
        rem /= s;
        depth += 1;
    }
    Some(depth)
}

#[derive(Debug, Clone)]
pub struct MultiResCodebook {
    array: ArrayConfig,
    branching: usize,
    phase_shifts: Vec<f64>,
    /// `levels[m - 1][i - 1]` is codeword `i` at level `m`.
    levels: Vec<Vec<Vec<Complex64>>>,
}

/// Builds the codebook with one phase shift applied at every level.
pub fn build_codebook(array: &ArrayConfig, branching: usize, phase_shift: f64) -> Result<MultiResCodebook> {
    let depth = codebook_depth(array, branching)?;
    build_codebook_per_level(array, branching, &vec![phase_shift; depth])
}

pub fn build_codebook_per_level(
    array: &ArrayConfig,
    branching: usize,
    phase_shifts: &[f64],
) -> Result<MultiResCodebook> {
    array.validate()?;
    let depth = codebook_depth(array, branching)?;
    if phase_shifts.len() != depth {
        return Err(Error::Config(format!(
            "{} phase shifts given for {depth} levels",
            phase_shifts.len()
        )));
    }
    let n = array.num_antennas;
    let beams: Vec<Vec<Complex64>> = (1..=n)
        .map(|k| steering_vector_unchecked(grid_angle(k, n), array))
        .collect();

    let levels = (1..=depth)
        .map(|m| {
            let q = branching.pow(m as u32);
            let block = n / q;
            let omega = phase_shifts[m - 1];
            let prefactor = (q as f64).sqrt() / n as f64;
            (1..=q)
                .map(|i| {
                    let mut w = vec![Complex64::new(0.0, 0.0); n];
                    for k in (i - 1) * block + 1..=i * block {
                        let rot = Complex64::from_polar(prefactor, omega * k as f64);
                        for (wn, an) in w.iter_mut().zip(&beams[k - 1]) {
                            *wn += an * rot;
                        }
                    }
                    let scale = 1.0 / norm(&w);
                    w.iter_mut().for_each(|c| *c *= scale);
                    w
                })
                .collect()
        })
        .collect();

    Ok(MultiResCodebook {
        array: *array,
        branching,
        phase_shifts: phase_shifts.to_vec(),
        levels,
    })
}

fn codebook_depth(array: &ArrayConfig, branching: usize) -> Result<usize> {
    if branching < 2 {
        return Err(Error::Config(format!(
            "branching factor must be >= 2, got {branching}"
        )));
    }
    match exact_log(array.num_antennas, branching) {
        Some(d) if d >= 1 => Ok(d),
        _ => Err(Error::Config(format!(
            "{} antennas is not a power of branching factor {branching}",
            array.num_antennas
        ))),
    }
}

impl MultiResCodebook {
    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    /// Number of levels `M = log_s N`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn phase_shifts(&self) -> &[f64] {
        &self.phase_shifts
    }

    /// Number of codewords `q_m` at `level`.
    pub fn level_size(&self, level: usize) -> usize {
        self.branching.pow(level as u32)
    }

    pub fn level(&self, level: usize) -> Result<&[Vec<Complex64>]> {
        self.check_level(level)?;
        Ok(&self.levels[level - 1])
    }

    pub fn codeword(&self, idx: BeamIndex) -> Result<&[Complex64]> {
        self.check_index(idx)?;
        Ok(&self.levels[idx.level - 1][idx.index - 1])
    }

    pub(crate) fn codeword_unchecked(&self, idx: BeamIndex) -> &[Complex64] {
        &self.levels[idx.level - 1][idx.index - 1]
    }

    /// Grid points `k` (1-based) covered by a node.
    pub fn block(&self, idx: BeamIndex) -> Result<RangeInclusive<usize>> {
        self.check_index(idx)?;
        let width = self.array.num_antennas / self.level_size(idx.level);
        Ok((idx.index - 1) * width + 1..=idx.index * width)
    }

    /// The `s` level-1 nodes that start every search.
    pub fn roots(&self) -> Vec<BeamIndex> {
        (1..=self.branching).map(|i| BeamIndex::new(1, i)).collect()
    }

    pub fn children(&self, idx: BeamIndex) -> Result<Vec<BeamIndex>> {
        self.check_index(idx)?;
        if idx.level == self.depth() {
            return Err(Error::OutOfRange(format!(
                "level {} is the finest level and has no children",
                idx.level
            )));
        }
        Ok(children_unchecked(idx, self.branching))
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level == 0 || level > self.depth() {
            return Err(Error::OutOfRange(format!(
                "level {level} not in 1..={}",
                self.depth()
            )));
        }
        Ok(())
    }

    fn check_index(&self, idx: BeamIndex) -> Result<()> {
        self.check_level(idx.level)?;
        if idx.index == 0 || idx.index > self.level_size(idx.level) {
            return Err(Error::OutOfRange(format!(
                "index {} not in 1..={} at level {}",
                idx.index,
                self.level_size(idx.level),
                idx.level
            )));
        }
        Ok(())
    }

    /// `|a(theta)^H w|^2` for one codeword.
    pub fn pattern_gain(&self, theta: f64, idx: BeamIndex) -> Result<f64> {
        let a = crate::array_channel::steering_vector(theta, &self.array)?;
        Ok(inner(&a, self.codeword(idx)?).norm_sqr())
    }

    /// Writes `level,index,antenna_element,real,imag` rows for every codeword.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            level: usize,
            index: usize,
            antenna_element: usize,
            real: f64,
            imag: f64,
        }
        let mut out = csv::Writer::from_writer(writer);
        for (m, level) in self.levels.iter().enumerate() {
            for (i, w) in level.iter().enumerate() {
                for (k, c) in w.iter().enumerate() {
                    out.serialize(Row {
                        level: m + 1,
                        index: i + 1,
                        antenna_element: k,
                        real: c.re,
                        imag: c.im,
                    })?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn children_unchecked(idx: BeamIndex, branching: usize) -> Vec<BeamIndex> {
    let first = (idx.index - 1) * branching + 1;
    (first..first + branching)
        .map(|i| BeamIndex::new(idx.level + 1, i))
        .collect()
}

/// Noiseless best codeword at `level` for direction `theta`; ties go to the
/// smallest index.
pub fn best_beam_oracle(theta: f64, level: usize, book: &MultiResCodebook) -> Result<BeamIndex> {
    let a = crate::array_channel::steering_vector(theta, book.array())?;
    let words = book.level(level)?;
    let gains: Vec<f64> = words.iter().map(|w| inner(&a, w).norm_sqr()).collect();
    Ok(BeamIndex::new(level, argmax_first(&gains) + 1))
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_channel::steering_vector;

    fn default_book(omega: f64) -> MultiResCodebook {
        build_codebook(&ArrayConfig::default(), 4, omega).unwrap()
    }

    #[test]
    fn level_sizes_for_default_array() {
        let book = default_book(DEFAULT_PHASE_SHIFT);
        assert_eq!(book.depth(), 3);
        let sizes: Vec<_> = (1..=3).map(|m| book.level(m).unwrap().len()).collect();
        assert_eq!(sizes, vec![4, 16, 64]);
    }

    #[test]
    fn every_codeword_is_unit_norm() {
        for omega in [0.0, DEFAULT_PHASE_SHIFT, 1.0] {
            let book = default_book(omega);
            for m in 1..=book.depth() {
                for w in book.level(m).unwrap() {
                    assert!((norm(w) - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn finest_level_is_rotated_dft_beam() {
        let book = default_book(DEFAULT_PHASE_SHIFT);
        for i in [1, 17, 64] {
            let a = steering_vector(grid_angle(i, 64), book.array()).unwrap();
            let w = book.codeword(BeamIndex::new(3, i)).unwrap();
            let rot = Complex64::from_polar(1.0 / 8.0, DEFAULT_PHASE_SHIFT * i as f64);
            for (wn, an) in w.iter().zip(&a) {
                assert!((wn - an * rot).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn not_a_power_is_rejected() {
        let cfg = ArrayConfig::new(48, 0.5).unwrap();
        assert!(matches!(build_codebook(&cfg, 4, 0.0), Err(Error::Config(_))));
        assert!(build_codebook(&ArrayConfig::default(), 1, 0.0).is_err());
        assert!(build_codebook(&ArrayConfig::default(), 8, 0.0).is_ok());
    }

    #[test]
    fn children_arithmetic() {
        let book = default_book(0.0);
        let c = book.children(BeamIndex::new(1, 1)).unwrap();
        assert_eq!(c.iter().map(|b| b.index).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        assert!(c.iter().all(|b| b.level == 2));
        let c = book.children(BeamIndex::new(2, 3)).unwrap();
        assert_eq!(c.iter().map(|b| b.index).collect::<Vec<_>>(), vec![9, 10, 11, 12]);
        assert!(matches!(
            book.children(BeamIndex::new(3, 1)),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn children_tile_parent_block() {
        let book = default_book(0.0);
        for m in 1..book.depth() {
            for i in 1..=book.level_size(m) {
                let parent = BeamIndex::new(m, i);
                let covered: Vec<usize> = book
                    .children(parent)
                    .unwrap()
                    .into_iter()
                    .flat_map(|c| book.block(c).unwrap())
                    .collect();
                assert_eq!(covered, book.block(parent).unwrap().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn every_node_has_exactly_one_parent() {
        let book = default_book(0.0);
        for m in 2..=book.depth() {
            for i in 1..=book.level_size(m) {
                let idx = BeamIndex::new(m, i);
                let owners: Vec<_> = (1..=book.level_size(m - 1))
                    .filter(|&p| book.children(BeamIndex::new(m - 1, p)).unwrap().contains(&idx))
                    .collect();
                assert_eq!(owners.len(), 1);
                assert_eq!(idx.parent(4).unwrap().index, owners[0]);
            }
        }
    }

    #[test]
    fn oracle_at_grid_points() {
        let book = default_book(DEFAULT_PHASE_SHIFT);
        for k in 1..=64 {
            let idx = best_beam_oracle(grid_angle(k, 64), 3, &book).unwrap();
            assert_eq!(idx, BeamIndex::new(3, k));
        }
    }

    #[test]
    fn oracle_breaks_ties_toward_smallest_index() {
        // Midway between grid points 1 and 2 the two DFT beams tie exactly.
        let book = default_book(0.0);
        let theta = (grid_angle(1, 64) + grid_angle(2, 64)) / 2.0;
        let g1 = book.pattern_gain(theta, BeamIndex::new(3, 1)).unwrap();
        let g2 = book.pattern_gain(theta, BeamIndex::new(3, 2)).unwrap();
        assert!((g1 - g2).abs() < 1e-9 * g1);
        let idx = best_beam_oracle(theta, 3, &book).unwrap();
        assert!(idx.index <= 2);
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn csv_export_has_one_row_per_element() {
        let book = build_codebook(&ArrayConfig::new(16, 0.5).unwrap(), 4, 0.0).unwrap();
        let mut buf = Vec::new();
        book.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "level,index,antenna_element,real,imag");
        assert_eq!(lines.count(), (4 + 16) * 16);
    }
}
