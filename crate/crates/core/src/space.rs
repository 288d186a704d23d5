//! Finite dissimilarity spaces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// A finite space `(X, d)` given by its full `n × n` distance matrix.
///
/// The container guarantees symmetry and nonnegativity. A zero diagonal is
/// deliberately *not* enforced: reflexivity is one of the checked axioms, so
/// transformed spaces such as `f ∘ d` with `f(0) > 0` stay representable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dissimilarity {
    n: usize,
    entries: Vec<Rational>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("a space needs at least one point")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("asymmetric entries: d[{i}][{j}] = {d_ij} but d[{j}][{i}] = {d_ji}")]
    Asymmetric {
        i: usize,
        j: usize,
        d_ij: Rational,
        d_ji: Rational,
    },
    #[error("negative entry d[{i}][{j}] = {value}")]
    Negative { i: usize, j: usize, value: Rational },
    #[error("{got} labels given for {n} points")]
    LabelCount { got: usize, n: usize },
    #[error("index {index} out of range for a space with {n} points")]
    Index { index: usize, n: usize },
}

impl Dissimilarity {
    /// Builds a space from full matrix rows, validating shape, symmetry and
    /// sign. The first offending index pair in row-major order is reported.
    #[allow(clippy::needless_range_loop)]
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, SpaceError> {
        let n = rows.len();
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(SpaceError::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if rows[i][j].is_negative() {
                    return Err(SpaceError::Negative {
                        i,
                        j,
                        value: rows[i][j].clone(),
                    });
                }
                if j > i && rows[i][j] != rows[j][i] {
                    return Err(SpaceError::Asymmetric {
                        i,
                        j,
                        d_ij: rows[i][j].clone(),
                        d_ji: rows[j][i].clone(),
                    });
                }
            }
        }
        Ok(Dissimilarity {
            n,
            entries: rows.into_iter().flatten().collect(),
            labels: None,
        })
    }

    /// Builds a space from a symmetric rule; `dist(i, j)` is only called for
    /// `i <= j`.
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> Rational) -> Result<Self, SpaceError> {
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = dist(i, j);
                if v.is_negative() {
                    return Err(SpaceError::Negative { i, j, value: v });
                }
                entries[j * n + i] = v.clone();
                entries[i * n + j] = v;
            }
        }
        Ok(Dissimilarity { n, entries, labels: None })
    }

    /// Three points with zero diagonal and sides `d(0,1)`, `d(0,2)`, `d(1,2)`.
    pub fn triangle(d01: Rational, d02: Rational, d12: Rational) -> Result<Self, SpaceError> {
        Dissimilarity::from_rows(vec![
            vec![Rational::zero(), d01.clone(), d02.clone()],
            vec![d01, Rational::zero(), d12.clone()],
            vec![d02, d12, Rational::zero()],
        ])
    }

    /// Two points at distance `t`.
    pub fn pair(t: Rational) -> Result<Self, SpaceError> {
        Dissimilarity::from_rows(vec![vec![Rational::zero(), t.clone()], vec![t, Rational::zero()]])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, SpaceError> {
        if labels.len() != self.n {
            return Err(SpaceError::LabelCount {
                got: labels.len(),
                n: self.n,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<(), SpaceError> {
        if index < self.n {
            Ok(())
        } else {
            Err(SpaceError::Index { index, n: self.n })
        }
    }

    /// Entrywise image under `f`. Symmetry is inherited; nonnegativity is
    /// the caller's promise and is rechecked.
    pub fn map<E>(&self, mut f: impl FnMut(&Rational) -> Result<Rational, E>) -> Result<Result<Self, SpaceError>, E> {
        let mut cache: Vec<(Rational, Rational)> = Vec::new();
        let mut entries = Vec::with_capacity(self.entries.len());
        for v in &self.entries {
            let image = match cache.iter().find(|(k, _)| k == v) {
                Some((_, image)) => image.clone(),
                None => {
                    let image = f(v)?;
                    cache.push((v.clone(), image.clone()));
                    image
                }
            };
            entries.push(image);
        }
        if let Some(pos) = entries.iter().position(Rational::is_negative) {
            return Ok(Err(SpaceError::Negative {
                i: pos / self.n,
                j: pos % self.n,
                value: entries[pos].clone(),
            }));
        }
        Ok(Ok(Dissimilarity {
            n: self.n,
            entries,
            labels: self.labels.clone(),
        }))
    }

    /// Sorted distinct off-diagonal values.
    pub fn off_diagonal_values(&self) -> Vec<Rational> {
        let mut values: Vec<Rational> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        values.sort();
        values.dedup();
        values
    }

    /// Sorted distinct strictly positive off-diagonal values.
    pub fn positive_values(&self) -> Vec<Rational> {
        self.off_diagonal_values().into_iter().filter(Rational::is_positive).collect()
    }
}

impl fmt::Debug for Dissimilarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.chunks(self.n)).finish()
    }
}

impl Serialize for Dissimilarity {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        crate::format::MatrixFile::from_space(self, None).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dissimilarity {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Plain {
            d: Vec<Vec<Rational>>,
            #[serde(default)]
            labels: Option<Vec<String>>,
        }
        let plain = Plain::deserialize(deserializer)?;
        let space = Dissimilarity::from_rows(plain.d).map_err(serde::de::Error::custom)?;
        match plain.labels {
            Some(l) => space.with_labels(l).map_err(serde::de::Error::custom),
            None => Ok(space),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn rejects_asymmetric_with_indices() {
        let err = Dissimilarity::from_rows(vec![vec![q(0), q(1)], vec![q(2), q(0)]]).unwrap_err();
        assert_eq!(
            err,
            SpaceError::Asymmetric {
                i: 0,
                j: 1,
                d_ij: q(1),
                d_ji: q(2)
            }
        );
    }

    #[test]
    fn rejects_negative_and_ragged() {
        let err = Dissimilarity::from_rows(vec![vec![q(0), q(-1)], vec![q(-1), q(0)]]).unwrap_err();
        assert!(matches!(err, SpaceError::Negative { i: 0, j: 1, .. }));
        let err = Dissimilarity::from_rows(vec![vec![q(0), q(1)], vec![q(1)]]).unwrap_err();
        assert!(matches!(err, SpaceError::NotSquare { row: 1, .. }));
        assert_eq!(Dissimilarity::from_rows(vec![]).unwrap_err(), SpaceError::Empty);
    }

    #[test]
    fn nonzero_diagonal_is_representable() {
        let d = Dissimilarity::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(1)]]).unwrap();
        assert_eq!(d.get(0, 0), &q(1));
    }

    #[test]
    fn triangle_layout() {
        let d = Dissimilarity::triangle(q(3), q(4), q(5)).unwrap();
        assert_eq!(d.get(0, 1), &q(3));
        assert_eq!(d.get(2, 0), &q(4));
        assert_eq!(d.get(1, 2), &q(5));
        assert_eq!(d.off_diagonal_values(), vec![q(3), q(4), q(5)]);
    }
}
